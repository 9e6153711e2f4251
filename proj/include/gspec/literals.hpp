#pragma once

// JSON literals for kinds, elements, vectors, operators and results. Every *_to_json output
// parses back to an equal value with the matching *_from_json.
//
// Elements accept an expression string ("t + 1/2", "exp(2*pi*i*t)"), a plain number, or an
// object carrying exactly one of
//   {"expr": "..."}   {"constant": z}   {"values": [z, ...]}   {"matrix": [[z, ...], ...]}   (rows)
// where z is a number or a [re, im] pair, optionally tagged with the kind fields
// ("kind", "resolution", "n"). "values" is the raw storage, i.e. grid values for functions and
// column-major entries for matrices.

#include <json.hpp>

#include "gspec/spectra.hpp"

namespace gspec {

using json = nlohmann::json;

/// "continuous(256)", "continuous(256,4)", "step(64)", "matrix(2)", "scalar", or an object
/// {"kind": "step", "resolution": 64, "refinement": 4} / {"kind": "matrix", "n": 2}.
AlgebraKind kind_from_json(const json& j);
json kind_to_json(const AlgebraKind& kind);

json complex_to_json(cd z);
cd complex_from_json(const json& j);

AlgebraElement element_from_json(const json& j, const AlgebraKind& kind);
json element_to_json(const AlgebraElement& a);

/// {"indexing": {"type": "natural"|"integers", "n": N}, "entries": [el, ...]} in index order;
/// a sparse "coordinates": [{"index": k, "value": el}, ...] list is accepted too.
ModuleVector vector_from_json(const json& j, const AlgebraKind& kind);
json vector_to_json(const ModuleVector& x);

/// Short names ("S", "S*", "V", "W'", "W''", "Z", "Z'", "F", "D", "block-shift") or the
/// constructor tree {"node": "sum", "args": [op, op]}, {"node": "scalar_mult", "args": [el]}.
OperatorExpr operator_from_json(const json& j, const AlgebraKind& kind);
json operator_to_json(const OperatorExpr& op);

/// Overrides the fields present in j.
ToleranceConfig tolerances_from_json(const json& j, ToleranceConfig base);
json tolerances_to_json(const ToleranceConfig& tol);

json growth_to_json(const GrowthDiagnostic& d);
json oracle_to_json(const OracleReport& r);
json certificate_to_json(const Certificate& c);
json verdict_to_json(const SpectrumVerdict& v);

} // namespace gspec
