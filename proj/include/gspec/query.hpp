#pragma once

// Query documents and the routing from (operator, question) to the membership rules. The CLI
// is a thin shell around these functions, so they are also what the tests drive.
//
// A document looks like
//   {"algebra": "continuous(256)", "operator": "S", "element": "0.5", "question": "full",
//    "config": {"eq_tol": 1e-9, "N": 48, "ladder": [16, 32, 64], "cross_check": true}}

#include <optional>

#include "gspec/literals.hpp"

namespace gspec {

struct QueryConfig {
    ToleranceConfig tol;
    int depth = kDefaultDepth;
    std::vector<int> ladder = {16, 32, 64};
    /// Attach an independent oracle report to closed-form verdicts.
    bool cross_check = false;
    /// Coordinate used by index-dependent rules (weighted shift column, resolvent target).
    std::int64_t index = 1;
    std::uint64_t seed = 1;
};

struct QueryDocument {
    AlgebraKind kind = AlgebraKind::continuous(256);
    OperatorExpr op = OperatorExpr::unilateral_shift();
    AlgebraElement element = constant(AlgebraKind::continuous(256), 0.0);
    /// Optional second element and vectors, used by the two-point and transfer checks.
    std::optional<AlgebraElement> second;
    std::optional<ModuleVector> vector;
    std::optional<ModuleVector> second_vector;
    std::string question = "full";
    QueryConfig config;
    json source;
};

/// Reads a document. Tolerances in its "config" override `base`; everything malformed raises
/// ConfigError, and bad expressions raise ParseError.
QueryDocument parse_query(const json& j, const ToleranceConfig& base = {});

/// Applies the tolerance and truncation fields of a config object on top of `cfg`.
QueryConfig apply_config(const json& j, QueryConfig cfg);

/// Questions understood by run_check.
const std::vector<std::string>& check_questions();

struct Outcome {
    json report;
    int exit_code = 0;
};

/// Exit codes: 0 Out, 1 In, 2 BoundaryIndeterminate, 3 Inconclusive. Boolean checks exit 0 when
/// the property holds and 5 when it fails.
int exit_code_for(Membership m) noexcept;
inline constexpr int kCheckFailedExit = 5;
inline constexpr int kSuiteFailedExit = 4;
/// 10 ParseError, 11 ConfigError, 12 UnknownSuite, 13 NotApplicable, 14 WitnessCheckFailed,
/// 20 + the code's ordinal for the rest.
int exit_code_for(ErrorCode code) noexcept;

json error_to_json(const Error& e);

Outcome run_check(const QueryDocument& doc);
/// Witness for the document's question: "kernel", "cokernel", "resolvent", or "auto" (kernel
/// first, then whatever certificate the full-spectrum rule carries). NotApplicable otherwise.
Outcome run_witness(const QueryDocument& doc);
/// depth, section minimum of op - a, the same for the adjoint, and the square section minimum.
std::string oracle_dump_csv(const QueryDocument& doc);

} // namespace gspec
