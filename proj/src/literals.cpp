#include "gspec/literals.hpp"

#include <cmath>
#include <regex>

#include "gspec/expression.hpp"

namespace gspec {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key))
        bad(std::string("missing field \"") + key + "\" in " + j.dump());
    return j.at(key);
}

int int_field(const json& j, const char* key, int fallback) {
    if (!j.contains(key))
        return fallback;
    if (!j.at(key).is_number_integer())
        bad(std::string("field \"") + key + "\" must be an integer");
    return j.at(key).get<int>();
}

std::vector<AlgebraElement> element_list(const json& j, const AlgebraKind& kind) {
    if (!j.is_array() || j.empty())
        bad("expected a nonempty list of elements, got " + j.dump());
    std::vector<AlgebraElement> out;
    for (const json& e : j)
        out.push_back(element_from_json(e, kind));
    return out;
}

// Fields left out of an element's kind tag default to the surrounding kind.
bool kind_fits(const json& j, const AlgebraKind& kind) {
    const json& tag = j.at("kind");
    if (!tag.is_string())
        return false;
    const std::string t = tag.get<std::string>();
    switch (kind.tag()) {
    case KindTag::Continuous:
    case KindTag::Step:
        return t == (kind.tag() == KindTag::Continuous ? "continuous" : "step") &&
               int_field(j, "resolution", kind.grid().resolution) == kind.grid().resolution &&
               int_field(j, "refinement", kind.grid().refinement_factor) == kind.grid().refinement_factor;
    case KindTag::Matrix: return t == "matrix" && int_field(j, "n", kind.n()) == kind.n();
    }
    return false;
}

} // namespace

AlgebraKind kind_from_json(const json& j) {
    try {
        if (j.is_string()) {
            const std::string s = j.get<std::string>();
            if (s == "scalar")
                return AlgebraKind::matrix(1);
            static const std::regex form(R"(\s*(continuous|step|matrix)\s*\(\s*(\d+)\s*(?:,\s*(\d+)\s*)?\)\s*)");
            std::smatch m;
            if (!std::regex_match(s, m, form))
                bad("unknown algebra \"" + s + "\"");
            const int first = std::stoi(m[2]);
            const int refine = m[3].matched ? std::stoi(m[3]) : 4;
            if (m[1] == "continuous")
                return AlgebraKind::continuous(first, refine);
            if (m[1] == "step")
                return AlgebraKind::step(first, refine);
            if (m[3].matched)
                bad("matrix algebras take a single size");
            return AlgebraKind::matrix(first);
        }
        const std::string tag = field(j, "kind").get<std::string>();
        if (tag == "continuous")
            return AlgebraKind::continuous(int_field(j, "resolution", 256), int_field(j, "refinement", 4));
        if (tag == "step")
            return AlgebraKind::step(int_field(j, "resolution", 256), int_field(j, "refinement", 4));
        if (tag == "matrix")
            return AlgebraKind::matrix(int_field(j, "n", 1));
        bad("unknown algebra kind \"" + tag + "\"");
    } catch (const json::exception& e) {
        bad(std::string("malformed algebra: ") + e.what());
    }
}

json kind_to_json(const AlgebraKind& kind) {
    switch (kind.tag()) {
    case KindTag::Continuous:
        return {{"kind", "continuous"}, {"resolution", kind.grid().resolution}, {"refinement", kind.grid().refinement_factor}};
    case KindTag::Step:
        return {{"kind", "step"}, {"resolution", kind.grid().resolution}, {"refinement", kind.grid().refinement_factor}};
    case KindTag::Matrix: return {{"kind", "matrix"}, {"n", kind.n()}};
    }
    return nullptr;
}

json complex_to_json(cd z) {
    if (z.imag() == 0.0)
        return z.real();
    return json::array({z.real(), z.imag()});
}

cd complex_from_json(const json& j) {
    if (j.is_number())
        return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    bad("expected a number or [re, im], got " + j.dump());
}

AlgebraElement element_from_json(const json& j, const AlgebraKind& kind) {
    if (j.is_string())
        return parse_expression(j.get<std::string>(), kind);
    if (j.is_number())
        return constant(kind, complex_from_json(j));
    if (!j.is_object())
        bad("cannot read an element from " + j.dump());
    if (j.contains("kind") && !kind_fits(j, kind))
        bad("element literal " + j.dump() + " does not fit " + kind.name());
    const int forms = static_cast<int>(j.contains("expr")) + static_cast<int>(j.contains("values")) +
                      static_cast<int>(j.contains("matrix")) + static_cast<int>(j.contains("constant"));
    if (forms != 1)
        bad("an element literal needs exactly one of expr, values, matrix, constant");
    if (j.contains("constant"))
        return constant(kind, complex_from_json(j.at("constant")));
    if (j.contains("expr")) {
        if (!j.at("expr").is_string())
            bad("\"expr\" must be a string");
        return parse_expression(j.at("expr").get<std::string>(), kind);
    }
    if (j.contains("values")) {
        const json& vals = j.at("values");
        if (!vals.is_array() || static_cast<int>(vals.size()) != kind.storage_size())
            bad("\"values\" must hold " + std::to_string(kind.storage_size()) + " numbers for " + kind.name());
        std::vector<cd> data;
        for (const json& z : vals)
            data.push_back(complex_from_json(z));
        return AlgebraElement(kind, std::move(data));
    }
    const json& rows = j.at("matrix");
    if (kind.tag() != KindTag::Matrix || !rows.is_array() || static_cast<int>(rows.size()) != kind.n())
        bad("matrix literal does not fit " + kind.name());
    const int n = kind.n();
    Eigen::MatrixXcd m(n, n);
    for (int r = 0; r < n; ++r) {
        const json& row = rows[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<int>(row.size()) != n)
            bad("matrix literal rows must have " + std::to_string(n) + " entries");
        for (int c = 0; c < n; ++c)
            m(r, c) = complex_from_json(row[static_cast<std::size_t>(c)]);
    }
    return make_matrix(m);
}

json element_to_json(const AlgebraElement& a) {
    json j = kind_to_json(a.kind());
    if (!a.kind().is_function()) {
        const Eigen::MatrixXcd m = a.matrix();
        json rows = json::array();
        for (int r = 0; r < m.rows(); ++r) {
            json row = json::array();
            for (int c = 0; c < m.cols(); ++c)
                row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
            rows.push_back(std::move(row));
        }
        j["matrix"] = std::move(rows);
        return j;
    }
    json values = json::array();
    for (cd z : a.data())
        values.push_back(complex_to_json(z));
    j["values"] = std::move(values);
    return j;
}

ModuleVector vector_from_json(const json& j, const AlgebraKind& kind) {
    std::string type = "natural";
    int extent = 0;
    const json& ixj = field(j, "indexing");
    if (ixj.is_object()) {
        type = field(ixj, "type").get<std::string>();
        extent = int_field(ixj, "n", 0);
    } else if (ixj.is_string()) {
        type = ixj.get<std::string>();
        extent = int_field(j, "extent", 0);
    } else {
        bad("\"indexing\" must be an object {type, n}");
    }
    if (extent < 1)
        bad("a vector needs a positive truncation n");
    Indexing ix = Indexing::natural(1);
    if (type == "natural")
        ix = Indexing::natural(extent);
    else if (type == "integers")
        ix = Indexing::integers(extent);
    else
        bad("unknown indexing \"" + type + "\"");
    ModuleVector x = ModuleVector::zeros(kind, ix);
    if (j.contains("entries")) {
        const json& e = j.at("entries");
        if (!e.is_array() || static_cast<int>(e.size()) != ix.size())
            bad("\"entries\" must list " + std::to_string(ix.size()) + " elements");
        for (int i = 0; i < ix.size(); ++i)
            x.set(ix.first() + i, element_from_json(e[static_cast<std::size_t>(i)], kind));
    }
    if (j.contains("coordinates"))
        for (const json& c : j.at("coordinates")) {
            const std::int64_t k = field(c, "index").get<std::int64_t>();
            if (!ix.contains(k))
                bad("coordinate " + std::to_string(k) + " lies outside the truncation");
            x.set(k, element_from_json(field(c, "value"), kind));
        }
    return x;
}

json vector_to_json(const ModuleVector& x) {
    const Indexing& ix = x.indexing();
    json entries = json::array();
    for (const AlgebraElement& e : x.entries())
        entries.push_back(element_to_json(e));
    return {{"indexing",
             {{"type", ix.type() == Indexing::Type::Natural ? "natural" : "integers"}, {"n", ix.extent()}}},
            {"entries", std::move(entries)}};
}

namespace {

std::vector<AlgebraElement> arg_elements(const json& args, const AlgebraKind& kind) {
    // A list node takes either its elements directly or a single nested list.
    if (args.is_array() && args.size() == 1 && args[0].is_array())
        return element_list(args[0], kind);
    return element_list(args, kind);
}

} // namespace

OperatorExpr operator_from_json(const json& j, const AlgebraKind& kind) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "S")
            return OperatorExpr::unilateral_shift();
        if (s == "S*")
            return adjoint(OperatorExpr::unilateral_shift());
        if (s == "V")
            return OperatorExpr::bilateral_shift();
        if (s == "block-shift")
            return block_shift_operator(kind);
        if (auto e = expander_from_name(s))
            return expander_operator(*e, kind);
        return operator_from_json(json{{"node", s}, {"args", json::array()}}, kind);
    }
    if (!j.is_object() || !j.contains("node"))
        bad("an operator literal needs a \"node\" field: " + j.dump());
    const std::string node = j.at("node").get<std::string>();
    const json args = j.value("args", json::array());
    if (!args.is_array())
        bad("\"args\" must be a list");
    auto arg = [&](std::size_t i) -> const json& {
        if (i >= args.size())
            bad("node \"" + node + "\" needs " + std::to_string(i + 1) + " arguments");
        return args[i];
    };
    auto sub = [&](std::size_t i) { return operator_from_json(arg(i), kind); };
    if (node == "scalar_mult")
        return OperatorExpr::scalar_mult(element_from_json(arg(0), kind));
    if (node == "shift")
        return OperatorExpr::unilateral_shift();
    if (node == "bilateral_shift")
        return OperatorExpr::bilateral_shift();
    if (node == "weighted_shift")
        return OperatorExpr::weighted_shift(arg_elements(args, kind));
    if (node == "diagonal_unitary")
        return OperatorExpr::diagonal_unitary(arg_elements(args, kind));
    if (node == "diagonal_self_adjoint")
        return OperatorExpr::diagonal_self_adjoint(arg_elements(args, kind));
    if (node == "dyadic_expand")
        return OperatorExpr::dyadic_expand();
    if (node == "odd_expand")
        return OperatorExpr::odd_expand();
    if (node == "dyadic_compress")
        return OperatorExpr::dyadic_compress();
    if (node == "odd_compress")
        return OperatorExpr::odd_compress();
    if (node == "block")
        return OperatorExpr::block(element_from_json(arg(0), kind), sub(1), sub(2));
    if (node == "adjoint")
        return adjoint(sub(0));
    if (node == "negate")
        return OperatorExpr::negate(sub(0));
    if (node == "compose")
        return OperatorExpr::compose(sub(0), sub(1));
    if (node == "sum") {
        if (args.size() < 2)
            bad("a sum needs at least two terms");
        OperatorExpr acc = sub(0);
        for (std::size_t i = 1; i < args.size(); ++i)
            acc = OperatorExpr::sum(acc, sub(i));
        return acc;
    }
    bad("unknown operator node \"" + node + "\"");
}

json operator_to_json(const OperatorExpr& op) {
    json args = json::array();
    switch (op.type()) {
    case NodeType::ScalarMult: args.push_back(element_to_json(op.element())); break;
    case NodeType::WeightedShift:
    case NodeType::DiagonalUnitary:
    case NodeType::DiagonalSelfAdjoint:
        for (const AlgebraElement& e : op.elements())
            args.push_back(element_to_json(e));
        break;
    case NodeType::Block:
        args.push_back(element_to_json(op.element()));
        args.push_back(operator_to_json(op.left()));
        args.push_back(operator_to_json(op.right()));
        break;
    case NodeType::Adjoint:
    case NodeType::Negate: args.push_back(operator_to_json(op.left())); break;
    case NodeType::Sum:
    case NodeType::Compose:
        args.push_back(operator_to_json(op.left()));
        args.push_back(operator_to_json(op.right()));
        break;
    default: break;
    }
    return {{"node", node_name(op.type())}, {"args", std::move(args)}};
}

ToleranceConfig tolerances_from_json(const json& j, ToleranceConfig base) {
    if (!j.is_object())
        bad("tolerances must be an object");
    auto take = [&](const char* key, double& slot) {
        if (!j.contains(key))
            return;
        if (!j.at(key).is_number())
            bad(std::string("tolerance \"") + key + "\" must be a number");
        slot = j.at(key).get<double>();
    };
    take("eq_tol", base.eq_tol);
    take("boundary_band", base.boundary_band);
    take("oracle_sv_tol", base.oracle_sv_tol);
    base.validate();
    return base;
}

json tolerances_to_json(const ToleranceConfig& tol) {
    return {{"eq_tol", tol.eq_tol}, {"boundary_band", tol.boundary_band}, {"oracle_sv_tol", tol.oracle_sv_tol}};
}

namespace {

// Infinite tails (divergence by overflow) are written as null, which JSON can carry.
json real_list(const std::vector<double>& v) {
    json out = json::array();
    for (double x : v)
        out.push_back(std::isfinite(x) ? json(x) : json(nullptr));
    return out;
}

} // namespace

json growth_to_json(const GrowthDiagnostic& d) {
    return {{"depths", d.depths}, {"tail_norms", real_list(d.tail_norms)}, {"verdict", growth_name(d.verdict)}};
}

json oracle_to_json(const OracleReport& r) {
    json j = {{"depths", r.depths},
              {"sv_min", real_list(r.sv_min)},
              {"verdict", oracle_verdict_name(r.verdict)},
              {"bound", r.bound},
              {"note", r.note}};
    if (!r.adjoint_sv_min.empty()) {
        j["adjoint_depths"] = r.adjoint_depths;
        j["adjoint_sv_min"] = real_list(r.adjoint_sv_min);
    }
    if (!r.solve_residuals.empty())
        j["solve_residuals"] = real_list(r.solve_residuals);
    if (!r.kernel_candidates.empty()) {
        json c = json::array();
        for (const KernelCandidate& k : r.kernel_candidates)
            c.push_back({{"residual", k.residual}, {"interior_weight", k.interior_weight}, {"vector", vector_to_json(k.vector)}});
        j["kernel_candidates"] = std::move(c);
    }
    return j;
}

json certificate_to_json(const Certificate& c) {
    json j = {{"type", certificate_name(c)}};
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, NoCertificate>) {
                j["reason"] = v.reason;
            } else if constexpr (std::is_same_v<T, KernelWitness>) {
                j["residual"] = v.residual;
                j["vector"] = vector_to_json(v.x);
            } else if constexpr (std::is_same_v<T, CokernelWitness>) {
                j["max_pairing"] = v.max_pairing;
                j["vector"] = vector_to_json(v.x);
            } else if constexpr (std::is_same_v<T, ResolventSolution>) {
                j["target"] = v.target;
                j["residual"] = v.residual;
                j["remainder"] = v.remainder;
                j["growth"] = growth_to_json(v.growth);
                j["vector"] = vector_to_json(v.x);
            } else if constexpr (std::is_same_v<T, InvertibilityBound>) {
                j["lower"] = v.lower;
            } else if constexpr (std::is_same_v<T, GrowthDiagnostic>) {
                j["growth"] = growth_to_json(v);
            } else if constexpr (std::is_same_v<T, OracleReport>) {
                j["oracle"] = oracle_to_json(v);
            }
        },
        c);
    return j;
}

json verdict_to_json(const SpectrumVerdict& v) {
    json j = {{"membership", membership_name(v.membership)},
              {"spectrum_part", part_name(v.part)},
              {"rule", v.rule},
              {"deciding_value", v.deciding_value},
              {"certificate", certificate_to_json(v.certificate)}};
    if (!v.note.empty())
        j["note"] = v.note;
    if (v.oracle)
        j["oracle"] = oracle_to_json(*v.oracle);
    return j;
}

} // namespace gspec
