#include "gspec/query.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gspec {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

// Operators that may only be built over some kinds (indicator blocks need a step kind).
std::optional<OperatorExpr> try_build(const std::function<OperatorExpr()>& make) {
    try {
        return make();
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::optional<ExpanderKind> match_expander(const OperatorExpr& op, const AlgebraKind& kind) {
    for (ExpanderKind k : {ExpanderKind::DyadicExpand, ExpanderKind::OddExpand, ExpanderKind::DyadicCompress,
                           ExpanderKind::OddCompress, ExpanderKind::FBlock, ExpanderKind::DBlock}) {
        auto e = try_build([&] { return expander_operator(k, kind); });
        if (e && *e == op)
            return k;
    }
    return std::nullopt;
}

bool is_shift(const OperatorExpr& op) { return op == OperatorExpr::unilateral_shift(); }
bool is_adjoint_shift(const OperatorExpr& op) { return op == adjoint(OperatorExpr::unilateral_shift()); }
bool is_bilateral(const OperatorExpr& op) { return op == OperatorExpr::bilateral_shift(); }

bool is_block_shift(const OperatorExpr& op, const AlgebraKind& kind) {
    auto b = try_build([&] { return block_shift_operator(kind); });
    return b && *b == op;
}

Membership from_oracle(OracleVerdict v) {
    switch (v) {
    case OracleVerdict::NearSingularTrend: return Membership::In;
    case OracleVerdict::CertifiedBoundedBelow: return Membership::Out;
    case OracleVerdict::Indeterminate: break;
    }
    return Membership::BoundaryIndeterminate;
}

SpectrumVerdict oracle_full(const QueryDocument& doc) {
    OracleReport r = invertibility_ladder(doc.op, doc.element, doc.config.ladder, doc.config.tol);
    SpectrumVerdict v;
    v.membership = from_oracle(r.verdict);
    v.part = SpectrumPart::Full;
    v.rule = "oracle/invertibility-ladder";
    v.deciding_value = r.sv_min.empty() ? 0.0 : r.sv_min.back();
    if (r.verdict == OracleVerdict::CertifiedBoundedBelow)
        v.certificate = InvertibilityBound{r.bound};
    else
        v.certificate = r;
    v.note = "no closed-form rule matches this operator; decided by truncated sections only";
    v.oracle = std::move(r);
    return v;
}

SpectrumVerdict full_verdict(const QueryDocument& doc) {
    const QueryConfig& c = doc.config;
    const AlgebraElement& a = doc.element;
    if (is_shift(doc.op))
        return doc.kind.is_function() ? unilateral_shift_spectrum(a, c.tol, c.depth) : mn_shift_spectrum(a, c.tol);
    if (is_adjoint_shift(doc.op))
        return adjoint_shift_spectrum(a, c.tol, c.depth);
    if (is_bilateral(doc.op))
        return bilateral_shift_spectrum(a, c.tol);
    if (auto k = match_expander(doc.op, doc.kind))
        return expander_spectra(*k, a, c.tol, c.depth);
    if (is_block_shift(doc.op, doc.kind))
        return block_shift_spectrum(a, c.tol, c.depth);
    if (doc.op.type() == NodeType::DiagonalUnitary)
        return diagonal_unitary_spectrum(a, doc.op.elements(), c.tol, c.depth);
    return oracle_full(doc);
}

SpectrumVerdict oracle_point(const QueryDocument& doc) {
    SpectrumVerdict v;
    v.part = SpectrumPart::Point;
    v.rule = "oracle/kernel-search";
    for (const KernelCandidate& k : kernel_search(doc.op, doc.element, doc.config.depth, doc.config.tol)) {
        const double r = kernel_residual(doc.op, doc.element, k.vector);
        if (r <= 1e-8) {
            v.membership = Membership::In;
            v.certificate = KernelWitness{k.vector, r};
            v.deciding_value = r;
            return v;
        }
    }
    v.membership = Membership::Inconclusive;
    v.certificate = NoCertificate{"no interior kernel vector at depth " + std::to_string(doc.config.depth)};
    v.note = "an empty kernel search does not prove the point spectrum misses this element";
    return v;
}

SpectrumVerdict point_verdict(const QueryDocument& doc) {
    const QueryConfig& c = doc.config;
    const AlgebraElement& a = doc.element;
    if (is_shift(doc.op))
        return unilateral_shift_point_spectrum(a);
    if (is_bilateral(doc.op))
        return bilateral_shift_point_spectrum(a);
    if (auto k = match_expander(doc.op, doc.kind))
        return expander_point_spectra(*k, a, c.tol, c.depth);
    if (doc.op.type() == NodeType::WeightedShift)
        return weighted_shift_kernel_witness(a, doc.op.elements(), c.index, c.tol, c.depth);
    return oracle_point(doc);
}

std::optional<DualityPair> duality_pair(const QueryDocument& doc) {
    if (is_shift(doc.op) || is_adjoint_shift(doc.op))
        return DualityPair::ShiftAdjoint;
    if (auto k = match_expander(doc.op, doc.kind)) {
        switch (*k) {
        case ExpanderKind::DyadicExpand:
        case ExpanderKind::DyadicCompress: return DualityPair::DyadicPair;
        case ExpanderKind::OddExpand:
        case ExpanderKind::OddCompress: return DualityPair::OddPair;
        case ExpanderKind::FBlock:
        case ExpanderKind::DBlock: return DualityPair::BlockPair;
        }
    }
    return std::nullopt;
}

const AlgebraElement& need_second(const QueryDocument& doc) {
    if (!doc.second)
        bad("question \"" + doc.question + "\" needs a \"second_element\"");
    return *doc.second;
}

const ModuleVector& need_vector(const std::optional<ModuleVector>& v, const char* key, const std::string& q) {
    if (!v)
        bad("question \"" + q + "\" needs a \"" + key + "\"");
    return *v;
}

Outcome verdict_outcome(const QueryDocument& doc, SpectrumVerdict v) {
    json report = {{"question", doc.question}};
    if (doc.config.cross_check && !v.oracle) {
        OracleReport r = v.part == SpectrumPart::ApproxPoint
                             ? bounded_below_ladder(doc.op, doc.element, doc.config.ladder, doc.config.tol)
                             : invertibility_ladder(doc.op, doc.element, doc.config.ladder, doc.config.tol);
        v.oracle = std::move(r);
    }
    report["verdict"] = verdict_to_json(v);
    if (doc.config.cross_check && v.oracle && (v.part == SpectrumPart::Full || v.part == SpectrumPart::ApproxPoint)) {
        const Membership o = from_oracle(v.oracle->verdict);
        report["oracle_agrees"] = o == Membership::BoundaryIndeterminate ? json(nullptr) : json(o == v.membership);
    }
    return {std::move(report), exit_code_for(v.membership)};
}

Outcome boolean_outcome(const QueryDocument& doc, bool holds) {
    return {{{"question", doc.question}, {"holds", holds}}, holds ? 0 : kCheckFailedExit};
}

json coordinate_table(const ModuleVector& x) {
    json rows = json::array();
    const Indexing& ix = x.indexing();
    for (std::int64_t k = ix.first(); k <= ix.last(); ++k) {
        const double n = norm(x.at(k));
        if (n > 0.0)
            rows.push_back({{"index", k}, {"norm", n}});
    }
    return rows;
}

const ModuleVector* certificate_vector(const Certificate& c) {
    if (auto* k = std::get_if<KernelWitness>(&c))
        return &k->x;
    if (auto* k = std::get_if<CokernelWitness>(&c))
        return &k->x;
    if (auto* k = std::get_if<ResolventSolution>(&c))
        return &k->x;
    return nullptr;
}

} // namespace

QueryConfig apply_config(const json& j, QueryConfig cfg) {
    if (!j.is_object())
        bad("\"config\" must be an object");
    try {
        cfg.tol = tolerances_from_json(j, cfg.tol);
        if (j.contains("N"))
            cfg.depth = j.at("N").get<int>();
        if (j.contains("ladder"))
            cfg.ladder = j.at("ladder").get<std::vector<int>>();
        if (j.contains("cross_check"))
            cfg.cross_check = j.at("cross_check").get<bool>();
        if (j.contains("index"))
            cfg.index = j.at("index").get<std::int64_t>();
        if (j.contains("seed"))
            cfg.seed = j.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        bad(std::string("malformed config: ") + e.what());
    }
    if (cfg.depth < 4)
        bad("N must be at least 4");
    if (cfg.ladder.size() < 3 || !std::is_sorted(cfg.ladder.begin(), cfg.ladder.end()) || cfg.ladder.front() < 2)
        bad("the ladder must be an increasing list of at least three depths >= 2");
    return cfg;
}

const std::vector<std::string>& check_questions() {
    static const std::vector<std::string> q = {"full",       "point",         "approx",          "commutative",
                                               "screen",     "envelope",      "skew-bound",      "bounded-below",
                                               "star-duality", "residual-duality", "normal-residual", "star-transfer",
                                               "kernel-orthogonality"};
    return q;
}

QueryDocument parse_query(const json& j, const ToleranceConfig& base) {
    if (!j.is_object())
        bad("a query must be a JSON object");
    QueryDocument doc;
    doc.source = j;
    if (j.contains("algebra"))
        doc.kind = kind_from_json(j.at("algebra"));
    else if (j.contains("element") && j.at("element").is_object() && j.at("element").contains("kind"))
        doc.kind = kind_from_json(j.at("element"));
    if (!j.contains("element"))
        bad("a query needs an \"element\"");
    doc.element = element_from_json(j.at("element"), doc.kind);
    doc.op = operator_from_json(j.value("operator", json("S")), doc.kind);
    if (j.contains("second_element"))
        doc.second = element_from_json(j.at("second_element"), doc.kind);
    if (j.contains("vector"))
        doc.vector = vector_from_json(j.at("vector"), doc.kind);
    if (j.contains("second_vector"))
        doc.second_vector = vector_from_json(j.at("second_vector"), doc.kind);
    if (j.contains("question")) {
        if (!j.at("question").is_string())
            bad("\"question\" must be a string");
        doc.question = j.at("question").get<std::string>();
        static const std::vector<std::string> witness_only = {"kernel", "cokernel", "resolvent", "auto"};
        const auto& cq = check_questions();
        if (std::find(cq.begin(), cq.end(), doc.question) == cq.end() &&
            std::find(witness_only.begin(), witness_only.end(), doc.question) == witness_only.end())
            bad("unknown question \"" + doc.question + "\"");
    }
    QueryConfig cfg;
    cfg.tol = base;
    doc.config = apply_config(j.value("config", json::object()), cfg);
    if (doc.op.integer_indexed() && doc.question != "full" && doc.question != "point" && doc.question != "auto" &&
        doc.question != "kernel")
        bad("question \"" + doc.question + "\" is not available for the bilateral shift");
    return doc;
}

int exit_code_for(Membership m) noexcept {
    switch (m) {
    case Membership::Out: return 0;
    case Membership::In: return 1;
    case Membership::BoundaryIndeterminate: return 2;
    case Membership::Inconclusive: return 3;
    }
    return 3;
}

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::ParseError: return 10;
    case ErrorCode::ConfigError: return 11;
    case ErrorCode::UnknownSuite: return 12;
    case ErrorCode::NotApplicable: return 13;
    case ErrorCode::WitnessCheckFailed: return 14;
    default: return 20 + static_cast<int>(code);
    }
}

json error_to_json(const Error& e) {
    json j = {{"error", error_name(e.code())}, {"message", e.what()}, {"exit_code", exit_code_for(e.code())}};
    if (auto* p = dynamic_cast<const ParseError*>(&e))
        j["position"] = p->position();
    return j;
}

Outcome run_check(const QueryDocument& doc) {
    const QueryConfig& c = doc.config;
    const std::string& q = doc.question;
    const AlgebraElement& a = doc.element;
    if (q == "full")
        return verdict_outcome(doc, full_verdict(doc));
    if (q == "point")
        return verdict_outcome(doc, point_verdict(doc));
    if (q == "approx")
        return verdict_outcome(doc, approx_point_membership(doc.op, a, c.ladder, c.tol));
    if (q == "commutative") {
        if (!is_shift(doc.op))
            bad("the commutative rule applies to the unilateral shift only");
        return verdict_outcome(doc, shift_spectrum_commutative(a, c.tol));
    }
    if (q == "screen") {
        if (!is_bilateral(doc.op) && doc.op.type() != NodeType::DiagonalUnitary)
            bad("the norm screen needs a unitary operator (V or a diagonal unitary)");
        return verdict_outcome(doc, unitary_norm_screen(a, c.tol));
    }
    if (q == "envelope")
        return verdict_outcome(doc, selfadjoint_spectrum_envelope(doc.op, a, c.tol, c.depth));
    if (q == "skew-bound")
        return verdict_outcome(doc, skew_resolvent_bound(doc.op, a, c.depth, c.tol));
    if (q == "bounded-below")
        return verdict_outcome(doc, bounded_below_implies_invertible(doc.op, a, c.ladder, c.tol));
    if (q == "star-duality") {
        auto pair = duality_pair(doc);
        if (!pair)
            bad("no closed-form duality pair contains this operator");
        return boolean_outcome(doc, spectrum_star_duality_check(*pair, a, c.tol));
    }
    if (q == "residual-duality")
        return boolean_outcome(doc, residual_point_duality(doc.op, a, c.depth, c.tol));
    if (q == "normal-residual")
        return boolean_outcome(doc, normal_residual_empty_check(doc.op, a, c.ladder, c.seed, c.tol));
    if (q == "star-transfer")
        return boolean_outcome(doc, selfadjoint_point_star_transfer(doc.op, a, need_vector(doc.vector, "vector", q), c.tol));
    if (q == "kernel-orthogonality")
        return boolean_outcome(doc, normal_kernel_orthogonality(doc.op, a, need_second(doc),
                                                                need_vector(doc.vector, "vector", q),
                                                                need_vector(doc.second_vector, "second_vector", q), c.tol));
    bad("unknown question \"" + q + "\"");
}

Outcome run_witness(const QueryDocument& doc) {
    const QueryConfig& c = doc.config;
    const std::string& q = doc.question;
    Certificate cert;
    if (q == "resolvent") {
        if (!is_shift(doc.op))
            bad("resolvent solutions are built for the unilateral shift only");
        cert = shift_resolvent_solution(doc.element, c.index, c.depth, c.tol);
    } else if (q == "cokernel" && is_shift(doc.op)) {
        cert = shift_cokernel_witness(doc.element, c.depth, c.tol);
    } else if (q == "kernel" || q == "point") {
        cert = point_verdict(doc).certificate;
    } else if (q == "cokernel" || q == "full") {
        cert = full_verdict(doc).certificate;
    } else if (q == "auto") {
        cert = point_verdict(doc).certificate;
        if (!certificate_vector(cert))
            cert = full_verdict(doc).certificate;
    } else {
        bad("unknown witness question \"" + q + "\" (kernel, cokernel, resolvent or auto)");
    }
    const ModuleVector* x = certificate_vector(cert);
    if (!x) {
        std::string why = "the rule yields no witness";
        if (auto* n = std::get_if<NoCertificate>(&cert); n && !n->reason.empty())
            why += ": " + n->reason;
        throw Error(ErrorCode::NotApplicable, why);
    }
    json report = {{"question", q}, {"certificate", certificate_to_json(cert)}, {"table", coordinate_table(*x)}};
    return {std::move(report), 0};
}

std::string oracle_dump_csv(const QueryDocument& doc) {
    const QueryConfig& c = doc.config;
    const OracleReport r = invertibility_ladder(doc.op, doc.element, c.ladder, c.tol);
    std::vector<int> depths = r.depths;
    depths.insert(depths.end(), r.adjoint_depths.begin(), r.adjoint_depths.end());
    std::sort(depths.begin(), depths.end());
    depths.erase(std::unique(depths.begin(), depths.end()), depths.end());

    auto lookup = [](const std::vector<int>& ds, const std::vector<double>& sv, int d) -> std::string {
        for (std::size_t i = 0; i < ds.size() && i < sv.size(); ++i)
            if (ds[i] == d) {
                std::ostringstream s;
                s.precision(17);
                s << sv[i];
                return s.str();
            }
        return "";
    };
    const OperatorExpr t = shifted(doc.op, doc.element);
    std::ostringstream out;
    out.precision(17);
    out << "depth,section_sv_min,adjoint_section_sv_min,square_sv_min\n";
    for (int d : depths)
        out << d << ',' << lookup(r.depths, r.sv_min, d) << ',' << lookup(r.adjoint_depths, r.adjoint_sv_min, d) << ','
            << min_singular(flatten(t, d, doc.kind)) << '\n';
    return out.str();
}

} // namespace gspec
