#include "gspec/suites.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "gspec/expression.hpp"

namespace gspec {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kWitnessTol = 1e-8;

std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s)
        h = (h ^ c) * 0x100000001b3ULL;
    return h;
}

struct Case {
    std::string id;
    std::uint64_t seed = 0;
    std::mt19937_64 rng;
    json query = nullptr;
    std::vector<std::string> problems;

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
    bool coin() { return pick(0, 1) == 1; }
    cd phase() { return std::polar(1.0, uniform(0.0, 2.0 * kPi)); }
    /// Modulus in [lo, hi] with a uniform phase, drawn in that order.
    cd draw(double lo, double hi) {
        const double r = uniform(lo, hi);
        return r * phase();
    }

    void expect(bool ok, const std::string& what) {
        if (!ok)
            problems.push_back(what);
    }
};

class Runner {
public:
    Runner(SuiteResult& result, const ToleranceConfig& tol) : result_(result), tol_(tol) {}

    const ToleranceConfig& tol() const noexcept { return tol_; }
    int count(int small) const { return result_.scale == Scale::Small ? small : 5 * small; }

    void each(const std::string& tag, int n, const std::function<void(Case&)>& body) {
        const std::string stem = tag.empty() ? result_.suite : result_.suite + "/" + tag;
        const int width = std::max(3, static_cast<int>(std::to_string(std::max(n - 1, 1)).size()));
        const std::uint64_t base = splitmix(result_.seed ^ splitmix(fnv1a(stem)));
        for (int i = 0; i < n; ++i) {
            Case c;
            std::ostringstream id;
            id << stem << '/' << std::setw(width) << std::setfill('0') << i;
            c.id = id.str();
            c.seed = splitmix(base + static_cast<std::uint64_t>(i));
            c.rng.seed(c.seed);
            try {
                body(c);
            } catch (const std::exception& e) {
                c.problems.push_back(std::string("raised ") + e.what());
            }
            ++result_.cases;
            if (!c.problems.empty()) {
                std::string msg;
                for (const std::string& p : c.problems)
                    msg += (msg.empty() ? "" : "; ") + p;
                result_.failures.push_back({c.id, c.seed, msg, c.query});
            }
        }
    }

    void single(const std::string& tag, const std::function<void(Case&)>& body) { each(tag, 1, body); }

private:
    SuiteResult& result_;
    ToleranceConfig tol_;
};

// ---- case material ----

json doc(const AlgebraKind& kind, json op, const AlgebraElement& a, const std::string& question,
         json config = json::object()) {
    return {{"algebra", kind_to_json(kind)},
            {"operator", std::move(op)},
            {"element", element_to_json(a)},
            {"question", question},
            {"config", std::move(config)}};
}

AlgebraKind panel_kind(int i) { return i % 2 == 0 ? AlgebraKind::step(16) : AlgebraKind::continuous(16, 2); }

// Moduli uniform in [lo, hi]; the phase drifts slowly from node to node so that interpolants
// do not dip far below their node values.
AlgebraElement modulus_element(const AlgebraKind& kind, Case& c, double lo, double hi) {
    std::vector<cd> v(static_cast<std::size_t>(kind.storage_size()));
    double phase = c.uniform(0.0, 2.0 * kPi);
    for (cd& z : v) {
        z = std::polar(c.uniform(lo, hi), phase);
        phase += c.uniform(-0.4, 0.4);
    }
    return AlgebraElement(kind, std::move(v));
}

// Continuous elements whose modulus and phase change little from node to node, so that every
// feature of the function is resolved by the grid.
AlgebraElement resolved_element(const AlgebraKind& kind, Case& c, double start) {
    std::vector<cd> v(static_cast<std::size_t>(kind.storage_size()));
    double m = start;
    double phase = c.uniform(0.0, 2.0 * kPi);
    for (cd& z : v) {
        z = std::polar(m, phase);
        m = std::max(0.0, m + c.uniform(-0.02, 0.02));
        phase += c.uniform(-0.1, 0.1);
    }
    return AlgebraElement(kind, std::move(v));
}

// Unitary elements: any unimodular step function, or a constant phase on continuous kinds
// (interpolating between distinct unimodular node values leaves the circle).
AlgebraElement unitary_element(const AlgebraKind& kind, Case& c) {
    if (kind.tag() == KindTag::Continuous)
        return constant(kind, c.phase());
    return modulus_element(kind, c, 1.0, 1.0);
}

// Redraws until the element keeps its inf |a| at least `margin` away from 1.
AlgebraElement inf_margin_element(const AlgebraKind& kind, Case& c, bool inside, double margin) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const double lo = inside ? c.uniform(0.0, 0.9) : c.uniform(1.0 + 2 * margin, 2.0);
        const double hi = lo + c.uniform(0.05, 1.5);
        AlgebraElement a = kind.tag() == KindTag::Continuous ? resolved_element(kind, c, lo) : modulus_element(kind, c, lo, hi);
        if (std::abs(inf_abs(a) - 1.0) > margin)
            return a;
    }
    throw Error(ErrorCode::PreconditionFailed, "could not draw an element with the requested margin");
}

Membership oracle_membership(OracleVerdict v) {
    switch (v) {
    case OracleVerdict::NearSingularTrend: return Membership::In;
    case OracleVerdict::CertifiedBoundedBelow: return Membership::Out;
    case OracleVerdict::Indeterminate: break;
    }
    return Membership::BoundaryIndeterminate;
}

std::string mismatch(const char* what, Membership got, Membership want) {
    return std::string(what) + " gave " + membership_name(got) + ", expected " + membership_name(want);
}

Membership expected(bool in) { return in ? Membership::In : Membership::Out; }

void expect_kernel_witness(Case& c, const OperatorExpr& op, const AlgebraElement& a, const Certificate& cert,
                           double tol = kWitnessTol) {
    const auto* w = std::get_if<KernelWitness>(&cert);
    if (!w) {
        c.expect(false, std::string("expected a kernel witness, got ") + certificate_name(cert));
        return;
    }
    const double r = kernel_residual(op, a, w->x);
    c.expect(r <= tol, "kernel witness residual " + std::to_string(r));
    c.expect(vector_norm(w->x) >= 1e-6, "kernel witness is zero");
}

void expect_cokernel_witness(Case& c, const OperatorExpr& op, const AlgebraElement& a, const Certificate& cert) {
    const auto* w = std::get_if<CokernelWitness>(&cert);
    if (!w) {
        c.expect(false, std::string("expected a cokernel witness, got ") + certificate_name(cert));
        return;
    }
    const double p = cokernel_pairing(op, a, w->x);
    c.expect(p <= kWitnessTol, "cokernel witness pairing " + std::to_string(p));
    c.expect(vector_norm(w->x) >= 1e-6, "cokernel witness is zero");
}

template <class E>
void expect_error(Case& c, ErrorCode code, E&& call) {
    try {
        call();
        c.expect(false, std::string("expected ") + error_name(code) + ", nothing was raised");
    } catch (const Error& e) {
        c.expect(e.code() == code, std::string("expected ") + error_name(code) + ", got " + error_name(e.code()));
    }
}

ModuleVector first_coordinate(const AlgebraElement& f, int N = kDefaultDepth) {
    ModuleVector x = ModuleVector::zeros(f.kind(), Indexing::natural(N));
    x.set(1, f);
    return x;
}

AlgebraElement real_part(const AlgebraElement& a) { return add(a, star(a)); }

OperatorExpr shift() { return OperatorExpr::unilateral_shift(); }

Eigen::MatrixXcd gaussian_matrix(Case& c, int n) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const double re = g(c.rng);
        const double im = g(c.rng);
        m.data()[i] = cd(re, im) / std::sqrt(2.0 * n);
    }
    return m;
}

Eigen::MatrixXcd random_unitary(Case& c, int n) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(gaussian_matrix(c, n));
    return qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
}

// ---- suites ----

void scalar_reduction(Runner& run) {
    const AlgebraKind scalar = AlgebraKind::matrix(1);
    const AlgebraKind cells = AlgebraKind::step(2);
    run.each("", run.count(1000), [&](Case& c) {
        double r = 1.0;
        while (std::abs(r - 1.0) <= 1e-3)
            r = c.uniform(0.0, 2.0);
        const cd z = r * c.phase();
        const bool inside = r <= 1.0;
        c.query = doc(scalar, "S", constant(scalar, z), "full");
        const Outcome o = run_check(parse_query(c.query, run.tol()));
        c.expect(o.exit_code == exit_code_for(expected(inside)), "scalar query exit code " + std::to_string(o.exit_code));

        const AlgebraElement a = constant(cells, z);
        const SpectrumVerdict u = unilateral_shift_spectrum(a, run.tol());
        c.expect(u.membership == expected(inside), mismatch("unilateral rule", u.membership, expected(inside)));
        const SpectrumVerdict v = bilateral_shift_spectrum(a, run.tol());
        c.expect(v.membership == Membership::Out, mismatch("bilateral rule", v.membership, Membership::Out));

        const cd w = z / std::abs(z);
        const SpectrumVerdict vu = bilateral_shift_spectrum(constant(cells, w), run.tol());
        c.expect(vu.membership == Membership::In, mismatch("bilateral rule on the circle", vu.membership, Membership::In));
    });
}

void prop_shift(Runner& run) {
    int index = 0;
    run.each("", run.count(200), [&](Case& c) {
        const AlgebraKind kind = panel_kind(index++);
        const bool inside = c.coin();
        const AlgebraElement a = inf_margin_element(kind, c, inside, 0.05);
        c.query = doc(kind, "S", a, "full", {{"cross_check", true}});
        const double inf = inf_abs(a);

        const SpectrumVerdict v = unilateral_shift_spectrum(a, run.tol());
        c.expect(v.membership == expected(inf <= 1.0), mismatch("rule", v.membership, expected(inf <= 1.0)));
        const OracleReport r = invertibility_ladder(shift(), a, {16, 32, 64}, run.tol());
        c.expect(oracle_membership(r.verdict) == v.membership,
                 mismatch("oracle", oracle_membership(r.verdict), v.membership));
        if (v.membership == Membership::In && inf < 0.95)
            expect_cokernel_witness(c, shift(), a, v.certificate);
        c.expect(kernel_search(shift(), a, kDefaultDepth, run.tol()).empty(), "kernel search found an interior kernel");
        c.expect(unilateral_shift_point_spectrum(a).membership == Membership::Out, "point spectrum not empty");
    });
}

void lemma_resolvent(Runner& run) {
    int index = 0;
    run.each("", run.count(100), [&](Case& c) {
        const AlgebraKind kind = panel_kind(index++);
        // Phase drift lets the interpolated modulus dip below the node values, so redraw.
        AlgebraElement a = modulus_element(kind, c, 1.06, c.uniform(1.1, 3.0));
        for (int attempt = 0; attempt < 100 && inf_abs(a) <= 1.05; ++attempt)
            a = modulus_element(kind, c, 1.06, c.uniform(1.1, 3.0));
        const std::int64_t k = c.pick(1, 8);
        c.query = doc(kind, "S", a, "resolvent", {{"N", 64}, {"index", k}});
        c.expect(inf_abs(a) > 1.05, "drawn element violates inf |a| > 1.05");

        const Certificate cert = shift_resolvent_solution(a, k, 64, run.tol());
        const auto* s = std::get_if<ResolventSolution>(&cert);
        if (!s) {
            c.expect(false, std::string("expected a resolvent solution, got ") + certificate_name(cert));
            return;
        }
        const ModuleVector ek = basis_vector(k, kind, Indexing::natural(64));
        const double res = interior_norm(add(apply(shifted(shift(), a), s->x), ek));
        c.expect(res <= 1e-8, "resolvent residual " + std::to_string(res));
        c.expect(s->growth.verdict == Growth::Converging, std::string("growth ") + growth_name(s->growth.verdict));
        const SolveResult o = solve(shift(), a, scale_right(ek, constant(kind, -1.0)), 64, run.tol());
        c.expect(o.residual <= 1e-8, "oracle solve residual " + std::to_string(o.residual));
        c.expect(o.growth != Growth::Diverging, "oracle solve norms diverge");
    });
    run.each("unit", 2, [&](Case& c) {
        const AlgebraKind kind = panel_kind(c.id.back() - '0');
        const AlgebraElement one = unit(kind);
        c.query = doc(kind, "S", one, "resolvent", {{"N", 64}});
        const Certificate cert = shift_resolvent_solution(one, 1, 64, run.tol());
        const auto* s = std::get_if<ResolventSolution>(&cert);
        c.expect(s && s->growth.verdict == Growth::Diverging, "powers of the unit should not be square summable");
        c.expect(unilateral_shift_spectrum(one, run.tol()).membership == Membership::In, "unit not in the spectrum");
    });
}

void mn_shift(Runner& run) {
    int index = 0;
    run.each("", run.count(200), [&](Case& c) {
        const int n = 2 + (index++ % 2);
        const AlgebraKind kind = AlgebraKind::matrix(n);
        Eigen::MatrixXcd m;
        double lam = 1.0;
        while (std::abs(lam - 1.0) <= 1e-3) {
            m = gaussian_matrix(c, n) * c.uniform(0.3, 2.5);
            lam = std::numeric_limits<double>::infinity();
            for (cd e : matrix_eigenvalues(make_matrix(m)))
                lam = std::min(lam, std::abs(e));
        }
        const AlgebraElement t = make_matrix(m);
        c.query = doc(kind, "S", t, "full");
        const Membership want = expected(lam <= 1.0 + run.tol().boundary_band);
        const SpectrumVerdict v = mn_shift_spectrum(t, run.tol());
        c.expect(v.membership == want, mismatch("rule", v.membership, want) + " (min |eigenvalue| " + std::to_string(lam) + ")");
        const Outcome o = run_check(parse_query(c.query, run.tol()));
        c.expect(o.exit_code == exit_code_for(want), "query exit code " + std::to_string(o.exit_code));
    });
}

AlgebraElement t1_matrix() {
    Eigen::MatrixXcd m(2, 2);
    m << 2.0, 1.0, 1.0, 0.0;
    return make_matrix(m);
}

AlgebraElement t2_matrix() {
    const cd i(0.0, 1.0);
    Eigen::MatrixXcd m(2, 2);
    m << 0.0, i, i, i;
    return make_matrix(m);
}

void m2_facts(Case& c) {
    const AlgebraElement t1 = t1_matrix();
    const AlgebraElement t2 = t2_matrix();
    c.query = doc(AlgebraKind::matrix(2), operator_to_json(OperatorExpr::scalar_mult(t1)), t2, "skew-bound");
    const Eigen::MatrixXcd skew = sub(t2, star(t2)).matrix();
    c.expect(smallest_singular_value(skew) > 1.0, "T2 - T2* should be invertible");
    const double det = std::abs(sub(t1, t2).matrix().determinant());
    c.expect(det <= 1e-12, "|det(T1 - T2)| = " + std::to_string(det));
}

void cor_skew_bound(Runner& run) {
    const AlgebraKind kind = AlgebraKind::continuous(256);
    run.each("", run.count(50), [&](Case& c) {
        std::vector<AlgebraElement> gs;
        const int terms = c.pick(1, 3);
        for (int i = 0; i < terms; ++i) {
            const double base = c.uniform(0.2, 2.0), slope = c.uniform(-0.15, 1.0), wig = c.uniform(0.0, 0.15),
                         freq = c.uniform(1.0, 8.0);
            gs.push_back(sample(kind, [=](double t) { return cd(base + slope * t + wig * std::sin(freq * t), 0.0); }));
        }
        const OperatorExpr F = OperatorExpr::diagonal_self_adjoint(gs);
        const double re0 = c.uniform(-2.0, 2.0), re1 = c.uniform(-2.0, 2.0), im0 = c.uniform(0.05, 1.0),
                     im1 = c.uniform(0.0, 1.0), sign = c.coin() ? 1.0 : -1.0;
        const AlgebraElement a = sample(kind, [=](double t) { return cd(re0 + re1 * t * t, sign * (im0 + im1 * t)); });
        c.query = doc(kind, operator_to_json(F), a, "skew-bound", {{"N", 64}});

        const double skew_inf = inf_abs(sub(a, star(a)));
        c.expect(skew_inf >= 0.1 - 1e-12, "drawn element has inf |a - a*| = " + std::to_string(skew_inf));
        const double bound = skew_inf / 2.0;
        const SpectrumVerdict v = skew_resolvent_bound(F, a, 64, run.tol());
        c.expect(v.membership == Membership::Out, mismatch("rule", v.membership, Membership::Out));
        c.expect(std::abs(v.deciding_value - bound) <= 1e-9 * (1.0 + bound), "bound " + std::to_string(v.deciding_value) +
                                                                                  " differs from " + std::to_string(bound));
        const OracleReport r = bounded_below_ladder(F, a, {16, 32, 64}, run.tol());
        for (double s : r.sv_min)
            c.expect(s >= bound - 1e-6, "section minimum " + std::to_string(s) + " below the bound " + std::to_string(bound));
    });
    run.single("m2", m2_facts);
}

void ex_m2_counterexample(Runner& run) {
    run.single("", [&](Case& c) {
        m2_facts(c);
        const AlgebraElement t1 = t1_matrix();
        const AlgebraElement t2 = t2_matrix();
        const OperatorExpr F = OperatorExpr::scalar_mult(t1);
        c.expect(is_self_adjoint_element(t1, 1e-15), "T1 should be self-adjoint");
        c.expect(std::abs(norm(t1) - (1.0 + std::sqrt(2.0))) <= 1e-12, "||T1|| should be 1 + sqrt 2");
        const cd i(0.0, 1.0);
        Eigen::MatrixXcd expected_skew(2, 2);
        expected_skew << 0.0, 2.0 * i, 2.0 * i, 2.0 * i;
        c.expect((sub(t2, star(t2)).matrix() - expected_skew).norm() <= 1e-15, "T2 - T2* should be 2i[[0,1],[1,1]]");
        c.expect(is_self_adjoint(F, t1.kind(), 16, 1e-12), "T1 I should be self-adjoint");

        // The commutative bound does not transfer: the rule refuses the matrix algebra ...
        expect_error(c, ErrorCode::NotCommutative, [&] { skew_resolvent_bound(F, t2, 64, run.tol()); });
        // ... and F - T2 has a kernel, so it is not invertible.
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(sub(t1, t2).matrix());
        const Eigen::MatrixXcd null = lu.kernel();
        c.expect(null.cols() == 1, "T1 - T2 should have a one-dimensional kernel");
        Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(2, 2);
        y.col(0) = null.col(0);
        const ModuleVector x = first_coordinate(make_matrix(y));
        c.expect(kernel_residual(F, t2, x) <= 1e-12, "(T1 - T2) Y should vanish");
        const OracleReport r = invertibility_ladder(F, t2, {16, 32, 64}, run.tol());
        c.expect(r.verdict == OracleVerdict::NearSingularTrend,
                 std::string("oracle reports ") + oracle_verdict_name(r.verdict));
    });
}

void cor_envelope(Runner& run) {
    int index = 0;
    run.each("", run.count(200), [&](Case& c) {
        const AlgebraKind kind = panel_kind(index++);
        const OperatorExpr F = OperatorExpr::diagonal_self_adjoint({parse_expression("1 + t", kind)});
        AlgebraElement a = unit(kind);
        const int shape = c.pick(0, kind.tag() == KindTag::Step ? 2 : 1);
        if (shape == 0) {
            a = modulus_element(kind, c, 0.0, c.uniform(0.1, 0.9));
        } else if (shape == 1) {
            const double lo = c.uniform(2.1, 3.0);
            a = modulus_element(kind, c, lo, c.uniform(3.0, 4.0));
        } else {
            // Cells on both sides of the envelope.
            std::vector<cd> v(static_cast<std::size_t>(kind.storage_size()));
            for (cd& z : v)
                z = c.coin() ? c.draw(0.0, 0.9) : c.draw(2.1, 4.0);
            a = AlgebraElement(kind, std::move(v));
        }
        c.query = doc(kind, operator_to_json(F), a, "envelope", {{"cross_check", true}});
        double gap = std::numeric_limits<double>::infinity();
        for (double m : refined_abs_values(a))
            gap = std::min(gap, m < 1.0 ? 1.0 - m : (m > 2.0 ? m - 2.0 : 0.0));
        c.expect(gap > 0.05, "drawn element comes within " + std::to_string(gap) + " of [1, 2]");

        const SpectrumVerdict v = selfadjoint_spectrum_envelope(F, a, run.tol(), 64);
        c.expect(v.membership == Membership::Out, mismatch("rule", v.membership, Membership::Out));
        const auto* b = std::get_if<InvertibilityBound>(&v.certificate);
        c.expect(b && b->lower > 0.0, "Out verdict without a positive bound");
        const OracleReport r = invertibility_ladder(F, a, {16, 32, 64}, run.tol());
        c.expect(r.verdict == OracleVerdict::CertifiedBoundedBelow,
                 std::string("oracle reports ") + oracle_verdict_name(r.verdict));
        if (b && !r.sv_min.empty())
            c.expect(r.sv_min.back() >= b->lower - 1e-6, "oracle minimum below the certified bound");
    });
}

// Unit coincidence: a equals 1 exactly on a run of cells and stays away from 1 elsewhere.
AlgebraElement coincidence_element(const AlgebraKind& kind, Case& c) {
    const int n = kind.storage_size();
    const int start = c.pick(0, n - 3);
    const int len = c.pick(1, 3);
    std::vector<cd> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] = (i >= start && i < start + len) ? cd(1.0) : c.draw(1.2, 2.0);
    return AlgebraElement(kind, std::move(v));
}

void ex_expanders(Runner& run) {
    const AlgebraKind kind = AlgebraKind::step(16);
    for (ExpanderKind k : {ExpanderKind::DyadicExpand, ExpanderKind::OddExpand, ExpanderKind::DyadicCompress,
                           ExpanderKind::OddCompress, ExpanderKind::FBlock, ExpanderKind::DBlock}) {
        const OperatorExpr op = expander_operator(k, kind);
        run.each(expander_name(k), run.count(100), [&](Case& c) {
            const bool inside = c.coin();
            const AlgebraElement a = inf_margin_element(kind, c, inside, 0.05);
            c.query = doc(kind, expander_name(k), a, "full", {{"cross_check", true}});
            const double inf = inf_abs(a);

            const SpectrumVerdict v = expander_spectra(k, a, run.tol());
            c.expect(v.membership == expected(inf <= 1.0), mismatch("rule", v.membership, expected(inf <= 1.0)));
            const OracleReport r = invertibility_ladder(op, a, {16, 32, 64}, run.tol());
            c.expect(oracle_membership(r.verdict) == v.membership,
                     mismatch("oracle", oracle_membership(r.verdict), v.membership));

            if ((k == ExpanderKind::DyadicCompress || k == ExpanderKind::OddCompress) && inf < 0.95) {
                const SpectrumVerdict p = expander_point_spectra(k, a, run.tol(), 64);
                c.expect(p.membership == Membership::In, mismatch("point rule", p.membership, Membership::In));
                expect_kernel_witness(c, op, a, p.certificate);
            }
            if (k == ExpanderKind::DyadicExpand) {
                c.expect(kernel_search(op, a, kDefaultDepth, run.tol()).empty(), "kernel search found an interior kernel");
                c.expect(expander_point_spectra(k, a, run.tol()).membership == Membership::Out, "point spectrum not empty");
            }
            if (k == ExpanderKind::OddExpand || k == ExpanderKind::OddCompress) {
                const AlgebraElement b = coincidence_element(kind, c);
                const SpectrumVerdict p = expander_point_spectra(k, b, run.tol(), 64);
                c.expect(p.membership == Membership::In, mismatch("coincidence rule", p.membership, Membership::In));
                expect_kernel_witness(c, op, b, p.certificate, 0.0);
            }
        });
    }
}

AlgebraElement bilateral_element(const AlgebraKind& kind, Case& c, bool inside) {
    const int n = kind.storage_size();
    std::vector<cd> v(static_cast<std::size_t>(n));
    if (kind.tag() == KindTag::Step) {
        const bool low = c.coin();
        for (cd& z : v) {
            const bool side = c.pick(0, 3) == 0 ? !low : low;
            z = side ? c.draw(0.0, 0.95) : c.draw(1.05, 2.0);
        }
        if (inside)
            v[static_cast<std::size_t>(c.pick(0, n - 1))] = c.phase();
        return AlgebraElement(kind, std::move(v));
    }
    // Continuous: moduli interpolate between nodes, so the range is an interval. Inside cases
    // cross the circle along a gentle ramp; a crossing steeper than the grid can follow only
    // shows up in the solution norms after many refinements.
    if (inside) {
        const double x0 = c.uniform(0.2, 0.8);
        const double slope = (c.coin() ? 1.0 : -1.0) * c.uniform(0.5, 1.8);
        double phase = c.uniform(0.0, 2.0 * kPi);
        for (int i = 0; i < n; ++i) {
            const double x = static_cast<double>(i) / static_cast<double>(n - 1);
            v[static_cast<std::size_t>(i)] = std::polar(1.0 + slope * (x - x0), phase);
            phase += c.uniform(-0.1, 0.1);
        }
        return AlgebraElement(kind, std::move(v));
    }
    for (int attempt = 0; attempt < 1000; ++attempt) {
        double lo = 0.0, hi = 0.0;
        if (inside) {
            lo = c.uniform(0.0, 0.8);
            hi = c.uniform(1.2, 2.5);
        } else if (c.coin()) {
            hi = c.uniform(0.2, 0.93);
        } else {
            lo = c.uniform(1.07, 1.5);
            hi = c.uniform(1.5, 2.5);
        }
        AlgebraElement a = modulus_element(kind, c, lo, hi);
        const std::vector<double> m = refined_abs_values(a);
        const double least = *std::min_element(m.begin(), m.end());
        const double most = *std::max_element(m.begin(), m.end());
        const bool ok = inside ? (least < 0.95 && most > 1.05) : (most < 0.95 || least > 1.05);
        if (ok)
            return a;
    }
    throw Error(ErrorCode::PreconditionFailed, "could not draw a bilateral case with the requested margin");
}

void prop_bilateral(Runner& run) {
    const OperatorExpr V = OperatorExpr::bilateral_shift();
    int index = 0;
    run.each("", run.count(200), [&](Case& c) {
        const AlgebraKind kind = panel_kind(index++);
        const bool inside = c.coin();
        const AlgebraElement f = bilateral_element(kind, c, inside);
        c.query = doc(kind, "V", f, "full");

        const SpectrumVerdict v = bilateral_shift_spectrum(f, run.tol());
        c.expect(v.membership == expected(inside), mismatch("rule", v.membership, expected(inside)));
        const SolveResult s = refined_solve(V, f, 0, 16, 3, run.tol());
        const Membership oracle = s.growth == Growth::Diverging    ? Membership::In
                                  : s.growth == Growth::Converging ? Membership::Out
                                                                  : Membership::BoundaryIndeterminate;
        std::string norms;
        for (double n : s.norms)
            norms += " " + std::to_string(n);
        c.expect(oracle == v.membership, mismatch("solution-norm oracle", oracle, v.membership) + " (norms" + norms + ")");
        c.expect(kernel_search(V, f, 24, run.tol()).empty(), "kernel search found an interior kernel");
        c.expect(bilateral_shift_point_spectrum(f).membership == Membership::Out, "point spectrum not empty");
    });
}

// A real function vanishing exactly on a run of storage points, together with a function
// supported inside that run.
struct VanishingPair {
    AlgebraElement g;
    AlgebraElement f;
};

VanishingPair vanishing_pair(const AlgebraKind& kind, Case& c) {
    const int n = kind.storage_size();
    const int len = c.pick(4, n / 2);
    const int start = c.pick(0, n - len);
    const int pad = kind.tag() == KindTag::Continuous ? 1 : 0;
    std::vector<cd> g(static_cast<std::size_t>(n)), f(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const bool zero = i >= start && i < start + len;
        if (!zero) {
            const double m = c.uniform(0.5, 2.0);
            g[static_cast<std::size_t>(i)] = c.coin() ? m : -m;
        }
        const bool support = i >= start + pad && i < start + len - pad;
        f[static_cast<std::size_t>(i)] = support ? c.draw(0.5, 1.5) : cd(0.0);
    }
    return {AlgebraElement(kind, std::move(g)), AlgebraElement(kind, std::move(f))};
}

void ex_star_transfer(Runner& run) {
    int index = 0;
    run.each("", run.count(20), [&](Case& c) {
        const AlgebraKind kind = panel_kind(index++);
        const auto [g1, f] = vanishing_pair(kind, c);
        const AlgebraElement g2 = modulus_element(kind, c, 0.5, 1.5);
        const OperatorExpr G = OperatorExpr::diagonal_self_adjoint({g1, real_part(g2)});
        const AlgebraElement gt = mul(constant(kind, cd(0.0, 1.0)), g1);
        const ModuleVector x = first_coordinate(f);
        c.query = doc(kind, operator_to_json(G), gt, "star-transfer");
        c.query["vector"] = vector_to_json(x);

        c.expect(kernel_residual(G, gt, x) <= 1e-14, "(g~ - G) x should vanish");
        c.expect(!is_self_adjoint_element(gt, 1e-9), "g~ should not be self-adjoint");
        c.expect(selfadjoint_point_star_transfer(G, gt, x, run.tol()), "star transfer failed");
        c.expect(kernel_residual(G, star(gt), x) <= 1e-14, "the same vector should witness g~*");
        const Outcome o = run_check(parse_query(c.query, run.tol()));
        c.expect(o.exit_code == 0, "star-transfer query exit code " + std::to_string(o.exit_code));
        // The skew part g~ - g~* vanishes where g1 does, so the resolvent bound must refuse.
        expect_error(c, ErrorCode::SkewPartNotInvertible, [&] { skew_resolvent_bound(G, gt, 64, run.tol()); });
        const OracleReport r = invertibility_ladder(G, gt, {16, 32, 64}, run.tol());
        c.expect(r.verdict == OracleVerdict::NearSingularTrend, std::string("oracle reports ") + oracle_verdict_name(r.verdict));
    });
}

void ex_sp_residual(Runner& run) {
    run.single("m4", [&](Case& c) {
        const int n = 4;
        const AlgebraKind kind = AlgebraKind::matrix(n);
        Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(n, n), p = Eigen::MatrixXcd::Zero(n, n);
        for (int j = 0; j + 1 < n; ++j)
            s(j + 1, j) = 1.0;
        p(0, 0) = 1.0;
        const AlgebraElement P = make_matrix(p);
        c.query = doc(kind, operator_to_json(OperatorExpr::scalar_mult(make_matrix(s.adjoint()))), P, "point");

        c.expect(is_self_adjoint(OperatorExpr::scalar_mult(P), kind, 16, 1e-15), "P I should be self-adjoint");
        // S - P is an isometry-like injection: on span(e1..e4) it lands in span(e1..e5) with
        // |(S - P) x|^2 = 2|x1|^2 + |x2|^2 + |x3|^2 + |x4|^2.
        Eigen::MatrixXcd tall = Eigen::MatrixXcd::Zero(n + 1, n);
        for (int j = 0; j < n; ++j)
            tall(j + 1, j) = 1.0;
        tall(0, 0) = -1.0;
        const double smin = smallest_singular_value(tall);
        c.expect(std::abs(smin - 1.0) <= 1e-12, "tall section minimum " + std::to_string(smin));
        // S* - P kills e1 + e2.
        Eigen::VectorXcd e12 = Eigen::VectorXcd::Zero(n);
        e12(0) = e12(1) = 1.0;
        c.expect(((s.adjoint() - p) * e12).norm() == 0.0, "(S* - P)(e1 + e2) should vanish");
        Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
        y.col(0) = e12;
        const ModuleVector x = first_coordinate(make_matrix(y));
        const OperatorExpr adj = OperatorExpr::scalar_mult(make_matrix(s.adjoint()));
        c.expect(kernel_residual(adj, P, x) == 0.0, "((S* - P) I) x should vanish");
        c.expect(vector_norm(x) > 0.0, "adjoint kernel vector is zero");
    });
    // Over commutative algebras the residual-like part is empty for normal operators.
    int index = 0;
    run.each("commutative", run.count(20), [&](Case& c) {
        const AlgebraKind kind = panel_kind(index++);
        std::vector<AlgebraElement> units;
        for (int i = 0; i < 2; ++i)
            units.push_back(unitary_element(kind, c));
        const OperatorExpr U = OperatorExpr::diagonal_unitary(units);
        const double lo = c.coin() ? 0.0 : 1.3;
        const AlgebraElement a = modulus_element(kind, c, lo, lo + c.uniform(0.6, 2.0));
        c.query = doc(kind, operator_to_json(U), a, "normal-residual");
        c.expect(normal_residual_empty_check(U, a, {16, 32, 64}, c.seed, run.tol()), "normal residual check failed");
    });
}

void ex_nonorthogonal_kernels(Runner& run) {
    int index = 0;
    run.each("", run.count(20), [&](Case& c) {
        const AlgebraKind kind = panel_kind(index++);
        const auto [g1, f] = vanishing_pair(kind, c);
        const OperatorExpr G = OperatorExpr::diagonal_self_adjoint({g1});
        const AlgebraElement zero_el = zero(kind);
        const AlgebraElement gt = mul(constant(kind, cd(0.0, 1.0)), g1);
        const ModuleVector x = first_coordinate(f);
        c.query = doc(kind, operator_to_json(G), zero_el, "kernel-orthogonality");
        c.query["second_element"] = element_to_json(gt);
        c.query["vector"] = vector_to_json(x);
        c.query["second_vector"] = vector_to_json(x);

        c.expect(kernel_residual(G, zero_el, x) <= 1e-14, "x should lie in ker G");
        c.expect(kernel_residual(G, gt, x) <= 1e-14, "x should lie in ker(g~ - G)");
        c.expect(norm(gt) > 0.0, "g~ should be nonzero");
        c.expect(norm(inner_product(x, x)) > 0.0, "the shared kernel vector should not be self-orthogonal");
        expect_error(c, ErrorCode::DifferenceNotInvertible,
                     [&] { normal_kernel_orthogonality(G, zero_el, gt, x, x, run.tol()); });
    });
    run.each("invertible-difference", run.count(20), [&](Case& c) {
        const AlgebraKind kind = AlgebraKind::step(16);
        const AlgebraElement left = indicator(kind, 0.0, 0.5), right = indicator(kind, 0.5, 1.0);
        const OperatorExpr G = OperatorExpr::diagonal_self_adjoint({right});
        const ModuleVector x1 = first_coordinate(mul(left, modulus_element(kind, c, 0.5, 1.5)));
        const ModuleVector x2 = first_coordinate(mul(right, modulus_element(kind, c, 0.5, 1.5)));
        const AlgebraElement a1 = zero(kind), a2 = unit(kind);
        c.query = doc(kind, operator_to_json(G), a1, "kernel-orthogonality");
        c.query["second_element"] = element_to_json(a2);
        c.query["vector"] = vector_to_json(x1);
        c.query["second_vector"] = vector_to_json(x2);
        c.expect(normal_kernel_orthogonality(G, a1, a2, x1, x2, run.tol()), "kernels should be orthogonal");
        c.expect(norm(inner_product(x1, x2)) == 0.0, "inner product of the kernels should vanish");
    });
}

void ex_diagonal_unitary(Runner& run) {
    int index = 0;
    run.each("function", run.count(20), [&](Case& c) {
        const AlgebraKind kind = panel_kind(index++);
        // Continuous kinds only carry constant unitaries.
        const double freq = kind.tag() == KindTag::Continuous ? 0.0 : c.uniform(-3.0, 3.0);
        const cd second = c.phase();
        const AlgebraElement a1 = sample(kind, [=](double t) { return std::polar(1.0, 2.0 * kPi * freq * t); });
        const AlgebraElement a2 = constant(kind, second);
        // beta follows a1 on the first third, has modulus 3 on the last third, and is blended between.
        const AlgebraElement beta = sample(kind, [=](double t) {
            const cd at_a1 = std::polar(1.0, 2.0 * kPi * freq * t);
            if (t <= 1.0 / 3.0)
                return at_a1;
            if (t >= 2.0 / 3.0)
                return cd(3.0, 0.0);
            const double s = 3.0 * t - 1.0;
            return (1.0 - s) * at_a1 + s * cd(3.0, 0.0);
        });
        const OperatorExpr U = OperatorExpr::diagonal_unitary({a1, a2});
        c.query = doc(kind, operator_to_json(U), beta, "full");

        c.expect(norm(beta) >= 3.0 - 1e-12, "||beta|| should be 3");
        const SpectrumVerdict v = diagonal_unitary_spectrum(beta, {a1, a2}, run.tol());
        c.expect(v.membership == Membership::In, mismatch("rule", v.membership, Membership::In));
        expect_kernel_witness(c, U, beta, v.certificate);
        const OracleReport r = invertibility_ladder(U, beta, {16, 32, 64}, run.tol());
        c.expect(r.verdict == OracleVerdict::NearSingularTrend, std::string("oracle reports ") + oracle_verdict_name(r.verdict));
    });
    run.each("matrix", run.count(20), [&](Case& c) {
        const int n = 2 + c.pick(0, 1);
        const AlgebraKind kind = AlgebraKind::matrix(n);
        const Eigen::MatrixXcd u1 = random_unitary(c, n), u2 = random_unitary(c, n), basis = random_unitary(c, n);
        // T agrees with u1 on the first basis direction and acts as 3 * (unitary) on the rest.
        Eigen::MatrixXcd q1 = basis.col(0) * basis.col(0).adjoint();
        Eigen::MatrixXcd q2 = Eigen::MatrixXcd::Identity(n, n) - q1;
        const Eigen::MatrixXcd w = random_unitary(c, n);
        const AlgebraElement t = make_matrix(u1 * q1 + 3.0 * w * q2);
        const AlgebraElement a1 = make_matrix(u1), a2 = make_matrix(u2);
        const OperatorExpr U = OperatorExpr::diagonal_unitary({a1, a2});
        c.query = doc(kind, operator_to_json(U), t, "full");

        c.expect(norm(t) > 1.0, "||T|| should exceed 1");
        const SpectrumVerdict v = diagonal_unitary_spectrum(t, {a1, a2}, run.tol());
        c.expect(v.membership == Membership::In, mismatch("rule", v.membership, Membership::In));
        expect_kernel_witness(c, U, t, v.certificate);
    });
}

void star_duality(Runner& run) {
    for (DualityPair p : {DualityPair::ShiftAdjoint, DualityPair::DyadicPair, DualityPair::OddPair, DualityPair::BlockPair}) {
        int index = 0;
        run.each(duality_name(p), run.count(500), [&](Case& c) {
            const AlgebraKind kind = p == DualityPair::BlockPair ? AlgebraKind::step(16) : panel_kind(index++);
            const AlgebraElement a = random_element(kind, c.rng, c.uniform(0.2, 2.5));
            const char* op = p == DualityPair::ShiftAdjoint ? "S"
                             : p == DualityPair::DyadicPair ? "W'"
                             : p == DualityPair::OddPair    ? "W''"
                                                            : "F";
            c.query = doc(kind, op, a, "star-duality");
            c.expect(spectrum_star_duality_check(p, a, run.tol()), "membership of a and a* disagree");
        });
    }
}

void unitary_conjugation(Runner& run) {
    const AlgebraKind kind = AlgebraKind::step(16);
    int index = 0;
    run.each("", run.count(50), [&](Case& c) {
        const OperatorExpr U = OperatorExpr::diagonal_unitary(
            {modulus_element(kind, c, 1.0, 1.0), modulus_element(kind, c, 1.0, 1.0), modulus_element(kind, c, 1.0, 1.0)});
        const int which = index++ % 4;
        const OperatorExpr F = which == 0   ? shift()
                               : which == 1 ? OperatorExpr::dyadic_expand()
                               : which == 2 ? OperatorExpr::dyadic_compress()
                                            : OperatorExpr::diagonal_self_adjoint({real_part(modulus_element(kind, c, 0.2, 1.0))});
        const OperatorExpr G = OperatorExpr::compose(U, OperatorExpr::compose(F, adjoint(U)));
        const AlgebraElement a = random_element(kind, c.rng, c.uniform(0.2, 2.0));
        c.query = doc(kind, operator_to_json(G), a, "full");

        // Diagonal unitaries commute with coordinate truncation, so sections over the same
        // index window are unitarily equivalent fiber by fiber.
        const int N = 24;
        std::vector<std::int64_t> cols(N), rows(2 * N + 2);
        std::iota(cols.begin(), cols.end(), 1);
        std::iota(rows.begin(), rows.end(), 1);
        for (int f = 0; f < kind.fiber_count(); ++f) {
            const Eigen::VectorXd sf = Eigen::JacobiSVD<Eigen::MatrixXcd>(dense_section(shifted(F, a), kind, f, rows, cols)).singularValues();
            const Eigen::VectorXd sg = Eigen::JacobiSVD<Eigen::MatrixXcd>(dense_section(shifted(G, a), kind, f, rows, cols)).singularValues();
            const double gap = (sf - sg).cwiseAbs().maxCoeff();
            c.expect(gap <= 1e-10 * (1.0 + sf(0)), "singular values move under conjugation at fiber " + std::to_string(f) +
                                                       " by " + std::to_string(gap));
        }
        const OracleReport rf = invertibility_ladder(F, a, {16, 32, 64}, run.tol());
        const OracleReport rg = invertibility_ladder(G, a, {16, 32, 64}, run.tol());
        c.expect(rf.verdict == rg.verdict, std::string("oracle verdicts differ: ") + oracle_verdict_name(rf.verdict) + " vs " +
                                               oracle_verdict_name(rg.verdict));
        if (which == 2) {
            // Kernel vectors move with the conjugation.
            const AlgebraElement half = constant(kind, 0.5);
            const SpectrumVerdict p = expander_point_spectra(ExpanderKind::DyadicCompress, half, run.tol(), 64);
            if (const auto* w = std::get_if<KernelWitness>(&p.certificate))
                c.expect(kernel_residual(G, half, apply(U, w->x)) <= kWitnessTol, "conjugated kernel vector fails");
            else
                c.expect(false, "no kernel witness at 1/2");
        }
    });
}

void ex_block_shift(Runner& run) {
    const AlgebraKind kind = AlgebraKind::step(16);
    const OperatorExpr op = block_shift_operator(kind);
    run.each("", run.count(50), [&](Case& c) {
        const bool right_in = c.coin();
        const bool coincide = c.pick(0, 2) == 0;
        std::vector<cd> v(16);
        double right_inf = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 16; ++i) {
            if (i < 8) {
                // Left half: away from 1, except for an exact coincidence.
                cd z = 1.0;
                while (std::abs(z - 1.0) < 0.05)
                    z = c.draw(0.0, 2.0);
                v[static_cast<std::size_t>(i)] = z;
            } else {
                const double m = right_in ? c.uniform(0.0, 0.95) : c.uniform(1.05, 2.5);
                v[static_cast<std::size_t>(i)] = m * c.phase();
                right_inf = std::min(right_inf, m);
            }
        }
        if (coincide)
            v[static_cast<std::size_t>(c.pick(0, 7))] = 1.0;
        if (!right_in)
            right_inf = std::max(right_inf, 1.05);
        const AlgebraElement a(kind, std::move(v));
        c.query = doc(kind, "block-shift", a, "full", {{"cross_check", true}});
        const bool inside = coincide || right_in;

        const SpectrumVerdict s = block_shift_spectrum(a, run.tol());
        c.expect(s.membership == expected(inside), mismatch("rule", s.membership, expected(inside)));
        const OracleReport r = invertibility_ladder(op, a, {16, 32, 64}, run.tol());
        c.expect(oracle_membership(r.verdict) == s.membership, mismatch("oracle", oracle_membership(r.verdict), s.membership));
        if (coincide)
            expect_kernel_witness(c, op, a, s.certificate, 0.0);
    });
}

void ex_weighted_shift(Runner& run) {
    run.each("function", run.count(30), [&](Case& c) {
        const AlgebraKind kind = AlgebraKind::step(16);
        std::vector<cd> av(16), wv(16);
        for (int i = 0; i < 16; ++i) {
            av[static_cast<std::size_t>(i)] = c.pick(0, 2) == 0 ? 0.0 : 1.0;
            wv[static_cast<std::size_t>(i)] = c.pick(0, 2) == 0 ? 0.0 : c.uniform(0.5, 1.5);
        }
        const AlgebraElement a(kind, av), w(kind, wv);
        bool common = false;
        for (int i = 0; i < 16; ++i)
            common = common || (av[static_cast<std::size_t>(i)] == 0.0 && wv[static_cast<std::size_t>(i)] == 0.0);
        const std::int64_t j = c.pick(1, kDefaultDepth / 2);
        const OperatorExpr op = OperatorExpr::weighted_shift({w});
        c.query = doc(kind, operator_to_json(op), a, "point", {{"index", j}});

        const SpectrumVerdict v = weighted_shift_kernel_witness(a, {w}, j, run.tol());
        c.expect(v.membership == expected(common), mismatch("rule", v.membership, expected(common)));
        if (common)
            expect_kernel_witness(c, op, a, v.certificate);
    });
    run.each("matrix", run.count(20), [&](Case& c) {
        const AlgebraKind kind = AlgebraKind::matrix(3);
        const Eigen::MatrixXcd q = random_unitary(c, 3);
        const AlgebraElement a = make_matrix(q.col(0) * q.col(0).adjoint());
        const AlgebraElement w = make_matrix(q.col(1) * q.col(1).adjoint() * c.uniform(0.5, 2.0));
        const std::int64_t j = c.pick(1, kDefaultDepth / 2);
        const OperatorExpr op = OperatorExpr::weighted_shift({w});
        c.query = doc(kind, operator_to_json(op), a, "point", {{"index", j}});
        // Both projections annihilate the third direction.
        const SpectrumVerdict v = weighted_shift_kernel_witness(a, {w}, j, run.tol());
        c.expect(v.membership == Membership::In, mismatch("rule", v.membership, Membership::In));
        expect_kernel_witness(c, op, a, v.certificate);
    });
}

void lemma_normal(Runner& run) {
    const AlgebraKind kind = AlgebraKind::step(16);
    run.each("", run.count(30), [&](Case& c) {
        const AlgebraElement g = modulus_element(kind, c, 0.0, 2.0);
        const OperatorExpr F = OperatorExpr::diagonal_self_adjoint({real_part(g), constant(kind, c.uniform(-1.0, 1.0))});
        const AlgebraElement a = random_element(kind, c.rng, c.uniform(0.5, 4.0));
        c.query = doc(kind, operator_to_json(F), a, "bounded-below", {{"cross_check", true}});

        const SpectrumVerdict v = bounded_below_implies_invertible(F, a, {16, 32, 64}, run.tol());
        const OracleReport r = invertibility_ladder(F, a, {16, 32, 64}, run.tol());
        if (v.membership == Membership::Out)
            c.expect(r.verdict == OracleVerdict::CertifiedBoundedBelow, "bounded below but the oracle finds no inverse");
        if (r.verdict == OracleVerdict::CertifiedBoundedBelow)
            c.expect(residual_point_duality(F, a, 64, run.tol()), "residual/point duality failed");
        c.expect(normal_residual_empty_check(F, a, {16, 32, 64}, c.seed, run.tol()), "normal residual check failed");
    });
}

void prop_unitary_screen(Runner& run) {
    int index = 0;
    run.each("", run.count(50), [&](Case& c) {
        const AlgebraKind kind = panel_kind(index++);
        const bool small = c.coin();
        const AlgebraElement a = small ? modulus_element(kind, c, 0.0, c.uniform(0.1, 0.9))
                                       : modulus_element(kind, c, c.uniform(1.1, 2.0), 2.5);
        const OperatorExpr U = OperatorExpr::diagonal_unitary({unitary_element(kind, c)});
        c.query = doc(kind, operator_to_json(U), a, "screen", {{"cross_check", true}});

        const SpectrumVerdict v = unitary_norm_screen(a, run.tol());
        c.expect(v.membership == Membership::Out, mismatch("screen", v.membership, Membership::Out));
        for (const OperatorExpr& op : {U, OperatorExpr::bilateral_shift()}) {
            if (op.integer_indexed()) {
                const SolveResult s = refined_solve(op, a, 0, 16, 3, run.tol());
                c.expect(s.growth == Growth::Converging, "bilateral solve does not settle");
            } else {
                const OracleReport r = invertibility_ladder(op, a, {16, 32, 64}, run.tol());
                c.expect(r.verdict == OracleVerdict::CertifiedBoundedBelow, std::string("oracle reports ") + oracle_verdict_name(r.verdict));
            }
        }
    });
}

struct SuiteEntry {
    const char* summary;
    void (*body)(Runner&);
};

const std::map<std::string, SuiteEntry>& registry() {
    static const std::map<std::string, SuiteEntry> r = {
        {"scalar-reduction", {"shift rules over the scalars against |a| <= 1 and the unit circle", scalar_reduction}},
        {"prop-shift", {"unilateral shift rule against the section oracle, cokernel witnesses, empty point spectrum", prop_shift}},
        {"lemma-resolvent", {"explicit solutions of (a - S) x = e_k and divergence at the unit", lemma_resolvent}},
        {"mn-shift", {"shift over matrix algebras against independently computed eigenvalues", mn_shift}},
        {"cor-skew-bound", {"resolvent bound 1/(2||(a - a*)^-1||) against section minima", cor_skew_bound}},
        {"ex-m2-counterexample", {"self-adjoint matrix coefficient with a singular shift despite an invertible skew part", ex_m2_counterexample}},
        {"cor-envelope", {"envelope rule for diag(1 + t) against the oracle", cor_envelope}},
        {"ex-expanders", {"dyadic and odd expanders, compressors and their blocks", ex_expanders}},
        {"prop-bilateral", {"bilateral shift rule against divergence of solution norms", prop_bilateral}},
        {"ex-star-transfer", {"point spectrum of a real diagonal operator is closed under the involution", ex_star_transfer}},
        {"ex-sp-residual", {"matrix-coefficient operator bounded below with a nonzero adjoint kernel", ex_sp_residual}},
        {"ex-nonorthogonal-kernels", {"shared kernel vectors when the difference of points is not invertible", ex_nonorthogonal_kernels}},
        {"ex-diagonal-unitary", {"points of norm 3 inside the spectrum of a diagonal unitary", ex_diagonal_unitary}},
        {"star-duality", {"membership of a in the spectrum of F matches a* for F*", star_duality}},
        {"unitary-conjugation", {"section minima and kernels survive conjugation by a diagonal unitary", unitary_conjugation}},
        {"ex-block-shift", {"identity-plus-shift block operator against the oracle", ex_block_shift}},
        {"ex-weighted-shift", {"kernel vectors from common annihilators of a and a weight", ex_weighted_shift}},
        {"lemma-normal", {"bounded below implies invertible for self-adjoint diagonal operators", lemma_normal}},
        {"prop-unitary-screen", {"norm screen for unitaries against the oracle", prop_unitary_screen}},
    };
    return r;
}

} // namespace

Scale scale_from_name(const std::string& name) {
    if (name == "small")
        return Scale::Small;
    if (name == "full")
        return Scale::Full;
    throw Error(ErrorCode::ConfigError, "scale must be small or full, not \"" + name + "\"");
}

const char* scale_name(Scale s) noexcept { return s == Scale::Small ? "small" : "full"; }

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, entry] : registry())
            out.push_back(name);
        return out;
    }();
    return names;
}

std::string suite_summary(const std::string& name) {
    auto it = registry().find(name);
    if (it == registry().end())
        throw Error(ErrorCode::UnknownSuite, "no suite named \"" + name + "\"");
    return it->second.summary;
}

SuiteResult run_suite(const std::string& name, std::uint64_t seed, Scale scale, const ToleranceConfig& tol) {
    auto it = registry().find(name);
    if (it == registry().end())
        throw Error(ErrorCode::UnknownSuite, "no suite named \"" + name + "\"");
    SuiteResult result;
    result.suite = name;
    result.seed = seed;
    result.scale = scale;
    const auto start = std::chrono::steady_clock::now();
    Runner runner(result, tol);
    it->second.body(runner);
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::sort(result.failures.begin(), result.failures.end(),
              [](const SuiteFailure& a, const SuiteFailure& b) { return a.case_id < b.case_id; });
    return result;
}

json suite_result_to_json(const SuiteResult& r, bool with_time) {
    json failures = json::array();
    for (const SuiteFailure& f : r.failures)
        failures.push_back({{"case", f.case_id}, {"seed", f.seed}, {"message", f.message}, {"query", f.query}});
    json j = {{"suite", r.suite},
              {"seed", r.seed},
              {"scale", scale_name(r.scale)},
              {"cases", r.cases},
              {"passed", r.passed()},
              {"failures", std::move(failures)}};
    if (with_time)
        j["wall_seconds"] = r.wall_seconds;
    return j;
}

} // namespace gspec
