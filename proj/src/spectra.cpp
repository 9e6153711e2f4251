#include "gspec/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace gspec {

const char* membership_name(Membership m) noexcept {
    switch (m) {
    case Membership::In: return "In";
    case Membership::Out: return "Out";
    case Membership::BoundaryIndeterminate: return "BoundaryIndeterminate";
    case Membership::Inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

const char* part_name(SpectrumPart p) noexcept {
    switch (p) {
    case SpectrumPart::Full: return "Full";
    case SpectrumPart::Point: return "Point";
    case SpectrumPart::ResidualLike: return "ResidualLike";
    case SpectrumPart::ApproxPoint: return "ApproxPoint";
    }
    return "Full";
}

const char* certificate_name(const Certificate& c) noexcept {
    static constexpr const char* names[] = {"None",           "KernelWitness",      "CokernelWitness", "ResolventSolution",
                                            "InvertibilityBound", "GrowthDiagnostic", "OracleReport"};
    return names[c.index()];
}

namespace {

constexpr double kWitnessTol = 1e-8;

void require_function(const AlgebraElement& a, const char* what) {
    if (!a.kind().is_function())
        throw Error(ErrorCode::KindUnsupported, std::string(what) + " needs a function algebra, got " + a.kind().name());
}

void require_step(const AlgebraElement& a, const char* what) {
    if (a.kind().tag() != KindTag::Step)
        throw Error(ErrorCode::KindUnsupported, std::string(what) + " needs a step-function algebra, got " + a.kind().name());
}

SpectrumVerdict verdict(Membership m, SpectrumPart part, Certificate cert, std::string rule, double value = 0.0) {
    SpectrumVerdict v;
    v.membership = m;
    v.part = part;
    v.certificate = std::move(cert);
    v.rule = std::move(rule);
    v.deciding_value = value;
    return v;
}

AlgebraKind kind_for(const OperatorExpr& F, const AlgebraElement& a) {
    if (F.kind() && !(*F.kind() == a.kind()))
        throw Error(ErrorCode::KindMismatch, "operator is over " + F.kind()->name() + ", element over " + a.kind().name());
    return a.kind();
}

Indexing indexing_for(const OperatorExpr& F, int N) {
    return F.integer_indexed() ? Indexing::integers(N) : Indexing::natural(N);
}

bool is_zero(const AlgebraElement& a) {
    return std::all_of(a.data().begin(), a.data().end(), [](cd z) { return z == cd(0.0); });
}

// 0/1 element marking where |a| <= level. On continuous kinds a node is kept only when its
// neighbours qualify too: |a| of a linear interpolant is convex on each interval, so the
// interpolated indicator then vanishes wherever the interpolated |a| exceeds the level.
AlgebraElement small_set_indicator(const AlgebraElement& a, double level) {
    const AlgebraKind& k = a.kind();
    const int n = k.storage_size();
    std::vector<cd> g(static_cast<std::size_t>(n), cd(0.0));
    auto small = [&](int i) { return std::abs(a.value(i)) <= level; };
    for (int i = 0; i < n; ++i) {
        bool keep = small(i);
        if (keep && k.tag() == KindTag::Continuous)
            keep = (i == 0 || small(i - 1)) && (i == n - 1 || small(i + 1));
        if (keep)
            g[static_cast<std::size_t>(i)] = 1.0;
    }
    return AlgebraElement(k, std::move(g));
}

// x_{idx[0]} = start, x_{idx[i+1]} = factor x_{idx[i]}.
ModuleVector geometric_chain(const AlgebraKind& kind, int N, const std::vector<std::int64_t>& idx,
                             const AlgebraElement& start, const AlgebraElement& factor) {
    ModuleVector x = ModuleVector::zeros(kind, Indexing::natural(N));
    AlgebraElement cur = start;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i > 0)
            cur = mul(factor, cur);
        x.set(idx[i], cur);
    }
    return x;
}

std::vector<std::int64_t> consecutive(std::int64_t limit) {
    std::vector<std::int64_t> out;
    for (std::int64_t k = 1; k <= limit; ++k)
        out.push_back(k);
    return out;
}

std::vector<std::int64_t> dyadic_chain(std::int64_t limit) {
    std::vector<std::int64_t> out;
    for (std::int64_t k = 1; k <= limit; k *= 2)
        out.push_back(k);
    return out;
}

// Support element of the witness for inf|a| < 1: the set {|a| <= 1 - eps}, eps = (1 - inf|a|)/2.
std::optional<AlgebraElement> witness_support(const AlgebraElement& a) {
    const double eps = (1.0 - inf_abs(a)) / 2.0;
    AlgebraElement g = small_set_indicator(a, 1.0 - eps);
    if (is_zero(g))
        return std::nullopt;
    return g;
}

Certificate checked_kernel(const OperatorExpr& F, const AlgebraElement& a, ModuleVector x) {
    const double r = kernel_residual(F, a, x);
    if (!(r <= kWitnessTol) || vector_norm(x) < 1e-6)
        throw Error(ErrorCode::WitnessCheckFailed,
                    "kernel witness for " + F.describe() + " has residual " + std::to_string(r));
    return KernelWitness{std::move(x), r};
}

Certificate checked_cokernel(const OperatorExpr& F, const AlgebraElement& a, ModuleVector x) {
    const double p = cokernel_pairing(F, a, x);
    if (!(p <= kWitnessTol) || vector_norm(x) < 1e-6)
        throw Error(ErrorCode::WitnessCheckFailed,
                    "cokernel witness for " + F.describe() + " has pairing " + std::to_string(p));
    return CokernelWitness{std::move(x), p};
}

// Indicator of {a = 1}, read at grid scale.
AlgebraElement unit_coincidence(const AlgebraElement& a, const ToleranceConfig& tol) {
    AlgebraElement m = zero(a.kind());
    for (const AlgebraElement& g : right_annihilator_basis(sub(a, unit(a.kind())), tol))
        m = add(m, g);
    return m;
}

AlgebraElement left_half(const AlgebraKind& kind) { return indicator(kind, 0.0, 0.5); }
AlgebraElement right_half(const AlgebraKind& kind) { return indicator(kind, 0.5, 1.0); }

} // namespace

double kernel_residual(const OperatorExpr& F, const AlgebraElement& a, const ModuleVector& x) {
    return interior_norm(apply(shifted(F, a), x));
}

double cokernel_pairing(const OperatorExpr& F, const AlgebraElement& a, const ModuleVector& x) {
    const OperatorExpr t = shifted(F, a);
    const Indexing& ix = x.indexing();
    double worst = 0.0;
    for (std::int64_t k = ix.first(); k <= ix.last(); ++k) {
        if (!ix.interior(k))
            continue;
        const ModuleVector image = apply(t, basis_vector(k, x.kind(), ix));
        worst = std::max(worst, norm(inner_product(image, x)));
    }
    return worst;
}

GrowthDiagnostic power_growth(const AlgebraElement& b, const ToleranceConfig& tol) {
    if (b.kind().is_commutative()) {
        std::vector<double> moduli;
        if (b.kind().is_function())
            moduli = refined_abs_values(b);
        else
            moduli = {std::abs(b.value(0))};
        return geometric_membership_diagnostic(moduli, tol.eq_tol);
    }
    return adaptive_membership_diagnostic(power_sequence(b), tol.eq_tol);
}

// ---------------------------------------------------------------------------------------
// unilateral shift

Certificate shift_cokernel_witness(const AlgebraElement& a, int N, const ToleranceConfig& tol) {
    require_function(a, "the shift cokernel witness");
    const double v = inf_abs(a);
    if (!(v < 1.0 - tol.boundary_band))
        throw Error(ErrorCode::NotApplicable, "inf|a| = " + std::to_string(v) + " is not below 1");
    auto g = witness_support(a);
    if (!g)
        throw Error(ErrorCode::NotApplicable, "the grid is too coarse to hold a support set for the witness");
    ModuleVector x = geometric_chain(a.kind(), N, consecutive(N), *g, star(a));
    return checked_cokernel(OperatorExpr::unilateral_shift(), a, std::move(x));
}

Certificate shift_resolvent_solution(const AlgebraElement& a, std::int64_t k, int N, const ToleranceConfig& tol) {
    const AlgebraElement inv = inverse(a, tol);
    if (k < 1 || k > N / 2)
        throw Error(ErrorCode::IndexOutOfRange, "target index must lie in 1.." + std::to_string(N / 2));
    ModuleVector x = geometric_chain(a.kind(), N, [&] {
        std::vector<std::int64_t> idx;
        for (std::int64_t n = k; n <= N; ++n)
            idx.push_back(n);
        return idx;
    }(), inv, inv);

    // (a - S) x - e_k, written as -(S - a) x - e_k.
    const ModuleVector image = apply(shifted(OperatorExpr::unilateral_shift(), a), x);
    const ModuleVector r = add(image, basis_vector(k, a.kind(), x.indexing()));
    ResolventSolution s{x, k, interior_norm(r), norm(x.at(N)), power_growth(inv, tol)};
    return s;
}

SpectrumVerdict unilateral_shift_spectrum(const AlgebraElement& a, const ToleranceConfig& tol, int N) {
    if (!a.kind().is_function())
        throw Error(ErrorCode::KindUnsupported, "matrix kinds are decided by mn_shift_spectrum");
    const double v = inf_abs(a);
    if (v > 1.0 + tol.boundary_band)
        return verdict(Membership::Out, SpectrumPart::Full, power_growth(inverse(to_refined_grid(a), tol), tol),
                       "shift-inf-modulus", v);
    if (v >= 1.0 - tol.boundary_band)
        return verdict(Membership::In, SpectrumPart::Full,
                       NoCertificate{"inf|a| lies in the boundary band of 1; the spectrum is closed"},
                       "shift-inf-modulus/closure", v);
    Certificate cert = NoCertificate{"no support set on this grid"};
    try {
        cert = shift_cokernel_witness(a, N, tol);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NotApplicable)
            throw;
    }
    return verdict(Membership::In, SpectrumPart::Full, std::move(cert), "shift-inf-modulus", v);
}

SpectrumVerdict unilateral_shift_point_spectrum(const AlgebraElement& a) {
    require_function(a, "the shift point spectrum");
    return verdict(Membership::Out, SpectrumPart::Point, NoCertificate{"kernel recursion forces x = 0"},
                   "shift-point-empty");
}

SpectrumVerdict shift_spectrum_commutative(const AlgebraElement& a, const ToleranceConfig& tol) {
    if (!a.kind().is_commutative())
        throw Error(ErrorCode::KindUnsupported, "the commutative rule needs a commutative algebra");
    // The refined grid is where inf|a| is read, so the sequence is sampled there too.
    const AlgebraElement fine = to_refined_grid(a);
    const double v = inf_abs(fine);
    auto inv = try_invert(fine, tol);
    if (std::holds_alternative<NotInvertible>(inv))
        return verdict(Membership::In, SpectrumPart::Full, NoCertificate{"a is not invertible"},
                       "commutative-not-invertible", v);
    GrowthDiagnostic d = power_growth(std::get<AlgebraElement>(inv), tol);
    if (d.verdict != Growth::Converging)
        return verdict(Membership::In, SpectrumPart::Full, std::move(d), "commutative-inverse-powers", v);
    // Decay slower than the band resolves is read as the limit case, as in the closed rule.
    if (v <= 1.0 + tol.boundary_band)
        return verdict(Membership::In, SpectrumPart::Full, std::move(d), "commutative-inverse-powers/closure", v);
    return verdict(Membership::Out, SpectrumPart::Full, std::move(d), "commutative-inverse-powers", v);
}

SpectrumVerdict mn_shift_spectrum(const AlgebraElement& t, const ToleranceConfig& tol) {
    if (t.kind().tag() != KindTag::Matrix)
        throw Error(ErrorCode::KindUnsupported, "mn_shift_spectrum needs a matrix algebra");
    double smallest = std::numeric_limits<double>::infinity();
    for (cd lambda : matrix_eigenvalues(t))
        smallest = std::min(smallest, std::abs(lambda));
    auto inv = try_invert(t, tol);
    if (std::holds_alternative<NotInvertible>(inv)) {
        SpectrumVerdict v = verdict(Membership::In, SpectrumPart::Full,
                                    NoCertificate{"T is singular, hence not right invertible"},
                                    "matrix-not-right-invertible", smallest);
        v.note = "in finite dimension right invertible means invertible and N_T = {0}, so the W set is empty";
        return v;
    }
    GrowthDiagnostic d = power_growth(std::get<AlgebraElement>(inv), tol);
    const Membership m = d.verdict == Growth::Converging ? Membership::Out : Membership::In;
    SpectrumVerdict v = verdict(m, SpectrumPart::Full, std::move(d), "matrix-inverse-powers", smallest);
    v.note = "in finite dimension right invertible means invertible and N_T = {0}, so the W set is empty";
    return v;
}

SpectrumVerdict adjoint_shift_spectrum(const AlgebraElement& a, const ToleranceConfig& tol, int N) {
    require_function(a, "the adjoint shift spectrum");
    const double v = inf_abs(a);
    if (v > 1.0 + tol.boundary_band)
        return verdict(Membership::Out, SpectrumPart::Full, power_growth(inverse(to_refined_grid(a), tol), tol),
                       "adjoint-shift-inf-modulus", v);
    if (v >= 1.0 - tol.boundary_band)
        return verdict(Membership::In, SpectrumPart::Full,
                       NoCertificate{"inf|a| lies in the boundary band of 1; the spectrum is closed"},
                       "adjoint-shift-inf-modulus/closure", v);
    Certificate cert = NoCertificate{"no support set on this grid"};
    if (auto g = witness_support(a))
        cert = checked_kernel(adjoint(OperatorExpr::unilateral_shift()), a,
                              geometric_chain(a.kind(), N, consecutive(N), *g, a));
    return verdict(Membership::In, SpectrumPart::Full, std::move(cert), "adjoint-shift-inf-modulus", v);
}

// ---------------------------------------------------------------------------------------
// weighted, block and bilateral shifts, diagonal unitaries

SpectrumVerdict weighted_shift_kernel_witness(const AlgebraElement& a, const std::vector<AlgebraElement>& w,
                                              std::int64_t j, const ToleranceConfig& tol, int N) {
    if (w.empty())
        throw Error(ErrorCode::ConfigError, "a weighted shift needs at least one weight");
    if (j < 1 || j > N / 2)
        throw Error(ErrorCode::IndexOutOfRange, "j must lie in 1.." + std::to_string(N / 2));
    const AlgebraElement& wj = w[static_cast<std::size_t>((j - 1) % static_cast<std::int64_t>(w.size()))];
    if (!(wj.kind() == a.kind()))
        throw Error(ErrorCode::KindMismatch, "weights and element live in different algebras");
    const AlgebraKind& kind = a.kind();

    AlgebraElement gamma = zero(kind);
    if (kind.is_function()) {
        AlgebraElement ga = zero(kind), gw = zero(kind);
        for (const AlgebraElement& g : right_annihilator_basis(a, tol))
            ga = add(ga, g);
        for (const AlgebraElement& g : right_annihilator_basis(wj, tol))
            gw = add(gw, g);
        gamma = mul(ga, gw);
    } else {
        // Orthogonal projection onto ker a ∩ ker w_j.
        const int n = kind.n();
        Eigen::MatrixXcd stacked(2 * n, n);
        stacked << a.matrix(), wj.matrix();
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(stacked, Eigen::ComputeFullV);
        Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(n, n);
        for (int c = 0; c < n; ++c)
            if (svd.singularValues()(c) <= tol.eq_tol)
                p += svd.matrixV().col(c) * svd.matrixV().col(c).adjoint();
        gamma = make_matrix(p);
    }
    if (norm(gamma) <= tol.eq_tol)
        return verdict(Membership::Out, SpectrumPart::Point, NoCertificate{"no common annihilator at j"},
                       "weighted-shift-common-annihilator");

    ModuleVector x = ModuleVector::zeros(kind, Indexing::natural(N));
    x.set(j, gamma);
    const double r = vector_norm(apply(shifted(OperatorExpr::weighted_shift(w), a), x));
    if (!(r <= kWitnessTol))
        throw Error(ErrorCode::WitnessCheckFailed, "weighted shift witness residual " + std::to_string(r));
    return verdict(Membership::In, SpectrumPart::Point, KernelWitness{std::move(x), r},
                   "weighted-shift-common-annihilator");
}

OperatorExpr block_shift_operator(const AlgebraKind& kind) {
    return OperatorExpr::block(left_half(kind), OperatorExpr::scalar_mult(unit(kind)),
                               OperatorExpr::unilateral_shift());
}

SpectrumVerdict block_shift_spectrum(const AlgebraElement& a, const ToleranceConfig& tol, int N) {
    require_step(a, "the block shift spectrum");
    const AlgebraKind& kind = a.kind();
    double right_min = std::numeric_limits<double>::infinity();
    double left_gap = std::numeric_limits<double>::infinity();
    std::vector<cd> coincide(static_cast<std::size_t>(kind.storage_size()), cd(0.0));
    bool any_coincide = false;
    for (int i = 0; i < kind.storage_size(); ++i) {
        const cd z = a.value(i);
        if (kind.sample_point(i) > 0.5) {
            right_min = std::min(right_min, std::abs(z));
        } else {
            left_gap = std::min(left_gap, std::abs(z - 1.0));
            if (std::abs(z - 1.0) <= tol.eq_tol) {
                coincide[static_cast<std::size_t>(i)] = 1.0;
                any_coincide = true;
            }
        }
    }
    const OperatorExpr op = block_shift_operator(kind);

    if (any_coincide) {
        ModuleVector x = ModuleVector::zeros(kind, Indexing::natural(N));
        x.set(1, AlgebraElement(kind, coincide));
        return verdict(Membership::In, SpectrumPart::Full, checked_kernel(op, a, std::move(x)),
                       "block-shift-left-coincidence", right_min);
    }
    if (right_min > 1.0 + tol.boundary_band) {
        const double bound = std::min(left_gap, right_min - 1.0);
        return verdict(Membership::Out, SpectrumPart::Full, InvertibilityBound{bound}, "block-shift-right-inf",
                       right_min);
    }
    if (right_min >= 1.0 - tol.boundary_band)
        return verdict(Membership::In, SpectrumPart::Full,
                       NoCertificate{"right-block inf|a| lies in the boundary band of 1"},
                       "block-shift-right-inf/closure", right_min);

    const double eps = (1.0 - right_min) / 2.0;
    const AlgebraElement g = mul(small_set_indicator(a, 1.0 - eps), right_half(kind));
    ModuleVector x = geometric_chain(kind, N, consecutive(N), g, star(a));
    return verdict(Membership::In, SpectrumPart::Full, checked_cokernel(op, a, std::move(x)), "block-shift-right-inf",
                   right_min);
}

SpectrumVerdict bilateral_shift_spectrum(const AlgebraElement& f, const ToleranceConfig& tol) {
    require_function(f, "the bilateral shift spectrum");
    const std::vector<double> mods = refined_abs_values(f);
    double dist = std::numeric_limits<double>::infinity();
    bool in = false;
    if (f.kind().tag() == KindTag::Continuous) {
        // The range of |f| over [0,1] is an interval, so only its ends matter.
        const auto [lo, hi] = std::minmax_element(mods.begin(), mods.end());
        in = *lo <= 1.0 + tol.boundary_band && *hi >= 1.0 - tol.boundary_band;
        dist = std::max({0.0, *lo - 1.0, 1.0 - *hi});
    } else {
        for (double m : mods)
            dist = std::min(dist, std::abs(m - 1.0));
        in = dist <= tol.boundary_band;
    }
    if (in)
        return verdict(Membership::In, SpectrumPart::Full, NoCertificate{"the range of |f| meets 1"},
                       "bilateral-range-meets-unit", dist);
    return verdict(Membership::Out, SpectrumPart::Full, InvertibilityBound{dist}, "bilateral-range-meets-unit", dist);
}

SpectrumVerdict bilateral_shift_point_spectrum(const AlgebraElement& f) {
    require_function(f, "the bilateral shift point spectrum");
    return verdict(Membership::Out, SpectrumPart::Point,
                   NoCertificate{"a kernel vector would have constant-modulus coordinates"}, "bilateral-point-empty");
}

SpectrumVerdict diagonal_unitary_spectrum(const AlgebraElement& b, const std::vector<AlgebraElement>& units,
                                          const ToleranceConfig& tol, int N) {
    if (units.empty())
        throw Error(ErrorCode::ConfigError, "a diagonal unitary needs at least one entry");
    for (const AlgebraElement& u : units) {
        if (!(u.kind() == b.kind()))
            throw Error(ErrorCode::KindMismatch, "diagonal entries and element live in different algebras");
        if (!is_unitary_element(u, 1e-8))
            throw Error(ErrorCode::PreconditionFailed, "diagonal entries must be unitary");
    }
    const int depth = std::max(N, 2 * static_cast<int>(units.size()) + 2);
    const OperatorExpr op = OperatorExpr::diagonal_unitary(units);
    auto finish = [&](SpectrumVerdict v) {
        const double nb = norm(b);
        if (v.membership == Membership::In && nb > 1.0)
            v.note = "norm(b) = " + std::to_string(nb) + " > 1 and still b is in the spectrum";
        return v;
    };

    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < units.size(); ++k) {
        const AlgebraElement d = sub(b, units[k]);
        const auto ann = right_annihilator_basis(d, tol);
        if (!ann.empty()) {
            ModuleVector x = ModuleVector::zeros(b.kind(), Indexing::natural(depth));
            x.set(static_cast<std::int64_t>(k) + 1, ann.front());
            return finish(verdict(Membership::In, SpectrumPart::Full, checked_kernel(op, b, std::move(x)),
                                  "diagonal-unitary-annihilator", 0.0));
        }
        const double lower = inf_abs(d);
        if (!(lower > tol.eq_tol))
            return finish(verdict(Membership::In, SpectrumPart::Full,
                                  NoCertificate{"b - a_" + std::to_string(k + 1) + " is not invertible"},
                                  "diagonal-unitary-singular", lower));
        gap = std::min(gap, lower);
    }
    return finish(verdict(Membership::Out, SpectrumPart::Full, InvertibilityBound{gap}, "diagonal-unitary-singular",
                          gap));
}

SpectrumVerdict unitary_norm_screen(const AlgebraElement& a, const ToleranceConfig& tol) {
    const double na = norm(a);
    if (na < 1.0 - tol.boundary_band)
        return verdict(Membership::Out, SpectrumPart::Full, InvertibilityBound{1.0 - na}, "unitary-norm-screen", na);
    auto inv = try_invert(a, tol);
    if (auto* good = std::get_if<AlgebraElement>(&inv)) {
        const double ni = norm(*good);
        if (ni < 1.0 - tol.boundary_band)
            return verdict(Membership::Out, SpectrumPart::Full, InvertibilityBound{(1.0 - ni) / ni},
                           "unitary-norm-screen", ni);
    }
    return verdict(Membership::Inconclusive, SpectrumPart::Full,
                   NoCertificate{"the norm screen cannot decide membership for a general unitary"},
                   "unitary-norm-screen", na);
}

// ---------------------------------------------------------------------------------------
// general operators

namespace {

void require_commutative(const AlgebraKind& kind, const char* what) {
    if (!kind.is_commutative())
        throw Error(ErrorCode::NotCommutative, std::string(what) + " needs a commutative algebra, got " + kind.name());
}

constexpr int kStructureDepth = 32;

// e_1, e_2 and a few random interior vectors.
std::vector<ModuleVector> target_panel(const OperatorExpr& F, const AlgebraKind& kind, int N, std::uint64_t seed,
                                       int random_count) {
    const Indexing ix = indexing_for(F, N);
    std::vector<ModuleVector> out;
    const std::int64_t first = F.integer_indexed() ? 0 : 1;
    out.push_back(basis_vector(first, kind, ix));
    out.push_back(basis_vector(first + 1, kind, ix));
    std::mt19937_64 rng(seed);
    for (int i = 0; i < random_count; ++i)
        out.push_back(random_interior_vector(kind, ix, rng));
    return out;
}

bool solvable(const OperatorExpr& F, const AlgebraElement& a, const ModuleVector& target, int N,
              const ToleranceConfig& tol) {
    const SolveResult r = solve(F, a, target, N, tol);
    return r.residual <= 1e-7 && r.growth != Growth::Diverging;
}

} // namespace

bool selfadjoint_point_star_transfer(const OperatorExpr& F, const AlgebraElement& a, const ModuleVector& x,
                                     const ToleranceConfig& /*tol*/) {
    const AlgebraKind kind = kind_for(F, a);
    if (!(x.kind() == kind))
        throw Error(ErrorCode::KindMismatch, "vector and element live in different algebras");
    if (!kind.is_commutative())
        throw Error(ErrorCode::PreconditionFailed, "the transfer needs a commutative algebra, got " + kind.name());
    if (!is_self_adjoint(F, kind, std::max(x.indexing().extent(), 4), 1e-8))
        throw Error(ErrorCode::PreconditionFailed, "operator is not self-adjoint");
    const double r = vector_norm(apply(shifted(F, a), x));
    if (!(r <= kWitnessTol))
        throw Error(ErrorCode::PreconditionFailed, "x is not a kernel vector: residual " + std::to_string(r));
    return vector_norm(apply(shifted(F, star(a)), x)) <= 1e-7;
}

bool residual_point_duality(const OperatorExpr& F, const AlgebraElement& a, int N, const ToleranceConfig& tol) {
    const AlgebraKind kind = kind_for(F, a);
    const OracleReport below = bounded_below_ladder(F, a, {16, 32, 64}, tol);
    if (below.verdict != OracleVerdict::CertifiedBoundedBelow)
        throw Error(ErrorCode::PreconditionNotCertified,
                    std::string("bounded below not certified: ") + oracle_verdict_name(below.verdict));
    const bool adjoint_kernel = !kernel_search(adjoint(F), star(a), N, tol).empty();
    bool defect = false;
    for (const ModuleVector& y : target_panel(F, kind, N, 7, 2))
        defect = defect || !solvable(F, a, y, N, tol);
    return adjoint_kernel == defect;
}

SpectrumVerdict bounded_below_implies_invertible(const OperatorExpr& F, const AlgebraElement& a,
                                                 std::vector<int> depths, const ToleranceConfig& tol) {
    const AlgebraKind kind = kind_for(F, a);
    require_commutative(kind, "bounded_below_implies_invertible");
    if (!is_self_adjoint(F, kind, kStructureDepth, 1e-8))
        throw Error(ErrorCode::NotSelfAdjoint, F.describe() + " is not self-adjoint");
    OracleReport rep = bounded_below_ladder(F, a, std::move(depths), tol);
    const double last = rep.sv_min.empty() ? 0.0 : rep.sv_min.back();
    SpectrumVerdict v;
    switch (rep.verdict) {
    case OracleVerdict::CertifiedBoundedBelow:
        v = verdict(Membership::Out, SpectrumPart::Full, InvertibilityBound{rep.bound}, "self-adjoint-bounded-below",
                    last);
        break;
    case OracleVerdict::NearSingularTrend:
        v = verdict(Membership::In, SpectrumPart::ApproxPoint, rep, "oracle-only", last);
        break;
    case OracleVerdict::Indeterminate:
        v = verdict(Membership::BoundaryIndeterminate, SpectrumPart::Full, rep, "oracle-only", last);
        break;
    }
    v.oracle = std::move(rep);
    return v;
}

SpectrumVerdict skew_resolvent_bound(const OperatorExpr& F, const AlgebraElement& a, int N,
                                     const ToleranceConfig& tol) {
    const AlgebraKind kind = kind_for(F, a);
    require_commutative(kind, "skew_resolvent_bound");
    if (!is_self_adjoint(F, kind, N, 1e-8))
        throw Error(ErrorCode::NotSelfAdjoint, F.describe() + " is not self-adjoint");
    auto inv = try_invert(sub(a, star(a)), tol);
    if (auto* bad = std::get_if<NotInvertible>(&inv))
        throw Error(ErrorCode::SkewPartNotInvertible,
                    "a - a* is not invertible: inf|a - a*| = " + std::to_string(bad->inf_abs));
    const double bound = 1.0 / (2.0 * norm(std::get<AlgebraElement>(inv)));

    OracleReport rep = bounded_below_ladder(F, a, {16, 32, 64}, tol);
    for (double s : rep.sv_min)
        if (s < bound - 1e-6)
            throw Error(ErrorCode::WitnessCheckFailed, "section minimum " + std::to_string(s) +
                                                           " falls below the resolvent bound " + std::to_string(bound));
    SpectrumVerdict v =
        verdict(Membership::Out, SpectrumPart::Full, InvertibilityBound{bound}, "skew-part-resolvent-bound", bound);
    v.oracle = std::move(rep);
    return v;
}

SpectrumVerdict selfadjoint_spectrum_envelope(const OperatorExpr& F, const AlgebraElement& a,
                                              const ToleranceConfig& tol, int N) {
    const AlgebraKind kind = kind_for(F, a);
    if (!kind.is_commutative())
        throw Error(ErrorCode::KindUnsupported, "the envelope compares moduli and needs a commutative algebra");
    const SelfAdjointBounds b = self_adjoint_bounds(F, kind, N, 64, 1, tol);
    if (b.method != BoundsMethod::ClosedFormDiagonal)
        throw Error(ErrorCode::BoundsNotClosedForm, "m(F) and M(F) are only estimated for " + F.describe());
    const double m = b.m_lower;
    const double M = b.M_upper;
    const std::vector<double> mods = kind.is_function() ? refined_abs_values(a) : std::vector<double>{std::abs(a.value(0))};

    bool misses = true;
    double eps = std::numeric_limits<double>::infinity();
    if (kind.tag() == KindTag::Continuous) {
        const auto [lo, hi] = std::minmax_element(mods.begin(), mods.end());
        misses = *hi < m - tol.boundary_band || *lo > M + tol.boundary_band;
    } else {
        for (double v : mods)
            misses = misses && (v < m - tol.boundary_band || v > M + tol.boundary_band);
    }
    for (double v : mods)
        eps = std::min(eps, std::max({0.0, m - v, v - M}));
    if (!misses)
        return verdict(Membership::Inconclusive, SpectrumPart::Full,
                       NoCertificate{"|a| meets [m(F), M(F)]; the envelope is an inclusion only"},
                       "self-adjoint-envelope", eps);
    SpectrumVerdict v =
        verdict(Membership::Out, SpectrumPart::Full, InvertibilityBound{eps}, "self-adjoint-envelope", eps);
    v.note = "step kinds use the gap reading: a set of |a| values away from [m - band, M + band]";
    return v;
}

bool normal_kernel_orthogonality(const OperatorExpr& F, const AlgebraElement& a1, const AlgebraElement& a2,
                                 const ModuleVector& x1, const ModuleVector& x2, const ToleranceConfig& tol) {
    const AlgebraKind kind = kind_for(F, a1);
    require_commutative(kind, "normal_kernel_orthogonality");
    if (!(a2.kind() == kind) || !(x1.kind() == kind) || !(x2.kind() == kind))
        throw Error(ErrorCode::KindMismatch, "elements and vectors live in different algebras");
    if (!is_normal(F, kind, std::max(x1.indexing().extent(), 4), 1e-8))
        throw Error(ErrorCode::NotNormal, F.describe() + " is not normal");
    const double r1 = vector_norm(apply(shifted(F, a1), x1));
    const double r2 = vector_norm(apply(shifted(F, a2), x2));
    if (!(r1 <= kWitnessTol) || !(r2 <= kWitnessTol))
        throw Error(ErrorCode::PreconditionFailed, "x1 and x2 must be kernel vectors");
    if (std::holds_alternative<NotInvertible>(try_invert(sub(a1, a2), tol)))
        throw Error(ErrorCode::DifferenceNotInvertible, "a1 - a2 is not invertible");
    return is_orthogonal(x1, x2, 1e-7);
}

bool normal_residual_empty_check(const OperatorExpr& F, const AlgebraElement& a, std::vector<int> depths,
                                 std::uint64_t seed, const ToleranceConfig& tol) {
    const AlgebraKind kind = kind_for(F, a);
    require_commutative(kind, "normal_residual_empty_check");
    if (!is_normal(F, kind, kStructureDepth, 1e-8))
        throw Error(ErrorCode::NotNormal, F.describe() + " is not normal");
    const OracleReport rep = bounded_below_ladder(F, a, std::move(depths), tol);
    if (rep.verdict != OracleVerdict::CertifiedBoundedBelow)
        return true;
    constexpr int N = 64;
    for (const ModuleVector& y : target_panel(F, kind, N, seed, 3))
        if (!solvable(F, a, y, N, tol))
            return false;
    return true;
}

SpectrumVerdict approx_point_membership(const OperatorExpr& F, const AlgebraElement& a, std::vector<int> depths,
                                        const ToleranceConfig& tol) {
    kind_for(F, a);
    OracleReport rep = bounded_below_ladder(F, a, std::move(depths), tol);
    const double last = rep.sv_min.empty() ? 0.0 : rep.sv_min.back();
    SpectrumVerdict v;
    switch (rep.verdict) {
    case OracleVerdict::CertifiedBoundedBelow:
        v = verdict(Membership::Out, SpectrumPart::ApproxPoint, InvertibilityBound{rep.bound}, "oracle-bounded-below",
                    last);
        break;
    case OracleVerdict::NearSingularTrend:
        v = verdict(Membership::In, SpectrumPart::ApproxPoint, rep, "oracle-bounded-below", last);
        break;
    case OracleVerdict::Indeterminate:
        v = verdict(Membership::BoundaryIndeterminate, SpectrumPart::ApproxPoint, rep, "oracle-bounded-below", last);
        break;
    }
    v.oracle = std::move(rep);
    return v;
}

// ---------------------------------------------------------------------------------------
// dyadic expanders and compressors

const char* expander_name(ExpanderKind k) noexcept {
    switch (k) {
    case ExpanderKind::DyadicExpand: return "dyadic-expand";
    case ExpanderKind::OddExpand: return "odd-expand";
    case ExpanderKind::DyadicCompress: return "dyadic-compress";
    case ExpanderKind::OddCompress: return "odd-compress";
    case ExpanderKind::FBlock: return "f-block";
    case ExpanderKind::DBlock: return "d-block";
    }
    return "dyadic-expand";
}

std::optional<ExpanderKind> expander_from_name(const std::string& name) {
    static const std::pair<const char*, ExpanderKind> aliases[] = {
        {"W'", ExpanderKind::DyadicExpand},  {"W''", ExpanderKind::OddExpand}, {"Z", ExpanderKind::DyadicCompress},
        {"Z'", ExpanderKind::OddCompress},   {"F", ExpanderKind::FBlock},      {"D", ExpanderKind::DBlock},
    };
    for (ExpanderKind k : {ExpanderKind::DyadicExpand, ExpanderKind::OddExpand, ExpanderKind::DyadicCompress,
                           ExpanderKind::OddCompress, ExpanderKind::FBlock, ExpanderKind::DBlock})
        if (name == expander_name(k))
            return k;
    for (const auto& [alias, k] : aliases)
        if (name == alias)
            return k;
    return std::nullopt;
}

OperatorExpr expander_operator(ExpanderKind k, const AlgebraKind& kind) {
    switch (k) {
    case ExpanderKind::DyadicExpand: return OperatorExpr::dyadic_expand();
    case ExpanderKind::OddExpand: return OperatorExpr::odd_expand();
    case ExpanderKind::DyadicCompress: return OperatorExpr::dyadic_compress();
    case ExpanderKind::OddCompress: return OperatorExpr::odd_compress();
    case ExpanderKind::FBlock:
        return OperatorExpr::block(left_half(kind), OperatorExpr::odd_expand(), OperatorExpr::dyadic_expand());
    case ExpanderKind::DBlock:
        return OperatorExpr::block(left_half(kind), OperatorExpr::odd_compress(), OperatorExpr::dyadic_compress());
    }
    throw Error(ErrorCode::KindUnsupported, "unknown expander");
}

ExpanderKind expander_adjoint(ExpanderKind k) noexcept {
    switch (k) {
    case ExpanderKind::DyadicExpand: return ExpanderKind::DyadicCompress;
    case ExpanderKind::OddExpand: return ExpanderKind::OddCompress;
    case ExpanderKind::DyadicCompress: return ExpanderKind::DyadicExpand;
    case ExpanderKind::OddCompress: return ExpanderKind::OddExpand;
    case ExpanderKind::FBlock: return ExpanderKind::DBlock;
    case ExpanderKind::DBlock: return ExpanderKind::FBlock;
    }
    return k;
}

std::vector<std::int64_t> odd_ladder(std::int64_t limit) {
    std::vector<std::int64_t> out;
    for (std::int64_t r = 2; r <= limit; r = 2 * r - 1)
        out.push_back(r);
    return out;
}

namespace {

bool is_block(ExpanderKind k) { return k == ExpanderKind::FBlock || k == ExpanderKind::DBlock; }

bool is_expand(ExpanderKind k) {
    return k == ExpanderKind::DyadicExpand || k == ExpanderKind::OddExpand || k == ExpanderKind::FBlock;
}

void require_expander_kind(ExpanderKind k, const AlgebraElement& a) {
    if (is_block(k))
        require_step(a, expander_name(k));
    else
        require_function(a, expander_name(k));
}

// The geometric vector along the operator's index chain with support g: the cokernel vector
// (factor a*) for expanders and the kernel vector (factor a) for compressors. Block variants
// run the odd ladder on the left half and the dyadic chain on the right half.
ModuleVector expander_chain(ExpanderKind k, const AlgebraElement& a, const AlgebraElement& g, int N) {
    const AlgebraKind& kind = a.kind();
    const AlgebraElement factor = is_expand(k) ? star(a) : a;
    switch (k) {
    case ExpanderKind::DyadicExpand:
    case ExpanderKind::DyadicCompress: return geometric_chain(kind, N, dyadic_chain(N), g, factor);
    case ExpanderKind::OddExpand:
    case ExpanderKind::OddCompress: return geometric_chain(kind, N, odd_ladder(N), g, factor);
    case ExpanderKind::FBlock:
    case ExpanderKind::DBlock:
        return add(geometric_chain(kind, N, odd_ladder(N), mul(g, left_half(kind)), factor),
                   geometric_chain(kind, N, dyadic_chain(N), mul(g, right_half(kind)), factor));
    }
    throw Error(ErrorCode::KindUnsupported, "unknown expander");
}

Certificate checked_chain(ExpanderKind k, const AlgebraElement& a, const AlgebraElement& g, int N) {
    const OperatorExpr op = expander_operator(k, a.kind());
    ModuleVector x = expander_chain(k, a, g, N);
    return is_expand(k) ? checked_cokernel(op, a, std::move(x)) : checked_kernel(op, a, std::move(x));
}

// (chi_M, 0, 0, ...) for the unit coincidence set M, restricted to the left half for blocks.
std::optional<ModuleVector> coincidence_vector(ExpanderKind k, const AlgebraElement& a, const ToleranceConfig& tol,
                                               int N) {
    AlgebraElement m = unit_coincidence(a, tol);
    if (is_block(k))
        m = mul(m, left_half(a.kind()));
    if (is_zero(m))
        return std::nullopt;
    ModuleVector x = ModuleVector::zeros(a.kind(), Indexing::natural(N));
    x.set(1, m);
    return x;
}

} // namespace

SpectrumVerdict expander_spectra(ExpanderKind k, const AlgebraElement& a, const ToleranceConfig& tol, int N) {
    require_expander_kind(k, a);
    const std::string rule = std::string(expander_name(k)) + "-inf-modulus";
    const double v = inf_abs(a);
    if (v > 1.0 + tol.boundary_band)
        return verdict(Membership::Out, SpectrumPart::Full, InvertibilityBound{v - 1.0}, rule, v);
    if (v >= 1.0 - tol.boundary_band)
        return verdict(Membership::In, SpectrumPart::Full,
                       NoCertificate{"inf|a| lies in the boundary band of 1; the spectrum is closed"},
                       rule + "/closure", v);
    auto g = witness_support(a);
    if (!g)
        return verdict(Membership::In, SpectrumPart::Full, NoCertificate{"no support set on this grid"}, rule, v);
    return verdict(Membership::In, SpectrumPart::Full, checked_chain(k, a, *g, N), rule, v);
}

SpectrumVerdict expander_point_spectra(ExpanderKind k, const AlgebraElement& a, const ToleranceConfig& tol, int N) {
    require_expander_kind(k, a);
    const OperatorExpr op = expander_operator(k, a.kind());
    const std::string rule = std::string(expander_name(k)) + "-point";
    const double v = inf_abs(a);

    if (k == ExpanderKind::DyadicExpand)
        return verdict(Membership::Out, SpectrumPart::Point, NoCertificate{"kernel recursion forces x = 0"}, rule, v);

    // Unit coincidence gives (chi_M, 0, 0, ...) for the operators that fix e_1.
    if (k != ExpanderKind::DyadicCompress) {
        if (auto x = coincidence_vector(k, a, tol, N))
            return verdict(Membership::In, SpectrumPart::Point, checked_kernel(op, a, std::move(*x)),
                           rule + "/unit-coincidence", v);
    }
    if (k == ExpanderKind::OddExpand || k == ExpanderKind::FBlock)
        return verdict(Membership::Out, SpectrumPart::Point,
                       NoCertificate{"no set of positive measure where a = 1"}, rule + "/unit-coincidence", v);

    // Compressors: geometric kernel vectors exist exactly when inf|a| < 1.
    if (v > 1.0 + tol.boundary_band)
        return verdict(Membership::Out, SpectrumPart::Point, NoCertificate{"inf|a| > 1 leaves no decaying chain"},
                       rule + "/inf-modulus", v);
    if (v >= 1.0 - tol.boundary_band)
        return verdict(Membership::BoundaryIndeterminate, SpectrumPart::Point,
                       NoCertificate{"inf|a| lies in the boundary band of 1"}, rule + "/inf-modulus", v);
    auto g = witness_support(a);
    if (!g)
        return verdict(Membership::BoundaryIndeterminate, SpectrumPart::Point,
                       NoCertificate{"the grid is too coarse to hold a support set for the witness"},
                       rule + "/inf-modulus", v);
    return verdict(Membership::In, SpectrumPart::Point, checked_chain(k, a, *g, N), rule + "/inf-modulus", v);
}

// ---------------------------------------------------------------------------------------
// duality

const char* duality_name(DualityPair p) noexcept {
    switch (p) {
    case DualityPair::ShiftAdjoint: return "shift";
    case DualityPair::DyadicPair: return "dyadic";
    case DualityPair::OddPair: return "odd";
    case DualityPair::BlockPair: return "block";
    }
    return "shift";
}

bool spectrum_star_duality_check(DualityPair pair, const AlgebraElement& a, const ToleranceConfig& tol) {
    const AlgebraElement as = star(a);
    auto both = [&](ExpanderKind k) {
        return expander_spectra(k, a, tol).membership == expander_spectra(expander_adjoint(k), as, tol).membership;
    };
    switch (pair) {
    case DualityPair::ShiftAdjoint:
        return unilateral_shift_spectrum(a, tol).membership == adjoint_shift_spectrum(as, tol).membership;
    case DualityPair::DyadicPair: return both(ExpanderKind::DyadicExpand);
    case DualityPair::OddPair: return both(ExpanderKind::OddExpand);
    case DualityPair::BlockPair: return both(ExpanderKind::FBlock);
    }
    return false;
}

} // namespace gspec
