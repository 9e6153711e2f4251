#pragma once

// Closed-form membership rules for the generalized spectra of the operator bank, each
// returning a three-valued verdict and, where the rule allows it, an explicit certificate
// that is re-verified before it is handed out.

#include <optional>
#include <string>
#include <variant>

#include "gspec/oracle.hpp"

namespace gspec {

enum class Membership { In, Out, BoundaryIndeterminate, Inconclusive };
enum class SpectrumPart { Full, Point, ResidualLike, ApproxPoint };

const char* membership_name(Membership m) noexcept;
const char* part_name(SpectrumPart p) noexcept;

struct KernelWitness {
    ModuleVector x;
    /// Interior norm of (F - a) x.
    double residual = 0.0;
};

struct CokernelWitness {
    ModuleVector x;
    /// max over interior k of ||<(F - a) e_k, x>||.
    double max_pairing = 0.0;
};

struct ResolventSolution {
    ModuleVector x;
    std::int64_t target = 1;
    /// Interior norm of (a - S) x - e_target.
    double residual = 0.0;
    /// Size of the last kept term, ||a^-(N - target + 1)||.
    double remainder = 0.0;
    GrowthDiagnostic growth;
};

struct InvertibilityBound {
    /// Lower bound on the bounded-below constant of F - a.
    double lower = 0.0;
};

struct NoCertificate {
    std::string reason;
};

using Certificate = std::variant<NoCertificate, KernelWitness, CokernelWitness, ResolventSolution,
                                 InvertibilityBound, GrowthDiagnostic, OracleReport>;

const char* certificate_name(const Certificate& c) noexcept;

struct SpectrumVerdict {
    Membership membership = Membership::Inconclusive;
    SpectrumPart part = SpectrumPart::Full;
    Certificate certificate = NoCertificate{};
    std::string rule;
    /// The scalar the rule compared against its threshold (inf|a|, a norm, ...), if any.
    double deciding_value = 0.0;
    std::string note;
    std::optional<OracleReport> oracle;
};

/// Default truncation for witnesses.
inline constexpr int kDefaultDepth = 48;

// ---- unilateral shift S ----

/// a in sigma(S) iff inf|a| <= 1 (function kinds).
SpectrumVerdict unilateral_shift_spectrum(const AlgebraElement& a, const ToleranceConfig& tol = {},
                                          int N = kDefaultDepth);
/// Always empty: the kernel recursion forces x = 0.
SpectrumVerdict unilateral_shift_point_spectrum(const AlgebraElement& a);
/// x = (g, a* g, a*^2 g, ...) orthogonal to the range of S - a.
Certificate shift_cokernel_witness(const AlgebraElement& a, int N = kDefaultDepth, const ToleranceConfig& tol = {});
/// Solution of (a - S) x = e_k: x_n = a^-(n - k + 1) for n >= k.
Certificate shift_resolvent_solution(const AlgebraElement& a, std::int64_t k, int N = kDefaultDepth,
                                     const ToleranceConfig& tol = {});
/// a in sigma(S) iff a is not invertible or (a^-1, a^-2, ...) is not square summable.
SpectrumVerdict shift_spectrum_commutative(const AlgebraElement& a, const ToleranceConfig& tol = {});
/// Matrix algebras: T in sigma(S) iff T is singular or (T^-1, T^-2, ...) is not square summable.
SpectrumVerdict mn_shift_spectrum(const AlgebraElement& t, const ToleranceConfig& tol = {});
/// sigma(S*) by its own kernel construction x = (g, a g, a^2 g, ...).
SpectrumVerdict adjoint_shift_spectrum(const AlgebraElement& a, const ToleranceConfig& tol = {},
                                       int N = kDefaultDepth);

/// Tail diagnostic of (b, b^2, b^3, ...). Commutative kinds use exact geometric window sums on
/// the refined grid, so very slow decay is still resolved; matrix kinds iterate products.
GrowthDiagnostic power_growth(const AlgebraElement& b, const ToleranceConfig& tol = {});

// ---- weighted, block and bilateral shifts, diagonal unitaries ----

/// gamma e_j is a kernel vector of a I - S_w when gamma annihilates both a and w_j.
SpectrumVerdict weighted_shift_kernel_witness(const AlgebraElement& a, const std::vector<AlgebraElement>& w,
                                              std::int64_t j, const ToleranceConfig& tol = {},
                                              int N = kDefaultDepth);
/// The identity-on-(0,1/2), shift-on-(1/2,1) block operator (step kind).
OperatorExpr block_shift_operator(const AlgebraKind& kind);
SpectrumVerdict block_shift_spectrum(const AlgebraElement& a, const ToleranceConfig& tol = {},
                                     int N = kDefaultDepth);
/// Range of |f| meets 1 (continuous) or some cell has |f| = 1 within the band (step).
SpectrumVerdict bilateral_shift_spectrum(const AlgebraElement& f, const ToleranceConfig& tol = {});
SpectrumVerdict bilateral_shift_point_spectrum(const AlgebraElement& f);
/// b in sigma(diag(a_1, a_2, ...)) iff some b - a_k is singular or has a right annihilator.
SpectrumVerdict diagonal_unitary_spectrum(const AlgebraElement& b, const std::vector<AlgebraElement>& units,
                                          const ToleranceConfig& tol = {}, int N = kDefaultDepth);
/// Screen for any unitary U: Out when ||a|| < 1 or ||a^-1|| < 1.
SpectrumVerdict unitary_norm_screen(const AlgebraElement& a, const ToleranceConfig& tol = {});

// ---- general operators ----

/// Over commutative algebras a self-adjoint F has sigma_rl(F) = sigma_p(F*)^* with the
/// same vector: ||(F - a) x|| = ||(F - a*) x||.
bool selfadjoint_point_star_transfer(const OperatorExpr& F, const AlgebraElement& a, const ModuleVector& x,
                                     const ToleranceConfig& tol = {});
/// Residual-like membership of a matches a kernel of F* - a*.
bool residual_point_duality(const OperatorExpr& F, const AlgebraElement& a, int N = 64,
                            const ToleranceConfig& tol = {});
/// Self-adjoint F over a commutative algebra: bounded below implies invertible.
SpectrumVerdict bounded_below_implies_invertible(const OperatorExpr& F, const AlgebraElement& a,
                                                 std::vector<int> depths = {16, 32, 64},
                                                 const ToleranceConfig& tol = {});
/// ||(F - a)^-1|| <= 2 ||(a - a*)^-1|| for self-adjoint F over a commutative algebra.
SpectrumVerdict skew_resolvent_bound(const OperatorExpr& F, const AlgebraElement& a, int N = 64,
                                     const ToleranceConfig& tol = {});
/// Out when |a| stays away from [m(F), M(F)] for uniformly positive diagonal F.
SpectrumVerdict selfadjoint_spectrum_envelope(const OperatorExpr& F, const AlgebraElement& a,
                                              const ToleranceConfig& tol = {}, int N = 64);
/// Kernels of a normal F at a_1, a_2 are orthogonal when a_1 - a_2 is invertible.
bool normal_kernel_orthogonality(const OperatorExpr& F, const AlgebraElement& a1, const AlgebraElement& a2,
                                 const ModuleVector& x1, const ModuleVector& x2, const ToleranceConfig& tol = {});
/// A normal F over a commutative algebra has no residual-like spectrum: whenever F - a is
/// bounded below, (F - a) x = y is solvable.
bool normal_residual_empty_check(const OperatorExpr& F, const AlgebraElement& a,
                                 std::vector<int> depths = {16, 32, 64}, std::uint64_t seed = 1,
                                 const ToleranceConfig& tol = {});
/// Oracle-only verdict on whether F - a is bounded below.
SpectrumVerdict approx_point_membership(const OperatorExpr& F, const AlgebraElement& a,
                                        std::vector<int> depths = {16, 32, 64}, const ToleranceConfig& tol = {});

// ---- dyadic expanders and compressors ----

enum class ExpanderKind { DyadicExpand, OddExpand, DyadicCompress, OddCompress, FBlock, DBlock };

const char* expander_name(ExpanderKind k) noexcept;
std::optional<ExpanderKind> expander_from_name(const std::string& name);
/// The operator for a kind; block variants split at t = 1/2 and need a step kind.
OperatorExpr expander_operator(ExpanderKind k, const AlgebraKind& kind);
ExpanderKind expander_adjoint(ExpanderKind k) noexcept;
/// r_1 = 2, r_{k+1} = 2 r_k - 1, up to limit.
std::vector<std::int64_t> odd_ladder(std::int64_t limit);

/// Full spectrum: inf|a| <= 1 for all six operators.
SpectrumVerdict expander_spectra(ExpanderKind k, const AlgebraElement& a, const ToleranceConfig& tol = {},
                                 int N = kDefaultDepth);
/// Point spectrum with kernel witnesses.
SpectrumVerdict expander_point_spectra(ExpanderKind k, const AlgebraElement& a, const ToleranceConfig& tol = {},
                                       int N = kDefaultDepth);

// ---- duality ----

enum class DualityPair { ShiftAdjoint, DyadicPair, OddPair, BlockPair };

const char* duality_name(DualityPair p) noexcept;

/// membership(a, F) == membership(a*, F*) for the closed-form rules of the pair.
bool spectrum_star_duality_check(DualityPair pair, const AlgebraElement& a, const ToleranceConfig& tol = {});

// ---- witness re-verification ----

/// Interior norm of (F - a) x.
double kernel_residual(const OperatorExpr& F, const AlgebraElement& a, const ModuleVector& x);
/// max over interior k of ||<(F - a) e_k, x>||.
double cokernel_pairing(const OperatorExpr& F, const AlgebraElement& a, const ModuleVector& x);

} // namespace gspec
