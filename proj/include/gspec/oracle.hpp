#pragma once

// Brute-force evidence for the closed-form predicates. Everything here works on finite
// sections of the operators, fiber by fiber, and knows nothing about the spectral rules.
//
// Bounded-below estimates use "tall" sections: the columns are an orbit window (indices
// reachable from a few seeds through the operator's index graph, up to a depth L) and the
// rows are every index those columns touch. For x supported on the window, ||T x|| is then
// computed exactly, so the section's smallest singular value is an upper estimate of the
// bounded-below constant that decreases to it as L grows. Orbit windows follow the chain
// structure of the expanders (1, 2, 4, 8, ...) that plain N x N sections would starve.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gspec/operators.hpp"

namespace gspec {

/// Plain square sections 1..N (or -N..N) for each fiber, grouped by identical coefficients.
struct FlattenedTruncation {
    int depth = 0;
    AlgebraKind kind = AlgebraKind::matrix(1);
    std::vector<int> group_of_fiber;
    std::vector<Eigen::MatrixXcd> sections;

    const Eigen::MatrixXcd& fiber(int f) const { return sections[static_cast<std::size_t>(group_of_fiber[static_cast<std::size_t>(f)])]; }
};

FlattenedTruncation flatten(const OperatorExpr& op, int N, const std::optional<AlgebraKind>& kind = std::nullopt);
double min_singular(const FlattenedTruncation& ft);
double smallest_singular_value(const Eigen::MatrixXcd& m);

enum class OracleVerdict { CertifiedBoundedBelow, NearSingularTrend, Indeterminate };

const char* oracle_verdict_name(OracleVerdict v) noexcept;

struct KernelCandidate {
    ModuleVector vector;
    /// Norm of (op - a) x over the interior coordinates, re-evaluated with apply.
    double residual = 0.0;
    /// Share of the norm carried by interior coordinates.
    double interior_weight = 0.0;
};

struct OracleReport {
    std::vector<int> depths;
    std::vector<double> sv_min;
    /// Filled by invertibility_ladder: the same ladder for adjoint(op) - a*, at adjoint_depths.
    std::vector<int> adjoint_depths;
    std::vector<double> adjoint_sv_min;
    std::vector<double> solve_residuals;
    std::vector<KernelCandidate> kernel_candidates;
    OracleVerdict verdict = OracleVerdict::Indeterminate;
    /// Certified lower estimate of the bounded-below constant (0 unless certified).
    double bound = 0.0;
    std::string note;
};

/// Classifies a sequence of section minima taken at doubling depths.
OracleVerdict classify_ladder(const std::vector<double>& sv, double sv_tol, double* bound = nullptr);

/// Is op - a I bounded below? Depths beyond the ladder are added (up to 512, fewer when there
/// are many distinct fibers) while the trend stays indeterminate.
OracleReport bounded_below_ladder(const OperatorExpr& op, const AlgebraElement& a,
                                  std::vector<int> depths = {16, 32, 64}, const ToleranceConfig& tol = {});

/// Is op - a I invertible? Requires both op - a I and its adjoint to be bounded below.
OracleReport invertibility_ladder(const OperatorExpr& op, const AlgebraElement& a,
                                  std::vector<int> depths = {16, 32, 64}, const ToleranceConfig& tol = {});

/// Interior kernel vectors of op - a I at depth N. Candidates must keep 90% of their norm on
/// interior coordinates and persist when the depth is halved.
std::vector<KernelCandidate> kernel_search(const OperatorExpr& op, const AlgebraElement& a, int N,
                                           const ToleranceConfig& tol = {});

struct SolveResult {
    explicit SolveResult(ModuleVector s) : solution(std::move(s)) {}

    ModuleVector solution;
    double residual = 0.0;
    std::vector<int> depths;
    std::vector<double> norms;
    Growth growth = Growth::Indeterminate;
};

/// Minimum-norm solution of (op - a I) x = target on sections of depth N/4, N/2 and N.
/// Solution norms that keep growing with the depth evidence that no solution exists.
SolveResult solve(const OperatorExpr& op, const AlgebraElement& a, const ModuleVector& target, int N,
                  const ToleranceConfig& tol = {});

/// Solves on continuous kinds while refining the grid together with the depth: level j uses
/// depth N0 * 2^j on a grid refined 2^j times. A fiber where the equation has no solution is
/// approached ever more closely, so growth of the sup-norm of the solutions across levels is
/// evidence of non-solvability even when no grid node sits on it. Other kinds fall back to solve.
SolveResult refined_solve(const OperatorExpr& op, const AlgebraElement& a, std::int64_t target_index, int N0,
                          int levels, const ToleranceConfig& tol = {});

/// Eigenvalues of a matrix element, computed independently of the predicates.
std::vector<cd> matrix_eigenvalues(const AlgebraElement& a);

} // namespace gspec
