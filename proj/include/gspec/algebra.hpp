#pragma once

// Concrete unital C*-algebras used as coefficient rings:
//   - continuous functions on [0,1], stored as node values of a piecewise-linear interpolant,
//   - essentially bounded functions on (0,1), stored as values on uniform cells,
//   - complex n x n matrices.
// Function elements multiply pointwise, so every module operator built from them acts
// independently at each grid node (continuous) or cell (step). That grid point is a "fiber".

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gspec/errors.hpp"

namespace gspec {

using cd = std::complex<double>;

struct GridSpec {
    int resolution = 256;
    int refinement_factor = 4;

    bool operator==(const GridSpec&) const = default;
};

enum class KindTag { Continuous, Step, Matrix };

class AlgebraKind {
public:
    static AlgebraKind continuous(int resolution = 256, int refinement_factor = 4);
    static AlgebraKind step(int resolution = 256, int refinement_factor = 4);
    static AlgebraKind matrix(int n);

    KindTag tag() const noexcept { return tag_; }
    bool is_function() const noexcept { return tag_ != KindTag::Matrix; }
    bool is_commutative() const noexcept { return is_function() || n_ == 1; }
    const GridSpec& grid() const noexcept { return grid_; }
    int n() const noexcept { return n_; }

    /// Number of stored complex values.
    int storage_size() const noexcept;
    /// Independent fibers of a fiberwise operator: grid points for functions, one for matrices.
    int fiber_count() const noexcept { return is_function() ? grid_.resolution : 1; }
    /// Size of the coefficient block at one fiber (1 for functions, n for matrices).
    int fiber_dim() const noexcept { return is_function() ? 1 : n_; }

    /// Sample point of stored value i (node position or cell midpoint).
    double sample_point(int i) const;

    std::string name() const;

    bool operator==(const AlgebraKind&) const = default;

private:
    AlgebraKind(KindTag tag, GridSpec grid, int n) : tag_(tag), grid_(grid), n_(n) {}

    KindTag tag_;
    GridSpec grid_;
    int n_;
};

struct ToleranceConfig {
    double eq_tol = 1e-9;
    double boundary_band = 1e-6;
    double oracle_sv_tol = 1e-8;

    /// Throws ConfigError unless all are positive and boundary_band > eq_tol.
    void validate() const;
};

class AlgebraElement {
public:
    /// Values are node/cell values for function kinds and a column-major n*n matrix otherwise.
    AlgebraElement(AlgebraKind kind, std::vector<cd> data);

    const AlgebraKind& kind() const noexcept { return kind_; }
    const std::vector<cd>& data() const noexcept { return data_; }
    cd value(int i) const { return data_[static_cast<std::size_t>(i)]; }

    Eigen::MatrixXcd matrix() const;
    /// Coefficient block at fiber f: 1x1 value for function kinds, the full matrix otherwise.
    Eigen::MatrixXcd fiber(int f) const;

    bool operator==(const AlgebraElement& other) const {
        return kind_ == other.kind_ && data_ == other.data_;
    }

    AlgebraElement operator+(const AlgebraElement& other) const;
    AlgebraElement operator-(const AlgebraElement& other) const;
    AlgebraElement operator*(const AlgebraElement& other) const;
    AlgebraElement operator-() const;
    AlgebraElement scaled(cd c) const;

private:
    AlgebraKind kind_;
    std::vector<cd> data_;
};

// construction

AlgebraElement make_element(const AlgebraKind& kind, std::vector<cd> values);
AlgebraElement make_matrix(const Eigen::MatrixXcd& m);
AlgebraElement unit(const AlgebraKind& kind);
AlgebraElement zero(const AlgebraKind& kind);
AlgebraElement constant(const AlgebraKind& kind, cd c);
/// Function kinds only: samples f at every node (continuous) or cell midpoint (step).
AlgebraElement sample(const AlgebraKind& kind, const std::function<cd(double)>& f);
/// Function kinds only: 1 where the sample point lies in the open interval (a, b).
AlgebraElement indicator(const AlgebraKind& kind, double a, double b);

// arithmetic

AlgebraElement add(const AlgebraElement& a, const AlgebraElement& b);
AlgebraElement sub(const AlgebraElement& a, const AlgebraElement& b);
AlgebraElement mul(const AlgebraElement& a, const AlgebraElement& b);
AlgebraElement star(const AlgebraElement& a);

double norm(const AlgebraElement& a);
double inf_abs(const AlgebraElement& a);
/// Refined-grid sup/inf of |a| for continuous kind; cell values for step kind.
double sup_abs(const AlgebraElement& a);

/// Values of |a| over the refined evaluation grid (continuous) or the cells (step).
std::vector<double> refined_abs_values(const AlgebraElement& a);
/// Values of a over the refined evaluation grid (continuous) or the cells (step).
std::vector<cd> refined_values(const AlgebraElement& a);

/// Continuous kind: the same interpolant stored on the refined grid (refinement factor 1),
/// so every refined evaluation point becomes a node. Other kinds are returned unchanged.
AlgebraElement to_refined_grid(const AlgebraElement& a);

struct NotInvertible {
    double inf_abs;
};

std::variant<AlgebraElement, NotInvertible> try_invert(const AlgebraElement& a,
                                                       const ToleranceConfig& tol = {});
/// Convenience: throws NotInvertible on failure.
AlgebraElement inverse(const AlgebraElement& a, const ToleranceConfig& tol = {});

/// Non-zero Y with aY = 0 spanning the right annihilators (matrix kind) or the indicator of
/// the zero set of |a| (function kinds). Empty when a has no right annihilator.
std::vector<AlgebraElement> right_annihilator_basis(const AlgebraElement& a,
                                                    const ToleranceConfig& tol = {});

bool is_self_adjoint_element(const AlgebraElement& a, double tol);
bool is_unitary_element(const AlgebraElement& a, double tol);
/// chi = chi* = chi^2 within tol.
bool is_projection(const AlgebraElement& a, double tol);

/// Largest entrywise deviation, used for exactness checks in tests.
double max_abs_diff(const AlgebraElement& a, const AlgebraElement& b);

} // namespace gspec
