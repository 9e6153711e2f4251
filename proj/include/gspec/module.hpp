#pragma once

// Truncations of the standard module l2(A): finitely many algebra coordinates, indexed either by
// 1..N (one-sided sequences) or by -M..M (two-sided sequences).

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "gspec/algebra.hpp"

namespace gspec {

class Indexing {
public:
    enum class Type { Natural, Integers };

    /// Coordinates 1..n.
    static Indexing natural(int n);
    /// Coordinates -m..m.
    static Indexing integers(int m);

    Type type() const noexcept { return type_; }
    int extent() const noexcept { return extent_; }
    int size() const noexcept { return type_ == Type::Natural ? extent_ : 2 * extent_ + 1; }
    int first() const noexcept { return type_ == Type::Natural ? 1 : -extent_; }
    int last() const noexcept { return extent_; }
    bool contains(std::int64_t k) const noexcept { return k >= first() && k <= last(); }
    std::size_t offset(std::int64_t k) const noexcept { return static_cast<std::size_t>(k - first()); }
    /// Interior coordinates lie within half the truncation, away from the cut.
    bool interior(std::int64_t k) const noexcept {
        return type_ == Type::Natural ? (k >= 1 && k <= extent_ / 2) : (k >= -extent_ / 2 && k <= extent_ / 2);
    }

    bool operator==(const Indexing&) const = default;

private:
    Indexing(Type type, int extent) : type_(type), extent_(extent) {}

    Type type_;
    int extent_;
};

class ModuleVector {
public:
    ModuleVector(AlgebraKind kind, Indexing indexing, std::vector<AlgebraElement> entries);
    static ModuleVector zeros(const AlgebraKind& kind, const Indexing& indexing);

    const AlgebraKind& kind() const noexcept { return kind_; }
    const Indexing& indexing() const noexcept { return indexing_; }
    const std::vector<AlgebraElement>& entries() const noexcept { return entries_; }

    /// Coordinate k; coordinates outside the truncation read as zero.
    AlgebraElement at(std::int64_t k) const;
    void set(std::int64_t k, AlgebraElement value);

    bool operator==(const ModuleVector& other) const = default;

private:
    AlgebraKind kind_;
    Indexing indexing_;
    std::vector<AlgebraElement> entries_;
};

/// e_k times the unit.
ModuleVector basis_vector(std::int64_t k, const AlgebraKind& kind, const Indexing& indexing);

/// <x, y> = sum_i x_i* y_i, conjugate-linear in x.
AlgebraElement inner_product(const ModuleVector& x, const ModuleVector& y);
double vector_norm(const ModuleVector& x);
bool is_orthogonal(const ModuleVector& x, const ModuleVector& y, double tol);

ModuleVector add(const ModuleVector& x, const ModuleVector& y);
ModuleVector sub(const ModuleVector& x, const ModuleVector& y);
/// Right module action (x_i a).
ModuleVector scale_right(const ModuleVector& x, const AlgebraElement& a);
/// Coordinatewise left multiplication (a x_i), i.e. the operator aI.
ModuleVector scale_left(const AlgebraElement& a, const ModuleVector& x);
/// Largest coordinate norm, a cheap residual measure.
double max_coordinate_norm(const ModuleVector& x);
/// Norm of the restriction to interior coordinates.
double interior_norm(const ModuleVector& x);

enum class Growth { Converging, Diverging, Indeterminate };

const char* growth_name(Growth g) noexcept;

struct GrowthDiagnostic {
    std::vector<std::int64_t> depths;
    /// tail_norms[i] = || sum_{depths[i] <= k < depths[i+1]} x_k* x_k ||.
    std::vector<double> tail_norms;
    Growth verdict = Growth::Indeterminate;
};

/// Sequences are requested in increasing k starting at 1, so generators may be stateful.
using SequenceGenerator = std::function<AlgebraElement(std::int64_t)>;

/// Classifies membership of (gen(1), gen(2), ...) in l2(A) from window tails between the
/// given depths: Converging when the last tail is below tol and the last tails do not grow,
/// Diverging when the last window at least doubles the previous one (or overflows).
GrowthDiagnostic sequence_membership_diagnostic(const SequenceGenerator& gen,
                                                const std::vector<std::int64_t>& depths, double tol);

/// Starts from {16, 32, 64, 128} and keeps doubling while the verdict is Indeterminate,
/// up to max_depth.
GrowthDiagnostic adaptive_membership_diagnostic(const SequenceGenerator& gen, double tol,
                                                std::int64_t max_depth = std::int64_t{1} << 16);

/// k -> base^k for k >= 1, computed incrementally so a sweep over k costs one product per step.
SequenceGenerator power_sequence(AlgebraElement base);
/// Same windows and verdict rules as adaptive_membership_diagnostic for a sequence whose
/// fiber norms are |b_i|^k, one modulus per fiber. Window sums are geometric series in closed
/// form, so decay as slow as 1 - 1e-9 per step is followed to the end without iterating.
GrowthDiagnostic geometric_membership_diagnostic(const std::vector<double>& moduli, double tol,
                                                 std::int64_t max_depth = std::int64_t{1} << 52);


} // namespace gspec
