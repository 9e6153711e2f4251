#pragma once

// Symbolic module operators. An OperatorExpr is an immutable tree; it can be applied to a
// truncated vector, rewritten into its adjoint, or expanded entry by entry for the oracle.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gspec/module.hpp"

namespace gspec {

enum class NodeType {
    ScalarMult,
    UnilateralShift,
    BilateralShift,
    WeightedShift,
    DiagonalUnitary,
    DiagonalSelfAdjoint,
    DyadicExpand,   // e_k -> e_{2k}
    OddExpand,      // e_k -> e_{2k-1}
    DyadicCompress, // y_k = x_{2k}
    OddCompress,    // y_k = x_{2k-1}
    Block,
    Adjoint,
    Sum,
    Compose,
    Negate,
};

const char* node_name(NodeType t) noexcept;

class OperatorExpr {
public:
    static OperatorExpr scalar_mult(AlgebraElement a);
    static OperatorExpr unilateral_shift();
    static OperatorExpr bilateral_shift();
    /// y_{j+1} = w_j x_j with the weights repeated cyclically (w_1 is the first list entry).
    static OperatorExpr weighted_shift(std::vector<AlgebraElement> weights);
    /// Diagonal with unitary entries repeated cyclically.
    static OperatorExpr diagonal_unitary(std::vector<AlgebraElement> entries, double tol = 1e-8);
    /// Diagonal with self-adjoint entries repeated cyclically.
    static OperatorExpr diagonal_self_adjoint(std::vector<AlgebraElement> entries, double tol = 1e-8);
    static OperatorExpr dyadic_expand();
    static OperatorExpr odd_expand();
    static OperatorExpr dyadic_compress();
    static OperatorExpr odd_compress();
    /// chi * left * chi + (1 - chi) * right * (1 - chi) for a projection chi.
    static OperatorExpr block(AlgebraElement chi, OperatorExpr left, OperatorExpr right, double tol = 1e-9);
    static OperatorExpr sum(OperatorExpr a, OperatorExpr b);
    /// a after b.
    static OperatorExpr compose(OperatorExpr a, OperatorExpr b);
    static OperatorExpr negate(OperatorExpr a);

    NodeType type() const noexcept { return node_->type; }
    /// The scalar of ScalarMult or the projection of Block.
    const AlgebraElement& element() const;
    /// Weights or diagonal entries.
    const std::vector<AlgebraElement>& elements() const noexcept { return node_->elements; }
    /// First operand of Block, Adjoint, Sum, Compose and Negate.
    const OperatorExpr& left() const;
    /// Second operand of Block, Sum and Compose.
    const OperatorExpr& right() const;

    /// Kind fixed by the embedded elements, if any.
    const std::optional<AlgebraKind>& kind() const noexcept { return node_->kind; }
    /// True when the tree contains a bilateral shift and so needs integer indexing.
    bool integer_indexed() const noexcept { return node_->integer_indexed; }
    /// True when the tree contains a node that only makes sense on one-sided sequences.
    bool natural_only() const noexcept { return node_->natural_only; }

    std::string describe() const;

    bool operator==(const OperatorExpr& other) const;

private:
    struct Node {
        NodeType type;
        std::vector<AlgebraElement> elements;
        std::vector<OperatorExpr> children;
        std::optional<AlgebraKind> kind;
        bool integer_indexed = false;
        bool natural_only = false;
    };

    explicit OperatorExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    static OperatorExpr make(NodeType type, std::vector<AlgebraElement> elements,
                             std::vector<OperatorExpr> children);
    static OperatorExpr wrap_adjoint(OperatorExpr inner);

    friend OperatorExpr adjoint(const OperatorExpr& op);

    std::shared_ptr<const Node> node_;
};

/// Structural adjoint: conjugates scalars, swaps expanders with compressors, reverses
/// compositions, and cancels double adjoints.
OperatorExpr adjoint(const OperatorExpr& op);

/// Rebuilds op with every embedded element passed through fn.
OperatorExpr map_elements(const OperatorExpr& op, const std::function<AlgebraElement(const AlgebraElement&)>& fn);

/// op - a I.
OperatorExpr shifted(const OperatorExpr& op, const AlgebraElement& a);

/// Applies op to a truncated vector; coordinates pushed beyond the truncation are dropped.
ModuleVector apply(const OperatorExpr& op, const ModuleVector& x);

/// One nonzero entry of an operator column at a fixed fiber: row index and coefficient block.
struct BlockEntry {
    std::int64_t row;
    Eigen::MatrixXcd block;
};

/// Column j of op at fiber f of the given kind: op(e_j c) = sum over entries of e_row (block c).
/// This is computed from the coordinate rules of each node and is exact for the untruncated
/// operator. Matrix kinds act by left multiplication, so each fiber block is n x n.
std::vector<BlockEntry> column_image(const OperatorExpr& op, const AlgebraKind& kind, int fiber,
                                     std::int64_t j);

/// Dense block matrix of op restricted to the given rows and columns at one fiber.
Eigen::MatrixXcd dense_section(const OperatorExpr& op, const AlgebraKind& kind, int fiber,
                               const std::vector<std::int64_t>& rows, const std::vector<std::int64_t>& cols);

/// Values of every embedded element at a fiber, in tree order. Function-kind fibers with
/// equal signatures carry identical sections.
std::vector<cd> fiber_signature(const OperatorExpr& op, const AlgebraKind& kind, int fiber);

/// Kind used to evaluate op: its own kind, else the fallback.
AlgebraKind resolve_kind(const OperatorExpr& op, const std::optional<AlgebraKind>& fallback);

/// Interior index set of a depth-N truncation in op's natural indexing.
std::vector<std::int64_t> interior_indices(const OperatorExpr& op, int N);
std::vector<std::int64_t> truncation_indices(const OperatorExpr& op, int N);

/// Compares op with its adjoint on the interior block of a depth-N section.
bool is_self_adjoint(const OperatorExpr& op, const AlgebraKind& kind, int N, double tol);
/// Compares F F* with F* F on the interior block of a depth-N section.
bool is_normal(const OperatorExpr& op, const AlgebraKind& kind, int N, double tol);

/// Largest singular value over fibers of the depth-N section.
double operator_norm_estimate(const OperatorExpr& op, const AlgebraKind& kind, int N);

enum class BoundsMethod { ClosedFormDiagonal, SampledSearch };

struct SelfAdjointBounds {
    double m_lower = 0.0;
    double m_upper = 0.0;
    double M_lower = 0.0;
    double M_upper = 0.0;
    BoundsMethod method = BoundsMethod::SampledSearch;
};

/// Bounds on m(F) = inf ||<Fx,x>|| and M(F) = sup ||<Fx,x>|| over unit vectors.
SelfAdjointBounds self_adjoint_bounds(const OperatorExpr& op, const AlgebraKind& kind, int N, int samples,
                                      std::uint64_t seed, const ToleranceConfig& tol = {});

/// Random element with entries of modulus at most scale (function kinds use few pieces).
AlgebraElement random_element(const AlgebraKind& kind, std::mt19937_64& rng, double scale = 1.0);
/// Random vector supported on the interior coordinates.
ModuleVector random_interior_vector(const AlgebraKind& kind, const Indexing& indexing, std::mt19937_64& rng);

} // namespace gspec
