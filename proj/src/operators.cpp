#include "gspec/operators.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace gspec {

const char* node_name(NodeType t) noexcept {
    switch (t) {
    case NodeType::ScalarMult: return "scalar_mult";
    case NodeType::UnilateralShift: return "shift";
    case NodeType::BilateralShift: return "bilateral_shift";
    case NodeType::WeightedShift: return "weighted_shift";
    case NodeType::DiagonalUnitary: return "diagonal_unitary";
    case NodeType::DiagonalSelfAdjoint: return "diagonal_self_adjoint";
    case NodeType::DyadicExpand: return "dyadic_expand";
    case NodeType::OddExpand: return "odd_expand";
    case NodeType::DyadicCompress: return "dyadic_compress";
    case NodeType::OddCompress: return "odd_compress";
    case NodeType::Block: return "block";
    case NodeType::Adjoint: return "adjoint";
    case NodeType::Sum: return "sum";
    case NodeType::Compose: return "compose";
    case NodeType::Negate: return "negate";
    }
    return "unknown";
}

OperatorExpr OperatorExpr::make(NodeType type, std::vector<AlgebraElement> elements,
                                std::vector<OperatorExpr> children) {
    auto node = std::make_shared<Node>();
    node->type = type;
    node->integer_indexed = type == NodeType::BilateralShift;
    node->natural_only = type == NodeType::UnilateralShift || type == NodeType::DyadicExpand ||
                         type == NodeType::OddExpand || type == NodeType::DyadicCompress ||
                         type == NodeType::OddCompress;

    auto merge_kind = [&](const AlgebraKind& k) {
        if (node->kind && !(*node->kind == k))
            throw Error(ErrorCode::KindMismatch, "operator mixes " + node->kind->name() + " and " + k.name());
        node->kind = k;
    };
    for (const AlgebraElement& e : elements)
        merge_kind(e.kind());
    for (const OperatorExpr& c : children) {
        if (c.kind())
            merge_kind(*c.kind());
        node->integer_indexed = node->integer_indexed || c.integer_indexed();
        node->natural_only = node->natural_only || c.natural_only();
    }
    if (node->integer_indexed && node->natural_only)
        throw Error(ErrorCode::IndexingMismatch, "operator mixes two-sided and one-sided nodes");

    node->elements = std::move(elements);
    node->children = std::move(children);
    return OperatorExpr(std::move(node));
}

OperatorExpr OperatorExpr::scalar_mult(AlgebraElement a) { return make(NodeType::ScalarMult, {std::move(a)}, {}); }
OperatorExpr OperatorExpr::unilateral_shift() { return make(NodeType::UnilateralShift, {}, {}); }
OperatorExpr OperatorExpr::bilateral_shift() { return make(NodeType::BilateralShift, {}, {}); }
OperatorExpr OperatorExpr::dyadic_expand() { return make(NodeType::DyadicExpand, {}, {}); }
OperatorExpr OperatorExpr::odd_expand() { return make(NodeType::OddExpand, {}, {}); }
OperatorExpr OperatorExpr::dyadic_compress() { return make(NodeType::DyadicCompress, {}, {}); }
OperatorExpr OperatorExpr::odd_compress() { return make(NodeType::OddCompress, {}, {}); }

OperatorExpr OperatorExpr::weighted_shift(std::vector<AlgebraElement> weights) {
    if (weights.empty())
        throw Error(ErrorCode::ShapeMismatch, "weighted shift needs at least one weight");
    return make(NodeType::WeightedShift, std::move(weights), {});
}

OperatorExpr OperatorExpr::diagonal_unitary(std::vector<AlgebraElement> entries, double tol) {
    if (entries.empty())
        throw Error(ErrorCode::ShapeMismatch, "diagonal needs at least one entry");
    for (std::size_t i = 0; i < entries.size(); ++i)
        if (!is_unitary_element(entries[i], tol))
            throw Error(ErrorCode::PreconditionFailed, "diagonal entry " + std::to_string(i + 1) + " is not unitary");
    return make(NodeType::DiagonalUnitary, std::move(entries), {});
}

OperatorExpr OperatorExpr::diagonal_self_adjoint(std::vector<AlgebraElement> entries, double tol) {
    if (entries.empty())
        throw Error(ErrorCode::ShapeMismatch, "diagonal needs at least one entry");
    for (std::size_t i = 0; i < entries.size(); ++i)
        if (!is_self_adjoint_element(entries[i], tol))
            throw Error(ErrorCode::NotSelfAdjoint, "diagonal entry " + std::to_string(i + 1) + " is not self-adjoint");
    return make(NodeType::DiagonalSelfAdjoint, std::move(entries), {});
}

OperatorExpr OperatorExpr::block(AlgebraElement chi, OperatorExpr left, OperatorExpr right, double tol) {
    if (chi.kind().tag() == KindTag::Continuous)
        throw Error(ErrorCode::KindUnsupported, "block decompositions need a step or matrix projection");
    if (!is_projection(chi, tol))
        throw Error(ErrorCode::PreconditionFailed, "block decomposition needs a projection");
    return make(NodeType::Block, {std::move(chi)}, {std::move(left), std::move(right)});
}

OperatorExpr OperatorExpr::sum(OperatorExpr a, OperatorExpr b) {
    return make(NodeType::Sum, {}, {std::move(a), std::move(b)});
}

OperatorExpr OperatorExpr::compose(OperatorExpr a, OperatorExpr b) {
    return make(NodeType::Compose, {}, {std::move(a), std::move(b)});
}

OperatorExpr OperatorExpr::negate(OperatorExpr a) { return make(NodeType::Negate, {}, {std::move(a)}); }

OperatorExpr OperatorExpr::wrap_adjoint(OperatorExpr inner) {
    return make(NodeType::Adjoint, {}, {std::move(inner)});
}

const AlgebraElement& OperatorExpr::element() const {
    if (node_->elements.empty())
        throw Error(ErrorCode::NotApplicable, std::string(node_name(type())) + " has no element");
    return node_->elements.front();
}

const OperatorExpr& OperatorExpr::left() const {
    if (node_->children.empty())
        throw Error(ErrorCode::NotApplicable, std::string(node_name(type())) + " has no operand");
    return node_->children.front();
}

const OperatorExpr& OperatorExpr::right() const {
    if (node_->children.size() < 2)
        throw Error(ErrorCode::NotApplicable, std::string(node_name(type())) + " has no second operand");
    return node_->children[1];
}

bool OperatorExpr::operator==(const OperatorExpr& other) const {
    if (node_ == other.node_)
        return true;
    return type() == other.type() && node_->elements == other.node_->elements &&
           node_->children == other.node_->children;
}

std::string OperatorExpr::describe() const {
    switch (type()) {
    case NodeType::ScalarMult: return "(a I)";
    case NodeType::UnilateralShift: return "S";
    case NodeType::BilateralShift: return "V";
    case NodeType::WeightedShift: return "S_w";
    case NodeType::DiagonalUnitary: return "U_diag";
    case NodeType::DiagonalSelfAdjoint: return "G_diag";
    case NodeType::DyadicExpand: return "W'";
    case NodeType::OddExpand: return "W''";
    case NodeType::DyadicCompress: return "Z";
    case NodeType::OddCompress: return "Z'";
    case NodeType::Block: return "block(" + left().describe() + ", " + right().describe() + ")";
    case NodeType::Adjoint: return left().describe() + "*";
    case NodeType::Sum: return "(" + left().describe() + " + " + right().describe() + ")";
    case NodeType::Compose: return left().describe() + " " + right().describe();
    case NodeType::Negate: return "-" + left().describe();
    }
    return "?";
}

OperatorExpr adjoint(const OperatorExpr& op) {
    switch (op.type()) {
    case NodeType::ScalarMult: return OperatorExpr::scalar_mult(star(op.element()));
    case NodeType::UnilateralShift:
    case NodeType::BilateralShift:
    case NodeType::WeightedShift: return OperatorExpr::wrap_adjoint(op);
    case NodeType::DiagonalUnitary: {
        std::vector<AlgebraElement> conj;
        for (const AlgebraElement& a : op.elements())
            conj.push_back(star(a));
        return OperatorExpr::diagonal_unitary(std::move(conj), 1e-6);
    }
    case NodeType::DiagonalSelfAdjoint: return op;
    case NodeType::DyadicExpand: return OperatorExpr::dyadic_compress();
    case NodeType::OddExpand: return OperatorExpr::odd_compress();
    case NodeType::DyadicCompress: return OperatorExpr::dyadic_expand();
    case NodeType::OddCompress: return OperatorExpr::odd_expand();
    case NodeType::Block:
        return OperatorExpr::block(op.element(), adjoint(op.left()), adjoint(op.right()), 1e-6);
    case NodeType::Adjoint: return op.left();
    case NodeType::Sum: return OperatorExpr::sum(adjoint(op.left()), adjoint(op.right()));
    case NodeType::Compose: return OperatorExpr::compose(adjoint(op.right()), adjoint(op.left()));
    case NodeType::Negate: return OperatorExpr::negate(adjoint(op.left()));
    }
    throw Error(ErrorCode::NotApplicable, "unknown operator node");
}

OperatorExpr map_elements(const OperatorExpr& op, const std::function<AlgebraElement(const AlgebraElement&)>& fn) {
    auto mapped = [&] {
        std::vector<AlgebraElement> out;
        for (const AlgebraElement& e : op.elements())
            out.push_back(fn(e));
        return out;
    };
    switch (op.type()) {
    case NodeType::ScalarMult: return OperatorExpr::scalar_mult(fn(op.element()));
    case NodeType::WeightedShift: return OperatorExpr::weighted_shift(mapped());
    case NodeType::DiagonalUnitary: return OperatorExpr::diagonal_unitary(mapped(), 1e-6);
    case NodeType::DiagonalSelfAdjoint: return OperatorExpr::diagonal_self_adjoint(mapped(), 1e-6);
    case NodeType::Block:
        return OperatorExpr::block(fn(op.element()), map_elements(op.left(), fn), map_elements(op.right(), fn), 1e-6);
    case NodeType::Adjoint: return adjoint(map_elements(op.left(), fn));
    case NodeType::Sum: return OperatorExpr::sum(map_elements(op.left(), fn), map_elements(op.right(), fn));
    case NodeType::Compose: return OperatorExpr::compose(map_elements(op.left(), fn), map_elements(op.right(), fn));
    case NodeType::Negate: return OperatorExpr::negate(map_elements(op.left(), fn));
    default: return op;
    }
}

OperatorExpr shifted(const OperatorExpr& op, const AlgebraElement& a) {
    return OperatorExpr::sum(op, OperatorExpr::negate(OperatorExpr::scalar_mult(a)));
}

namespace {

std::size_t cyclic(std::int64_t k, std::size_t period) {
    const auto p = static_cast<std::int64_t>(period);
    return static_cast<std::size_t>((((k - 1) % p) + p) % p);
}

const AlgebraElement& cyclic_entry(const OperatorExpr& op, std::int64_t k) {
    return op.elements()[cyclic(k, op.elements().size())];
}

void check_applicable(const OperatorExpr& op, const ModuleVector& x) {
    if (op.kind() && !(*op.kind() == x.kind()))
        throw Error(ErrorCode::KindMismatch, "operator over " + op.kind()->name() + " applied to a " +
                                                 x.kind().name() + " vector");
    const bool integers = x.indexing().type() == Indexing::Type::Integers;
    if (op.integer_indexed() && !integers)
        throw Error(ErrorCode::IndexingMismatch, "bilateral operators need integer indexing");
    if (op.natural_only() && integers)
        throw Error(ErrorCode::IndexingMismatch, op.describe() + " needs natural indexing");
}

// Writes value to coordinate k when it lies inside the truncation.
void put(ModuleVector& y, std::int64_t k, AlgebraElement value) {
    if (y.indexing().contains(k))
        y.set(k, std::move(value));
}

ModuleVector apply_node(const OperatorExpr& op, const ModuleVector& x) {
    const Indexing& ix = x.indexing();
    ModuleVector y = ModuleVector::zeros(x.kind(), ix);
    switch (op.type()) {
    case NodeType::ScalarMult: return scale_left(op.element(), x);
    case NodeType::UnilateralShift:
    case NodeType::BilateralShift:
        for (std::int64_t k = ix.first(); k <= ix.last(); ++k)
            put(y, k + 1, x.at(k));
        return y;
    case NodeType::WeightedShift:
        for (std::int64_t k = ix.first(); k <= ix.last(); ++k)
            put(y, k + 1, cyclic_entry(op, k) * x.at(k));
        return y;
    case NodeType::DiagonalUnitary:
    case NodeType::DiagonalSelfAdjoint:
        for (std::int64_t k = ix.first(); k <= ix.last(); ++k)
            y.set(k, cyclic_entry(op, k) * x.at(k));
        return y;
    case NodeType::DyadicExpand:
        for (std::int64_t k = ix.first(); k <= ix.last(); ++k)
            put(y, 2 * k, x.at(k));
        return y;
    case NodeType::OddExpand:
        for (std::int64_t k = ix.first(); k <= ix.last(); ++k)
            put(y, 2 * k - 1, x.at(k));
        return y;
    case NodeType::DyadicCompress:
        for (std::int64_t k = ix.first(); k <= ix.last(); ++k)
            y.set(k, x.at(2 * k));
        return y;
    case NodeType::OddCompress:
        for (std::int64_t k = ix.first(); k <= ix.last(); ++k)
            y.set(k, x.at(2 * k - 1));
        return y;
    case NodeType::Block: {
        const AlgebraElement& chi = op.element();
        const AlgebraElement rest = unit(chi.kind()) - chi;
        return add(scale_left(chi, apply(op.left(), scale_left(chi, x))),
                   scale_left(rest, apply(op.right(), scale_left(rest, x))));
    }
    case NodeType::Adjoint: {
        const OperatorExpr& inner = op.left();
        for (std::int64_t k = ix.first(); k <= ix.last(); ++k) {
            if (inner.type() == NodeType::WeightedShift)
                y.set(k, star(cyclic_entry(inner, k)) * x.at(k + 1));
            else
                y.set(k, x.at(k + 1));
        }
        return y;
    }
    case NodeType::Sum: return add(apply(op.left(), x), apply(op.right(), x));
    case NodeType::Compose: return apply(op.left(), apply(op.right(), x));
    case NodeType::Negate: return scale_left(constant(x.kind(), -1.0), apply(op.left(), x));
    }
    throw Error(ErrorCode::NotApplicable, "unknown operator node");
}

} // namespace

ModuleVector apply(const OperatorExpr& op, const ModuleVector& x) {
    check_applicable(op, x);
    return apply_node(op, x);
}

std::vector<BlockEntry> column_image(const OperatorExpr& op, const AlgebraKind& kind, int fiber, std::int64_t j) {
    const int d = kind.fiber_dim();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
    auto coeff = [&](const AlgebraElement& a) { return a.fiber(fiber); };
    switch (op.type()) {
    case NodeType::ScalarMult: return {{j, coeff(op.element())}};
    case NodeType::UnilateralShift:
    case NodeType::BilateralShift: return {{j + 1, id}};
    case NodeType::WeightedShift: return {{j + 1, coeff(cyclic_entry(op, j))}};
    case NodeType::DiagonalUnitary:
    case NodeType::DiagonalSelfAdjoint: return {{j, coeff(cyclic_entry(op, j))}};
    case NodeType::DyadicExpand: return {{2 * j, id}};
    case NodeType::OddExpand: return {{2 * j - 1, id}};
    case NodeType::DyadicCompress:
        if (j % 2 == 0)
            return {{j / 2, id}};
        return {};
    case NodeType::OddCompress:
        if (j % 2 != 0)
            return {{(j + 1) / 2, id}};
        return {};
    case NodeType::Block: {
        const Eigen::MatrixXcd chi = coeff(op.element());
        const Eigen::MatrixXcd rest = id - chi;
        std::vector<BlockEntry> out;
        for (BlockEntry& e : column_image(op.left(), kind, fiber, j))
            out.push_back({e.row, chi * e.block * chi});
        for (BlockEntry& e : column_image(op.right(), kind, fiber, j))
            out.push_back({e.row, rest * e.block * rest});
        return out;
    }
    case NodeType::Adjoint: {
        const OperatorExpr& inner = op.left();
        if (inner.type() == NodeType::UnilateralShift && j - 1 < 1)
            return {};
        if (inner.type() == NodeType::WeightedShift)
            return {{j - 1, coeff(cyclic_entry(inner, j - 1)).adjoint()}};
        return {{j - 1, id}};
    }
    case NodeType::Sum: {
        std::vector<BlockEntry> out = column_image(op.left(), kind, fiber, j);
        for (BlockEntry& e : column_image(op.right(), kind, fiber, j))
            out.push_back(std::move(e));
        return out;
    }
    case NodeType::Compose: {
        std::vector<BlockEntry> out;
        for (const BlockEntry& inner : column_image(op.right(), kind, fiber, j))
            for (BlockEntry& outer : column_image(op.left(), kind, fiber, inner.row))
                out.push_back({outer.row, outer.block * inner.block});
        return out;
    }
    case NodeType::Negate: {
        std::vector<BlockEntry> out = column_image(op.left(), kind, fiber, j);
        for (BlockEntry& e : out)
            e.block = -e.block;
        return out;
    }
    }
    return {};
}

Eigen::MatrixXcd dense_section(const OperatorExpr& op, const AlgebraKind& kind, int fiber,
                               const std::vector<std::int64_t>& rows, const std::vector<std::int64_t>& cols) {
    const int d = kind.fiber_dim();
    std::unordered_map<std::int64_t, Eigen::Index> row_pos;
    row_pos.reserve(rows.size() * 2);
    for (std::size_t i = 0; i < rows.size(); ++i)
        row_pos.emplace(rows[i], static_cast<Eigen::Index>(i));
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows.size()) * d,
                                                static_cast<Eigen::Index>(cols.size()) * d);
    for (std::size_t c = 0; c < cols.size(); ++c)
        for (const BlockEntry& e : column_image(op, kind, fiber, cols[c])) {
            auto it = row_pos.find(e.row);
            if (it != row_pos.end())
                m.block(it->second * d, static_cast<Eigen::Index>(c) * d, d, d) += e.block;
        }
    return m;
}

namespace {

void collect_signature(const OperatorExpr& op, const AlgebraKind& kind, int fiber, std::vector<cd>& out) {
    for (const AlgebraElement& e : op.elements()) {
        if (kind.is_function())
            out.push_back(e.value(fiber));
        else
            out.insert(out.end(), e.data().begin(), e.data().end());
    }
    switch (op.type()) {
    case NodeType::Block:
    case NodeType::Sum:
    case NodeType::Compose:
        collect_signature(op.left(), kind, fiber, out);
        collect_signature(op.right(), kind, fiber, out);
        break;
    case NodeType::Adjoint:
    case NodeType::Negate: collect_signature(op.left(), kind, fiber, out); break;
    default: break;
    }
}

} // namespace

std::vector<cd> fiber_signature(const OperatorExpr& op, const AlgebraKind& kind, int fiber) {
    std::vector<cd> out;
    collect_signature(op, kind, fiber, out);
    return out;
}

AlgebraKind resolve_kind(const OperatorExpr& op, const std::optional<AlgebraKind>& fallback) {
    if (op.kind()) {
        if (fallback && !(*fallback == *op.kind()))
            throw Error(ErrorCode::KindMismatch, "operator over " + op.kind()->name() + " used with " +
                                                     fallback->name());
        return *op.kind();
    }
    if (fallback)
        return *fallback;
    throw Error(ErrorCode::KindMismatch, "operator carries no algebra; a kind must be supplied");
}

std::vector<std::int64_t> interior_indices(const OperatorExpr& op, int N) {
    std::vector<std::int64_t> out;
    if (op.integer_indexed())
        for (std::int64_t k = -N / 2; k <= N / 2; ++k)
            out.push_back(k);
    else
        for (std::int64_t k = 1; k <= N / 2; ++k)
            out.push_back(k);
    return out;
}

std::vector<std::int64_t> truncation_indices(const OperatorExpr& op, int N) {
    std::vector<std::int64_t> out;
    if (op.integer_indexed())
        for (std::int64_t k = -N; k <= N; ++k)
            out.push_back(k);
    else
        for (std::int64_t k = 1; k <= N; ++k)
            out.push_back(k);
    return out;
}

namespace {

// Representative fibers: one per distinct coefficient signature.
std::vector<int> distinct_fibers(const OperatorExpr& op, const AlgebraKind& kind) {
    std::vector<int> reps;
    std::vector<std::vector<cd>> seen;
    for (int f = 0; f < kind.fiber_count(); ++f) {
        std::vector<cd> sig = fiber_signature(op, kind, f);
        if (std::find(seen.begin(), seen.end(), sig) == seen.end()) {
            seen.push_back(std::move(sig));
            reps.push_back(f);
        }
    }
    return reps;
}

} // namespace

bool is_self_adjoint(const OperatorExpr& op, const AlgebraKind& kind, int N, double tol) {
    const OperatorExpr adj = adjoint(op);
    const std::vector<std::int64_t> idx = interior_indices(op, N);
    for (int f : distinct_fibers(OperatorExpr::sum(op, adj), kind)) {
        const Eigen::MatrixXcd a = dense_section(op, kind, f, idx, idx);
        const Eigen::MatrixXcd b = dense_section(adj, kind, f, idx, idx);
        if ((a - b).cwiseAbs().maxCoeff() > tol)
            return false;
    }
    return true;
}

bool is_normal(const OperatorExpr& op, const AlgebraKind& kind, int N, double tol) {
    const OperatorExpr adj = adjoint(op);
    const OperatorExpr ffstar = OperatorExpr::compose(op, adj);
    const OperatorExpr fstarf = OperatorExpr::compose(adj, op);
    const std::vector<std::int64_t> idx = interior_indices(op, N);
    for (int f : distinct_fibers(op, kind)) {
        const Eigen::MatrixXcd a = dense_section(ffstar, kind, f, idx, idx);
        const Eigen::MatrixXcd b = dense_section(fstarf, kind, f, idx, idx);
        if ((a - b).cwiseAbs().maxCoeff() > tol)
            return false;
    }
    return true;
}

double operator_norm_estimate(const OperatorExpr& op, const AlgebraKind& kind, int N) {
    const std::vector<std::int64_t> idx = truncation_indices(op, N);
    double best = 0.0;
    for (int f : distinct_fibers(op, kind)) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(dense_section(op, kind, f, idx, idx));
        best = std::max(best, svd.singularValues()(0));
    }
    return best;
}

AlgebraElement random_element(const AlgebraKind& kind, std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> unit_interval(0.0, 1.0);
    auto random_value = [&] {
        const double r = scale * std::sqrt(unit_interval(rng));
        const double phase = 2.0 * std::acos(-1.0) * unit_interval(rng);
        return std::polar(r, phase);
    };
    if (kind.tag() == KindTag::Matrix) {
        Eigen::MatrixXcd m(kind.n(), kind.n());
        for (Eigen::Index i = 0; i < m.size(); ++i)
            m.data()[i] = random_value();
        const double s = Eigen::JacobiSVD<Eigen::MatrixXcd>(m).singularValues()(0);
        return make_matrix(s > 0 ? m * (scale * unit_interval(rng) / s) : m);
    }
    std::uniform_int_distribution<int> pieces_dist(1, 4);
    const int pieces = pieces_dist(rng);
    std::vector<cd> knots(static_cast<std::size_t>(pieces + 1));
    for (cd& k : knots)
        k = random_value();
    std::vector<cd> values(static_cast<std::size_t>(kind.storage_size()));
    for (int i = 0; i < kind.storage_size(); ++i) {
        const double t = kind.sample_point(i);
        const double pos = t * pieces;
        const int cell = std::min(pieces - 1, static_cast<int>(pos));
        if (kind.tag() == KindTag::Step) {
            values[static_cast<std::size_t>(i)] = knots[static_cast<std::size_t>(cell)];
        } else {
            const double lambda = pos - cell;
            values[static_cast<std::size_t>(i)] = (1.0 - lambda) * knots[static_cast<std::size_t>(cell)] +
                                                  lambda * knots[static_cast<std::size_t>(cell + 1)];
        }
    }
    return AlgebraElement(kind, std::move(values));
}

ModuleVector random_interior_vector(const AlgebraKind& kind, const Indexing& indexing, std::mt19937_64& rng) {
    ModuleVector x = ModuleVector::zeros(kind, indexing);
    for (std::int64_t k = indexing.first(); k <= indexing.last(); ++k)
        if (indexing.interior(k))
            x.set(k, random_element(kind, rng));
    return x;
}

SelfAdjointBounds self_adjoint_bounds(const OperatorExpr& op, const AlgebraKind& kind, int N, int samples,
                                      std::uint64_t seed, const ToleranceConfig& tol) {
    if (!is_self_adjoint(op, kind, N, 1e-9))
        throw Error(ErrorCode::NotSelfAdjoint, op.describe() + " is not self-adjoint");

    if (op.type() == NodeType::DiagonalSelfAdjoint) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const AlgebraElement& g : op.elements()) {
            if (kind.is_function()) {
                for (const cd& v : refined_values(g)) {
                    lo = std::min(lo, v.real());
                    hi = std::max(hi, v.real());
                }
            } else {
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g.matrix(), Eigen::EigenvaluesOnly);
                lo = std::min(lo, es.eigenvalues().minCoeff());
                hi = std::max(hi, es.eigenvalues().maxCoeff());
            }
        }
        if (lo > tol.eq_tol)
            return {lo, lo, hi, hi, BoundsMethod::ClosedFormDiagonal};
    }

    std::mt19937_64 rng(seed);
    const Indexing ix = op.integer_indexed() ? Indexing::integers(N) : Indexing::natural(N);
    SelfAdjointBounds b;
    b.method = BoundsMethod::SampledSearch;
    b.m_upper = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        ModuleVector x = random_interior_vector(kind, ix, rng);
        const double nx = vector_norm(x);
        if (nx == 0.0)
            continue;
        x = scale_right(x, constant(kind, 1.0 / nx));
        const double q = norm(inner_product(apply(op, x), x));
        b.M_lower = std::max(b.M_lower, q);
        b.m_upper = std::min(b.m_upper, q);
    }
    if (!std::isfinite(b.m_upper))
        b.m_upper = 0.0;
    b.M_upper = std::max(operator_norm_estimate(op, kind, N), b.M_lower);
    return b;
}

} // namespace gspec
