#include "gspec/module.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace gspec {

Indexing Indexing::natural(int n) {
    if (n < 1)
        throw Error(ErrorCode::ConfigError, "natural indexing needs n >= 1");
    return Indexing(Type::Natural, n);
}

Indexing Indexing::integers(int m) {
    if (m < 0)
        throw Error(ErrorCode::ConfigError, "integer indexing needs m >= 0");
    return Indexing(Type::Integers, m);
}

ModuleVector::ModuleVector(AlgebraKind kind, Indexing indexing, std::vector<AlgebraElement> entries)
    : kind_(std::move(kind)), indexing_(indexing), entries_(std::move(entries)) {
    if (static_cast<int>(entries_.size()) != indexing_.size())
        throw Error(ErrorCode::ShapeMismatch, "vector length " + std::to_string(entries_.size()) +
                                                  " does not match indexing size " +
                                                  std::to_string(indexing_.size()));
    for (const AlgebraElement& e : entries_)
        if (!(e.kind() == kind_))
            throw Error(ErrorCode::KindMismatch, "entry of kind " + e.kind().name() + " in a " +
                                                     kind_.name() + " vector");
}

ModuleVector ModuleVector::zeros(const AlgebraKind& kind, const Indexing& indexing) {
    return ModuleVector(kind, indexing,
                        std::vector<AlgebraElement>(static_cast<std::size_t>(indexing.size()), zero(kind)));
}

AlgebraElement ModuleVector::at(std::int64_t k) const {
    if (!indexing_.contains(k))
        return zero(kind_);
    return entries_[indexing_.offset(k)];
}

void ModuleVector::set(std::int64_t k, AlgebraElement value) {
    if (!indexing_.contains(k))
        throw Error(ErrorCode::IndexOutOfRange, "coordinate " + std::to_string(k) + " outside truncation");
    if (!(value.kind() == kind_))
        throw Error(ErrorCode::KindMismatch, "coordinate kind " + value.kind().name());
    entries_[indexing_.offset(k)] = std::move(value);
}

ModuleVector basis_vector(std::int64_t k, const AlgebraKind& kind, const Indexing& indexing) {
    if (!indexing.contains(k))
        throw Error(ErrorCode::IndexOutOfRange, "basis index " + std::to_string(k) + " outside [" +
                                                    std::to_string(indexing.first()) + ", " +
                                                    std::to_string(indexing.last()) + "]");
    ModuleVector e = ModuleVector::zeros(kind, indexing);
    e.set(k, unit(kind));
    return e;
}

namespace {

void require_compatible(const ModuleVector& x, const ModuleVector& y) {
    if (!(x.kind() == y.kind()))
        throw Error(ErrorCode::KindMismatch, x.kind().name() + " vs " + y.kind().name());
    if (!(x.indexing() == y.indexing()))
        throw Error(ErrorCode::IndexingMismatch, "vectors use different truncations");
}

} // namespace

AlgebraElement inner_product(const ModuleVector& x, const ModuleVector& y) {
    require_compatible(x, y);
    AlgebraElement acc = zero(x.kind());
    for (std::size_t i = 0; i < x.entries().size(); ++i)
        acc = acc + star(x.entries()[i]) * y.entries()[i];
    return acc;
}

double vector_norm(const ModuleVector& x) { return std::sqrt(norm(inner_product(x, x))); }

bool is_orthogonal(const ModuleVector& x, const ModuleVector& y, double tol) {
    return norm(inner_product(x, y)) <= tol;
}

ModuleVector add(const ModuleVector& x, const ModuleVector& y) {
    require_compatible(x, y);
    std::vector<AlgebraElement> out;
    out.reserve(x.entries().size());
    for (std::size_t i = 0; i < x.entries().size(); ++i)
        out.push_back(x.entries()[i] + y.entries()[i]);
    return ModuleVector(x.kind(), x.indexing(), std::move(out));
}

ModuleVector sub(const ModuleVector& x, const ModuleVector& y) {
    require_compatible(x, y);
    std::vector<AlgebraElement> out;
    out.reserve(x.entries().size());
    for (std::size_t i = 0; i < x.entries().size(); ++i)
        out.push_back(x.entries()[i] - y.entries()[i]);
    return ModuleVector(x.kind(), x.indexing(), std::move(out));
}

ModuleVector scale_right(const ModuleVector& x, const AlgebraElement& a) {
    std::vector<AlgebraElement> out;
    out.reserve(x.entries().size());
    for (const AlgebraElement& e : x.entries())
        out.push_back(e * a);
    return ModuleVector(x.kind(), x.indexing(), std::move(out));
}

ModuleVector scale_left(const AlgebraElement& a, const ModuleVector& x) {
    std::vector<AlgebraElement> out;
    out.reserve(x.entries().size());
    for (const AlgebraElement& e : x.entries())
        out.push_back(a * e);
    return ModuleVector(x.kind(), x.indexing(), std::move(out));
}

double max_coordinate_norm(const ModuleVector& x) {
    double m = 0.0;
    for (const AlgebraElement& e : x.entries())
        m = std::max(m, norm(e));
    return m;
}

double interior_norm(const ModuleVector& x) {
    AlgebraElement acc = zero(x.kind());
    for (std::int64_t k = x.indexing().first(); k <= x.indexing().last(); ++k)
        if (x.indexing().interior(k)) {
            const AlgebraElement& e = x.entries()[x.indexing().offset(k)];
            acc = acc + star(e) * e;
        }
    return std::sqrt(norm(acc));
}

const char* growth_name(Growth g) noexcept {
    switch (g) {
    case Growth::Converging: return "Converging";
    case Growth::Diverging: return "Diverging";
    case Growth::Indeterminate: return "Indeterminate";
    }
    return "Indeterminate";
}

namespace {

// Running sum of x_k* x_k over the current window, kept in raw form to avoid
// reallocating algebra elements for every term.
class TailAccumulator {
public:
    explicit TailAccumulator(const AlgebraKind& kind) : kind_(kind) { reset(); }

    void add(const AlgebraElement& x) {
        if (kind_.is_function()) {
            for (std::size_t i = 0; i < pointwise_.size(); ++i)
                pointwise_[i] += std::norm(x.data()[i]);
        } else {
            const Eigen::MatrixXcd m = x.matrix();
            block_.noalias() += m.adjoint() * m;
        }
    }

    double norm_and_reset() {
        double r = 0.0;
        if (kind_.is_function()) {
            for (double v : pointwise_)
                r = std::isfinite(v) ? std::max(r, v) : v;
        } else if (!block_.allFinite()) {
            r = std::numeric_limits<double>::infinity();
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block_, Eigen::EigenvaluesOnly);
            r = std::max(0.0, es.eigenvalues().maxCoeff());
        }
        reset();
        return r;
    }

private:
    void reset() {
        if (kind_.is_function())
            pointwise_.assign(static_cast<std::size_t>(kind_.storage_size()), 0.0);
        else
            block_ = Eigen::MatrixXcd::Zero(kind_.n(), kind_.n());
    }

    AlgebraKind kind_;
    std::vector<double> pointwise_;
    Eigen::MatrixXcd block_;
};

Growth classify(const std::vector<double>& tails, double tol) {
    for (double t : tails)
        if (!std::isfinite(t))
            return Growth::Diverging;
    const std::size_t m = tails.size();
    if (m < 2)
        return Growth::Indeterminate;
    const double last = tails[m - 1];
    const double prev = tails[m - 2];
    if (prev > 0.0 && last >= 2.0 * (1.0 - 1e-9) * prev)
        return Growth::Diverging;
    const std::size_t from = m >= 3 ? m - 3 : 0;
    bool nonincreasing = true;
    for (std::size_t i = from; i + 1 < m; ++i)
        nonincreasing = nonincreasing && tails[i + 1] <= tails[i];
    if (last <= tol && nonincreasing)
        return Growth::Converging;
    return Growth::Indeterminate;
}

// Feeds gen(k) for k in [next, until) into the accumulator.
struct Sweep {
    const SequenceGenerator& gen;
    std::int64_t next = 1;
    std::optional<TailAccumulator> acc;

    double window(std::int64_t from, std::int64_t until) {
        for (; next < until; ++next) {
            try {
                const AlgebraElement x = gen(next);
                if (!acc)
                    acc.emplace(x.kind());
                if (next >= from)
                    acc->add(x);
            } catch (const Error& e) {
                // A term that overflows to a non-finite value is divergence, not a failure.
                if (e.code() != ErrorCode::NonFiniteEntry)
                    throw;
                next = until;
                return std::numeric_limits<double>::infinity();
            }
        }
        return acc ? acc->norm_and_reset() : 0.0;
    }
};

void check_depths(const std::vector<std::int64_t>& depths) {
    if (depths.size() < 3)
        throw Error(ErrorCode::ConfigError, "a membership diagnostic needs at least three depths");
    for (std::size_t i = 0; i < depths.size(); ++i)
        if (depths[i] < 1 || (i > 0 && depths[i] <= depths[i - 1]))
            throw Error(ErrorCode::ConfigError, "depths must be positive and strictly increasing");
}

} // namespace

GrowthDiagnostic sequence_membership_diagnostic(const SequenceGenerator& gen,
                                                const std::vector<std::int64_t>& depths, double tol) {
    check_depths(depths);
    GrowthDiagnostic d;
    d.depths = depths;
    Sweep sweep{gen, 1, std::nullopt};
    sweep.window(1, depths[0]);
    for (std::size_t i = 0; i + 1 < depths.size(); ++i) {
        d.tail_norms.push_back(sweep.window(depths[i], depths[i + 1]));
        if (!std::isfinite(d.tail_norms.back()))
            break;
    }
    d.verdict = classify(d.tail_norms, tol);
    return d;
}

GrowthDiagnostic adaptive_membership_diagnostic(const SequenceGenerator& gen, double tol,
                                                std::int64_t max_depth) {
    GrowthDiagnostic d;
    d.depths = {16, 32, 64, 128};
    Sweep sweep{gen, 1, std::nullopt};
    sweep.window(1, d.depths[0]);
    for (std::size_t i = 0; i + 1 < d.depths.size(); ++i)
        d.tail_norms.push_back(sweep.window(d.depths[i], d.depths[i + 1]));
    d.verdict = classify(d.tail_norms, tol);
    while (d.verdict == Growth::Indeterminate && d.depths.back() * 2 <= max_depth) {
        const std::int64_t from = d.depths.back();
        d.depths.push_back(from * 2);
        d.tail_norms.push_back(sweep.window(from, from * 2));
        d.verdict = classify(d.tail_norms, tol);
    }
    return d;
}

SequenceGenerator power_sequence(AlgebraElement base) {
    struct State {
        AlgebraElement base;
        AlgebraElement current;
        std::int64_t k;
    };
    auto state = std::make_shared<State>(State{base, base, 1});
    return [state](std::int64_t k) -> AlgebraElement {
        if (k < state->k) {
            state->current = state->base;
            state->k = 1;
        }
        while (state->k < k) {
            state->current = state->current * state->base;
            ++state->k;
        }
        return state->current;
    };
}

namespace {

// sum over k in [from, until) of m^(2k), evaluated through logarithms so moduli within
// rounding of 1 neither cancel nor overflow prematurely.
double geometric_window(double modulus, std::int64_t from, std::int64_t until) {
    const auto count = static_cast<double>(until - from);
    if (modulus == 0.0)
        return 0.0;
    const double lr = 2.0 * std::log(modulus);
    if (lr == 0.0)
        return count;
    return std::exp(static_cast<double>(from) * lr) * (std::expm1(count * lr) / std::expm1(lr));
}

double geometric_tail(const std::vector<double>& moduli, std::int64_t from, std::int64_t until) {
    double r = 0.0;
    for (double m : moduli) {
        const double v = geometric_window(m, from, until);
        if (!std::isfinite(v))
            return std::numeric_limits<double>::infinity();
        r = std::max(r, v);
    }
    return r;
}

} // namespace

GrowthDiagnostic geometric_membership_diagnostic(const std::vector<double>& moduli, double tol,
                                                 std::int64_t max_depth) {
    for (double m : moduli)
        if (!std::isfinite(m) || m < 0.0)
            throw Error(ErrorCode::NonFiniteEntry, "moduli must be finite and nonnegative");
    GrowthDiagnostic d;
    d.depths = {16, 32, 64, 128};
    for (std::size_t i = 0; i + 1 < d.depths.size(); ++i)
        d.tail_norms.push_back(geometric_tail(moduli, d.depths[i], d.depths[i + 1]));
    d.verdict = classify(d.tail_norms, tol);
    while (d.verdict == Growth::Indeterminate && d.depths.back() * 2 <= max_depth) {
        const std::int64_t from = d.depths.back();
        d.depths.push_back(from * 2);
        d.tail_norms.push_back(geometric_tail(moduli, from, from * 2));
        d.verdict = classify(d.tail_norms, tol);
    }
    return d;
}

} // namespace gspec
