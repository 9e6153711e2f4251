#include "gspec/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gspec {

AlgebraKind AlgebraKind::continuous(int resolution, int refinement_factor) {
    if (resolution < 2 || refinement_factor < 1)
        throw Error(ErrorCode::ConfigError, "continuous grid needs resolution >= 2 and refinement >= 1");
    return AlgebraKind(KindTag::Continuous, GridSpec{resolution, refinement_factor}, 0);
}

AlgebraKind AlgebraKind::step(int resolution, int refinement_factor) {
    if (resolution < 2 || refinement_factor < 1)
        throw Error(ErrorCode::ConfigError, "step grid needs resolution >= 2 and refinement >= 1");
    return AlgebraKind(KindTag::Step, GridSpec{resolution, refinement_factor}, 0);
}

AlgebraKind AlgebraKind::matrix(int n) {
    if (n < 1)
        throw Error(ErrorCode::ConfigError, "matrix algebra needs n >= 1");
    return AlgebraKind(KindTag::Matrix, GridSpec{}, n);
}

int AlgebraKind::storage_size() const noexcept {
    return is_function() ? grid_.resolution : n_ * n_;
}

double AlgebraKind::sample_point(int i) const {
    switch (tag_) {
    case KindTag::Continuous: return static_cast<double>(i) / (grid_.resolution - 1);
    case KindTag::Step: return (i + 0.5) / grid_.resolution;
    case KindTag::Matrix: break;
    }
    throw Error(ErrorCode::KindUnsupported, "matrix kind has no sample points");
}

std::string AlgebraKind::name() const {
    std::ostringstream os;
    switch (tag_) {
    case KindTag::Continuous: os << "continuous(" << grid_.resolution << ")"; break;
    case KindTag::Step: os << "step(" << grid_.resolution << ")"; break;
    case KindTag::Matrix: os << "matrix(" << n_ << ")"; break;
    }
    return os.str();
}

void ToleranceConfig::validate() const {
    if (!(eq_tol > 0) || !(boundary_band > 0) || !(oracle_sv_tol > 0))
        throw Error(ErrorCode::ConfigError, "tolerances must be strictly positive");
    if (!(boundary_band > eq_tol))
        throw Error(ErrorCode::ConfigError, "boundary_band must exceed eq_tol");
}

AlgebraElement::AlgebraElement(AlgebraKind kind, std::vector<cd> data)
    : kind_(std::move(kind)), data_(std::move(data)) {
    if (static_cast<int>(data_.size()) != kind_.storage_size())
        throw Error(ErrorCode::ShapeMismatch, "expected " + std::to_string(kind_.storage_size()) +
                                                  " values for " + kind_.name() + ", got " +
                                                  std::to_string(data_.size()));
    for (const cd& v : data_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw Error(ErrorCode::NonFiniteEntry, "non-finite entry in " + kind_.name() + " element");
}

Eigen::MatrixXcd AlgebraElement::matrix() const {
    if (kind_.is_function())
        throw Error(ErrorCode::KindMismatch, "matrix() on a function element");
    const int n = kind_.n();
    return Eigen::Map<const Eigen::MatrixXcd>(data_.data(), n, n);
}

Eigen::MatrixXcd AlgebraElement::fiber(int f) const {
    if (kind_.is_function()) {
        Eigen::MatrixXcd m(1, 1);
        m(0, 0) = data_[static_cast<std::size_t>(f)];
        return m;
    }
    return matrix();
}

namespace {

void require_same_kind(const AlgebraElement& a, const AlgebraElement& b) {
    if (!(a.kind() == b.kind()))
        throw Error(ErrorCode::KindMismatch, a.kind().name() + " vs " + b.kind().name());
}

template <class Op>
AlgebraElement pointwise(const AlgebraElement& a, const AlgebraElement& b, Op op) {
    require_same_kind(a, b);
    std::vector<cd> out(a.data().size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = op(a.data()[i], b.data()[i]);
    return AlgebraElement(a.kind(), std::move(out));
}

std::vector<cd> to_vector(const Eigen::MatrixXcd& m) {
    return std::vector<cd>(m.data(), m.data() + m.size());
}

} // namespace

AlgebraElement AlgebraElement::operator+(const AlgebraElement& other) const {
    return pointwise(*this, other, std::plus<cd>());
}

AlgebraElement AlgebraElement::operator-(const AlgebraElement& other) const {
    return pointwise(*this, other, std::minus<cd>());
}

AlgebraElement AlgebraElement::operator*(const AlgebraElement& other) const {
    require_same_kind(*this, other);
    if (kind_.is_function())
        return pointwise(*this, other, std::multiplies<cd>());
    return AlgebraElement(kind_, to_vector(matrix() * other.matrix()));
}

AlgebraElement AlgebraElement::operator-() const { return scaled(-1.0); }

AlgebraElement AlgebraElement::scaled(cd c) const {
    std::vector<cd> out(data_);
    for (cd& v : out)
        v *= c;
    return AlgebraElement(kind_, std::move(out));
}

AlgebraElement make_element(const AlgebraKind& kind, std::vector<cd> values) {
    return AlgebraElement(kind, std::move(values));
}

AlgebraElement make_matrix(const Eigen::MatrixXcd& m) {
    if (m.rows() != m.cols())
        throw Error(ErrorCode::ShapeMismatch, "matrix element must be square");
    return AlgebraElement(AlgebraKind::matrix(static_cast<int>(m.rows())), to_vector(m));
}

AlgebraElement unit(const AlgebraKind& kind) {
    if (kind.is_function())
        return constant(kind, 1.0);
    return make_matrix(Eigen::MatrixXcd::Identity(kind.n(), kind.n()));
}

AlgebraElement zero(const AlgebraKind& kind) {
    return AlgebraElement(kind, std::vector<cd>(static_cast<std::size_t>(kind.storage_size())));
}

AlgebraElement constant(const AlgebraKind& kind, cd c) {
    if (kind.is_function())
        return AlgebraElement(kind, std::vector<cd>(static_cast<std::size_t>(kind.storage_size()), c));
    return make_matrix(c * Eigen::MatrixXcd::Identity(kind.n(), kind.n()));
}

AlgebraElement sample(const AlgebraKind& kind, const std::function<cd(double)>& f) {
    if (!kind.is_function())
        throw Error(ErrorCode::KindUnsupported, "sample() requires a function kind");
    std::vector<cd> values(static_cast<std::size_t>(kind.storage_size()));
    for (int i = 0; i < kind.storage_size(); ++i)
        values[static_cast<std::size_t>(i)] = f(kind.sample_point(i));
    return AlgebraElement(kind, std::move(values));
}

AlgebraElement indicator(const AlgebraKind& kind, double a, double b) {
    return sample(kind, [a, b](double t) { return (t > a && t < b) ? cd(1.0) : cd(0.0); });
}

AlgebraElement add(const AlgebraElement& a, const AlgebraElement& b) { return a + b; }
AlgebraElement sub(const AlgebraElement& a, const AlgebraElement& b) { return a - b; }
AlgebraElement mul(const AlgebraElement& a, const AlgebraElement& b) { return a * b; }

AlgebraElement star(const AlgebraElement& a) {
    if (a.kind().is_function()) {
        std::vector<cd> out(a.data());
        for (cd& v : out)
            v = std::conj(v);
        return AlgebraElement(a.kind(), std::move(out));
    }
    return AlgebraElement(a.kind(), to_vector(a.matrix().adjoint()));
}

std::vector<cd> refined_values(const AlgebraElement& a) {
    const AlgebraKind& k = a.kind();
    if (k.tag() == KindTag::Step)
        return a.data();
    if (k.tag() != KindTag::Continuous)
        throw Error(ErrorCode::KindUnsupported, "refined values need a function kind");
    const int res = k.grid().resolution;
    const int rf = k.grid().refinement_factor;
    std::vector<cd> out;
    out.reserve(static_cast<std::size_t>((res - 1) * rf + 1));
    for (int i = 0; i + 1 < res; ++i) {
        const cd lo = a.value(i);
        const cd hi = a.value(i + 1);
        for (int s = 0; s < rf; ++s) {
            const double lambda = static_cast<double>(s) / rf;
            out.push_back((1.0 - lambda) * lo + lambda * hi);
        }
    }
    out.push_back(a.value(res - 1));
    return out;
}

std::vector<double> refined_abs_values(const AlgebraElement& a) {
    std::vector<cd> v = refined_values(a);
    std::vector<double> out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), [](cd z) { return std::abs(z); });
    return out;
}

AlgebraElement to_refined_grid(const AlgebraElement& a) {
    const AlgebraKind& k = a.kind();
    if (k.tag() != KindTag::Continuous || k.grid().refinement_factor == 1)
        return a;
    const int nodes = (k.grid().resolution - 1) * k.grid().refinement_factor + 1;
    return AlgebraElement(AlgebraKind::continuous(nodes, 1), refined_values(a));
}

namespace {

Eigen::VectorXd singular_values(const AlgebraElement& a) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a.matrix());
    return svd.singularValues();
}

} // namespace

double norm(const AlgebraElement& a) {
    if (!a.kind().is_function())
        return singular_values(a)(0);
    // |piecewise linear| is convex on each interval, so its sup sits at the nodes.
    double m = 0.0;
    for (const cd& v : a.data())
        m = std::max(m, std::abs(v));
    return m;
}

double sup_abs(const AlgebraElement& a) { return norm(a); }

double inf_abs(const AlgebraElement& a) {
    if (!a.kind().is_function()) {
        Eigen::VectorXd s = singular_values(a);
        return s(s.size() - 1);
    }
    std::vector<double> v = refined_abs_values(a);
    return *std::min_element(v.begin(), v.end());
}

std::variant<AlgebraElement, NotInvertible> try_invert(const AlgebraElement& a, const ToleranceConfig& tol) {
    const double lower = inf_abs(a);
    if (!(lower > tol.eq_tol))
        return NotInvertible{lower};
    if (a.kind().is_function()) {
        std::vector<cd> out(a.data().size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = 1.0 / a.data()[i];
        return AlgebraElement(a.kind(), std::move(out));
    }
    return make_matrix(a.matrix().fullPivLu().inverse());
}

AlgebraElement inverse(const AlgebraElement& a, const ToleranceConfig& tol) {
    auto r = try_invert(a, tol);
    if (auto* bad = std::get_if<NotInvertible>(&r))
        throw Error(ErrorCode::NotInvertible, "inf|a| = " + std::to_string(bad->inf_abs));
    return std::get<AlgebraElement>(std::move(r));
}

std::vector<AlgebraElement> right_annihilator_basis(const AlgebraElement& a, const ToleranceConfig& tol) {
    const AlgebraKind& k = a.kind();
    std::vector<AlgebraElement> out;
    if (k.tag() == KindTag::Matrix) {
        const int n = k.n();
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a.matrix(), Eigen::ComputeFullV);
        const Eigen::VectorXd s = svd.singularValues();
        for (int c = 0; c < n; ++c) {
            if (s(c) > tol.eq_tol)
                continue;
            const Eigen::VectorXcd v = svd.matrixV().col(c);
            for (int pos = 0; pos < n; ++pos) {
                Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
                y.col(pos) = v;
                out.push_back(make_matrix(y));
            }
        }
        return out;
    }

    std::vector<cd> support(static_cast<std::size_t>(k.storage_size()), cd(0.0));
    bool any = false;
    if (k.tag() == KindTag::Step) {
        for (int i = 0; i < k.storage_size(); ++i)
            if (std::abs(a.value(i)) <= tol.eq_tol) {
                support[static_cast<std::size_t>(i)] = 1.0;
                any = true;
            }
    } else {
        // An interval qualifies when |a| <= eq_tol at both ends, hence along the whole chord.
        for (int i = 0; i + 1 < k.storage_size(); ++i)
            if (std::abs(a.value(i)) <= tol.eq_tol && std::abs(a.value(i + 1)) <= tol.eq_tol) {
                support[static_cast<std::size_t>(i)] = 1.0;
                support[static_cast<std::size_t>(i + 1)] = 1.0;
                any = true;
            }
    }
    if (any)
        out.emplace_back(k, std::move(support));
    return out;
}

bool is_self_adjoint_element(const AlgebraElement& a, double tol) {
    return max_abs_diff(a, star(a)) <= tol;
}

bool is_unitary_element(const AlgebraElement& a, double tol) {
    const AlgebraElement one = unit(a.kind());
    return norm(star(a) * a - one) <= tol && norm(a * star(a) - one) <= tol;
}

bool is_projection(const AlgebraElement& a, double tol) {
    return is_self_adjoint_element(a, tol) && max_abs_diff(a * a, a) <= tol;
}

double max_abs_diff(const AlgebraElement& a, const AlgebraElement& b) {
    require_same_kind(a, b);
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

} // namespace gspec
