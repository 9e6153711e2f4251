#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "gspec/operators.hpp"
#include "gspec/spectra.hpp"

using namespace gspec;
using namespace std::complex_literals;

namespace {

const AlgebraKind kS = AlgebraKind::step(16);
const AlgebraKind kC = AlgebraKind::continuous(32);
const AlgebraKind kScalar = AlgebraKind::matrix(1);

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::EvalError;
}

std::vector<std::int64_t> range(std::int64_t lo, std::int64_t hi) {
    std::vector<std::int64_t> v(static_cast<std::size_t>(hi - lo + 1));
    std::iota(v.begin(), v.end(), lo);
    return v;
}

} // namespace

TEST_CASE("shift actions") {
    const Indexing ix = Indexing::natural(8);
    for (int k = 1; k < 8; ++k)
        CHECK(apply(OperatorExpr::unilateral_shift(), basis_vector(k, kS, ix)) == basis_vector(k + 1, kS, ix));
    // The last coordinate is pushed out of the truncation.
    CHECK(apply(OperatorExpr::unilateral_shift(), basis_vector(8, kS, ix)) == ModuleVector::zeros(kS, ix));
    CHECK(apply(adjoint(OperatorExpr::unilateral_shift()), basis_vector(1, kS, ix)) == ModuleVector::zeros(kS, ix));
    const Indexing iz = Indexing::integers(4);
    CHECK(apply(OperatorExpr::bilateral_shift(), basis_vector(-1, kS, iz)) == basis_vector(0, kS, iz));
    CHECK(apply(adjoint(OperatorExpr::bilateral_shift()), basis_vector(0, kS, iz)) == basis_vector(-1, kS, iz));
}

TEST_CASE("expanders and compressors") {
    const Indexing ix = Indexing::natural(16);
    CHECK(apply(OperatorExpr::dyadic_compress(), basis_vector(3, kS, ix)) == ModuleVector::zeros(kS, ix));
    CHECK(apply(OperatorExpr::dyadic_compress(), basis_vector(6, kS, ix)) == basis_vector(3, kS, ix));
    CHECK(apply(OperatorExpr::dyadic_expand(), basis_vector(3, kS, ix)) == basis_vector(6, kS, ix));
    CHECK(apply(OperatorExpr::odd_expand(), basis_vector(3, kS, ix)) == basis_vector(5, kS, ix));
    CHECK(apply(OperatorExpr::odd_compress(), basis_vector(5, kS, ix)) == basis_vector(3, kS, ix));
    CHECK(apply(OperatorExpr::odd_compress(), basis_vector(4, kS, ix)) == ModuleVector::zeros(kS, ix));
}

TEST_CASE("the block shift is the identity on the left block") {
    const OperatorExpr op = block_shift_operator(kS);
    const Indexing ix = Indexing::natural(6);
    const AlgebraElement f = mul(indicator(kS, 0.0, 0.5), sample(kS, [](double t) { return cd(1.0 + t, t); }));
    const ModuleVector x = scale_right(basis_vector(1, kS, ix), f);
    CHECK(apply(op, x) == x);
    const AlgebraElement g = indicator(kS, 0.5, 1.0);
    CHECK(apply(op, scale_right(basis_vector(1, kS, ix), g)) == scale_right(basis_vector(2, kS, ix), g));
}

TEST_CASE("structural adjoints") {
    const OperatorExpr si = OperatorExpr::scalar_mult(constant(kS, 1i));
    CHECK(adjoint(si) == OperatorExpr::scalar_mult(constant(kS, -1i)));
    CHECK(adjoint(OperatorExpr::dyadic_expand()) == OperatorExpr::dyadic_compress());
    CHECK(adjoint(OperatorExpr::odd_compress()) == OperatorExpr::odd_expand());
    CHECK(adjoint(adjoint(OperatorExpr::unilateral_shift())) == OperatorExpr::unilateral_shift());
    const OperatorExpr c = OperatorExpr::compose(OperatorExpr::unilateral_shift(), OperatorExpr::dyadic_expand());
    CHECK(adjoint(c) == OperatorExpr::compose(OperatorExpr::dyadic_compress(), adjoint(OperatorExpr::unilateral_shift())));
}

TEST_CASE("adjoints agree with <Tx, y> = <x, T* y>") {
    std::mt19937_64 rng(7);
    const Indexing ix = Indexing::natural(24);
    const std::vector<OperatorExpr> ops = {
        OperatorExpr::unilateral_shift(),
        OperatorExpr::dyadic_expand(),
        OperatorExpr::odd_compress(),
        OperatorExpr::weighted_shift({random_element(kS, rng), random_element(kS, rng)}),
        OperatorExpr::sum(OperatorExpr::scalar_mult(random_element(kS, rng)), OperatorExpr::odd_expand()),
        block_shift_operator(kS),
    };
    for (const OperatorExpr& op : ops) {
        const ModuleVector x = random_interior_vector(kS, ix, rng);
        const ModuleVector y = random_interior_vector(kS, ix, rng);
        const AlgebraElement lhs = inner_product(apply(op, x), y);
        const AlgebraElement rhs = inner_product(x, apply(adjoint(op), y));
        CHECK(max_abs_diff(lhs, rhs) <= 1e-12);
    }
}

TEST_CASE("self-adjointness and normality") {
    const OperatorExpr g = OperatorExpr::diagonal_self_adjoint({sample(kC, [](double t) { return cd(1.0 + t); })});
    CHECK(is_self_adjoint(g, kC, 16, 1e-12));
    const AlgebraElement p = indicator(kS, 0.25, 0.75);
    CHECK(is_self_adjoint(OperatorExpr::scalar_mult(p), kS, 16, 1e-12));
    CHECK_FALSE(is_self_adjoint(OperatorExpr::unilateral_shift(), kS, 16, 1e-12));
    CHECK(is_normal(OperatorExpr::bilateral_shift(), kS, 16, 1e-12));
    CHECK_FALSE(is_normal(OperatorExpr::unilateral_shift(), kS, 16, 1e-12));
}

TEST_CASE("self-adjoint bounds") {
    const SelfAdjointBounds two = self_adjoint_bounds(OperatorExpr::diagonal_self_adjoint({constant(kC, 2.0)}), kC, 32, 64, 1);
    CHECK(two.m_lower == doctest::Approx(2.0));
    CHECK(two.M_upper == doctest::Approx(2.0));
    CHECK(two.method == BoundsMethod::ClosedFormDiagonal);
    const SelfAdjointBounds ramp = self_adjoint_bounds(
        OperatorExpr::diagonal_self_adjoint({sample(kC, [](double t) { return cd(1.0 + t); })}), kC, 32, 64, 1);
    CHECK(ramp.m_lower == doctest::Approx(1.0));
    CHECK(ramp.M_upper == doctest::Approx(2.0));
    CHECK(code_of([] { (void)self_adjoint_bounds(OperatorExpr::unilateral_shift(), kC, 32, 64, 1); }) ==
          ErrorCode::NotSelfAdjoint);
}

TEST_CASE("sections") {
    const Eigen::MatrixXcd s = dense_section(OperatorExpr::unilateral_shift(), kScalar, 0, range(1, 3), range(1, 3));
    Eigen::MatrixXcd expect = Eigen::MatrixXcd::Zero(3, 3);
    expect(1, 0) = 1.0;
    expect(2, 1) = 1.0;
    CHECK(s.isApprox(expect));

    const AlgebraElement a = sample(kC, [](double t) { return cd(t, 2.0); });
    const Eigen::MatrixXcd d = dense_section(OperatorExpr::scalar_mult(a), kC, 5, range(1, 4), range(1, 4));
    CHECK(d.isApprox(a.value(5) * Eigen::MatrixXcd::Identity(4, 4)));

    // Matrix kinds act by left multiplication, block by block.
    Eigen::MatrixXcd t(2, 2);
    t << 1.0, 2.0, 3.0, 4.0;
    const Eigen::MatrixXcd m = dense_section(OperatorExpr::scalar_mult(make_matrix(t)), AlgebraKind::matrix(2), 0,
                                             range(1, 2), range(1, 2));
    CHECK(m.rows() == 4);
    CHECK(m.block(0, 0, 2, 2).isApprox(t));
    CHECK(m.block(2, 2, 2, 2).isApprox(t));
    CHECK(m.block(0, 2, 2, 2).norm() == 0.0);

    const auto col = column_image(OperatorExpr::dyadic_compress(), kS, 0, 7);
    CHECK(col.empty());
    CHECK(column_image(OperatorExpr::dyadic_compress(), kS, 0, 8).front().row == 4);
}

TEST_CASE("norm estimates") {
    CHECK(operator_norm_estimate(OperatorExpr::unilateral_shift(), kS, 16) == doctest::Approx(1.0));
    CHECK(operator_norm_estimate(OperatorExpr::scalar_mult(constant(kS, 3.0)), kS, 8) == doctest::Approx(3.0));
}

TEST_CASE("construction errors") {
    CHECK(code_of([] { (void)OperatorExpr::diagonal_unitary({constant(kS, 2.0)}); }) == ErrorCode::PreconditionFailed);
    CHECK(code_of([] { (void)OperatorExpr::diagonal_self_adjoint({constant(kS, 1i)}); }) ==
          ErrorCode::NotSelfAdjoint);
    CHECK(code_of([] {
              (void)OperatorExpr::block(constant(kS, 0.5), OperatorExpr::unilateral_shift(),
                                        OperatorExpr::unilateral_shift());
          }) == ErrorCode::PreconditionFailed);
    CHECK(code_of([] { (void)OperatorExpr::weighted_shift({}); }) == ErrorCode::ShapeMismatch);
    CHECK(code_of([] {
              (void)OperatorExpr::sum(OperatorExpr::scalar_mult(unit(kS)), OperatorExpr::scalar_mult(unit(kC)));
          }) == ErrorCode::KindMismatch);
    CHECK(code_of([] {
              (void)OperatorExpr::sum(OperatorExpr::unilateral_shift(), OperatorExpr::bilateral_shift());
          }) == ErrorCode::IndexingMismatch);
    CHECK(code_of([] { (void)apply(OperatorExpr::bilateral_shift(), basis_vector(1, kS, Indexing::natural(4))); }) ==
          ErrorCode::IndexingMismatch);
}

TEST_CASE("describe names the tree") {
    const OperatorExpr op = OperatorExpr::sum(OperatorExpr::unilateral_shift(), adjoint(OperatorExpr::unilateral_shift()));
    const std::string d = op.describe();
    CHECK(d.find('S') != std::string::npos);
    CHECK(!d.empty());
}
