#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gspec/algebra.hpp"
#include "gspec/expression.hpp"

using namespace gspec;
using namespace std::complex_literals;

namespace {

AlgebraElement t1() {
    Eigen::MatrixXcd m(2, 2);
    m << 2.0, 1.0, 1.0, 0.0;
    return make_matrix(m);
}

AlgebraElement t2() {
    Eigen::MatrixXcd m(2, 2);
    m << 0.0, 1i, 1i, 1i;
    return make_matrix(m);
}

const AlgebraKind kC = AlgebraKind::continuous(256);
const AlgebraKind kS = AlgebraKind::step(256);

} // namespace

TEST_CASE("kinds describe their storage") {
    CHECK(kC.storage_size() == 256);
    CHECK(kC.fiber_count() == 256);
    CHECK(AlgebraKind::matrix(3).storage_size() == 9);
    CHECK(AlgebraKind::matrix(3).fiber_count() == 1);
    CHECK(AlgebraKind::matrix(3).fiber_dim() == 3);
    CHECK(AlgebraKind::matrix(1).is_commutative());
    CHECK_FALSE(AlgebraKind::matrix(2).is_commutative());
    CHECK(kC.sample_point(0) == doctest::Approx(0.0));
    CHECK(kC.sample_point(255) == doctest::Approx(1.0));
    CHECK(kS.sample_point(0) > 0.0);
    CHECK(kS.sample_point(255) < 1.0);
}

TEST_CASE("bad kinds and shapes are rejected") {
    CHECK_THROWS_AS(AlgebraKind::continuous(1), Error);
    CHECK_THROWS_AS(AlgebraKind::step(0), Error);
    CHECK_THROWS_AS(AlgebraKind::matrix(0), Error);
    CHECK_THROWS_AS(make_element(kC, std::vector<cd>(10, 1.0)), Error);
    CHECK_THROWS_AS(make_element(AlgebraKind::step(4), {1.0, std::nan(""), 1.0, 1.0}), Error);
    try {
        (void)make_element(kC, std::vector<cd>(3));
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ShapeMismatch);
    }
}

TEST_CASE("constructors") {
    CHECK(make_element(kC, std::vector<cd>(256, 1.0)) == unit(kC));
    CHECK(unit(AlgebraKind::matrix(3)).matrix().isApprox(Eigen::MatrixXcd::Identity(3, 3)));
    const AlgebraElement s8 = unit(AlgebraKind::step(8));
    for (cd v : s8.data())
        CHECK(v == cd(1.0));
    const AlgebraElement chi = indicator(kS, 0.0, 0.5);
    CHECK(chi.value(0) == cd(1.0));
    CHECK(chi.value(255) == cd(0.0));
    CHECK(is_projection(chi, 1e-12));
    CHECK(t1().matrix()(0, 0) == cd(2.0));
}

TEST_CASE("arithmetic and star") {
    const AlgebraElement a = sample(kC, [](double t) { return cd(t, 1.0 - t); });
    CHECK(max_abs_diff(mul(unit(kC), a), a) == 0.0);
    CHECK(max_abs_diff(mul(t1(), inverse(t1())), unit(AlgebraKind::matrix(2))) <= 1e-9);
    Eigen::MatrixXcd expect(2, 2);
    expect << 0.0, 2.0 * 1i, 2.0 * 1i, 2.0 * 1i;
    CHECK(sub(t2(), star(t2())).matrix().isApprox(expect));
    CHECK(star(unit(kC)) == unit(kC));
    CHECK(max_abs_diff(star(constant(kC, 1i)), constant(kC, -1i)) == 0.0);
    Eigen::MatrixXcd t2s(2, 2);
    t2s << 0.0, -1i, -1i, -1i;
    CHECK(star(t2()).matrix().isApprox(t2s));
    CHECK_THROWS_AS(add(unit(kC), unit(kS)), Error);
    CHECK(max_abs_diff(a + a, a.scaled(2.0)) <= 1e-15);
    CHECK(max_abs_diff(-a, a.scaled(-1.0)) == 0.0);
}

TEST_CASE("norms and infima") {
    const AlgebraElement shifted_t = parse_expression("t + 0.5", kC);
    CHECK(norm(unit(kC)) == doctest::Approx(1.0));
    CHECK(norm(shifted_t) == doctest::Approx(1.5));
    CHECK(norm(t1()) == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-12));
    CHECK(inf_abs(shifted_t) == doctest::Approx(0.5));
    CHECK(inf_abs(unit(kC)) == doctest::Approx(1.0));
    const AlgebraElement s = add(indicator(kS, 0.0, 0.5).scaled(3.0), indicator(kS, 0.5, 1.0).scaled(0.5));
    CHECK(inf_abs(s) == doctest::Approx(0.5));
    CHECK(sup_abs(s) == doctest::Approx(3.0));
}

TEST_CASE("continuous elements are read through their refined interpolant") {
    // Node values 1 and -1 with a phase jump: the interpolant crosses 0 between nodes.
    const AlgebraKind k = AlgebraKind::continuous(2, 4);
    const AlgebraElement a = make_element(k, {1.0, -1.0});
    CHECK(refined_values(a).size() == 5);
    CHECK(inf_abs(a) == doctest::Approx(0.0));
    CHECK(to_refined_grid(a).kind().grid().resolution == 5);
}

TEST_CASE("inversion") {
    const auto two = try_invert(constant(kC, 2.0));
    REQUIRE(std::holds_alternative<AlgebraElement>(two));
    CHECK(max_abs_diff(std::get<AlgebraElement>(two), constant(kC, 0.5)) <= 1e-15);
    CHECK(std::holds_alternative<NotInvertible>(try_invert(parse_expression("t", kC))));
    CHECK(std::holds_alternative<NotInvertible>(try_invert(sub(t1(), t2()))));
    CHECK(std::abs(sub(t1(), t2()).matrix().determinant()) <= 1e-12);
    CHECK_THROWS_AS(inverse(zero(kS)), Error);
}

TEST_CASE("right annihilators") {
    CHECK(right_annihilator_basis(t1()).empty());
    Eigen::MatrixXcd p(2, 2);
    p << 1.0, 0.0, 0.0, 0.0;
    // {B : P B = 0} is every matrix with a zero first row, spanned by E21 and E22.
    const auto basis = right_annihilator_basis(make_matrix(p));
    REQUIRE(basis.size() == 2);
    double e22_weight = 0.0;
    for (const AlgebraElement& e : basis) {
        const Eigen::MatrixXcd b = e.matrix();
        CHECK((p * b).norm() <= 1e-12);
        CHECK(b.row(0).norm() <= 1e-12);
        e22_weight += std::norm(b(1, 1));
    }
    CHECK(e22_weight == doctest::Approx(1.0));

    const AlgebraElement step = indicator(kS, 0.5, 1.0);
    const auto sb = right_annihilator_basis(step);
    REQUIRE(sb.size() == 1);
    CHECK(max_abs_diff(sb.front(), indicator(kS, 0.0, 0.5)) == 0.0);
    CHECK(right_annihilator_basis(unit(kC)).empty());
}

TEST_CASE("element predicates") {
    CHECK(is_self_adjoint_element(t1(), 1e-12));
    CHECK_FALSE(is_self_adjoint_element(t2(), 1e-12));
    CHECK(is_unitary_element(constant(kC, std::polar(1.0, 0.3)), 1e-12));
    CHECK_FALSE(is_unitary_element(constant(kC, 2.0), 1e-12));
    CHECK(is_projection(indicator(kS, 0.1, 0.7), 1e-12));
    CHECK_FALSE(is_projection(constant(kS, 0.5), 1e-12));
}

TEST_CASE("tolerance validation") {
    ToleranceConfig ok;
    CHECK_NOTHROW(ok.validate());
    ToleranceConfig bad;
    bad.boundary_band = bad.eq_tol / 2;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = {};
    bad.oracle_sv_tol = -1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("expression parser") {
    const AlgebraElement a = parse_expression("t + 0.5", kC);
    for (int i = 0; i < 256; i += 17)
        CHECK(std::abs(a.value(i) - cd(kC.sample_point(i) + 0.5)) <= 1e-15);
    CHECK(max_abs_diff(parse_expression("indicator(0,0.5)", kS), indicator(kS, 0.0, 0.5)) == 0.0);
    CHECK(max_abs_diff(parse_expression("2*i", kC), constant(kC, 2i)) == 0.0);
    CHECK(std::abs(parse_expression("exp(2*pi*i*t)", kC).value(128) -
                   std::exp(2.0 * std::numbers::pi * 1i * kC.sample_point(128))) <= 1e-12);
    CHECK(parse_expression("2^3^2", AlgebraKind::matrix(1)).value(0) == cd(512.0));
    CHECK(parse_expression("-2^2", AlgebraKind::matrix(1)).value(0) == cd(-4.0));
    CHECK(parse_expression("conj(1+2*i) + re(3*i) + im(3*i) + abs(-4)", AlgebraKind::matrix(1)).value(0) ==
          cd(8.0, -2.0));
    CHECK(parse_expression("3", AlgebraKind::matrix(2)).matrix().isApprox(3.0 * Eigen::MatrixXcd::Identity(2, 2)));
}

TEST_CASE("expression parser errors carry positions") {
    const auto position_of = [](const char* text, const AlgebraKind& k) -> long {
        try {
            (void)parse_expression(text, k);
        } catch (const ParseError& e) {
            CHECK(e.code() == ErrorCode::ParseError);
            return static_cast<long>(e.position());
        } catch (const Error& e) {
            return -100 - static_cast<long>(e.code());
        }
        return -1;
    };
    CHECK(position_of("t +", kC) == 3);
    CHECK(position_of("(t", kC) == 2);
    CHECK(position_of("t $ 1", kC) == 2);
    CHECK(position_of("foo(t)", kC) == 0);
    CHECK(position_of("", kC) == 0);
    CHECK(position_of("1 2", kC) == 2);
    // t is meaningless in a matrix algebra.
    CHECK(position_of("t", AlgebraKind::matrix(2)) != -1);
}

TEST_CASE("evaluation errors") {
    CHECK_THROWS_AS(parse_expression("1/t", kC), Error);
    CHECK_THROWS_AS(parse_expression("sqrt(t-2)/0", kS), Error);
}
