#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gspec/expression.hpp"
#include "gspec/oracle.hpp"
#include "gspec/spectra.hpp"

using namespace gspec;

namespace {

const AlgebraKind kScalar = AlgebraKind::matrix(1);
const AlgebraKind kS = AlgebraKind::step(16);

AlgebraElement scalar(cd z) { return constant(kScalar, z); }

} // namespace

TEST_CASE("flattened sections") {
    const FlattenedTruncation s = flatten(OperatorExpr::unilateral_shift(), 3, kScalar);
    Eigen::MatrixXcd expect = Eigen::MatrixXcd::Zero(3, 3);
    expect(1, 0) = 1.0;
    expect(2, 1) = 1.0;
    CHECK(s.fiber(0).isApprox(expect));

    const AlgebraElement a = sample(kS, [](double t) { return cd(t); });
    const FlattenedTruncation d = flatten(OperatorExpr::scalar_mult(a), 4);
    CHECK(d.fiber(3).isApprox(a.value(3) * Eigen::MatrixXcd::Identity(4, 4)));
    // Fibers with equal coefficients share a section.
    const FlattenedTruncation c = flatten(OperatorExpr::unilateral_shift(), 8, kS);
    CHECK(c.sections.size() == 1);
    CHECK_THROWS_AS(flatten(OperatorExpr::unilateral_shift(), 0, kS), Error);
}

TEST_CASE("section minima") {
    CHECK(min_singular(flatten(shifted(OperatorExpr::scalar_mult(scalar(2.0)), scalar(0.0)), 8)) ==
          doctest::Approx(2.0));
    // The finite shift section is nilpotent, so its smallest singular value is exactly zero.
    const double s = min_singular(flatten(shifted(OperatorExpr::unilateral_shift(), scalar(0.0)), 32));
    CHECK(s <= std::sin(std::numbers::pi / (2.0 * 33.0)));
    const AlgebraElement t = sample(kS, [](double x) { return cd(x); });
    CHECK(min_singular(flatten(OperatorExpr::scalar_mult(t), 8)) <= 1.0 / 16.0);
    Eigen::MatrixXcd wide = Eigen::MatrixXcd::Ones(2, 3);
    CHECK(smallest_singular_value(wide) == 0.0);
    CHECK(smallest_singular_value(Eigen::MatrixXcd::Identity(3, 3) * 5.0) == doctest::Approx(5.0));
}

TEST_CASE("ladder classification") {
    double bound = 0.0;
    CHECK(classify_ladder({1.0, 1.0, 1.0}, 1e-8, &bound) == OracleVerdict::CertifiedBoundedBelow);
    CHECK(bound > 0.0);
    CHECK(classify_ladder({1e-3, 1e-6, 1e-12}, 1e-8) == OracleVerdict::NearSingularTrend);
    CHECK(classify_ladder({0.0, 0.0, 0.0}, 1e-8) == OracleVerdict::NearSingularTrend);
    CHECK(classify_ladder({0.8, 0.4, 0.2}, 1e-8) == OracleVerdict::NearSingularTrend);
    CHECK(classify_ladder({1.0, 1.0}, 1e-8) == OracleVerdict::Indeterminate);
    try {
        (void)bounded_below_ladder(OperatorExpr::unilateral_shift(), scalar(2.0), {16, 32});
        FAIL("a two-depth ladder was accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConfigError);
    }
}

TEST_CASE("bounded-below ladders") {
    const OracleReport two = bounded_below_ladder(OperatorExpr::unilateral_shift(), scalar(2.0));
    CHECK(two.verdict == OracleVerdict::CertifiedBoundedBelow);
    CHECK(two.sv_min.back() == doctest::Approx(1.0).epsilon(0.05));
    const OracleReport half = invertibility_ladder(OperatorExpr::unilateral_shift(), scalar(0.5));
    CHECK(half.verdict == OracleVerdict::NearSingularTrend);
    CHECK(half.adjoint_sv_min.back() < 1e-8);
    const OracleReport zero = bounded_below_ladder(OperatorExpr::scalar_mult(scalar(0.0)), scalar(0.0));
    CHECK(zero.verdict == OracleVerdict::NearSingularTrend);
    CHECK(zero.depths.size() >= 3);
}

TEST_CASE("kernel search") {
    const AlgebraElement half = constant(kS, 0.5);
    const auto z = kernel_search(OperatorExpr::dyadic_compress(), half, 64);
    REQUIRE_FALSE(z.empty());
    const ModuleVector& x = z.front().vector;
    CHECK(z.front().residual <= 1e-8);
    // The candidate lives on 1, 2, 4, 8, ... with ratio 1/2 between consecutive entries.
    const cd c1 = x.at(1).value(0);
    REQUIRE(std::abs(c1) > 1e-6);
    for (int k : {3, 5, 6, 7})
        CHECK(std::abs(x.at(k).value(0)) <= 1e-6 * std::abs(c1));
    CHECK(std::abs(x.at(2).value(0) / c1 - 0.5) <= 1e-6);
    CHECK(std::abs(x.at(4).value(0) / c1 - 0.25) <= 1e-6);

    const SpectrumVerdict rule = expander_point_spectra(ExpanderKind::DyadicCompress, half, {}, 64);
    const auto* w = std::get_if<KernelWitness>(&rule.certificate);
    REQUIRE(w != nullptr);
    const cd phase = w->x.at(1).value(0) / c1;
    for (int k : {1, 2, 4, 8, 16})
        CHECK(std::abs(x.at(k).value(0) * phase - w->x.at(k).value(0)) <= 1e-6 * std::abs(w->x.at(1).value(0)));

    CHECK(kernel_search(OperatorExpr::unilateral_shift(), half, 32).empty());
    CHECK(kernel_search(OperatorExpr::unilateral_shift(), constant(kS, 0.0), 32).empty());
    const auto odd = kernel_search(OperatorExpr::odd_expand(), unit(kS), 32);
    REQUIRE_FALSE(odd.empty());
    CHECK(odd.front().residual <= 1e-8);
}

TEST_CASE("solves") {
    const Indexing ix = Indexing::natural(64);
    const SolveResult r = solve(OperatorExpr::unilateral_shift(), scalar(2.0),
                                scale_right(basis_vector(1, kScalar, ix), scalar(-1.0)), 64);
    CHECK(r.residual <= 1e-9);
    CHECK(std::abs(r.solution.at(1).value(0) - 0.5) <= 1e-9);
    CHECK(std::abs(r.solution.at(2).value(0) - 0.25) <= 1e-9);
    CHECK(r.growth == Growth::Converging);

    const SolveResult v = solve(OperatorExpr::bilateral_shift(), scalar(1.0),
                                basis_vector(0, kScalar, Indexing::integers(64)), 64);
    CHECK(v.growth == Growth::Diverging);
    CHECK(v.norms.back() > v.norms.front());

    const SolveResult one = solve(OperatorExpr::scalar_mult(scalar(1.0)), scalar(0.0),
                                  basis_vector(3, kScalar, Indexing::natural(16)), 16);
    CHECK(one.residual == doctest::Approx(0.0));
    CHECK_THROWS_AS(solve(OperatorExpr::unilateral_shift(), scalar(2.0), basis_vector(1, kScalar, ix), 4), Error);
}

TEST_CASE("refined solves on continuous kinds") {
    const AlgebraKind k = AlgebraKind::continuous(16, 1);
    const SolveResult in = refined_solve(OperatorExpr::bilateral_shift(), parse_expression("t + 0.5", k), 0, 16, 3);
    CHECK(in.growth == Growth::Diverging);
    const SolveResult out = refined_solve(OperatorExpr::bilateral_shift(), constant(k, 2.0), 0, 16, 3);
    CHECK(out.growth == Growth::Converging);
    CHECK(out.depths == std::vector<int>{16, 32, 64});
}

TEST_CASE("matrix eigenvalues") {
    Eigen::MatrixXcd t(2, 2);
    t << 2.0, 1.0, 1.0, 0.0;
    auto ev = matrix_eigenvalues(make_matrix(t));
    std::sort(ev.begin(), ev.end(), [](cd a, cd b) { return a.real() < b.real(); });
    CHECK(ev[0].real() == doctest::Approx(1.0 - std::sqrt(2.0)));
    CHECK(ev[1].real() == doctest::Approx(1.0 + std::sqrt(2.0)));
}
