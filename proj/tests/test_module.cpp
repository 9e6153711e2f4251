#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gspec/module.hpp"
#include "gspec/operators.hpp"

using namespace gspec;
using namespace std::complex_literals;

namespace {

const AlgebraKind kC = AlgebraKind::continuous(256);
const AlgebraKind kS = AlgebraKind::step(256);

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::EvalError;
}

// (g, a* g, a*^2 g, ...) truncated to n coordinates.
ModuleVector geometric(const AlgebraElement& a, const AlgebraElement& g, int n) {
    std::vector<AlgebraElement> entries;
    AlgebraElement x = g;
    for (int k = 0; k < n; ++k) {
        entries.push_back(x);
        x = mul(star(a), x);
    }
    return ModuleVector(a.kind(), Indexing::natural(n), std::move(entries));
}

} // namespace

TEST_CASE("indexing") {
    const Indexing n = Indexing::natural(48);
    CHECK(n.size() == 48);
    CHECK(n.first() == 1);
    CHECK(n.contains(48));
    CHECK_FALSE(n.contains(0));
    CHECK(n.interior(24));
    CHECK_FALSE(n.interior(25));
    const Indexing z = Indexing::integers(24);
    CHECK(z.size() == 49);
    CHECK(z.first() == -24);
    CHECK(z.offset(0) == 24);
    CHECK(z.interior(-12));
    CHECK_FALSE(z.interior(13));
    CHECK_THROWS_AS(Indexing::natural(0), Error);
    CHECK_THROWS_AS(Indexing::integers(-1), Error);
}

TEST_CASE("basis vectors") {
    const ModuleVector e1 = basis_vector(1, kC, Indexing::natural(48));
    CHECK(e1.at(1) == unit(kC));
    CHECK(e1.at(2) == zero(kC));
    CHECK(e1.at(1000) == zero(kC));
    const ModuleVector e0 = basis_vector(0, kS, Indexing::integers(24));
    CHECK(e0.at(0) == unit(kS));
    CHECK(e0.at(-1) == zero(kS));
    CHECK(code_of([] { (void)basis_vector(49, kC, Indexing::natural(48)); }) == ErrorCode::IndexOutOfRange);
    ModuleVector x = ModuleVector::zeros(kS, Indexing::natural(4));
    CHECK(code_of([&] { x.set(5, unit(kS)); }) == ErrorCode::IndexOutOfRange);
    CHECK(code_of([&] { x.set(1, unit(kC)); }) == ErrorCode::KindMismatch);
}

TEST_CASE("inner products") {
    const Indexing ix = Indexing::natural(8);
    const ModuleVector e1 = basis_vector(1, kC, ix);
    const ModuleVector e2 = basis_vector(2, kC, ix);
    CHECK(inner_product(e1, e2) == zero(kC));
    const AlgebraElement a = sample(kC, [](double t) { return cd(t, 1.0); });
    const AlgebraElement b = sample(kC, [](double t) { return cd(2.0 - t, -t); });
    CHECK(max_abs_diff(inner_product(scale_right(e1, a), scale_right(e1, b)), mul(star(a), b)) <= 1e-15);
    CHECK(code_of([&] { (void)inner_product(e1, basis_vector(1, kC, Indexing::natural(9))); }) ==
          ErrorCode::IndexingMismatch);
    CHECK(code_of([&] { (void)inner_product(e1, basis_vector(1, kS, ix)); }) == ErrorCode::KindMismatch);
}

TEST_CASE("norms") {
    const Indexing ix = Indexing::natural(8);
    CHECK(vector_norm(basis_vector(3, kC, ix)) == doctest::Approx(1.0));
    CHECK(vector_norm(ModuleVector::zeros(kC, ix)) == 0.0);
    const AlgebraElement half = constant(kC, 0.5);
    double previous = 0.0;
    for (int n : {4, 8, 16, 32, 64}) {
        const double v = vector_norm(geometric(half, unit(kC), n));
        CHECK(v >= previous); // flat once 4^-n drops below double precision
        previous = v;
    }
    CHECK(previous == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-12));
    // Matrix kind: the norm is sqrt of the largest eigenvalue of <x, x>.
    Eigen::MatrixXcd m(2, 2);
    m << 1.0, 0.0, 0.0, 0.0;
    const AlgebraKind k2 = AlgebraKind::matrix(2);
    const ModuleVector y(k2, Indexing::natural(2), {make_matrix(m), make_matrix(m)});
    CHECK(vector_norm(y) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("positivity of <x, x>") {
    const AlgebraKind k2 = AlgebraKind::matrix(2);
    Eigen::MatrixXcd a(2, 2), b(2, 2);
    a << 1.0, 2.0, 1i, -1.0;
    b << 0.5, -1i, 3.0, 1.0;
    const ModuleVector x(k2, Indexing::natural(2), {make_matrix(a), make_matrix(b)});
    const Eigen::MatrixXcd g = inner_product(x, x).matrix();
    CHECK((g - g.adjoint()).norm() <= 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g);
    CHECK(es.eigenvalues().minCoeff() >= -1e-9);
}

TEST_CASE("orthogonality") {
    const Indexing ix = Indexing::natural(4);
    CHECK(is_orthogonal(basis_vector(1, kC, ix), basis_vector(2, kC, ix), 1e-12));
    CHECK_FALSE(is_orthogonal(basis_vector(1, kC, ix), basis_vector(1, kC, ix), 1e-12));
    // Disjoint supports are orthogonal even on the same coordinate.
    const ModuleVector l = scale_right(basis_vector(1, kS, ix), indicator(kS, 0.0, 0.5));
    const ModuleVector r = scale_right(basis_vector(1, kS, ix), indicator(kS, 0.5, 1.0));
    CHECK(is_orthogonal(l, r, 1e-12));
}

TEST_CASE("vector arithmetic") {
    const Indexing ix = Indexing::integers(3);
    const ModuleVector e0 = basis_vector(0, kS, ix);
    const ModuleVector e1 = basis_vector(1, kS, ix);
    const ModuleVector s = add(e0, e1);
    CHECK(vector_norm(s) == doctest::Approx(std::sqrt(2.0)));
    CHECK(sub(s, e1) == e0);
    CHECK(max_coordinate_norm(scale_left(constant(kS, 3.0), s)) == doctest::Approx(3.0));
    CHECK(interior_norm(basis_vector(3, kS, ix)) == 0.0);
    CHECK(interior_norm(e1) == doctest::Approx(1.0));
}

TEST_CASE("sequence membership diagnostics") {
    const std::vector<std::int64_t> depths = {16, 32, 64, 128};
    CHECK(sequence_membership_diagnostic(power_sequence(constant(kC, 0.5)), depths, 1e-9).verdict ==
          Growth::Converging);
    CHECK(sequence_membership_diagnostic([&](std::int64_t) { return unit(kC); }, depths, 1e-9).verdict ==
          Growth::Diverging);
    Eigen::MatrixXcd t(2, 2);
    t << 0.5, 0.0, 0.0, 2.0; // T^-1 for T = diag(2, 1/2)
    CHECK(sequence_membership_diagnostic(power_sequence(make_matrix(t)), depths, 1e-9).verdict == Growth::Diverging);
    const GrowthDiagnostic d = adaptive_membership_diagnostic(power_sequence(constant(kS, 0.9)), 1e-9);
    CHECK(d.verdict == Growth::Converging);
    CHECK(d.depths.front() == 16);
}

TEST_CASE("geometric diagnostics follow slow decay") {
    CHECK(geometric_membership_diagnostic({0.5, 0.9}, 1e-9).verdict == Growth::Converging);
    CHECK(geometric_membership_diagnostic({1.0}, 1e-9).verdict == Growth::Diverging);
    CHECK(geometric_membership_diagnostic({1.0 - 1e-7}, 1e-9).verdict == Growth::Converging);
    CHECK(geometric_membership_diagnostic({1.01}, 1e-9).verdict == Growth::Diverging);
}
