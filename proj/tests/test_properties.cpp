// Randomized invariants. Every case draws from a fixed seed so failures replay exactly.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gspec/oracle.hpp"
#include "gspec/spectra.hpp"

using namespace gspec;
using namespace std::complex_literals;

namespace {

const std::vector<AlgebraKind>& all_kinds() {
    static const std::vector<AlgebraKind> k = {AlgebraKind::continuous(32), AlgebraKind::step(32),
                                               AlgebraKind::matrix(1), AlgebraKind::matrix(3)};
    return k;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Smallest value of a self-adjoint element: pointwise minimum, or the smallest eigenvalue.
double min_spectrum(const AlgebraElement& a) {
    if (a.kind().is_function()) {
        double m = INFINITY;
        for (cd v : a.data())
            m = std::min(m, v.real());
        return m;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.matrix());
    return es.eigenvalues().minCoeff();
}

// Operators with an interior-exact adjoint on the given kind.
std::vector<OperatorExpr> operator_panel(const AlgebraKind& k, std::mt19937_64& rng) {
    std::vector<OperatorExpr> ops = {
        OperatorExpr::scalar_mult(random_element(k, rng)),
        OperatorExpr::unilateral_shift(),
        adjoint(OperatorExpr::unilateral_shift()),
        OperatorExpr::weighted_shift({random_element(k, rng), random_element(k, rng), random_element(k, rng)}),
        OperatorExpr::dyadic_expand(),
        OperatorExpr::odd_expand(),
        OperatorExpr::dyadic_compress(),
        OperatorExpr::odd_compress(),
        OperatorExpr::diagonal_unitary({constant(k, std::polar(1.0, uniform(rng, 0, 6))), unit(k)}),
        OperatorExpr::compose(OperatorExpr::unilateral_shift(), OperatorExpr::odd_compress()),
        OperatorExpr::negate(OperatorExpr::sum(OperatorExpr::dyadic_expand(),
                                               OperatorExpr::scalar_mult(random_element(k, rng)))),
    };
    if (k.tag() == KindTag::Step)
        ops.push_back(block_shift_operator(k));
    return ops;
}

} // namespace

TEST_CASE("star is an involution") {
    std::mt19937_64 rng(101);
    for (int i = 0; i < 1000; ++i) {
        const AlgebraElement a = random_element(all_kinds()[static_cast<std::size_t>(i % 4)], rng, 3.0);
        CHECK(star(star(a)) == a);
    }
}

TEST_CASE("C*-identity") {
    std::mt19937_64 rng(102);
    for (const AlgebraKind& k : all_kinds())
        for (int i = 0; i < 100; ++i) {
            const AlgebraElement a = random_element(k, rng, 2.0);
            const double n = norm(a);
            CHECK(std::abs(norm(mul(star(a), a)) - n * n) <= 1e-7 * (1.0 + n * n));
        }
}

TEST_CASE("inverses are two-sided") {
    std::mt19937_64 rng(103);
    int inverted = 0;
    for (const AlgebraKind& k : all_kinds())
        for (int i = 0; i < 100; ++i) {
            const AlgebraElement a = random_element(k, rng);
            const auto r = try_invert(a);
            if (const auto* inv = std::get_if<AlgebraElement>(&r)) {
                ++inverted;
                CHECK(norm(sub(mul(a, *inv), unit(k))) <= 1e-7);
                CHECK(norm(sub(mul(*inv, a), unit(k))) <= 1e-7);
            }
        }
    CHECK(inverted > 100);
}

TEST_CASE("inf_abs never exceeds the norm") {
    std::mt19937_64 rng(104);
    for (const AlgebraKind& k : all_kinds()) {
        for (int i = 0; i < 100; ++i) {
            const AlgebraElement a = random_element(k, rng, 2.0);
            CHECK(inf_abs(a) <= norm(a) * (1.0 + 1e-12));
        }
        const AlgebraElement u = constant(k, std::polar(1.0, uniform(rng, 0.0, 6.0)));
        CHECK(inf_abs(u) == doctest::Approx(norm(u)).epsilon(1e-12));
    }
}

TEST_CASE("annihilator bases are sound") {
    std::mt19937_64 rng(105);
    for (int i = 0; i < 50; ++i) {
        // Rank-deficient matrices.
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Random(3, 3);
        m.col(2) = m.col(0) * cd(uniform(rng, -1, 1), uniform(rng, -1, 1)) + m.col(1) * 0.5;
        const AlgebraElement a = make_matrix(m);
        const auto basis = right_annihilator_basis(a);
        CHECK_FALSE(basis.empty());
        for (const AlgebraElement& y : basis) {
            CHECK(norm(mul(a, y)) <= 1e-7);
            CHECK(norm(y) > 0.0);
        }
    }
    for (const AlgebraKind& k : {AlgebraKind::step(32), AlgebraKind::continuous(32)}) {
        for (int i = 0; i < 50; ++i) {
            const double lo = uniform(rng, 0.0, 0.7);
            const double hi = lo + uniform(rng, 0.15, 0.3);
            const AlgebraElement a = mul(random_element(k, rng), sub(unit(k), indicator(k, lo, hi)));
            const auto basis = right_annihilator_basis(a);
            CHECK_FALSE(basis.empty());
            for (const AlgebraElement& y : basis) {
                CHECK(norm(mul(a, y)) <= 1e-7);
                CHECK(norm(y) > 0.0);
            }
        }
    }
}

TEST_CASE("module inner product axioms") {
    std::mt19937_64 rng(106);
    for (const AlgebraKind& k : all_kinds()) {
        for (const Indexing& ix : {Indexing::natural(12), Indexing::integers(5)}) {
            for (int i = 0; i < 30; ++i) {
                const ModuleVector x = random_interior_vector(k, ix, rng);
                const ModuleVector y = random_interior_vector(k, ix, rng);
                const AlgebraElement a = random_element(k, rng, 2.0);
                const AlgebraElement xy = inner_product(x, y);
                CHECK(norm(sub(star(xy), inner_product(y, x))) <= 1e-9);
                CHECK(norm(sub(inner_product(x, scale_right(y, a)), mul(xy, a))) <= 1e-8 * (1.0 + norm(a)));
                CHECK(norm(xy) <= vector_norm(x) * vector_norm(y) * (1.0 + 1e-9));
                CHECK(min_spectrum(inner_product(x, x)) >= -1e-9);
            }
            for (std::int64_t j = ix.first(); j < ix.first() + 4; ++j)
                for (std::int64_t l = ix.first(); l < ix.first() + 4; ++l)
                    CHECK(inner_product(basis_vector(j, k, ix), basis_vector(l, k, ix)) == (j == l ? unit(k) : zero(k)));
        }
    }
}

TEST_CASE("scalar multiplication has the norm of its coefficient") {
    std::mt19937_64 rng(107);
    for (const AlgebraKind& k : {AlgebraKind::step(16), AlgebraKind::matrix(1), AlgebraKind::matrix(2)})
        for (int i = 0; i < 20; ++i) {
            const AlgebraElement a = random_element(k, rng, 2.0);
            CHECK(std::abs(operator_norm_estimate(OperatorExpr::scalar_mult(a), k, 8) - norm(a)) <= 1e-7);
        }
}

TEST_CASE("adjoint identity for every constructor") {
    std::mt19937_64 rng(108);
    for (const AlgebraKind& k : all_kinds()) {
        for (const OperatorExpr& op : operator_panel(k, rng)) {
            const Indexing ix = Indexing::natural(32);
            const ModuleVector x = random_interior_vector(k, ix, rng);
            const ModuleVector y = random_interior_vector(k, ix, rng);
            const AlgebraElement lhs = inner_product(apply(op, x), y);
            const AlgebraElement rhs = inner_product(x, apply(adjoint(op), y));
            CHECK_MESSAGE(norm(sub(lhs, rhs)) <= 1e-8, op.describe() << " on " << k.name());
        }
        const Indexing iz = Indexing::integers(12);
        for (const OperatorExpr& op : {OperatorExpr::bilateral_shift(), adjoint(OperatorExpr::bilateral_shift())}) {
            const ModuleVector x = random_interior_vector(k, iz, rng);
            const ModuleVector y = random_interior_vector(k, iz, rng);
            CHECK(norm(sub(inner_product(apply(op, x), y), inner_product(x, apply(adjoint(op), y)))) <= 1e-8);
        }
    }
}

TEST_CASE("structural operator identities") {
    std::mt19937_64 rng(109);
    for (const AlgebraKind& k : all_kinds()) {
        const Indexing ix = Indexing::natural(32);
        const std::vector<AlgebraElement> units = {constant(k, std::polar(1.0, uniform(rng, 0, 6))),
                                                   constant(k, std::polar(1.0, uniform(rng, 0, 6))), unit(k)};
        const OperatorExpr v = OperatorExpr::diagonal_unitary(units);
        for (int i = 0; i < 10; ++i) {
            const ModuleVector x = random_interior_vector(k, ix, rng);
            CHECK(vector_norm(sub(apply(adjoint(v), apply(v, x)), x)) <= 1e-8);
            CHECK(vector_norm(sub(apply(OperatorExpr::odd_compress(), apply(OperatorExpr::odd_expand(), x)), x)) <= 1e-12);
            CHECK(vector_norm(sub(apply(OperatorExpr::dyadic_compress(), apply(OperatorExpr::dyadic_expand(), x)), x)) <=
                  1e-12);
        }
        if (k.tag() != KindTag::Step)
            continue;
        const AlgebraElement chi = indicator(k, 0.0, uniform(rng, 0.2, 0.8));
        const OperatorExpr b = OperatorExpr::block(chi, OperatorExpr::scalar_mult(random_element(k, rng)),
                                                   OperatorExpr::unilateral_shift());
        for (int i = 0; i < 10; ++i) {
            const ModuleVector x = random_interior_vector(k, ix, rng);
            CHECK(vector_norm(sub(apply(b, scale_left(chi, x)), scale_left(chi, apply(b, x)))) <= 1e-9);
        }
    }
}

TEST_CASE("flattening is fiberwise exact") {
    std::mt19937_64 rng(110);
    const AlgebraKind k = AlgebraKind::step(16);
    const int N = 24;
    for (const OperatorExpr& op : operator_panel(k, rng)) {
        const FlattenedTruncation ft = flatten(op, N, k);
        const ModuleVector x = random_interior_vector(k, Indexing::natural(N), rng);
        const ModuleVector y = apply(op, x);
        for (int f = 0; f < k.fiber_count(); ++f) {
            Eigen::VectorXcd xf(N), yf(N);
            for (int j = 0; j < N; ++j) {
                xf(j) = x.at(j + 1).value(f);
                yf(j) = y.at(j + 1).value(f);
            }
            CHECK_MESSAGE((ft.fiber(f) * xf - yf).norm() <= 1e-12, op.describe());
        }
    }
}

TEST_CASE("sections of an operator and its adjoint share their smallest singular value") {
    std::mt19937_64 rng(111);
    for (const AlgebraKind& k : {AlgebraKind::step(8), AlgebraKind::matrix(2)})
        for (const OperatorExpr& op : operator_panel(k, rng)) {
            const AlgebraElement a = random_element(k, rng);
            const double s = min_singular(flatten(shifted(op, a), 24, k));
            const double t = min_singular(flatten(shifted(adjoint(op), star(a)), 24, k));
            CHECK_MESSAGE(std::abs(s - t) <= 1e-9, op.describe());
        }
}

TEST_CASE("kernel candidates re-verify under apply") {
    std::mt19937_64 rng(112);
    const AlgebraKind k = AlgebraKind::step(8);
    for (int i = 0; i < 12; ++i) {
        const AlgebraElement a = constant(k, std::polar(uniform(rng, 0.1, 0.9), uniform(rng, 0.0, 6.0)));
        for (const OperatorExpr& op : {OperatorExpr::dyadic_compress(), OperatorExpr::odd_compress(),
                                       adjoint(OperatorExpr::unilateral_shift())}) {
            const auto found = kernel_search(op, a, 48);
            // Dyadic witnesses spread along 2^k, so larger |a| leaves too little weight inside.
            if (std::abs(a.value(0)) <= 0.5)
                CHECK_MESSAGE(!found.empty(), op.describe() << " at |a| = " << std::abs(a.value(0)));
            for (const KernelCandidate& c : found)
                CHECK(kernel_residual(op, a, c.vector) <= std::max(c.residual, 1e-12) * (1.0 + 1e-6));
        }
    }
}

TEST_CASE("closed-form rules agree with each other") {
    std::mt19937_64 rng(113);
    for (const AlgebraKind& k : {AlgebraKind::continuous(32), AlgebraKind::step(32)})
        for (int i = 0; i < 200; ++i) {
            const AlgebraElement a = random_element(k, rng, 2.0);
            CHECK(unilateral_shift_spectrum(a).membership == shift_spectrum_commutative(a).membership);
        }
}

TEST_CASE("scalar reduction gives the classical shift spectra") {
    std::mt19937_64 rng(114);
    const ToleranceConfig tol;
    for (int i = 0; i < 300; ++i) {
        const AlgebraKind k = i % 2 == 0 ? AlgebraKind::continuous(2) : AlgebraKind::step(2);
        const double r = uniform(rng, 0.0, 2.0);
        const AlgebraElement a = constant(k, std::polar(r, uniform(rng, 0.0, 2.0 * std::numbers::pi)));
        CHECK((unilateral_shift_spectrum(a).membership == Membership::In) == (r <= 1.0));
        const Membership b = bilateral_shift_spectrum(a).membership;
        if (std::abs(r - 1.0) > tol.boundary_band)
            CHECK(b == Membership::Out);
        else
            CHECK(b != Membership::Out);
        const AlgebraElement z = constant(AlgebraKind::matrix(1), a.value(0));
        CHECK((mn_shift_spectrum(z).membership == Membership::In) == (r <= 1.0));
    }
}

TEST_CASE("the shift threshold is crossed once") {
    const AlgebraKind k = AlgebraKind::continuous(16);
    const ToleranceConfig tol;
    int changes = 0;
    double where = -1.0;
    Membership previous = unilateral_shift_spectrum(constant(k, 0.0)).membership;
    // The sweep runs downward from large c, so Out -> In reads left to right as In -> Out.
    for (int i = 1; i <= 4000; ++i) {
        const double c = i * 5e-4;
        const Membership m = unilateral_shift_spectrum(constant(k, c)).membership;
        if (m != previous) {
            ++changes;
            where = c;
        }
        previous = m;
    }
    CHECK(changes == 1);
    CHECK(std::abs(where - 1.0) <= 5e-4 + tol.boundary_band);
    CHECK(previous == Membership::Out);
}

TEST_CASE("star duality on random elements") {
    std::mt19937_64 rng(115);
    const AlgebraKind k = AlgebraKind::step(16);
    for (DualityPair p : {DualityPair::ShiftAdjoint, DualityPair::DyadicPair, DualityPair::OddPair, DualityPair::BlockPair})
        for (int i = 0; i < 100; ++i)
            CHECK_MESSAGE(spectrum_star_duality_check(p, random_element(k, rng, 2.0)), duality_name(p));
}

TEST_CASE("witness certificates re-verify") {
    std::mt19937_64 rng(116);
    const AlgebraKind k = AlgebraKind::step(16);
    for (int i = 0; i < 40; ++i) {
        const AlgebraElement a = sample(k, [&, r = uniform(rng, 0.1, 0.8), ph = uniform(rng, 0, 6)](double t) {
            return std::polar(r * (0.5 + 0.5 * t), ph + t);
        });
        const Certificate c = shift_cokernel_witness(a);
        const auto* w = std::get_if<CokernelWitness>(&c);
        REQUIRE(w != nullptr);
        CHECK(cokernel_pairing(OperatorExpr::unilateral_shift(), a, w->x) <= std::max(w->max_pairing, 1e-12) * (1 + 1e-6));
        CHECK(w->max_pairing <= 1e-8);

        const SpectrumVerdict z = expander_point_spectra(ExpanderKind::DyadicCompress, a);
        const auto* kw = std::get_if<KernelWitness>(&z.certificate);
        REQUIRE(kw != nullptr);
        CHECK(kernel_residual(OperatorExpr::dyadic_compress(), a, kw->x) <= std::max(kw->residual, 1e-12) * (1 + 1e-6));
        CHECK(kw->residual <= 1e-8);
    }
}
