#include <gtest/gtest.h>

#include <opl1/functional.hpp>

#include "test_util.hpp"

using namespace opl1;
using opl1::test::mat;

namespace
{

Functional density(const Matrix& k) { return Functional(Operator::single(k)); }

Functional random_hermitian_functional(const BlockStructure& s, Rng& rng)
{
    return Functional(test::random_hermitian(s, rng));
}

}  // namespace

TEST(Evaluate, Examples)
{
    EXPECT_NEAR(evaluate(density(mat({{0.5, 0.0}, {0.0, 0.5}})), Operator::diagonal({1.0, 4.0})).real(), 2.5, 1e-15);

    Rng rng(1);
    const Matrix k = test::gaussian(3, 3, rng);
    EXPECT_EQ(evaluate(Functional(BlockStructure({3}), {k}), Operator::zero(BlockStructure({3}))), Complex(0.0));

    const Matrix swap = mat({{0.0, 1.0}, {1.0, 0.0}});
    EXPECT_NEAR(std::abs(evaluate(density(swap), Operator::single(swap)) - 2.0), 0.0, 1e-15);
}

TEST(Evaluate, StructureMismatch)
{
    EXPECT_THROW(evaluate(Functional::zero(BlockStructure({2})), Operator::zero(BlockStructure({1, 1}))), invalid_input);
}

TEST(Evaluate, RealForHermitianPair)
{
    Rng rng(2);
    for (int i = 0; i < 50; ++i)
    {
        const auto s = test::random_structure(rng);
        const auto v = evaluate(random_hermitian_functional(s, rng), test::random_hermitian(s, rng));
        EXPECT_NEAR(v.imag(), 0.0, 1e-12 * (1.0 + std::abs(v)));
    }
}

TEST(JordanDecompose, Examples)
{
    const auto j1 = jordan_decompose(density(mat({{3.0, 0.0}, {0.0, -1.0}})));
    EXPECT_LE(detail::max_abs(j1.plus.k_block(0) - mat({{3.0, 0.0}, {0.0, 0.0}})), 1e-14);
    EXPECT_LE(detail::max_abs(j1.minus.k_block(0) - mat({{0.0, 0.0}, {0.0, 1.0}})), 1e-14);

    Rng rng(3);
    const Matrix psd = test::random_psd(3, rng);
    const auto j2 = jordan_decompose(density(psd));
    EXPECT_LE(detail::max_abs(j2.plus.k_block(0) - psd), 1e-12 * (1.0 + detail::max_abs(psd)));
    EXPECT_LE(detail::max_abs(j2.minus.k_block(0)), 1e-12 * (1.0 + detail::max_abs(psd)));

    // eigenvalues +-1 on (1,1)/sqrt2 and (1,-1)/sqrt2
    const auto j3 = jordan_decompose(density(mat({{0.0, 1.0}, {1.0, 0.0}})));
    EXPECT_LE(detail::max_abs(j3.plus.k_block(0) - 0.5 * mat({{1.0, 1.0}, {1.0, 1.0}})), 1e-14);
    EXPECT_LE(detail::max_abs(j3.minus.k_block(0) - 0.5 * mat({{1.0, -1.0}, {-1.0, 1.0}})), 1e-14);
    EXPECT_LE(detail::max_abs(j3.abs().k_block(0) - Matrix::Identity(2, 2)), 1e-14);
}

TEST(JordanDecompose, RejectsNonHermitian)
{
    EXPECT_THROW(jordan_decompose(Functional(BlockStructure({2}), {mat({{0.0, 1.0}, {0.0, 0.0}})})), invalid_input);
}

TEST(JordanDecompose, InvariantsOnRandomFunctionals)
{
    Rng rng(4);
    for (int trial = 0; trial < 300; ++trial)
    {
        const auto s = test::random_structure(rng, 8);
        const auto phi = random_hermitian_functional(s, rng);
        const auto j = jordan_decompose(phi);
        EXPECT_TRUE(is_positive(j.plus));
        EXPECT_TRUE(is_positive(j.minus));
        EXPECT_LE((j.reconstruct().density() - phi.density()).max_abs(), 1e-10 * (1.0 + phi.density().max_abs()));
        EXPECT_LE(std::abs(trace(j.plus.density() * j.minus.density())), 1e-10);
        EXPECT_NEAR(functional_norm(j.abs()), functional_norm(phi), 1e-10 * (1.0 + functional_norm(phi)));
    }
}

TEST(JordanDecompose, Minimality)
{
    // any phi = phi1 - phi2 with phi_i >= 0 has ||phi1|| + ||phi2|| >= ||k+||_1 + ||k-||_1
    Rng rng(5);
    for (int trial = 0; trial < 500; ++trial)
    {
        const auto s = test::random_structure(rng, 4);
        const auto phi = random_hermitian_functional(s, rng);
        const auto j = jordan_decompose(phi);
        const double canonical = functional_norm(j.plus) + functional_norm(j.minus);
        for (int d = 0; d < 100; ++d)
        {
            // phi2 = t R with R > 0 and t past the threshold where phi + t R >= 0
            const Operator r = test::random_pd(s, rng, 0.05, 1.0);
            const auto er = hermitian_eig(r);
            const Operator r_inv_root = er.map([](double x) { return 1.0 / std::sqrt(x); });
            const auto m = hermitian_eig(Operator::make_hermitian(s, [&] {
                std::vector<Matrix> b;
                for (std::size_t i = 0; i < s.size(); ++i)
                    b.push_back(r_inv_root.block(i) * phi.k_block(i) * r_inv_root.block(i));
                return b;
            }()));
            const double t = std::max(0.0, -m.min_eigenvalue()) * (1.0 + rng.uniform(0.0, 0.5)) + 1e-12;
            const Functional phi2(t * r);
            const Functional phi1 = phi + phi2;
            ASSERT_TRUE(is_positive(phi1));
            EXPECT_GE(functional_norm(phi1) + functional_norm(phi2), canonical - 1e-10);
        }
    }
}

TEST(IsPositive, Examples)
{
    EXPECT_TRUE(is_positive(density(mat({{1.0, 0.0}, {0.0, 0.0}}))));
    EXPECT_FALSE(is_positive(density(mat({{1.0, 2.0}, {2.0, 1.0}}))));  // eigenvalues -1, 3
    EXPECT_TRUE(is_positive(Functional::zero(BlockStructure({2, 3}))));
}

TEST(VectorState, Examples)
{
    const BlockStructure s({2});
    Vector e1(2);
    e1 << 1.0, 0.0;
    EXPECT_LE(detail::max_abs(vector_state({e1}, s).k_block(0) - mat({{1.0, 0.0}, {0.0, 0.0}})), 0.0);
    EXPECT_EQ(vector_state({Vector::Zero(2)}, s).density().max_abs(), 0.0);

    Vector f(2);
    f << 0.6, 0.8;
    EXPECT_LE(detail::max_abs(vector_state({f}, s).k_block(0) - mat({{0.36, 0.48}, {0.48, 0.64}})), 1e-15);

    EXPECT_THROW(vector_state({Vector::Zero(3)}, s), invalid_input);
    EXPECT_THROW(vector_state(std::vector<Vector>{}, s), invalid_input);
}

TEST(VectorState, EvaluatesQuadraticForm)
{
    Rng rng(6);
    for (int trial = 0; trial < 100; ++trial)
    {
        const auto s = test::random_structure(rng, 5);
        std::vector<Vector> f;
        for (int d : s.dims()) f.push_back(test::gaussian(d, 1, rng).col(0));
        const auto x = Operator(s, [&] {
            std::vector<Matrix> b;
            for (int d : s.dims()) b.push_back(test::gaussian(d, d, rng));
            return b;
        }());
        Complex expected = 0.0;
        for (std::size_t b = 0; b < s.size(); ++b) expected += f[b].dot(x.block(b) * f[b]);
        const auto state = vector_state(f, s);
        EXPECT_TRUE(is_positive(state));
        EXPECT_LE(std::abs(evaluate(state, x) - expected), 1e-12 * (1.0 + std::abs(expected)));
    }
}

TEST(ASandwich, Examples)
{
    Rng rng(7);
    const auto phi = random_hermitian_functional(BlockStructure({3, 2}), rng);
    const auto same = a_sandwich(Operator::identity(phi.structure()), phi);
    EXPECT_LE((same.density() - phi.density()).max_abs(), 1e-14);

    const auto s1 = a_sandwich(Operator::diagonal({1.0, 4.0}), density(mat({{0.0, 1.0}, {1.0, 0.0}})));
    EXPECT_LE(detail::max_abs(s1.k_block(0) - mat({{0.0, 2.0}, {2.0, 0.0}})), 1e-14);

    // a f = 0 for f = e2, so <a f, f> = 0
    const auto s2 = a_sandwich(Operator::diagonal({1.0, 0.0}), density(mat({{0.0, 0.0}, {0.0, 1.0}})));
    EXPECT_LE(s2.density().max_abs(), 1e-15);

    EXPECT_THROW(a_sandwich(Operator::diagonal({1.0, -1.0}), phi), invalid_input);
}

TEST(ASandwich, PairingLinearityPositivity)
{
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial)
    {
        const auto s = test::random_structure(rng, 5);
        const auto a = test::random_psd(s, rng);
        const auto phi = random_hermitian_functional(s, rng);
        const auto psi = random_hermitian_functional(s, rng);
        const auto x = test::random_hermitian(s, rng);
        const auto root = op_sqrt(a);

        const auto lhs = evaluate(a_sandwich(a, phi), x);
        const auto rhs = evaluate(phi, root * x * root);
        EXPECT_LE(std::abs(lhs - rhs), 1e-10 * (1.0 + std::abs(lhs)));

        const double c = rng.uniform(-3.0, 3.0);
        const auto lin = a_sandwich(a, c * phi + psi).density() - (c * a_sandwich(a, phi) + a_sandwich(a, psi)).density();
        EXPECT_LE(lin.max_abs(), 1e-10 * (1.0 + phi.density().max_abs() * operator_norm(a)));

        // positivity is preserved; for injective a it is also reflected
        const auto pos = Functional(test::random_psd(s, rng));
        EXPECT_TRUE(is_positive(a_sandwich(a, pos)));
        const auto pd = test::random_pd(s, rng);
        EXPECT_EQ(is_positive(a_sandwich(pd, phi)), is_positive(phi));
    }
}

TEST(ASandwich, LimitOfRegularizedSandwich)
{
    // <a^{1/2} phi a^{1/2}, x> = lim phi(a_l^{1/2} x a_l^{1/2}), residual <= ||x|| ||k||_1 ||a - a_l||
    Rng rng(9);
    const std::vector<double> grid{1.0, 10.0, 100.0, 1e3, 1e4, 1e6};
    for (int trial = 0; trial < 200; ++trial)
    {
        const auto s = test::random_structure(rng, 5);
        const auto a = test::random_psd(s, rng);
        const auto phi = random_hermitian_functional(s, rng);
        const auto x = test::random_hermitian(s, rng);
        const auto target = evaluate(a_sandwich(a, phi), x);
        double previous_bound = std::numeric_limits<double>::infinity();
        for (double l : grid)
        {
            const auto al = resolvent_cutoff(a, l);
            const auto root = op_sqrt(al);
            const auto approx = evaluate(phi, root * x * root);
            const double bound = operator_norm(x) * functional_norm(phi) * operator_norm(a - al);
            EXPECT_LE(std::abs(target - approx), bound + 1e-10 * (1.0 + std::abs(target)));
            EXPECT_LE(bound, previous_bound);
            previous_bound = bound;
        }
    }
}

TEST(FunctionalNorm, MatchesPolarWitness)
{
    // ||phi|| = sup over unit-ball x of |phi(x)|, attained at sign(k); random contractions never exceed it
    Rng rng(10);
    for (int trial = 0; trial < 200; ++trial)
    {
        const auto s = test::random_structure(rng, 6);
        const auto phi = random_hermitian_functional(s, rng);
        const double norm = functional_norm(phi);
        const auto u = polar_unitary(phi);
        EXPECT_LE(operator_norm(u), 1.0 + 1e-12);
        EXPECT_NEAR(evaluate(phi, u).real(), norm, 1e-10 * (1.0 + norm));
        double oracle = 0.0;
        for (std::size_t b = 0; b < s.size(); ++b) oracle += test::oracle_trace_norm(phi.k_block(b));
        EXPECT_NEAR(norm, oracle, 1e-10 * (1.0 + norm));
        for (int k = 0; k < 20; ++k)
        {
            const auto y = test::random_hermitian(s, rng);
            const auto x = (1.0 / operator_norm(y)) * y;
            EXPECT_LE(std::abs(evaluate(phi, x)), norm + 1e-10);
        }
    }
}

TEST(FunctionalNorm, NonHermitianTraceNorm)
{
    // [[0, 2], [0, 0]] has singular values 2, 0
    EXPECT_NEAR(functional_norm(Functional(BlockStructure({2}), {mat({{0.0, 2.0}, {0.0, 0.0}})})), 2.0, 1e-12);
}
