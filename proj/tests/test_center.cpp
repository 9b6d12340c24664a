#include <gtest/gtest.h>

#include "opl1/center.hpp"
#include "test_util.hpp"

using namespace opl1;
using opl1::test::mat;

namespace
{

const BlockStructure one2{{2}};

Functional dens(const Matrix& k) { return Functional::make_hermitian(one2, {k}); }

Matrix outer(double x, double y)
{
    Vector v(2);
    v << x, y;
    return v * v.adjoint();
}

}  // namespace

TEST(Center, CompressionFixture)
{
    const auto a = Operator::diagonal({1.0, 4.0});
    const auto p = Operator::single(outer(0.6, 0.8));
    const auto phi = dens(outer(1.0, 0.0));
    // (p phi p)(a) = 0.36 * (0.36 + 4 * 0.64), phi(a) = 1
    const double expected = 0.36 * 2.92 - 1.0;
    EXPECT_NEAR(check_compression(a, p, phi), expected, 1e-12);
    EXPECT_NEAR(expected, 0.0512, 1e-12);
    EXPECT_NEAR(reverify_gap(a, {CenterItem::compression, phi, std::nullopt, p, std::nullopt}), expected, 1e-12);
}

TEST(Center, SubaddAbsFixture)
{
    const auto a = Operator::diagonal({1.0, 4.0});
    const auto phi = dens(outer(1.0, 0.0));
    const auto psi = dens(-outer(0.6, 0.8));
    // |phi + psi| has eigenvalues +-0.8 on a pair summing to the identity: |.|(a) = 0.8 * 5
    const double expected = 0.8 * 5.0 - 1.0 - 2.92;
    EXPECT_NEAR(check_subadd_abs(a, phi, psi), expected, 1e-12);
    EXPECT_NEAR(expected, 0.08, 1e-12);
    EXPECT_NEAR(reverify_gap(a, {CenterItem::subadd_abs, phi, psi, std::nullopt, std::nullopt}), expected, 1e-12);
}

TEST(Center, AbsoluteValueOfRankTwoDifference)
{
    // eigenvalues of P_u - P_v are +-sin(theta); check the fixture step by hand
    const Matrix k = outer(1.0, 0.0) - outer(0.6, 0.8);
    const auto ev = opl1::test::oracle_eigenvalues(k);
    EXPECT_NEAR(ev(0), -0.8, 1e-12);
    EXPECT_NEAR(ev(1), 0.8, 1e-12);
}

TEST(Center, ParseItem)
{
    EXPECT_EQ(parse_center_item("ii"), CenterItem::compression);
    EXPECT_EQ(parse_center_item("vii"), CenterItem::subadd_abs);
    EXPECT_EQ(parse_center_item("convex_abs"), CenterItem::convex_abs);
    EXPECT_FALSE(parse_center_item("ix"));
    for (auto it : all_center_items) EXPECT_EQ(parse_center_item(to_string(it)), it);
}

TEST(Center, Preconditions)
{
    const auto a = Operator::diagonal({1.0, 4.0});
    const auto p = Operator::single(outer(0.6, 0.8));
    EXPECT_THROW(check_compression(a, p, dens(-outer(1.0, 0.0))), invalid_input);
    EXPECT_THROW(check_compression(a, Operator::single(mat({{0.5, 0}, {0, 0}})), dens(outer(1.0, 0.0))), invalid_input);
    EXPECT_THROW(check_convex_abs(a, dens(outer(1, 0)), dens(outer(0, 1)), 1.5), invalid_input);
    EXPECT_THROW(check_monotone(a, dens(outer(1, 0)), dens(outer(0, 1))), invalid_input);
    EXPECT_THROW(check_decomposition(a, dens(outer(1, 0)), dens(-outer(0, 1))), invalid_input);
}

TEST(Center, CentralSoundness)
{
    Rng rng(71);
    for (int rep = 0; rep < 20; ++rep)
    {
        const auto s = opl1::test::random_structure(rng, 4, 3);
        std::vector<double> c;
        for (std::size_t b = 0; b < s.size(); ++b) c.push_back(rng.uniform(0.1, 10.0));
        const auto a = Operator::block_scalar(s, c);
        for (const auto& rep_item : sample_center_checks(a, 30, 1000 + rep))
        {
            EXPECT_EQ(rep_item.samples, 30);
            EXPECT_TRUE(rep_item.violations.empty()) << to_string(rep_item.item) << " " << rep_item.max_normalized_gap;
            EXPECT_LE(rep_item.max_normalized_gap, violation_threshold);
        }
    }
}

TEST(Center, IdentityIsTightForLinearItems)
{
    // for a central the decomposition and convexity checks hit zero on commuting data
    const auto a = Operator::scalar(one2, 2.0);
    const auto phi = dens(mat({{1, 0}, {0, -1}}));
    const auto j = jordan_decompose(phi);
    EXPECT_NEAR(check_decomposition(a, j.plus, j.minus), 0.0, 1e-12);
    EXPECT_NEAR(check_subadd_abs(a, phi, phi), 0.0, 1e-12);
}

TEST(Center, ReverifyAgreesOnRandomProbes)
{
    Rng rng(5);
    for (int rep = 0; rep < 200; ++rep)
    {
        const auto s = opl1::test::random_structure(rng, 4, 3);
        const auto a = opl1::test::random_psd(s, rng);
        const auto item = all_center_items[static_cast<std::size_t>(rep) % all_center_items.size()];
        const auto pr = detail::random_probe(item, s, rng);
        const double g = run_probe(a, pr);
        const double scale = 1.0 + std::abs(g) + operator_norm(a) * functional_norm(pr.phi);
        EXPECT_NEAR(g, reverify_gap(a, pr), 1e-10 * scale);
    }
}

TEST(Center, SearchRejectsCentral)
{
    const auto a = Operator::block_scalar(BlockStructure{{2, 3}}, {1.0, 5.0});
    EXPECT_THROW(counterexample_search(a, 10, 1), invalid_input);
}

TEST(Center, SearchBeatsFixtureGaps)
{
    const auto a = Operator::diagonal({1.0, 4.0});
    const auto ii = counterexample_search(a, 1000, 3, {CenterItem::compression});
    ASSERT_TRUE(ii);
    EXPECT_EQ(ii->probe.item, CenterItem::compression);
    EXPECT_GE(ii->normalized_gap, 0.0512 / 4.0 - 1e-12);
    EXPECT_GT(reverify_gap(a, ii->probe), 0.0);

    const auto vii = counterexample_search(a, 1000, 3, {CenterItem::subadd_abs});
    ASSERT_TRUE(vii);
    EXPECT_GE(vii->normalized_gap, 0.08 / 4.0 - 1e-12);
    EXPECT_GT(reverify_gap(a, vii->probe), 0.0);
}

TEST(Center, SearchFindsEveryItemOnNonCentral)
{
    Rng rng(9);
    for (int rep = 0; rep < 5; ++rep)
    {
        const auto s = opl1::test::random_structure(rng, 4, 2);
        auto a = opl1::test::random_pd(s, rng, 0.5, 3.0);
        if (is_central(a)) continue;
        for (auto item : all_center_items)
        {
            const auto v = counterexample_search(a, 300, 40 + rep, {item});
            EXPECT_TRUE(v) << to_string(item) << " rep " << rep;
            if (v)
            {
                EXPECT_GT(reverify_gap(a, v->probe), 0.5 * v->gap);
            }
        }
    }
}

TEST(Center, SearchIsDeterministic)
{
    const auto a = Operator::diagonal({1.0, 2.0, 7.0});
    const auto x = counterexample_search(a, 200, 11);
    const auto y = counterexample_search(a, 200, 11);
    ASSERT_TRUE(x && y);
    EXPECT_EQ(x->gap, y->gap);
    EXPECT_EQ(x->probe.item, y->probe.item);
}
