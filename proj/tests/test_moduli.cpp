#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"

using namespace errbound;
using fixtures::v1;
using fixtures::v2;

namespace {

const double rt2 = std::sqrt(2.0);

sampler_spec shells(std::vector<double> radii, std::size_t count = 1000, std::uint64_t seed = 1)
{
    sampler_spec s;
    s.radii = std::move(radii);
    s.count = count;
    s.seed = seed;
    return s;
}

} // namespace

TEST(GlobalDirect, Halfspace)
{
    const auto f = convex_function::from_system(fixtures::halfspace());
    const auto est = global_modulus_direct(f, shells({10.0}));
    EXPECT_NEAR(est.value.value(), 5.0, 1e-6);
    EXPECT_GT(est.sample_count, 0u);
}

TEST(GlobalDirect, TiltedExpReachesMinusForty)
{
    const double eps = 0.05;
    const auto e = convex_function::named(named_scalar::exp_minus_one);
    const auto g = e.tilted(v1(0), v1(-1), eps);
    const auto est = global_modulus_direct(g, shells({1.0, 10.0, 40.0}));
    EXPECT_LE(est.value.value(), 1.5 * eps);
    ASSERT_TRUE(est.witness.has_value());
    EXPECT_LT((*est.witness)[0], -20.0);
}

TEST(GlobalDirect, PerturbedExample2Witness)
{
    const double eps = 0.1;
    const auto g = convex_function::from_system(fixtures::ex2_perturbed(eps));
    const vec u = v2(-eps, eps);
    const double ratio = g(u) / level_set_distance(g)(u).value();
    EXPECT_NEAR(ratio, eps / rt2, 0.02 * eps / rt2);
}

TEST(GlobalDirect, EmptyLevelSetIsZero)
{
    const auto f = convex_function::from_system(
        max_affine_system({fixtures::row("1", 0, 0, -1)}));
    const auto est = global_modulus_direct(f, shells({1.0}, 50));
    EXPECT_TRUE(est.empty_level_set);
    EXPECT_EQ(est.value, ext_real(0.0));
}

TEST(GlobalPrimal, HalfspaceExactEverywhere)
{
    const auto f = convex_function::from_system(fixtures::halfspace());
    const auto s = shells({10.0}, 500);
    for (const auto& shell : generate_shell_samples(f, s)) {
        for (const auto& x : shell) {
            if (f(x) > 0) {
                EXPECT_NEAR(-phi(f, x).value, 5.0, 1e-12);
            }
        }
    }
    EXPECT_NEAR(global_modulus_primal(f, s).value.value(), 5.0, 1e-12);
}

TEST(GlobalPrimal, Example1AboveBound)
{
    const auto f = convex_function::from_system(fixtures::ex1());
    const auto est = global_modulus_primal(f, shells({1.0, 10.0, 100.0}));
    EXPECT_GE(est.value.value(), rt2 / 2 - 1e-9);
    EXPECT_TRUE(est.certified);
}

TEST(GlobalPrimal, ZeroFunctionIsInfinite)
{
    const auto f = convex_function::named(named_scalar::zero);
    EXPECT_TRUE(global_modulus_primal(f, shells({1.0, 10.0})).value.is_infinite());
    EXPECT_TRUE(global_modulus_direct(f, shells({1.0, 10.0})).value.is_infinite());
}

TEST(LocalModulus, ExpAtZero)
{
    const auto f = convex_function::named(named_scalar::exp_minus_one);
    const auto r = local_modulus(f, v1(0));
    EXPECT_NEAR(r.direct.value.value(), 1.0, 1e-3);
    EXPECT_NEAR(r.primal.value.value(), 1.0, 1e-3);
}

TEST(LocalModulus, ZeroIsInfinite)
{
    const auto r = local_modulus(convex_function::named(named_scalar::zero), v1(0));
    EXPECT_TRUE(r.direct.value.is_infinite());
    EXPECT_TRUE(r.primal.value.is_infinite());
}

TEST(LocalModulus, Example1SingleActiveRow)
{
    const auto r = local_modulus(convex_function::from_system(fixtures::ex1()), v2(0, 1));
    EXPECT_GE(r.direct.value.value(), rt2 - 1e-3);
    EXPECT_GE(r.primal.value.value(), rt2 - 1e-3);
}

TEST(LocalModulus, AnchorMustBeOnZeroLevel)
{
    EXPECT_THROW(local_modulus(convex_function::from_system(fixtures::ex1()), v2(0, 0)), error);
}

TEST(LowerBoundPoint, Examples)
{
    EXPECT_EQ(modulus_lower_bound_point(convex_function::named(named_scalar::exp_minus_one), v1(0)), 1.0);
    EXPECT_NEAR(modulus_lower_bound_point(convex_function::from_system(fixtures::ex1()), v2(0, 1)), rt2, 1e-12);
    try {
        modulus_lower_bound_point(convex_function::from_system(fixtures::ex2()), v2(0, 0));
        FAIL() << "expected not-applicable";
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::not_applicable);
    }
}

TEST(Pointwise, RatioBelowMinusPhi)
{
    for (const auto& sys : fixtures::random_corpus()) {
        const auto f = convex_function::from_system(sys);
        const auto dist = level_set_distance(f);
        for (const auto& shell : generate_shell_samples(f, shells({1.0, 10.0}, 500, 3))) {
            for (const auto& x : shell) {
                const double fx = f(x);
                if (!(fx > infeasibility_threshold(f, x))) continue;
                const double d = dist(x).value();
                EXPECT_LE(fx / d, -phi(f, x).value + 1e-6);
            }
        }
    }
}

TEST(RouteAgreement, RandomSystems)
{
    for (const auto& sys : fixtures::random_corpus()) {
        const auto f = convex_function::from_system(sys);
        const auto s = shells({1.0, 10.0, 100.0}, 1000, 5);
        const double d = global_modulus_direct(f, s).value.value();
        const double p = global_modulus_primal(f, s).value.value();
        EXPECT_LE(std::abs(d - p), 0.1 * std::max(d, p));
    }
}

TEST(CorollaryDominance, LocalAboveLowerBound)
{
    for (const auto& sys : fixtures::random_corpus()) {
        const auto f = convex_function::from_system(sys);
        for (const auto& e : enumerate_active_sets(sys).sets) {
            if (std::abs(e.op.value) <= phi_zero_tolerance(f)) continue;
            const double lb = modulus_lower_bound_point(f, e.witness);
            const auto r = local_modulus(f, e.witness);
            EXPECT_GE(r.direct.value.value(), lb - 1e-6);
        }
    }
}

TEST(RegionGrowth, EstimatesNeverIncrease)
{
    // Shells are drawn from one seeded stream, so a longer radius list extends
    // the sample set of a shorter one.
    for (const auto& sys : fixtures::random_corpus(10)) {
        const auto f = convex_function::from_system(sys);
        ext_real prev_d = ext_real::infinity(), prev_p = ext_real::infinity();
        for (std::vector<double> radii : {std::vector<double>{1.0}, {1.0, 10.0}, {1.0, 10.0, 100.0}}) {
            const auto d = global_modulus_direct(f, shells(radii, 400, 9));
            const auto p = global_modulus_primal(f, shells(radii, 400, 9));
            EXPECT_LE(d.value, prev_d);
            EXPECT_LE(p.value, prev_p);
            for (std::size_t i = 1; i < d.shells.size(); ++i) EXPECT_LE(d.shells[i].value, d.shells[i - 1].value);
            prev_d = d.value;
            prev_p = p.value;
        }
    }
}

TEST(Sampler, Deterministic)
{
    const auto f = convex_function::from_system(fixtures::ex1());
    const auto a = generate_shell_samples(f, shells({1.0, 10.0}, 100, 42));
    const auto b = generate_shell_samples(f, shells({1.0, 10.0}, 100, 42));
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_EQ(a[i].size(), b[i].size());
        for (std::size_t k = 0; k < a[i].size(); ++k) EXPECT_EQ(a[i][k], b[i][k]);
    }
}
