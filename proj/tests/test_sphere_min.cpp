#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"

using namespace errbound;
using fixtures::v1;
using fixtures::v2;

namespace {

const double rt2 = std::sqrt(2.0);

// A point of Example 1 where rows 2 and 3 are active: (-2, -2).
const vec ex1_vertex23 = v2(-2, -2);

} // namespace

TEST(Phi, Examples)
{
    const auto f1 = convex_function::from_system(fixtures::ex1());
    const auto p1 = phi(f1, ex1_vertex23);
    EXPECT_NEAR(p1.value, -rt2 / 2, 1e-12);
    EXPECT_TRUE(p1.certified);
    EXPECT_EQ(p1.method, sphere_method::exact_minnorm);

    const auto p2 = phi(convex_function::from_system(fixtures::ex2()), v2(0, 0));
    EXPECT_EQ(p2.value, 0.0);
    EXPECT_TRUE(p2.certified);
    EXPECT_EQ(p2.method, sphere_method::angular_sweep);

    const max_affine_system single({fixtures::row("1", 1, 1, 0)});
    EXPECT_NEAR(phi(convex_function::from_system(single), v2(4, -9)).value, -rt2, 1e-12);
}

TEST(Phi, ScalarNamed)
{
    const auto p = phi(convex_function::named(named_scalar::exp_minus_one), v1(0));
    EXPECT_EQ(p.value, -1.0);
    EXPECT_TRUE(p.certified);
    EXPECT_EQ(phi(convex_function::named(named_scalar::zero), v1(0)).value, 0.0);
}

TEST(Phi, BlackBoxIsUncertified)
{
    const auto f = convex_function::user("norm", 2, [](const vec& x) { return x.norm() - 1.0; });
    const auto p = phi(f, v2(1, 0));
    EXPECT_FALSE(p.certified);
    EXPECT_NEAR(p.value, -1.0, 1e-3);
}

TEST(SphereMinOverSet, Examples)
{
    EXPECT_NEAR(sphere_min_over_set({v2(1, 1)}, norm_kind::euclidean).value, -rt2, 1e-12);
    EXPECT_NEAR(sphere_min_over_set({v2(1, 1), v2(-2, 1)}, norm_kind::euclidean).value, -1.0, 1e-12);
    EXPECT_EQ(sphere_min_over_set({v2(1, 1), v2(-1, -1)}, norm_kind::euclidean).value, 0.0);
}

TEST(SphereMinOverSet, PositiveBranch)
{
    // 0 in the interior of the hull: strict minimum, positive value.
    const std::vector<vec> a{v2(1, 0), v2(-1, 1), v2(-1, -1)};
    const auto r = sphere_min_over_set(a, norm_kind::euclidean);
    EXPECT_GT(r.value, 0.0);
    EXPECT_TRUE(r.certified);
    EXPECT_NEAR(r.value, oracle::brute_sphere_min(a).value, 1e-9);
}

TEST(SphereMinOverSet, NonEuclideanIsGrid)
{
    const auto r = sphere_min_over_set({v2(1, 1)}, norm_kind::sup);
    EXPECT_EQ(r.method, sphere_method::grid);
    EXPECT_FALSE(r.certified);
    EXPECT_NEAR(r.value, -2.0, 1e-3);
}

TEST(SphereMinOverSet, ThreeDimZeroInHullIsUncertified)
{
    vec a(3), b(3);
    a << 1, 0, 0;
    b << -1, 0, 0;
    const auto r = sphere_min_over_set({a, b}, norm_kind::euclidean);
    EXPECT_FALSE(r.certified);
    EXPECT_NEAR(r.value, 0.0, 1e-6);
}

TEST(SphereMinOverSet, Scaling)
{
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<vec> a, ca;
        const double c = std::ldexp(1.0, trial % 9 - 4);
        for (int i = 0; i < 1 + trial % 3; ++i) {
            a.push_back(v2(g(rng) + 2.0, g(rng)));
            ca.push_back(c * a.back());
        }
        const auto r = sphere_min_over_set(a, norm_kind::euclidean);
        ASSERT_EQ(r.method, sphere_method::exact_minnorm);
        EXPECT_EQ(sphere_min_over_set(ca, norm_kind::euclidean).value, c * r.value);
    }
}

TEST(GridOracle, Examples)
{
    const auto f1 = convex_function::from_system(fixtures::ex1());
    EXPECT_NEAR(phi_grid_oracle(f1, ex1_vertex23, 10000).value, -rt2 / 2, 1e-3);
    EXPECT_EQ(phi_grid_oracle(convex_function::named(named_scalar::zero), v1(2)).value, 0.0);
}

TEST(GridOracle, AgreesWithExactOnRandomSystems)
{
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const auto sys = fixtures::random_system(2000 + trial, 2 + trial % 4);
        const auto f = convex_function::from_system(sys);
        // Pick a point where several rows tie sometimes: a catalog witness.
        const auto cat = enumerate_active_sets(sys);
        const vec x = cat.sets[static_cast<std::size_t>(trial) % cat.sets.size()].witness;
        const auto exact = phi(f, x);
        const auto grid = phi_grid_oracle(f, x, 20000);
        EXPECT_NEAR(exact.value, grid.value, 1e-3) << "trial " << trial;
        EXPECT_LE(exact.value, grid.value + 1e-12);
    }
}

TEST(Phi, SignDichotomy)
{
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const auto sys = fixtures::random_system(3000 + trial, 2 + trial % 4);
        const auto f = convex_function::from_system(sys);
        for (const auto& e : enumerate_active_sets(sys).sets) {
            std::vector<vec> grads;
            for (auto i : e.indices) grads.push_back(sys.rows()[i].a);
            const bool zero_in_hull = min_norm_point(grads).distance <= hull_zero_threshold(grads);
            const double v = phi(f, e.witness).value;
            EXPECT_EQ(v < 0, !zero_in_hull);
        }
    }
    EXPECT_GE(phi(convex_function::from_system(fixtures::ex2()), v2(1, -1)).value, 0.0);
}

TEST(Phi, WitnessValidity)
{
    for (int trial = 0; trial < 50; ++trial) {
        const auto sys = fixtures::random_system(4000 + trial, 2 + trial % 4);
        const auto f = convex_function::from_system(sys);
        for (const auto& e : enumerate_active_sets(sys).sets) {
            const auto p = phi(f, e.witness);
            EXPECT_NEAR(p.argmin.norm(), 1.0, 1e-12);
            EXPECT_NEAR(dirderiv_exact(sys, e.witness, p.argmin), p.value, 1e-8);
        }
    }
    const auto o = phi_grid_oracle(convex_function::from_system(fixtures::ex1()), ex1_vertex23, 4096);
    EXPECT_NEAR(o.argmin.norm(), 1.0, 1e-12);
    EXPECT_EQ(dirderiv_exact(fixtures::ex1(), ex1_vertex23, o.argmin), o.value);
}
