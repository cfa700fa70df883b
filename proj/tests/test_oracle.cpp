#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"

using namespace errbound;
using fixtures::v1;
using fixtures::v2;

namespace {

const double rt2 = std::sqrt(2.0);

std::vector<vec> gradients(const max_affine_system& s)
{
    std::vector<vec> out;
    for (const auto& r : s.rows()) out.push_back(r.a);
    return out;
}

std::vector<double> offsets(const max_affine_system& s)
{
    std::vector<double> out;
    for (const auto& r : s.rows()) out.push_back(r.b);
    return out;
}

} // namespace

TEST(BruteDistance, Examples)
{
    EXPECT_NEAR(oracle::brute_distance(v2(1, 1), {v2(1, 1)}, {0.0}).distance.value(), rt2, 1e-3);
    const auto s = fixtures::ex2_perturbed(0.1);
    const double d = oracle::brute_distance(v2(-0.1, 0.1), gradients(s), offsets(s)).distance.value();
    EXPECT_NEAR(d, 0.1 * rt2, 0.02 * 0.1 * rt2);
    EXPECT_EQ(oracle::brute_distance(v2(-3, 0), {v2(1, 1)}, {0.0}).distance, ext_real(0.0));
}

TEST(BruteDistance, EmptyIsInfinite)
{
    EXPECT_TRUE(oracle::brute_distance(v1(0), {v1(1), v1(-1)}, {-1.0, -1.0}).distance.is_infinite());
}

TEST(BruteSphereMin, Examples)
{
    EXPECT_NEAR(oracle::brute_sphere_min({v2(-2, 1), v2(1, -2)}).value, -rt2 / 2, 1e-3);
    EXPECT_NEAR(oracle::brute_sphere_min({v2(1, 1), v2(-1, -1)}).value, 0.0, 1e-3);
    EXPECT_NEAR(oracle::brute_sphere_min({v2(3, 4)}).value, -5.0, 1e-3);
}

TEST(ConvexityProbe, Examples)
{
    EXPECT_TRUE(oracle::convexity_probe(convex_function::named(named_scalar::exp_minus_one)).convex);
    const auto neg = oracle::convexity_probe([](const vec& x) { return -x.squaredNorm(); }, 2);
    EXPECT_FALSE(neg.convex);
    ASSERT_TRUE(neg.witness.has_value());
    const auto& w = *neg.witness;
    EXPECT_GT(-w[2].squaredNorm(), 0.5 * (-w[0].squaredNorm() - w[1].squaredNorm()));
    EXPECT_TRUE(oracle::convexity_probe(convex_function::from_system(fixtures::ex1())).convex);
    EXPECT_TRUE(oracle::convexity_probe(convex_function::from_system(fixtures::random_system(5, 5))).convex);
}

TEST(Agreement, CorpusAndRandomSystems)
{
    std::vector<max_affine_system> corpus{fixtures::ex1(), fixtures::ex2(), fixtures::halfspace(),
                                          fixtures::ex2_perturbed(0.1)};
    for (const auto& s : fixtures::random_corpus(50, 13000)) corpus.push_back(s);
    std::mt19937_64 rng(31);
    for (const auto& sys : corpus) {
        const auto poly = sys.level_set();
        for (int i = 0; i < 30; ++i) {
            const vec x = random_in_ball(vec::Zero(2), 6.0, rng);
            const auto k = project_polyhedron(x, poly);
            const auto o = oracle::brute_distance(x, gradients(sys), offsets(sys));
            EXPECT_NEAR(k.distance.value(), o.distance.value(), 1e-3);
        }
        for (const auto& e : enumerate_active_sets(sys).sets) {
            std::vector<vec> a;
            for (auto t : e.indices) a.push_back(sys.rows()[t].a);
            EXPECT_NEAR(sphere_min_over_set(a, norm_kind::euclidean).value, oracle::brute_sphere_min(a).value, 1e-3);
        }
    }
}

TEST(Agreement, ThreeDimensional)
{
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 10; ++trial) {
        const auto sys = fixtures::random_system(14000 + trial, 4, 3);
        std::vector<vec> a;
        for (const auto& r : sys.rows()) a.push_back(r.a);
        const auto k = sphere_min_over_set(a, norm_kind::euclidean);
        const auto o = oracle::brute_sphere_min(a);
        EXPECT_NEAR(k.value, o.value, 1e-3);
        for (int i = 0; i < 10; ++i) {
            const vec x = random_in_ball(vec::Zero(3), 6.0, rng);
            EXPECT_NEAR(project_polyhedron(x, sys.level_set()).distance.value(),
                        oracle::brute_distance(x, gradients(sys), offsets(sys)).distance.value(), 1e-6);
        }
    }
}

TEST(Resolution, DoublingNeverWorsensBeyondMeshWidth)
{
    std::mt19937_64 rng(41);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<vec> a;
        for (int i = 0; i < 3; ++i) a.push_back(v2(g(rng), g(rng)));
        double max_norm = 0.0;
        for (const auto& v : a) max_norm = std::max(max_norm, v.norm());
        for (std::size_t res = 64; res <= 4096; res *= 2) {
            oracle::oracle_config lo, hi;
            lo.resolution = res;
            hi.resolution = 2 * res;
            const double width = 2 * M_PI / static_cast<double>(res);
            EXPECT_LE(oracle::brute_sphere_min(a, hi).value, oracle::brute_sphere_min(a, lo).value + width * max_norm);
        }
    }
}

TEST(Oracle, Deterministic)
{
    vec a(3), b(3);
    a << 1, 0.2, -0.3;
    b << -1, 0.1, 0.4;
    const auto r1 = oracle::brute_sphere_min({a, b});
    const auto r2 = oracle::brute_sphere_min({a, b});
    EXPECT_EQ(r1.value, r2.value);
    EXPECT_EQ(r1.argmin, r2.argmin);
}
