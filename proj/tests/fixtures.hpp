// Shared systems for the test suites.
#ifndef ERRBOUND_TESTS_FIXTURES_HPP
#define ERRBOUND_TESTS_FIXTURES_HPP

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <errbound/errbound.hpp>

namespace fixtures {

using errbound::affine_row;
using errbound::max_affine_system;
using errbound::vec;

inline vec v2(double x, double y)
{
    vec v(2);
    v << x, y;
    return v;
}

inline vec v1(double x) { return vec::Constant(1, x); }

inline affine_row row(const std::string& label, double x, double y, double b)
{
    return {label, v2(x, y), b};
}

/// Rows a1=(1,1), a2=(-2,1), a3=(1,-2), b=(1,2,2): a bounded triangle.
inline max_affine_system ex1()
{
    return max_affine_system({row("1", 1, 1, 1), row("2", -2, 1, 2), row("3", 1, -2, 2)});
}

/// Rows (1,1), (-1,-1), b = 0: the level set is the line x1 + x2 = 0.
inline max_affine_system ex2()
{
    return max_affine_system({row("1", 1, 1, 0), row("2", -1, -1, 0)});
}

/// Example 2 tilted at 0 along (0,1): rows (1,1+eps), (-1,-1+eps).
inline max_affine_system ex2_perturbed(double eps)
{
    return max_affine_system({row("1", 1, 1 + eps, 0), row("2", -1, -1 + eps, 0)});
}

inline max_affine_system halfspace()
{
    return max_affine_system({row("1", 3, 4, 0)});
}

/// Gaussian rows with b > 0, so the origin is strictly feasible.
inline max_affine_system random_system(std::uint64_t seed, std::size_t rows, Eigen::Index dim = 2)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.2, 2.0);
    std::vector<affine_row> out;
    for (std::size_t i = 0; i < rows; ++i) {
        vec a(dim);
        for (Eigen::Index j = 0; j < dim; ++j) a[j] = gauss(rng);
        out.push_back({std::to_string(i + 1), a, unif(rng)});
    }
    return max_affine_system(std::move(out));
}

/// 20 (or n) seeded random 2-D systems with 2..5 rows.
inline std::vector<max_affine_system> random_corpus(std::size_t n = 20, std::uint64_t base = 1000)
{
    std::vector<max_affine_system> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(random_system(base + i, 2 + i % 4));
    return out;
}

inline std::vector<std::vector<std::string>> labels_of(const errbound::active_set_catalog& cat)
{
    std::vector<std::vector<std::string>> out;
    for (const auto& e : cat.sets) out.push_back(e.labels);
    return out;
}

} // namespace fixtures

#endif
