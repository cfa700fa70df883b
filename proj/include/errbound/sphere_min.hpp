/**
 *  \file
 *  Phi(x) = inf over unit h of d+f(x, h).
 *
 *  For max-affine f in the Euclidean norm the value is computed exactly:
 *  by minimax duality, min over the unit ball of max_{a in A} <a, h> equals
 *  -dist(0, conv A), and when that is negative the minimum over the ball is
 *  attained on the sphere at h = -p / |p| for the min-norm point p. When
 *  0 lies in conv A the sphere problem is nonconvex; in the plane it is
 *  solved exactly by enumerating the breakpoints of a max of sinusoids,
 *  elsewhere by multistart search (flagged uncertified).
 */
#ifndef ERRBOUND_SPHERE_MIN_HPP
#define ERRBOUND_SPHERE_MIN_HPP

#include <cmath>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

#include "convex_model.hpp"
#include "geometry.hpp"

namespace errbound {

enum class sphere_method { exact_minnorm, angular_sweep, exact_1d, grid, multistart };

inline std::string_view to_string(sphere_method m) noexcept
{
    switch (m) {
        case sphere_method::exact_minnorm: return "exact-minnorm";
        case sphere_method::angular_sweep: return "angular-sweep";
        case sphere_method::exact_1d: return "exact-1d";
        case sphere_method::grid: return "grid";
        case sphere_method::multistart: return "multistart";
    }
    return "?";
}

struct sphere_min_result
{
    double value = 0.0;
    vec argmin;           ///< unit vector (in the active norm) attaining `value`
    sphere_method method = sphere_method::grid;
    bool certified = false;
};

struct sphere_min_options
{
    std::size_t oracle_resolution = 20000;
    std::size_t multistart_starts = 32;
    std::size_t multistart_iterations = 400;
    std::uint64_t seed = 12345;
};

namespace detail {

inline double max_pairing(const std::vector<vec>& a, const vec& h)
{
    double best = -HUGE_VAL;
    for (const auto& v : a) best = std::max(best, v.dot(h));
    return best;
}

inline vec polar_direction(double theta)
{
    vec h(2);
    h << std::cos(theta), std::sin(theta);
    return h;
}

// Deterministic direction mesh on the unit sphere of `norm`. In dims 1-3 the
// mesh is a lattice that refines monotonically with `resolution`.
inline std::vector<vec> sphere_mesh(Eigen::Index dim, norm_kind nk, std::size_t resolution,
                                    std::uint64_t seed)
{
    std::vector<vec> out;
    if (dim == 1) {
        out.push_back(vec::Constant(1, 1.0));
        out.push_back(vec::Constant(1, -1.0));
        return out;
    }
    if (dim == 2) {
        const std::size_t n = std::max<std::size_t>(resolution, 8);
        out.reserve(n);
        for (std::size_t k = 0; k < n; ++k) {
            const vec u = polar_direction(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
            out.push_back(u / norm(u, nk));
        }
        return out;
    }
    if (dim == 3) {
        const auto np = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(resolution) / 2.0)));
        const std::size_t n_polar = std::max<std::size_t>(np, 4);
        const std::size_t n_az = 2 * n_polar;
        for (std::size_t i = 0; i <= n_polar; ++i) {
            const double phi = std::numbers::pi * static_cast<double>(i) / static_cast<double>(n_polar);
            const std::size_t ring = (i == 0 || i == n_polar) ? 1 : n_az;
            for (std::size_t j = 0; j < ring; ++j) {
                const double th = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_az);
                vec u(3);
                u << std::sin(phi) * std::cos(th), std::sin(phi) * std::sin(th), std::cos(phi);
                out.push_back(u / norm(u, nk));
            }
        }
        return out;
    }
    std::mt19937_64 rng(seed);
    out.reserve(resolution);
    for (std::size_t k = 0; k < resolution; ++k) out.push_back(random_unit_vector(dim, nk, rng));
    return out;
}

// min over the unit circle of max_i <a_i, h>: the envelope of sinusoids is
// minimized either at the trough of one sinusoid (h = -a_i / |a_i|) or at a
// crossing of two (h orthogonal to a_i - a_j).
inline sphere_min_result angular_sweep(const std::vector<vec>& a)
{
    std::vector<vec> candidates;
    for (const auto& v : a) {
        if (v.norm() > 0) candidates.push_back(-v / v.norm());
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const vec d = a[i] - a[j];
            const double n = d.norm();
            if (n == 0) continue;
            vec perp(2);
            perp << -d[1] / n, d[0] / n;
            candidates.push_back(perp);
            candidates.push_back(-perp);
        }
    }
    if (candidates.empty()) candidates.push_back(polar_direction(0.0));

    sphere_min_result best;
    best.value = HUGE_VAL;
    for (const auto& h : candidates) {
        const double v = max_pairing(a, h);
        if (v < best.value) {
            best.value = v;
            best.argmin = h;
        }
    }
    best.method = sphere_method::angular_sweep;
    best.certified = true;
    return best;
}

// Projected subgradient descent on the sphere from seeded starts, merged
// with a mesh scan. Never certified.
inline sphere_min_result multistart(const std::vector<vec>& a, const sphere_min_options& opt)
{
    const auto dim = a[0].size();
    sphere_min_result best;
    best.value = HUGE_VAL;
    for (const auto& h : sphere_mesh(dim, norm_kind::euclidean, opt.oracle_resolution, opt.seed)) {
        const double v = max_pairing(a, h);
        if (v < best.value) {
            best.value = v;
            best.argmin = h;
        }
    }
    double scale = 0.0;
    for (const auto& v : a) scale = std::max(scale, v.norm());
    if (scale == 0.0) scale = 1.0;

    std::mt19937_64 rng(opt.seed + 1);
    for (std::size_t s = 0; s < opt.multistart_starts; ++s) {
        vec h = (s == 0) ? best.argmin : random_unit_vector(dim, norm_kind::euclidean, rng);
        for (std::size_t k = 0; k < opt.multistart_iterations; ++k) {
            std::size_t arg = 0;
            double v = -HUGE_VAL;
            for (std::size_t i = 0; i < a.size(); ++i) {
                const double p = a[i].dot(h);
                if (p > v) {
                    v = p;
                    arg = i;
                }
            }
            if (v < best.value) {
                best.value = v;
                best.argmin = h;
            }
            // Tangential part of the active gradient.
            vec g = a[arg] - a[arg].dot(h) * h;
            if (g.norm() == 0) break;
            const double step = 0.5 / (std::sqrt(static_cast<double>(k) + 1.0) * scale);
            h -= step * g;
            h.normalize();
        }
    }
    best.method = sphere_method::multistart;
    best.certified = false;
    return best;
}

} // namespace detail

/// Zero threshold for the min-norm distance: 1e-9 * (1 + max |a|).
inline double hull_zero_threshold(const std::vector<vec>& a)
{
    double m = 0.0;
    for (const auto& v : a) m = std::max(m, v.norm());
    return 1e-9 * (1.0 + m);
}

/// min over |h| = 1 of max over a in A of <a, h>.
inline sphere_min_result sphere_min_over_set(const std::vector<vec>& a, norm_kind nk,
                                             const sphere_min_options& opt = {})
{
    ERRBOUND_REQUIRE(!a.empty(), "sphere_min_over_set: empty set");
    for (const auto& v : a) {
        require_valid(v, "sphere_min_over_set");
        require_same_dim(v, a[0], "sphere_min_over_set");
    }
    const auto dim = a[0].size();

    if (dim == 1) {
        // The unit sphere of any norm on R is {-1, +1}.
        sphere_min_result r;
        const vec plus = vec::Constant(1, 1.0), minus = vec::Constant(1, -1.0);
        const double vp = detail::max_pairing(a, plus), vm = detail::max_pairing(a, minus);
        r.value = std::min(vp, vm);
        r.argmin = vp <= vm ? plus : minus;
        r.method = sphere_method::exact_1d;
        r.certified = true;
        return r;
    }

    if (nk != norm_kind::euclidean) {
        sphere_min_result best;
        best.value = HUGE_VAL;
        for (const auto& h : detail::sphere_mesh(dim, nk, opt.oracle_resolution, opt.seed)) {
            const double v = detail::max_pairing(a, h);
            if (v < best.value) {
                best.value = v;
                best.argmin = h;
            }
        }
        best.method = sphere_method::grid;
        best.certified = false;
        return best;
    }

    const auto mn = min_norm_point(a);
    if (mn.distance > hull_zero_threshold(a)) {
        sphere_min_result r;
        r.value = -mn.distance;
        r.argmin = -mn.point / mn.distance;
        r.method = sphere_method::exact_minnorm;
        r.certified = true;
        return r;
    }
    if (dim == 2) return detail::angular_sweep(a);
    return detail::multistart(a, opt);
}

/**
 *  Brute-force minimum of d+f(x, .) over a deterministic sphere mesh.
 *  Angular lattice for dim <= 3, seeded uniform samples beyond. Uncertified.
 */
inline sphere_min_result phi_grid_oracle(const convex_function& f, const vec& x,
                                         std::size_t resolution = 20000, std::uint64_t seed = 12345)
{
    require_valid(x, "phi_grid_oracle");
    ERRBOUND_REQUIRE(x.size() == f.dim(), "phi_grid_oracle: dimension mismatch");
    sphere_min_result best;
    best.value = HUGE_VAL;
    for (const auto& h : detail::sphere_mesh(f.dim(), f.norm(), resolution, seed)) {
        const double v = dirderiv(f, x, h).as_double();
        if (v < best.value) {
            best.value = v;
            best.argmin = h;
        }
    }
    best.method = sphere_method::grid;
    best.certified = false;
    return best;
}

/**
 *  Phi(x) for any convex f.
 *
 *  Max-affine f go through the active gradients at x (Danskin); scalar
 *  functions with an exact derivative rule are evaluated at h = +-1, which
 *  is exact; everything else falls back to the grid oracle.
 */
inline sphere_min_result phi(const convex_function& f, const vec& x, const sphere_min_options& opt = {})
{
    require_valid(x, "phi");
    ERRBOUND_REQUIRE(x.size() == f.dim(), "phi: dimension mismatch");
    const double fx = f(x);
    ERRBOUND_REQUIRE(std::isfinite(fx), "phi: f(x) is not finite");

    if (const auto* sys = f.system()) {
        std::vector<vec> grads;
        for (auto i : active_indices(*sys, x)) grads.push_back(sys->rows()[i].a);
        return sphere_min_over_set(grads, sys->norm(), opt);
    }
    if (f.dim() == 1 && f.has_exact_dirderiv()) {
        sphere_min_result r;
        const vec plus = vec::Constant(1, 1.0), minus = vec::Constant(1, -1.0);
        const double vp = *f.exact_dirderiv(x, plus), vm = *f.exact_dirderiv(x, minus);
        r.value = std::min(vp, vm);
        r.argmin = vp <= vm ? plus : minus;
        r.method = sphere_method::exact_1d;
        r.certified = true;
        return r;
    }
    return phi_grid_oracle(f, x, opt.oracle_resolution, opt.seed);
}

} // namespace errbound

#endif
