/**
 *  \file
 *  Brute-force counterparts of the certified kernels.
 *
 *  Nothing here calls the kernels in geometry.hpp or sphere_min.hpp; only
 *  their data types and Eigen's dense solvers are shared. Everything is slow
 *  on purpose and restricted to small dimension.
 */
#ifndef ERRBOUND_ORACLE_HPP
#define ERRBOUND_ORACLE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "convex_model.hpp"
#include "errors.hpp"
#include "ext_real.hpp"

namespace errbound::oracle {

struct oracle_config
{
    std::uint64_t seed = 1;
    std::size_t resolution = 65536;   ///< sphere mesh size (dim 2); about this many points in dim 3
    std::size_t samples = 512;        ///< convexity probe triples
    double radius = 4.0;
    double feasibility_tol = 1e-9;
};

namespace detail {

// Calls visit(subset) for each subset of {0..m-1} with 1 <= size <= k_max.
inline void for_each_subset(std::size_t m, std::size_t k_max, const std::function<void(const std::vector<std::size_t>&)>& visit)
{
    std::vector<std::size_t> idx;
    for (std::size_t k = 1; k <= std::min(k_max, m); ++k) {
        idx.resize(k);
        for (std::size_t i = 0; i < k; ++i) idx[i] = i;
        while (true) {
            visit(idx);
            std::size_t pos = k;
            while (pos > 0 && idx[pos - 1] == m - k + pos - 1) --pos;
            if (pos == 0) break;
            ++idx[pos - 1];
            for (std::size_t j = pos; j < k; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
}

inline double max_dot(const std::vector<vec>& a, const vec& h)
{
    double v = -HUGE_VAL;
    for (const auto& p : a) v = std::max(v, p.dot(h));
    return v;
}

} // namespace detail

struct distance_result
{
    ext_real distance = ext_real::infinity();
    vec point;
};

/**
 *  Euclidean distance from x to { y : <a_i, y> <= b_i } by face enumeration:
 *  project x onto every affine set cut out by at most dim rows as equalities
 *  and keep the nearest feasible candidate.
 */
inline distance_result brute_distance(const vec& x, const std::vector<vec>& a, const std::vector<double>& b,
                                      const oracle_config& cfg = {})
{
    ERRBOUND_REQUIRE(a.size() == b.size(), "brute_distance: row count mismatch");
    const auto dim = x.size();
    ERRBOUND_REQUIRE(dim <= 3, "brute_distance: dimension above 3");
    auto feasible = [&](const vec& y) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i].dot(y) - b[i] > cfg.feasibility_tol * (1.0 + std::abs(b[i]) + a[i].norm() * y.norm())) return false;
        }
        return true;
    };
    distance_result out;
    if (feasible(x)) {
        out.distance = 0.0;
        out.point = x;
        return out;
    }
    detail::for_each_subset(a.size(), static_cast<std::size_t>(dim), [&](const std::vector<std::size_t>& s) {
        const auto k = static_cast<Eigen::Index>(s.size());
        Eigen::MatrixXd m(k, dim);
        vec r(k);
        for (Eigen::Index q = 0; q < k; ++q) {
            m.row(q) = a[s[static_cast<std::size_t>(q)]].transpose();
            r[q] = b[s[static_cast<std::size_t>(q)]];
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
        if (lu.rank() < k) return;
        // y = x - M^T (M M^T)^{-1} (M x - r)
        const vec y = x - m.transpose() * (m * m.transpose()).ldlt().solve(m * x - r);
        if (!feasible(y)) return;
        const double d = (y - x).norm();
        if (ext_real(d) < out.distance) {
            out.distance = d;
            out.point = y;
        }
    });
    return out;
}

struct sphere_result
{
    double value = HUGE_VAL;
    vec argmin;
};

/**
 *  min over the Euclidean unit sphere of max_i <a_i, h> by mesh search and
 *  local refinement around the best mesh point.
 */
inline sphere_result brute_sphere_min(const std::vector<vec>& a, const oracle_config& cfg = {})
{
    ERRBOUND_REQUIRE(!a.empty(), "brute_sphere_min: empty set");
    const auto dim = a[0].size();
    ERRBOUND_REQUIRE(dim >= 1 && dim <= 3, "brute_sphere_min: dimension must be 1, 2 or 3");
    sphere_result out;
    auto consider = [&](const vec& h) {
        const double v = detail::max_dot(a, h);
        if (v < out.value) {
            out.value = v;
            out.argmin = h;
        }
    };
    if (dim == 1) {
        consider(vec::Constant(1, 1.0));
        consider(vec::Constant(1, -1.0));
        return out;
    }
    if (dim == 2) {
        auto at = [](double t) {
            vec h(2);
            h << std::cos(t), std::sin(t);
            return h;
        };
        const std::size_t n = std::max<std::size_t>(cfg.resolution, 16);
        const double step = 2.0 * std::numbers::pi / static_cast<double>(n);
        double best_t = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double t = step * static_cast<double>(k);
            const double before = out.value;
            consider(at(t));
            if (out.value < before) best_t = t;
        }
        // Golden-section on the bracketing cell; the envelope is unimodal there
        // once the mesh is fine enough.
        double lo = best_t - step, hi = best_t + step;
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        for (int it = 0; it < 100; ++it) {
            const double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
            if (detail::max_dot(a, at(c)) < detail::max_dot(a, at(d))) hi = d; else lo = c;
        }
        consider(at(0.5 * (lo + hi)));
        return out;
    }
    // dim 3: latitude/longitude lattice, then a shrinking local pattern search.
    const auto np = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(cfg.resolution) / 2.0)));
    const std::size_t n_az = 2 * np;
    auto sph = [](double phi, double th) {
        vec h(3);
        h << std::sin(phi) * std::cos(th), std::sin(phi) * std::sin(th), std::cos(phi);
        return h;
    };
    double bp = 0.0, bt = 0.0;
    for (std::size_t i = 0; i <= np; ++i) {
        const double phi = std::numbers::pi * static_cast<double>(i) / static_cast<double>(np);
        for (std::size_t j = 0; j < n_az; ++j) {
            const double th = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_az);
            const double before = out.value;
            consider(sph(phi, th));
            if (out.value < before) {
                bp = phi;
                bt = th;
            }
        }
    }
    vec h = sph(bp, bt);
    double r = std::numbers::pi / static_cast<double>(np);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    while (r > 1e-12) {
        bool improved = false;
        for (int k = 0; k < 32; ++k) {
            vec d(3);
            d << gauss(rng), gauss(rng), gauss(rng);
            d -= d.dot(h) * h;
            if (d.norm() == 0) continue;
            const vec cand = (h + r * d / d.norm()).normalized();
            if (detail::max_dot(a, cand) < detail::max_dot(a, h)) {
                h = cand;
                improved = true;
            }
        }
        if (!improved) r *= 0.5;
    }
    consider(h);
    return out;
}

/**
 *  Distance from 0 to conv(points) by enumerating every subset of at most
 *  dim + 1 points and solving its affine minimization in closed form.
 */
inline double brute_min_norm_distance(const std::vector<vec>& points)
{
    ERRBOUND_REQUIRE(!points.empty(), "brute_min_norm_distance: empty set");
    const auto dim = points[0].size();
    ERRBOUND_REQUIRE(dim <= 3, "brute_min_norm_distance: dimension above 3");
    double best = HUGE_VAL;
    detail::for_each_subset(points.size(), static_cast<std::size_t>(dim) + 1, [&](const std::vector<std::size_t>& s) {
        const auto k = static_cast<Eigen::Index>(s.size());
        // KKT: [G 1; 1^T 0] [mu; nu] = [0; 1] with G the Gram matrix.
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
        for (Eigen::Index i = 0; i < k; ++i) {
            for (Eigen::Index j = 0; j < k; ++j) {
                kkt(i, j) = points[s[static_cast<std::size_t>(i)]].dot(points[s[static_cast<std::size_t>(j)]]);
            }
            kkt(i, k) = kkt(k, i) = 1.0;
        }
        vec rhs = vec::Zero(k + 1);
        rhs[k] = 1.0;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
        if (!lu.isInvertible()) return;
        const vec sol = lu.solve(rhs);
        vec p = vec::Zero(dim);
        for (Eigen::Index i = 0; i < k; ++i) {
            if (sol[i] < -1e-12) return;
            p += sol[i] * points[s[static_cast<std::size_t>(i)]];
        }
        best = std::min(best, p.norm());
    });
    return best;
}

struct convexity_report
{
    bool convex = true;
    std::optional<std::array<vec, 3>> witness;   ///< (x, y, midpoint) or (x, nearby, x)
    double violation = 0.0;
};

/**
 *  Midpoint-convexity and lower-semicontinuity spot checks on seeded
 *  samples from the ball of radius cfg.radius.
 */
inline convexity_report convexity_probe(const std::function<double(const vec&)>& f, Eigen::Index dim,
                                        const oracle_config& cfg = {})
{
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif(-cfg.radius, cfg.radius);
    auto draw = [&] {
        vec x(dim);
        for (Eigen::Index i = 0; i < dim; ++i) x[i] = unif(rng);
        return x;
    };
    convexity_report out;
    for (std::size_t s = 0; s < cfg.samples; ++s) {
        const vec x = draw(), y = draw();
        const vec m = 0.5 * (x + y);
        const double fx = f(x), fy = f(y), fm = f(m);
        if (!std::isfinite(fx) || !std::isfinite(fy)) continue;
        const double gap = fm - 0.5 * (fx + fy);
        if (gap > 1e-9 * (1.0 + std::abs(fx) + std::abs(fy)) && gap > out.violation) {
            out.convex = false;
            out.violation = gap;
            out.witness = std::array<vec, 3>{x, y, m};
        }
        // Lower semicontinuity: f(x) may not exceed the value at a point
        // within 1e-11 of x.
        const vec near_at = x + std::ldexp(1.0, -40) * (y - x);
        const double near_min = f(near_at);
        const double jump = fx - near_min;
        if (jump > 1e-6 * (1.0 + std::abs(fx)) && jump > out.violation) {
            out.convex = false;
            out.violation = jump;
            out.witness = std::array<vec, 3>{x, near_at, x};
        }
    }
    return out;
}

inline convexity_report convexity_probe(const convex_function& f, const oracle_config& cfg = {})
{
    return convexity_probe([&f](const vec& x) { return f(x); }, f.dim(), cfg);
}

} // namespace errbound::oracle

#endif
