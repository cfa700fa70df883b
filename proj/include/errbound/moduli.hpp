/**
 *  \file
 *  Error-bound moduli.
 *
 *  Er(f)       = inf over f(x) > 0 of f(x) / d(x, S_f)
 *  Er(f, xbar) = liminf over x -> xbar, f(x) > 0 of the same ratio
 *
 *  Each is estimated on a seeded sample set two ways: by the ratio itself
 *  ("direct") and by -Phi(x) ("primal"). The two agree for true infima; on a
 *  finite sample the primal value can only be larger pointwise.
 */
#ifndef ERRBOUND_MODULI_HPP
#define ERRBOUND_MODULI_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "convex_model.hpp"
#include "ext_real.hpp"
#include "geometry.hpp"
#include "sphere_min.hpp"

namespace errbound {

/// Band inside which a computed Phi is treated as zero.
inline double phi_zero_tolerance(const convex_function& f)
{
    if (const auto* sys = f.system()) return 1e-7 * (1.0 + sys->max_gradient_norm());
    return 1e-7;
}

/**
 *  Values of f at or below this are rounding noise and the point counts as
 *  feasible. Zero for general f; for max-affine f it is the evaluation error
 *  of <a, x> - b.
 */
inline double infeasibility_threshold(const convex_function& f, const vec& x)
{
    const auto* sys = f.system();
    if (!sys) return 0.0;
    double b = 0.0;
    for (const auto& r : sys->rows()) b = std::max(b, std::abs(r.b));
    return 1e-12 * (1.0 + sys->max_gradient_norm() * x.norm() + b);
}

// ---------------------------------------------------------------------------
// Distance to the lower level set

using distance_fn = std::function<ext_real(const vec&)>;

/**
 *  The lower level set of a scalar convex function, located by scanning for
 *  a feasible point and bisecting outward to both ends. Returns nothing if
 *  no feasible point is found on the scan, which is treated as S_f empty.
 */
inline std::optional<interval_1d> scalar_level_set(const convex_function& f)
{
    ERRBOUND_REQUIRE(f.dim() == 1, "scalar_level_set: function is not scalar");
    if (f.known_level_set()) return f.known_level_set();

    auto at = [&](double t) { return f(vec::Constant(1, t)); };
    std::vector<double> probes{0.0};
    if (f.tilt()) probes.push_back(f.tilt()->anchor[0]);
    for (int k = -20; k <= 60; ++k) {
        probes.push_back(std::ldexp(1.0, k));
        probes.push_back(-std::ldexp(1.0, k));
    }
    std::optional<double> inside;
    for (double p : probes) {
        if (at(p) <= 0) {
            inside = p;
            break;
        }
    }
    if (!inside) return std::nullopt;

    auto find_end = [&](double dir) {
        double lo = *inside;
        double hi = lo;
        bool bracketed = false;
        for (int k = -10; k <= 70; ++k) {
            const double cand = *inside + dir * std::ldexp(1.0, k);
            if (at(cand) > 0) {
                hi = cand;
                bracketed = true;
                break;
            }
            lo = cand;
        }
        if (!bracketed) return dir * HUGE_VAL;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            (at(mid) <= 0 ? lo : hi) = mid;
        }
        return lo;
    };
    return interval_1d{find_end(-1.0), find_end(1.0)};
}

/// d(., S_f) for max-affine f (polyhedral projection) or scalar f (interval).
inline distance_fn level_set_distance(const convex_function& f, projection_options popt = {})
{
    if (const auto* sys = f.system()) {
        auto poly = std::make_shared<const polyhedron>(sys->level_set());
        if (!feasible_point(*poly)) return [](const vec&) { return ext_real::infinity(); };
        popt.known_nonempty = true;
        return [poly, popt](const vec& x) { return project_polyhedron(x, *poly, popt).distance; };
    }
    if (f.dim() == 1) {
        const auto s = scalar_level_set(f);
        return [s](const vec& x) -> ext_real {
            if (!s) return ext_real::infinity();
            const double t = x[0];
            if (t < s->lower) return s->lower - t;
            if (t > s->upper) return t - s->upper;
            return 0.0;
        };
    }
    fail(errc::not_applicable, "no distance evaluator for '" + f.name() + "'");
}

// ---------------------------------------------------------------------------
// Sampling

/// Seeded sampler over nested balls ("shells") around a center.
struct sampler_spec
{
    std::uint64_t seed = 1;
    std::size_t count = 1000;                 ///< uniform samples per shell
    vec center;                               ///< empty means the origin
    std::vector<double> radii{1.0, 10.0, 100.0};
    /// For max-affine f, also sample the sets where 2 or 3 rows tie. The
    /// infimum of -Phi is often attained only there (measure zero).
    bool stratified = true;
};

namespace detail {

// Points on { x : row i value = row j value, ... } obtained by projecting
// ball samples onto the tie subspace of each row subset of size 2 and 3.
template <class Rng>
void append_tie_samples(const max_affine_system& sys, const vec& center, double radius,
                        std::size_t budget, Rng& rng, std::vector<vec>& out)
{
    const std::size_t m = sys.size();
    std::vector<std::vector<std::size_t>> subsets;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            subsets.push_back({i, j});
            if (m <= 8 && sys.dim() >= 2) {
                for (std::size_t k = j + 1; k < m; ++k) subsets.push_back({i, j, k});
            }
        }
    }
    if (subsets.empty()) return;
    const std::size_t per = std::max<std::size_t>(2, budget / subsets.size());
    const auto& rows = sys.rows();
    for (const auto& s : subsets) {
        const auto k = static_cast<Eigen::Index>(s.size() - 1);
        Eigen::MatrixXd d(k, sys.dim());
        vec r(k);
        for (Eigen::Index q = 0; q < k; ++q) {
            const auto& ri = rows[s[static_cast<std::size_t>(q) + 1]];
            d.row(q) = (ri.a - rows[s[0]].a).transpose();
            r[q] = ri.b - rows[s[0]].b;
        }
        if (d.norm() == 0) continue;
        const auto cod = (d * d.transpose()).completeOrthogonalDecomposition();
        for (std::size_t n = 0; n < per; ++n) {
            const vec y = random_in_ball(center, radius, rng);
            const vec mu = cod.solve(d * y - r);
            const vec z = y - d.transpose() * mu;
            if ((d * z - r).norm() <= 1e-9 * (1.0 + r.norm() + z.norm()) && (z - center).norm() <= radius) {
                out.push_back(z);
            }
        }
    }
}

} // namespace detail

/// Sample sets per shell, deterministic in (f, spec).
inline std::vector<std::vector<vec>> generate_shell_samples(const convex_function& f, const sampler_spec& spec)
{
    const vec center = spec.center.size() ? spec.center : vec::Zero(f.dim());
    ERRBOUND_REQUIRE(center.size() == f.dim(), "sampler: center dimension mismatch");
    std::mt19937_64 rng(spec.seed);
    std::vector<std::vector<vec>> shells;
    for (double r : spec.radii) {
        ERRBOUND_REQUIRE(r > 0 && std::isfinite(r), "sampler: radii must be positive");
        std::vector<vec> pts;
        pts.reserve(spec.count);
        for (std::size_t i = 0; i < spec.count; ++i) pts.push_back(random_in_ball(center, r, rng));
        if (spec.stratified && f.system()) {
            detail::append_tie_samples(*f.system(), center, r, spec.count / 4, rng, pts);
        }
        shells.push_back(std::move(pts));
    }
    return shells;
}

// ---------------------------------------------------------------------------
// Estimates

enum class modulus_kind { global, local };
enum class modulus_route { direct_ratio, primal_phi };

inline std::string_view to_string(modulus_route r) noexcept
{
    return r == modulus_route::direct_ratio ? "direct-ratio" : "primal-phi";
}

struct shell_value
{
    double radius = 0.0;
    ext_real value = ext_real::infinity();
    std::size_t infeasible_samples = 0;
};

struct modulus_estimate
{
    modulus_kind kind = modulus_kind::global;
    modulus_route route = modulus_route::direct_ratio;
    ext_real value = ext_real::infinity();
    std::size_t sample_count = 0;        ///< infeasible samples examined
    std::vector<shell_value> shells;
    std::optional<vec> witness;
    bool certified = true;               ///< every Phi evaluation was exact
    bool stabilized = false;             ///< last two shells agree to 1%
    bool empty_level_set = false;
    std::vector<std::string> notes;
};

namespace detail {

inline bool agree(const ext_real& a, const ext_real& b, double rel)
{
    if (a.is_infinite() || b.is_infinite()) return a == b;
    return std::abs(a.value() - b.value()) <= rel * std::max(std::abs(a.value()), std::abs(b.value()));
}

// Shared reduction: `score(x)` returns the per-sample value for infeasible x.
// `cumulative` keeps a running infimum across shells (growing regions);
// otherwise each shell is reduced on its own (shrinking balls).
template <class Score>
modulus_estimate reduce_shells(const convex_function& f, const std::vector<std::vector<vec>>& shells,
                               const std::vector<double>& radii, bool cumulative, Score&& score)
{
    modulus_estimate est;
    ext_real running = ext_real::infinity();
    std::optional<vec> running_witness;
    for (std::size_t s = 0; s < shells.size(); ++s) {
        ext_real shell_inf = ext_real::infinity();
        std::optional<vec> shell_witness;
        std::size_t infeasible = 0;
        for (const auto& x : shells[s]) {
            const double fx = f(x);
            if (!(fx > infeasibility_threshold(f, x))) continue;
            ++infeasible;
            const std::optional<ext_real> v = score(x, fx, est);
            if (!v) continue;
            if (*v < shell_inf) {
                shell_inf = *v;
                shell_witness = x;
            }
        }
        est.sample_count += infeasible;
        if (cumulative) {
            if (shell_inf < running) {
                running = shell_inf;
                running_witness = shell_witness;
            }
            est.shells.push_back({radii[s], running, infeasible});
        } else {
            est.shells.push_back({radii[s], shell_inf, infeasible});
            if (infeasible > 0) {
                running = shell_inf;
                running_witness = shell_witness;
            }
        }
        if (est.empty_level_set) break;
    }
    est.value = running;
    est.witness = running_witness;
    if (est.shells.size() >= 2) {
        est.stabilized = agree(est.shells[est.shells.size() - 1].value, est.shells[est.shells.size() - 2].value, 0.01);
    }
    return est;
}

} // namespace detail

/// Er(f) by the ratio f(x) / d(x, S_f) over the sampler's shells.
inline modulus_estimate global_modulus_direct(const convex_function& f, const distance_fn& dist,
                                              const sampler_spec& spec)
{
    const auto shells = generate_shell_samples(f, spec);
    auto est = detail::reduce_shells(f, shells, spec.radii, true,
                                     [&](const vec& x, double fx, modulus_estimate& e) -> std::optional<ext_real> {
                                         const ext_real d = dist(x);
                                         if (d.is_infinite()) {
                                             e.empty_level_set = true;
                                             return ext_real(0.0);
                                         }
                                         if (!(d.value() > 0)) {
                                             e.notes.push_back("zero distance at an infeasible sample");
                                             return std::nullopt;
                                         }
                                         return ext_real(fx / d.value());
                                     });
    est.kind = modulus_kind::global;
    est.route = modulus_route::direct_ratio;
    if (est.empty_level_set) {
        est.value = 0.0;
        est.notes.push_back("level set is empty; Er = 0 by the d(x, {}) = +inf convention");
    }
    return est;
}

inline modulus_estimate global_modulus_direct(const convex_function& f, const sampler_spec& spec)
{
    return global_modulus_direct(f, level_set_distance(f), spec);
}

/// Er(f) by -Phi(x) over the same sample set.
inline modulus_estimate global_modulus_primal(const convex_function& f, const sampler_spec& spec,
                                              const sphere_min_options& sopt = {})
{
    const auto shells = generate_shell_samples(f, spec);
    auto est = detail::reduce_shells(f, shells, spec.radii, true,
                                     [&](const vec& x, double, modulus_estimate& e) -> std::optional<ext_real> {
                                         const auto p = phi(f, x, sopt);
                                         if (!p.certified) e.certified = false;
                                         if (p.value > 0) {
                                             e.notes.push_back("positive Phi at an infeasible point; clamped to 0");
                                             return ext_real(0.0);
                                         }
                                         return ext_real(-p.value);
                                     });
    est.kind = modulus_kind::global;
    est.route = modulus_route::primal_phi;
    return est;
}

struct local_sampler_spec
{
    std::uint64_t seed = 1;
    std::vector<double> radii{1e-1, 1e-2, 1e-3};
    std::size_t count = 200;
    bool stratified = true;
};

struct local_modulus_result
{
    modulus_estimate direct;
    modulus_estimate primal;
};

/// Er(f, xbar) by both routes over shrinking balls; value at the smallest ball with infeasible samples.
inline local_modulus_result local_modulus(const convex_function& f, const vec& anchor,
                                          const local_sampler_spec& spec = {},
                                          const sphere_min_options& sopt = {})
{
    require_valid(anchor, "local_modulus");
    ERRBOUND_REQUIRE(anchor.size() == f.dim(), "local_modulus: dimension mismatch");
    ERRBOUND_REQUIRE(std::abs(f(anchor)) <= 1e-9, "local_modulus: f(anchor) is not 0");

    sampler_spec shells_spec;
    shells_spec.seed = spec.seed;
    shells_spec.count = spec.count;
    shells_spec.center = anchor;
    shells_spec.radii = spec.radii;
    shells_spec.stratified = spec.stratified;
    const auto shells = generate_shell_samples(f, shells_spec);
    const auto dist = level_set_distance(f);

    local_modulus_result out;
    out.direct = detail::reduce_shells(f, shells, spec.radii, false,
                                       [&](const vec& x, double fx, modulus_estimate& e) -> std::optional<ext_real> {
                                           const ext_real d = dist(x);
                                           if (d.is_infinite()) {
                                               e.empty_level_set = true;
                                               return ext_real(0.0);
                                           }
                                           if (!(d.value() > 0)) return std::nullopt;
                                           return ext_real(fx / d.value());
                                       });
    out.primal = detail::reduce_shells(f, shells, spec.radii, false,
                                       [&](const vec& x, double, modulus_estimate& e) -> std::optional<ext_real> {
                                           const auto p = phi(f, x, sopt);
                                           if (!p.certified) e.certified = false;
                                           if (p.value > 0) {
                                               e.notes.push_back("positive Phi at an infeasible point; clamped to 0");
                                               return ext_real(0.0);
                                           }
                                           return ext_real(-p.value);
                                       });
    out.direct.kind = out.primal.kind = modulus_kind::local;
    out.direct.route = modulus_route::direct_ratio;
    out.primal.route = modulus_route::primal_phi;
    return out;
}

/// |Phi(xbar)|, a lower bound on Er(f, xbar) whenever Phi(xbar) != 0.
inline double modulus_lower_bound_point(const convex_function& f, const vec& anchor,
                                        const sphere_min_options& sopt = {})
{
    ERRBOUND_REQUIRE(std::abs(f(anchor)) <= 1e-9, "modulus_lower_bound_point: f(anchor) is not 0");
    const auto p = phi(f, anchor, sopt);
    if (std::abs(p.value) <= phi_zero_tolerance(f)) {
        fail(errc::not_applicable, "modulus_lower_bound_point: Phi(anchor) = 0");
    }
    return std::abs(p.value);
}

} // namespace errbound

#endif
