/**
 *  \file
 *  Stability of error bounds under linear tilts g = f + eps <u, . - xbar>.
 *
 *  At a point: the local bound is stable iff Phi(xbar) != 0. Globally: a
 *  positive tau = inf over the boundary of |Phi| is sufficient for polyhedral
 *  f and, together with the interior slope condition, for general f.
 *  When stability fails, the tilt from the flat direction is constructed
 *  explicitly and its modulus bounded through -Phi_g at a witness.
 */
#ifndef ERRBOUND_STABILITY_HPP
#define ERRBOUND_STABILITY_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "convex_model.hpp"
#include "errors.hpp"
#include "ext_real.hpp"
#include "geometry.hpp"
#include "hoffman.hpp"
#include "moduli.hpp"
#include "sphere_min.hpp"

namespace errbound {

enum class stability_scope { point, global };

inline std::string_view to_string(stability_scope s) noexcept
{
    return s == stability_scope::point ? "point" : "global";
}

struct stability_witness
{
    vec point;
    double phi = 0.0;
    std::optional<vec> tilt_direction;
    double tilt_magnitude = 0.0;
};

struct stability_certificate
{
    stability_scope scope = stability_scope::point;
    verdict result = verdict::inconclusive;
    double tau = 0.0;        ///< |Phi(xbar)| (point) or inf over the boundary (global)
    double phi_value = 0.0;  ///< Phi(xbar) (point) or the boundary value attaining tau
    bool certified = false;
    std::vector<stability_witness> witnesses;
    std::vector<std::string> notes;
};

// ---------------------------------------------------------------------------
// Tilts

struct tilt_spec
{
    vec anchor;
    vec direction;
    double magnitude = 0.0;
};

inline convex_function tilt(const convex_function& f, const tilt_spec& spec)
{
    require_valid(spec.direction, "tilt direction");
    ERRBOUND_REQUIRE(dual_norm(spec.direction, f.norm()) <= 1.0 + 1e-12, "tilt: dual norm of u exceeds 1");
    return f.tilted(spec.anchor, spec.direction, spec.magnitude);
}

// ---------------------------------------------------------------------------
// Point stability

/**
 *  Stable iff |Phi(xbar)| > tol. Every tilt of magnitude eps < |Phi| then
 *  keeps a local modulus of at least |Phi| - eps.
 */
inline stability_certificate point_stability(const convex_function& f, const vec& xbar,
                                             std::optional<double> tol = std::nullopt,
                                             const sphere_min_options& sopt = {})
{
    require_valid(xbar, "point_stability");
    ERRBOUND_REQUIRE(xbar.size() == f.dim(), "point_stability: dimension mismatch");
    ERRBOUND_REQUIRE(std::abs(f(xbar)) <= 1e-9, "point_stability: f(xbar) is not 0");
    const double band = tol.value_or(phi_zero_tolerance(f));
    const auto p = phi(f, xbar, sopt);

    stability_certificate c;
    c.scope = stability_scope::point;
    c.phi_value = p.value;
    c.tau = std::abs(p.value);
    c.certified = p.certified;
    if (std::abs(p.value) > band) {
        c.result = verdict::stable;
        c.notes.push_back("tilts of magnitude eps < " + format_real(c.tau) +
                          " keep a local modulus >= " + format_real(c.tau) + " - eps");
    } else if (p.certified) {
        c.result = verdict::unstable;
        c.witnesses.push_back({xbar, p.value, p.argmin, 0.0});
    } else {
        c.result = verdict::inconclusive;
        c.notes.push_back("Phi is within the zero band but was not certified");
    }
    return c;
}

// ---------------------------------------------------------------------------
// Epsilon-perturbations

struct perturbation_check
{
    bool holds = false;
    double max_quotient = 0.0;          ///< sampled sup |(f-g)(x) - (f-g)(xbar)| / |x - xbar|
    std::optional<double> analytic_bound;
};

/**
 *  Necessary check that g is an eps-perturbation of f near xbar: the
 *  sampled difference quotient over shrinking radii stays <= eps + 1e-6.
 */
inline perturbation_check eps_perturbation_check(const convex_function& f, const convex_function& g,
                                                 const vec& xbar, double eps,
                                                 std::vector<double> radii = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6},
                                                 std::size_t samples = 64, std::uint64_t seed = 1)
{
    ERRBOUND_REQUIRE(f.dim() == g.dim(), "eps_perturbation_check: dimension mismatch");
    const double d0 = f(xbar) - g(xbar);
    ERRBOUND_REQUIRE(std::isfinite(f(xbar)) && std::isfinite(g(xbar)),
                     "eps_perturbation_check: f or g is not finite at xbar");
    perturbation_check out;
    std::mt19937_64 rng(seed);
    for (double r : radii) {
        for (std::size_t i = 0; i < samples; ++i) {
            const vec x = xbar + r * random_unit_vector(f.dim(), f.norm(), rng);
            const double q = std::abs(f(x) - g(x) - d0) / norm(vec(x - xbar), f.norm());
            out.max_quotient = std::max(out.max_quotient, q);
        }
    }
    out.holds = out.max_quotient <= eps + 1e-6;
    if (g.tilt() && g.tilt()->base_id == f.id()) out.analytic_bound = g.tilt()->lip_bound;
    if (f.tilt() && f.tilt()->base_id == g.id()) out.analytic_bound = f.tilt()->lip_bound;
    if (f.id() == g.id()) out.analytic_bound = 0.0;
    if (out.analytic_bound && *out.analytic_bound > eps + 1e-12) out.holds = false;
    return out;
}

struct lip_estimate
{
    double value = 0.0;
    bool analytic = false;   ///< false: sampled lower estimate of Lip(f - g)
};

inline lip_estimate lip_difference_estimate(const convex_function& f, const convex_function& g,
                                            std::size_t pairs = 4000, double radius = 10.0,
                                            std::uint64_t seed = 1)
{
    ERRBOUND_REQUIRE(f.dim() == g.dim(), "lip_difference_estimate: dimension mismatch");
    if (f.id() == g.id()) return {0.0, true};
    if (g.tilt() && g.tilt()->base_id == f.id()) return {g.tilt()->lip_bound, true};
    if (f.tilt() && f.tilt()->base_id == g.id()) return {f.tilt()->lip_bound, true};

    std::mt19937_64 rng(seed);
    const vec origin = vec::Zero(f.dim());
    std::uniform_real_distribution<double> unif(-12.0, 0.0);
    lip_estimate out;
    for (std::size_t i = 0; i < pairs; ++i) {
        const vec u = random_in_ball(origin, radius, rng);
        const vec v = u + std::pow(10.0, unif(rng)) * random_unit_vector(f.dim(), f.norm(), rng);
        const double du = f(u) - g(u), dv = f(v) - g(v);
        if (!std::isfinite(du) || !std::isfinite(dv)) continue;
        out.value = std::max(out.value, std::abs(du - dv) / norm(vec(u - v), f.norm()));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Boundary points

struct boundary_sampler_spec
{
    std::uint64_t seed = 1;
    std::size_t per_face = 8;   ///< extra points per realizable active set
};

/// Points with f = 0 (within 1e-9) on the boundary of S_f.
inline std::vector<vec> boundary_points(const convex_function& f, const boundary_sampler_spec& spec = {})
{
    std::vector<vec> out;
    if (const auto* sys = f.system()) {
        std::mt19937_64 rng(spec.seed);
        for (const auto& e : enumerate_active_sets(*sys).sets) {
            out.push_back(e.witness);
            Eigen::MatrixXd a(static_cast<Eigen::Index>(e.indices.size()), sys->dim());
            for (std::size_t q = 0; q < e.indices.size(); ++q) {
                a.row(static_cast<Eigen::Index>(q)) = sys->rows()[e.indices[q]].a.transpose();
            }
            const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
            const Eigen::MatrixXd null = lu.kernel();
            if (null.cols() == 0 || null.isZero(0.0)) continue;
            for (std::size_t k = 0; k < spec.per_face; ++k) {
                vec d = null * random_unit_vector(null.cols(), norm_kind::euclidean, rng);
                if (d.norm() == 0) continue;
                d /= d.norm();
                for (double step = 1.0; step > 1e-6; step *= 0.5) {
                    const vec y = e.witness + step * d;
                    if (std::abs(f(y)) <= 1e-9) {
                        out.push_back(y);
                        break;
                    }
                }
            }
        }
        return out;
    }
    if (f.dim() == 1) {
        if (const auto s = scalar_level_set(f)) {
            for (double end : {s->lower, s->upper}) {
                if (std::isfinite(end) && std::abs(f(vec::Constant(1, end))) <= 1e-9) {
                    out.push_back(vec::Constant(1, end));
                }
            }
        }
        return out;
    }
    fail(errc::not_applicable, "no boundary sampler for '" + f.name() + "'");
}

// ---------------------------------------------------------------------------
// Global conditions

struct boundary_condition
{
    double tau = 0.0;     ///< inf over the boundary of |Phi|
    bool certified = false;
    bool exact = false;   ///< polyhedral: evaluated per realizable active set
    std::optional<vec> witness;
    double phi_at_witness = 0.0;
};

/**
 *  inf over the boundary of |Phi|. For max-affine f, Phi depends only on the
 *  active set, so the minimum over the realizable sets is exact.
 */
inline boundary_condition boundary_phi_condition(const convex_function& f, const sphere_min_options& sopt = {},
                                                 const boundary_sampler_spec& bspec = {})
{
    boundary_condition out;
    out.tau = HUGE_VAL;
    out.certified = true;
    auto consider = [&](const vec& x, const sphere_min_result& p) {
        if (!p.certified) out.certified = false;
        if (std::abs(p.value) < out.tau) {
            out.tau = std::abs(p.value);
            out.witness = x;
            out.phi_at_witness = p.value;
        }
    };
    if (const auto* sys = f.system()) {
        const auto cat = enumerate_active_sets(*sys, 0, {}, sopt);
        for (const auto& e : cat.sets) consider(e.witness, e.op);
        out.exact = true;
    } else {
        for (const auto& x : boundary_points(f, bspec)) consider(x, phi(f, x, sopt));
    }
    if (!out.witness) fail(errc::not_applicable, "boundary of S_f is empty");
    return out;
}

struct slope_tier
{
    double cap = 0.0;
    std::size_t pairs = 0;
    ext_real min_abs_phi = ext_real::infinity();
    std::optional<vec> z;   ///< interior point attaining the tier minimum
    std::optional<vec> x;   ///< its boundary partner
    double slope = 0.0;
    double phi = 0.0;
};

struct interior_spec
{
    std::vector<double> tiers{1e-1, 1e-2, 1e-3, 1e-4};
    int min_exponent = -20;   ///< interior points z = x + 2^k d
    int max_exponent = 40;
    std::size_t random_directions = 8;
    std::uint64_t seed = 1;
    boundary_sampler_spec boundary;
};

struct interior_condition
{
    bool holds = true;
    bool vacuous = false;      ///< no interior point found
    bool sampled = true;       ///< always a sampled check for non-polyhedral f
    double tau = 0.0;
    std::vector<slope_tier> tiers;
    std::optional<std::size_t> failing_tier;
};

namespace detail {

struct interior_pair
{
    vec z;
    vec x;
    double slope;
};

// Interior points reached from the boundary points along a fixed direction
// set at geometric distances; each is paired with the boundary point that
// makes the slope smallest.
inline std::vector<interior_pair> interior_pairs(const convex_function& f, const std::vector<vec>& boundary,
                                                 const interior_spec& spec)
{
    std::vector<vec> dirs;
    for (Eigen::Index i = 0; i < f.dim(); ++i) {
        for (double sg : {1.0, -1.0}) {
            vec e = vec::Zero(f.dim());
            e[i] = sg;
            dirs.push_back(e);
        }
    }
    if (f.dim() > 1) {
        std::mt19937_64 rng(spec.seed);
        for (std::size_t k = 0; k < spec.random_directions; ++k) {
            dirs.push_back(random_unit_vector(f.dim(), f.norm(), rng));
        }
    }
    std::vector<interior_pair> out;
    for (const auto& xb : boundary) {
        for (const auto& d : dirs) {
            for (int k = spec.min_exponent; k <= spec.max_exponent; ++k) {
                const vec z = xb + std::ldexp(1.0, k) * d;
                const double fz = f(z);
                if (!(fz < 0)) continue;
                interior_pair best{z, xb, HUGE_VAL};
                for (const auto& x : boundary) {
                    const double s = std::abs(fz - f(x)) / norm(vec(z - x), f.norm());
                    if (s < best.slope) {
                        best.slope = s;
                        best.x = x;
                    }
                }
                out.push_back(std::move(best));
            }
        }
    }
    return out;
}

} // namespace detail

/**
 *  Interior slope check: along interior/boundary pairs whose slope falls
 *  below each tier cap, |Phi(z)| must stay >= tau - 1e-6. A failure is a
 *  refutation with a witness; a pass is sampled support only.
 */
inline interior_condition interior_slope_condition(const convex_function& f, double tau,
                                                   const interior_spec& spec = {},
                                                   const sphere_min_options& sopt = {})
{
    interior_condition out;
    out.tau = tau;
    out.sampled = f.system() == nullptr;
    for (double cap : spec.tiers) {
        slope_tier t;
        t.cap = cap;
        out.tiers.push_back(std::move(t));
    }
    const auto boundary = boundary_points(f, spec.boundary);
    const auto pairs = detail::interior_pairs(f, boundary, spec);
    out.vacuous = pairs.empty();
    for (const auto& pr : pairs) {
        std::optional<sphere_min_result> p;
        for (auto& t : out.tiers) {
            if (pr.slope > t.cap) continue;
            if (!p) p = phi(f, pr.z, sopt);
            ++t.pairs;
            const ext_real v = std::abs(p->value);
            if (v < t.min_abs_phi) {
                t.min_abs_phi = v;
                t.z = pr.z;
                t.x = pr.x;
                t.slope = pr.slope;
                t.phi = p->value;
            }
        }
    }
    for (std::size_t i = 0; i < out.tiers.size(); ++i) {
        const auto& t = out.tiers[i];
        if (t.pairs > 0 && t.min_abs_phi.value() < tau - 1e-6) {
            out.holds = false;
            if (!out.failing_tier) out.failing_tier = i;
        }
    }
    return out;
}

struct global_stability_result
{
    stability_certificate certificate;
    boundary_condition boundary;
    interior_condition interior;
};

/**
 *  Global verdict. Polyhedral f: decided by tau alone. Otherwise stable
 *  needs tau > 0 and the interior check to pass (sampled, so uncertified);
 *  an interior failure is a refutation.
 */
inline global_stability_result global_stability(const convex_function& f, std::optional<double> tau_override = {},
                                                const interior_spec& ispec = {},
                                                const sphere_min_options& sopt = {})
{
    global_stability_result r;
    r.boundary = boundary_phi_condition(f, sopt, ispec.boundary);
    const double tau = tau_override.value_or(r.boundary.tau);
    r.interior = interior_slope_condition(f, tau, ispec, sopt);

    auto& c = r.certificate;
    c.scope = stability_scope::global;
    c.tau = r.boundary.tau;
    c.phi_value = r.boundary.phi_at_witness;
    const double band = phi_zero_tolerance(f);
    const bool polyhedral = f.system() != nullptr;

    if (r.boundary.tau <= band) {
        c.result = r.boundary.certified ? verdict::unstable : verdict::inconclusive;
        c.certified = r.boundary.certified;
        c.witnesses.push_back({*r.boundary.witness, r.boundary.phi_at_witness, std::nullopt, 0.0});
    } else if (polyhedral) {
        c.result = r.boundary.certified ? verdict::stable : verdict::inconclusive;
        c.certified = r.boundary.certified;
    } else if (!r.interior.holds) {
        c.result = verdict::unstable;
        const auto& t = r.interior.tiers[*r.interior.failing_tier];
        c.witnesses.push_back({*t.z, t.phi, std::nullopt, 0.0});
        c.notes.push_back("interior slope condition refuted");
    } else {
        c.result = verdict::stable;
        c.certified = false;
        c.notes.push_back("interior slope condition supported on samples only");
    }
    return r;
}

// ---------------------------------------------------------------------------
// Destabilizers

struct destabilizer
{
    convex_function g;
    vec witness;
    double phi_g = 0.0;        ///< Phi_g(witness); -phi_g bounds Er(g) from above
    double guarantee = 0.0;    ///< 5 eps (point) or 2 eps (sequence)
    vec anchor;
    vec functional;            ///< h*
    std::optional<double> sampled_ratio; ///< g(witness) / d(witness, S_g) when computable
};

namespace detail {

inline std::optional<double> ratio_at(const convex_function& g, const vec& z)
{
    try {
        const ext_real d = level_set_distance(g)(z);
        if (d.is_finite() && d.value() > 0) return g(z) / d.value();
    } catch (const error&) {
    }
    return std::nullopt;
}

} // namespace detail

/**
 *  Point case: from a flat direction h at xbar, tilt by eps <h*, . - xbar>
 *  and search z = xbar + s h (geometric growth, then bisection) for
 *  g(z) > 0 with -Phi_g(z) <= 5 eps + 1e-6.
 */
inline destabilizer destabilize_at(const convex_function& f, const vec& xbar, double eps,
                                   const sphere_min_options& sopt = {})
{
    ERRBOUND_REQUIRE(eps > 0 && std::isfinite(eps), "destabilizer: eps must be positive");
    ERRBOUND_REQUIRE(std::abs(f(xbar)) <= 1e-9, "destabilizer: f(xbar) is not 0");
    const auto p = phi(f, xbar, sopt);
    if (std::abs(p.value) > phi_zero_tolerance(f)) {
        fail(errc::not_applicable, "destabilizer: no flat direction at the anchor (Phi = " + format_real(p.value) + ")");
    }
    const vec h = p.argmin;
    const vec hstar = dual_norming_functional(h, f.norm());
    const auto g = tilt(f, {xbar, hstar, eps});
    const double bound = 5.0 * eps + 1e-6;

    auto accept = [&](double s) -> std::optional<destabilizer> {
        const vec z = xbar + s * h;
        if (!(g(z) > 0)) return std::nullopt;
        const auto pg = phi(g, z, sopt);
        if (-pg.value > bound) return std::nullopt;
        return destabilizer{g, z, pg.value, 5.0 * eps, xbar, hstar, detail::ratio_at(g, z)};
    };

    const double s0 = 1e-6 * (1.0 + xbar.norm());
    double lo = 0.0;
    for (int k = 0; k <= 60; ++k) {
        const double s = std::ldexp(s0, k);
        if (auto d = accept(s)) return *d;
        const vec z = xbar + s * h;
        if (g(z) > 0) {
            double a = lo, b = s;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (a + b);
                if (auto d = accept(mid)) return *d;
                (g(xbar + mid * h) > 0 ? b : a) = mid;
            }
        }
        lo = s;
    }
    fail(errc::inconclusive, "destabilizer: no witness with -Phi_g <= 5 eps along the flat direction");
}

/**
 *  Sequence case: for interior points z with |Phi(z)| small, paired with
 *  boundary points x, tilt by eps <h*, . - x> where h* norms z - x, and
 *  accept the first z with g(z) > 0 and -Phi_g(z) <= 2 eps + 1e-6.
 *  Candidates are tried from the steepest pair down, so the witness is the
 *  nearest one that works.
 */
inline destabilizer destabilize_along_sequence(const convex_function& f, double eps,
                                               const interior_spec& spec = {},
                                               const sphere_min_options& sopt = {})
{
    ERRBOUND_REQUIRE(eps > 0 && std::isfinite(eps), "destabilizer: eps must be positive");
    const auto boundary = boundary_points(f, spec.boundary);
    auto pairs = detail::interior_pairs(f, boundary, spec);
    struct scored { detail::interior_pair pr; double abs_phi; };
    std::vector<scored> cands;
    for (auto& pr : pairs) {
        const double v = std::abs(phi(f, pr.z, sopt).value);
        if (v < eps) cands.push_back({std::move(pr), v});
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const scored& a, const scored& b) { return a.pr.slope > b.pr.slope; });
    const double bound = 2.0 * eps + 1e-6;
    for (const auto& c : cands) {
        const vec diff = c.pr.z - c.pr.x;
        if (diff.isZero(0.0)) continue;
        const vec hstar = dual_norming_functional(diff, f.norm());
        const auto g = tilt(f, {c.pr.x, hstar, eps});
        if (!(g(c.pr.z) > 0)) continue;
        const auto pg = phi(g, c.pr.z, sopt);
        if (-pg.value > bound) continue;
        return destabilizer{g, c.pr.z, pg.value, 2.0 * eps, c.pr.x, hstar, detail::ratio_at(g, c.pr.z)};
    }
    fail(errc::inconclusive, "destabilizer: no interior point with g(z) > 0 and -Phi_g(z) <= 2 eps");
}

} // namespace errbound

#endif
