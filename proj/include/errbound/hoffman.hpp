/**
 *  \file
 *  Hoffman constants of finite linear inequality systems.
 *
 *  For S = { x : <a_t, x> <= b_t, t in T } the constant sigma is the error
 *  bound modulus of f = max_t (<a_t, .> - b_t). It is bounded below by
 *
 *      inf over realizable J of | min_{|h| = 1} max_{t in J} <a_t, h> |
 *
 *  where J ranges over the active sets J(x) of boundary points x.
 */
#ifndef ERRBOUND_HOFFMAN_HPP
#define ERRBOUND_HOFFMAN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "convex_model.hpp"
#include "errors.hpp"
#include "ext_real.hpp"
#include "geometry.hpp"
#include "lp.hpp"
#include "moduli.hpp"
#include "sphere_min.hpp"

namespace errbound {

struct active_set_options
{
    double box = 1e6;           ///< componentwise bound M on x in the margin LP
    double margin_tol = 1e-9;   ///< J is realizable iff the optimal margin exceeds this
    std::size_t row_cap = 20;   ///< beyond this many rows only small subsets are searched
};

struct active_set_entry
{
    std::vector<std::size_t> indices;
    std::vector<std::string> labels;
    vec witness;
    double margin = 0.0;
    bool box_active = false;
    sphere_min_result op;
};

struct active_set_catalog
{
    std::vector<active_set_entry> sets;
    std::size_t max_size_searched = 0;
    std::vector<std::string> warnings;
};

namespace detail {

struct margin_result
{
    bool realizable = false;
    bool equalities_infeasible = false;
    double margin = 0.0;
    vec witness;
};

// maximize s  s.t.  <a_t, x> = b_t (t in J),  <a_t, x> + s <= b_t (t not in J),
// |x_i| <= M,  -1 <= s <= 1.  A second LP then picks the witness of least
// 1-norm among points with at least half that margin, so witnesses stay
// near the data instead of on the box.
inline margin_result margin_lp(const max_affine_system& sys, std::uint64_t mask, const active_set_options& opt)
{
    const auto n = static_cast<std::size_t>(sys.dim());
    const auto& rows = sys.rows();

    auto base_constraints = [&](std::size_t nv, std::size_t s_col, double s_floor) {
        std::vector<lp::constraint> cs;
        for (std::size_t t = 0; t < rows.size(); ++t) {
            lp::constraint c;
            c.coeffs.assign(nv, 0.0);
            for (std::size_t i = 0; i < n; ++i) c.coeffs[i] = rows[t].a[static_cast<Eigen::Index>(i)];
            c.rhs = rows[t].b;
            if (mask >> t & 1U) {
                c.rel = lp::relation::equal;
            } else {
                c.coeffs[s_col] = 1.0;
                c.rel = lp::relation::less_equal;
            }
            cs.push_back(std::move(c));
        }
        for (std::size_t i = 0; i < n; ++i) {
            lp::constraint up, down;
            up.coeffs.assign(nv, 0.0);
            down.coeffs.assign(nv, 0.0);
            up.coeffs[i] = 1.0;
            down.coeffs[i] = -1.0;
            up.rhs = down.rhs = opt.box;
            cs.push_back(std::move(up));
            cs.push_back(std::move(down));
        }
        lp::constraint s_up, s_low;
        s_up.coeffs.assign(nv, 0.0);
        s_low.coeffs.assign(nv, 0.0);
        s_up.coeffs[s_col] = 1.0;
        s_up.rhs = 1.0;
        s_low.coeffs[s_col] = 1.0;
        s_low.rel = lp::relation::greater_equal;
        s_low.rhs = s_floor;
        cs.push_back(std::move(s_up));
        cs.push_back(std::move(s_low));
        return cs;
    };

    margin_result out;
    lp::problem p;
    p.num_vars = n + 1;
    p.objective.assign(n + 1, 0.0);
    p.objective[n] = 1.0;
    p.constraints = base_constraints(n + 1, n, -1.0);
    const auto sol = lp::maximize(p);
    if (sol.state == lp::status::infeasible) {
        out.equalities_infeasible = true;
        return out;
    }
    if (sol.state != lp::status::optimal) fail(errc::numeric_failure, "margin LP did not reach an optimum");
    out.margin = sol.objective;
    if (!(out.margin > opt.margin_tol)) return out;
    out.realizable = true;

    // Variables: x (n), s, w (n) with w_i >= |x_i|; minimize sum w.
    lp::problem q;
    q.num_vars = 2 * n + 1;
    q.objective.assign(q.num_vars, 0.0);
    for (std::size_t i = 0; i < n; ++i) q.objective[n + 1 + i] = -1.0;
    q.constraints = base_constraints(q.num_vars, n, 0.5 * out.margin);
    for (std::size_t i = 0; i < n; ++i) {
        for (double sg : {1.0, -1.0}) {
            lp::constraint c;
            c.coeffs.assign(q.num_vars, 0.0);
            c.coeffs[n + 1 + i] = 1.0;
            c.coeffs[i] = -sg;
            c.rel = lp::relation::greater_equal;
            c.rhs = 0.0;
            q.constraints.push_back(std::move(c));
        }
    }
    const auto sol2 = lp::maximize(q);
    const auto& xs = (sol2.state == lp::status::optimal) ? sol2.x : sol.x;
    out.witness = vec(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) out.witness[static_cast<Eigen::Index>(i)] = xs[i];
    return out;
}

} // namespace detail

/**
 *  All realizable active sets J with |J| <= max_size (0 means |T|), in
 *  order of size and then lexicographic row index.
 *
 *  Supersets of a set whose equality system is infeasible are skipped.
 */
inline active_set_catalog enumerate_active_sets(const max_affine_system& sys, std::size_t max_size = 0,
                                                const active_set_options& opt = {},
                                                const sphere_min_options& sopt = {})
{
    const std::size_t m = sys.size();
    ERRBOUND_REQUIRE(m <= 63, "enumerate_active_sets: more than 63 rows");
    ERRBOUND_REQUIRE(max_size <= m, "enumerate_active_sets: max_size exceeds the number of rows");
    active_set_catalog cat;
    std::size_t k_max = max_size == 0 ? m : max_size;
    if (m > opt.row_cap) {
        const auto capped = std::min<std::size_t>(k_max, static_cast<std::size_t>(sys.dim()) + 1);
        if (capped < k_max) {
            cat.warnings.push_back("system has " + std::to_string(m) + " rows; subsets capped at size " +
                                   std::to_string(capped));
            k_max = capped;
        }
    }
    cat.max_size_searched = k_max;

    std::unordered_set<std::uint64_t> dead;
    std::vector<std::size_t> idx;
    auto visit = [&](std::uint64_t mask) {
        for (auto i : idx) {
            if (dead.count(mask & ~(std::uint64_t{1} << i))) {
                dead.insert(mask);
                return;
            }
        }
        const auto r = detail::margin_lp(sys, mask, opt);
        if (r.equalities_infeasible) {
            dead.insert(mask);
            return;
        }
        if (!r.realizable) return;
        active_set_entry e;
        e.indices = idx;
        std::vector<vec> grads;
        for (auto i : idx) {
            e.labels.push_back(sys.rows()[i].label);
            grads.push_back(sys.rows()[i].a);
        }
        e.witness = r.witness;
        e.margin = r.margin;
        for (Eigen::Index i = 0; i < r.witness.size(); ++i) {
            if (std::abs(r.witness[i]) >= opt.box * (1.0 - 1e-9)) e.box_active = true;
        }
        if (e.box_active) cat.warnings.push_back("witness on the box bound; consider a larger box");
        e.op = sphere_min_over_set(grads, sys.norm(), sopt);
        cat.sets.push_back(std::move(e));
    };

    // Subsets of each size in lexicographic order.
    for (std::size_t k = 1; k <= k_max; ++k) {
        idx.resize(k);
        for (std::size_t i = 0; i < k; ++i) idx[i] = i;
        while (true) {
            std::uint64_t mask = 0;
            for (auto i : idx) mask |= std::uint64_t{1} << i;
            visit(mask);
            std::size_t pos = k;
            while (pos > 0 && idx[pos - 1] == m - k + pos - 1) --pos;
            if (pos == 0) break;
            ++idx[pos - 1];
            for (std::size_t j = pos; j < k; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    return cat;
}

/// OP(J): sphere minimum over the gradients of the rows labeled in J.
inline sphere_min_result op_J(const max_affine_system& sys, const std::vector<std::string>& labels,
                              const sphere_min_options& sopt = {})
{
    ERRBOUND_REQUIRE(!labels.empty(), "op_J: empty label set");
    std::vector<vec> grads;
    for (const auto& l : labels) grads.push_back(sys.rows()[sys.index_of(l)].a);
    return sphere_min_over_set(grads, sys.norm(), sopt);
}

struct hoffman_bound
{
    ext_real value = ext_real::infinity(); ///< +inf when the boundary is empty
    bool certified = true;
    std::optional<std::size_t> attained_at; ///< index into catalog.sets
};

inline hoffman_bound hoffman_lower_bound(const active_set_catalog& cat)
{
    hoffman_bound out;
    for (std::size_t i = 0; i < cat.sets.size(); ++i) {
        const auto& e = cat.sets[i];
        if (!e.op.certified) out.certified = false;
        const ext_real v = std::abs(e.op.value);
        if (v < out.value) {
            out.value = v;
            out.attained_at = i;
        }
    }
    return out;
}

inline hoffman_bound hoffman_lower_bound(const max_affine_system& sys, std::size_t max_size = 0)
{
    if (!feasible_point(sys.level_set())) fail(errc::not_applicable, "hoffman_lower_bound: S is empty");
    return hoffman_lower_bound(enumerate_active_sets(sys, max_size));
}

/// Upper estimate of sigma from the sampled ratio f(x) / d(x, S).
inline modulus_estimate hoffman_sampled(const max_affine_system& sys, const sampler_spec& spec)
{
    const auto f = convex_function::from_system(sys);
    if (!feasible_point(sys.level_set())) fail(errc::not_applicable, "hoffman_sampled: S is empty");
    auto est = global_modulus_direct(f, spec);
    if (est.sample_count == 0) est.notes.push_back("every sample is feasible; sigma reported as +inf");
    return est;
}

/// Rows (a_t + eps u, b_t + eps <u, anchor>); the result still vanishes at the anchor.
inline max_affine_system perturb_system(const max_affine_system& sys, const vec& anchor, const vec& direction,
                                        double eps)
{
    require_valid(anchor, "perturb_system");
    require_valid(direction, "perturb_system");
    ERRBOUND_REQUIRE(anchor.size() == sys.dim() && direction.size() == sys.dim(),
                     "perturb_system: dimension mismatch");
    ERRBOUND_REQUIRE(std::abs(evaluate(sys, anchor)) <= 1e-9, "perturb_system: anchor is not on the boundary");
    ERRBOUND_REQUIRE(dual_norm(direction, sys.norm()) <= 1.0 + 1e-12, "perturb_system: dual norm of u exceeds 1");
    ERRBOUND_REQUIRE(eps >= 0 && std::isfinite(eps), "perturb_system: eps must be finite and >= 0");
    return tilt_system(sys, anchor, direction, eps);
}

// ---------------------------------------------------------------------------
// Perturbation sweeps

struct sweep_spec
{
    std::vector<double> eps{0.01, 0.05, 0.1};
    std::vector<vec> anchors;        ///< empty: one witness per catalog entry
    std::vector<vec> directions;     ///< empty: +-e_i and seeded random unit dual vectors
    std::size_t random_directions = 2;
    std::uint64_t seed = 1;
    std::size_t max_size = 0;
    sampler_spec sampler;
};

struct sweep_cell
{
    double eps = 0.0;
    std::size_t anchor_id = 0;
    std::size_t direction_id = 0;
    ext_real lower_bound = ext_real::infinity();
    bool certified = false;
    ext_real sigma_sampled = ext_real::infinity();
    std::optional<std::string> error;
};

struct sweep_summary
{
    double eps = 0.0;
    ext_real min_lower_bound = ext_real::infinity();
    ext_real min_sigma_sampled = ext_real::infinity();
    std::size_t failed_cells = 0;
};

struct sweep_result
{
    std::vector<vec> anchors;
    std::vector<vec> directions;
    std::vector<sweep_cell> cells;
    std::vector<sweep_summary> summary;
};

inline std::vector<vec> default_sweep_directions(const max_affine_system& sys, std::size_t random_count,
                                                 std::uint64_t seed)
{
    std::vector<vec> dirs;
    for (Eigen::Index i = 0; i < sys.dim(); ++i) {
        for (double sg : {1.0, -1.0}) {
            vec e = vec::Zero(sys.dim());
            e[i] = sg;
            dirs.push_back(e);
        }
    }
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < random_count; ++k) dirs.push_back(random_unit_vector(sys.dim(), dual_of(sys.norm()), rng));
    return dirs;
}

inline sweep_result perturbation_sweep(const max_affine_system& sys, const sweep_spec& spec)
{
    sweep_result out;
    out.anchors = spec.anchors;
    if (out.anchors.empty()) {
        for (const auto& e : enumerate_active_sets(sys, spec.max_size).sets) out.anchors.push_back(e.witness);
    }
    out.directions = spec.directions.empty() ? default_sweep_directions(sys, spec.random_directions, spec.seed)
                                             : spec.directions;
    std::vector<double> eps = spec.eps;
    std::sort(eps.begin(), eps.end());

    for (double e : eps) {
        sweep_summary sum;
        sum.eps = e;
        for (std::size_t ai = 0; ai < out.anchors.size(); ++ai) {
            for (std::size_t di = 0; di < out.directions.size(); ++di) {
                sweep_cell cell;
                cell.eps = e;
                cell.anchor_id = ai;
                cell.direction_id = di;
                try {
                    const auto g = perturb_system(sys, out.anchors[ai], out.directions[di], e);
                    const auto lb = hoffman_lower_bound(enumerate_active_sets(g, spec.max_size));
                    cell.lower_bound = lb.value;
                    cell.certified = lb.certified;
                    cell.sigma_sampled = hoffman_sampled(g, spec.sampler).value;
                } catch (const error& ex) {
                    cell.error = ex.what();
                    ++sum.failed_cells;
                }
                if (!cell.error) {
                    sum.min_lower_bound = min(sum.min_lower_bound, cell.lower_bound);
                    sum.min_sigma_sampled = min(sum.min_sigma_sampled, cell.sigma_sampled);
                }
                out.cells.push_back(std::move(cell));
            }
        }
        out.summary.push_back(sum);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Full report

enum class verdict { stable, unstable, inconclusive };

inline std::string_view to_string(verdict v) noexcept
{
    switch (v) {
        case verdict::stable: return "stable";
        case verdict::unstable: return "unstable";
        case verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

struct hoffman_report
{
    active_set_catalog catalog;
    hoffman_bound lower_bound;
    modulus_estimate sigma_sampled;
    verdict stability = verdict::inconclusive;
    std::optional<sweep_result> sweep;
};

/**
 *  Catalog, lower bound, sampled sigma and the stability verdict: a positive
 *  bound makes sigma uniformly bounded under small data perturbations; a
 *  certified zero bound means it is not.
 */
inline hoffman_report hoffman_analyze(const max_affine_system& sys, std::size_t max_size,
                                      const sampler_spec& sampler, const std::optional<sweep_spec>& sweep = {})
{
    if (!feasible_point(sys.level_set())) fail(errc::not_applicable, "hoffman: S is empty");
    hoffman_report r;
    r.catalog = enumerate_active_sets(sys, max_size);
    r.lower_bound = hoffman_lower_bound(r.catalog);
    r.sigma_sampled = hoffman_sampled(sys, sampler);
    const double tol = phi_zero_tolerance(convex_function::from_system(sys));
    if (r.lower_bound.value.is_infinite() || r.lower_bound.value.value() > tol) {
        r.stability = verdict::stable;
    } else {
        r.stability = r.lower_bound.certified ? verdict::unstable : verdict::inconclusive;
    }
    if (sweep) {
        auto s = *sweep;
        s.max_size = max_size;
        if (s.anchors.empty()) {
            for (const auto& e : r.catalog.sets) s.anchors.push_back(e.witness);
        }
        r.sweep = perturbation_sweep(sys, s);
    }
    return r;
}

} // namespace errbound

#endif
