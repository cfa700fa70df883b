/**
 *  \file
 *  Geometric kernels: norms on R^n and their duals, norming functionals,
 *  the minimum-norm point of a convex hull, and Euclidean projection onto a
 *  polyhedron.
 */
#ifndef ERRBOUND_GEOMETRY_HPP
#define ERRBOUND_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "ext_real.hpp"
#include "lp.hpp"

namespace errbound {

using vec = Eigen::VectorXd;

inline void require_valid(const vec& v, std::string_view what)
{
    if (v.size() == 0) fail(errc::invalid_input, std::string(what) + ": dimension 0");
    if (!v.allFinite()) fail(errc::invalid_input, std::string(what) + ": non-finite coordinate");
}

inline void require_same_dim(const vec& a, const vec& b, std::string_view what)
{
    if (a.size() != b.size()) {
        fail(errc::invalid_input, std::string(what) + ": dimension mismatch (" +
                                      std::to_string(a.size()) + " vs " +
                                      std::to_string(b.size()) + ")");
    }
}

// ---------------------------------------------------------------------------
// Norms

enum class norm_kind { euclidean, sup, one };

inline std::string_view to_string(norm_kind k) noexcept
{
    switch (k) {
        case norm_kind::euclidean: return "euclidean";
        case norm_kind::sup: return "sup";
        case norm_kind::one: return "one";
    }
    return "?";
}

inline std::optional<norm_kind> parse_norm_kind(std::string_view s)
{
    if (s == "euclidean") return norm_kind::euclidean;
    if (s == "sup") return norm_kind::sup;
    if (s == "one") return norm_kind::one;
    return std::nullopt;
}

/// The norm on R^n identified with the dual of `k`.
constexpr norm_kind dual_of(norm_kind k) noexcept
{
    switch (k) {
        case norm_kind::euclidean: return norm_kind::euclidean;
        case norm_kind::sup: return norm_kind::one;
        case norm_kind::one: return norm_kind::sup;
    }
    return norm_kind::euclidean;
}

inline double norm(const vec& v, norm_kind k)
{
    require_valid(v, "norm");
    switch (k) {
        case norm_kind::euclidean: return v.norm();
        case norm_kind::sup: return v.lpNorm<Eigen::Infinity>();
        case norm_kind::one: return v.lpNorm<1>();
    }
    return 0.0;
}

inline double dual_norm(const vec& v, norm_kind k)
{
    return norm(v, dual_of(k));
}

/**
 *  Returns h* with dual-norm(h*) = 1 and <h*, h> = |h|.
 *
 *  For the sup norm the functional is a signed unit coordinate vector at the
 *  first coordinate of maximal magnitude; for the one norm it is the sign
 *  vector of h.
 */
inline vec dual_norming_functional(const vec& h, norm_kind k)
{
    require_valid(h, "dual_norming_functional");
    if (h.isZero(0.0)) fail(errc::invalid_input, "dual_norming_functional: h = 0");
    switch (k) {
        case norm_kind::euclidean: return h / h.norm();
        case norm_kind::sup: {
            Eigen::Index best = 0;
            for (Eigen::Index i = 1; i < h.size(); ++i) {
                if (std::abs(h[i]) > std::abs(h[best])) best = i;
            }
            vec out = vec::Zero(h.size());
            out[best] = h[best] > 0 ? 1.0 : -1.0;
            return out;
        }
        case norm_kind::one: {
            vec out(h.size());
            for (Eigen::Index i = 0; i < h.size(); ++i) {
                out[i] = h[i] > 0 ? 1.0 : (h[i] < 0 ? -1.0 : 0.0);
            }
            return out;
        }
    }
    return h;
}

/// Uniformly distributed direction (Euclidean), rescaled onto the unit sphere of `k`.
template <class Rng>
vec random_unit_vector(Eigen::Index dim, norm_kind k, Rng& rng)
{
    std::normal_distribution<double> gauss(0.0, 1.0);
    vec u(dim);
    do {
        for (Eigen::Index i = 0; i < dim; ++i) u[i] = gauss(rng);
    } while (u.norm() < 1e-12);
    return u / norm(u, k);
}

/// Uniform sample from the Euclidean ball of the given radius.
template <class Rng>
vec random_in_ball(const vec& center, double radius, Rng& rng)
{
    const auto dim = center.size();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const vec dir = random_unit_vector(dim, norm_kind::euclidean, rng);
    const double r = radius * std::pow(unif(rng), 1.0 / static_cast<double>(dim));
    return center + r * dir;
}

// ---------------------------------------------------------------------------
// Minimum-norm point in a convex hull (Wolfe's algorithm)

struct min_norm_result
{
    vec point;
    double distance = 0.0;
    std::vector<double> coefficients; ///< convex weights, one per input point
};

namespace detail {

// Minimizes |sum mu_i p_i| over the affine hull of the corral (sum mu = 1).
inline std::vector<double> affine_minimizer(const std::vector<const vec*>& corral)
{
    const std::size_t k = corral.size();
    if (k == 1) return {1.0};
    const vec& base = *corral[0];
    Eigen::MatrixXd d(base.size(), static_cast<Eigen::Index>(k - 1));
    for (std::size_t i = 1; i < k; ++i) d.col(static_cast<Eigen::Index>(i - 1)) = *corral[i] - base;
    const vec c = d.completeOrthogonalDecomposition().solve(-base);
    std::vector<double> mu(k);
    mu[0] = 1.0 - c.sum();
    for (std::size_t i = 1; i < k; ++i) mu[i] = c[static_cast<Eigen::Index>(i - 1)];
    return mu;
}

} // namespace detail

/**
 *  Closest point of conv(points) to the origin, in the Euclidean norm.
 *
 *  Wolfe's active-set method: a "corral" of affinely independent points is
 *  grown by the point most violating the optimality condition
 *  <x, p> >= |x|^2, and shrunk whenever the affine minimizer leaves the
 *  simplex. Finite for exact arithmetic; the tolerances below only guard
 *  against rounding.
 */
inline min_norm_result min_norm_point(std::span<const vec> points)
{
    ERRBOUND_REQUIRE(!points.empty(), "min_norm_point: empty point set");
    const auto dim = points[0].size();
    double scale = 0.0;
    for (const auto& p : points) {
        require_valid(p, "min_norm_point");
        require_same_dim(p, points[0], "min_norm_point");
        scale = std::max(scale, p.squaredNorm());
    }
    const std::size_t m = points.size();
    const double opt_tol = 1e-12 * std::max(scale, 1e-300);
    const double weight_tol = 1e-12;

    std::size_t start = 0;
    for (std::size_t i = 1; i < m; ++i) {
        if (points[i].squaredNorm() < points[start].squaredNorm()) start = i;
    }
    std::vector<std::size_t> corral{start};
    std::vector<double> lambda{1.0};
    vec x = points[start];

    auto recompute_x = [&] {
        x = vec::Zero(dim);
        for (std::size_t i = 0; i < corral.size(); ++i) x += lambda[i] * points[corral[i]];
    };

    const std::size_t max_major = 50 * m + 100;
    for (std::size_t major = 0; major < max_major; ++major) {
        if (x.squaredNorm() <= opt_tol * 1e-6) break;
        std::size_t j = 0;
        double best = points[0].dot(x);
        for (std::size_t i = 1; i < m; ++i) {
            const double v = points[i].dot(x);
            if (v < best) {
                best = v;
                j = i;
            }
        }
        if (best >= x.squaredNorm() - opt_tol) break;
        if (std::find(corral.begin(), corral.end(), j) != corral.end()) break;
        corral.push_back(j);
        lambda.push_back(0.0);

        for (std::size_t minor = 0; minor <= corral.size() + 1; ++minor) {
            std::vector<const vec*> pts;
            for (auto idx : corral) pts.push_back(&points[idx]);
            const auto mu = detail::affine_minimizer(pts);
            if (std::all_of(mu.begin(), mu.end(), [&](double v) { return v > weight_tol; })) {
                lambda = mu;
                break;
            }
            double theta = 1.0;
            for (std::size_t i = 0; i < mu.size(); ++i) {
                if (mu[i] <= weight_tol) {
                    const double denom = lambda[i] - mu[i];
                    const double t = denom > 0 ? lambda[i] / denom : 0.0;
                    theta = std::min(theta, t);
                }
            }
            for (std::size_t i = 0; i < mu.size(); ++i) {
                lambda[i] = (1.0 - theta) * lambda[i] + theta * mu[i];
            }
            std::vector<std::size_t> keep_idx;
            std::vector<double> keep_w;
            for (std::size_t i = 0; i < corral.size(); ++i) {
                if (lambda[i] > weight_tol) {
                    keep_idx.push_back(corral[i]);
                    keep_w.push_back(lambda[i]);
                }
            }
            if (keep_idx.empty()) {
                // Rounding collapsed every weight; restart from the new point.
                keep_idx = {j};
                keep_w = {1.0};
            }
            double total = 0.0;
            for (double w : keep_w) total += w;
            for (double& w : keep_w) w /= total;
            corral = std::move(keep_idx);
            lambda = std::move(keep_w);
        }
        recompute_x();
    }

    min_norm_result out;
    out.coefficients.assign(m, 0.0);
    for (std::size_t i = 0; i < corral.size(); ++i) out.coefficients[corral[i]] = lambda[i];
    out.point = x;
    out.distance = x.norm();
    return out;
}

inline min_norm_result min_norm_point(const std::vector<vec>& points)
{
    return min_norm_point(std::span<const vec>(points.data(), points.size()));
}

// ---------------------------------------------------------------------------
// Polyhedra

struct halfspace
{
    vec a;
    double b = 0.0;
};

/// { x : <a_i, x> <= b_i for every row }.
class polyhedron
{
public:
    explicit polyhedron(std::vector<halfspace> rows)
        : rows_(std::move(rows))
    {
        ERRBOUND_REQUIRE(!rows_.empty(), "polyhedron: no rows");
        for (const auto& r : rows_) {
            require_valid(r.a, "polyhedron row");
            require_same_dim(r.a, rows_[0].a, "polyhedron row");
            ERRBOUND_REQUIRE(std::isfinite(r.b), "polyhedron: non-finite b");
        }
    }

    const std::vector<halfspace>& rows() const noexcept { return rows_; }
    Eigen::Index dim() const noexcept { return rows_[0].a.size(); }

    double max_violation(const vec& x) const
    {
        double v = 0.0;
        for (const auto& r : rows_) v = std::max(v, r.a.dot(x) - r.b);
        return v;
    }

    bool contains(const vec& x, double tol = 0.0) const
    {
        for (const auto& r : rows_) {
            if (r.a.dot(x) - r.b > tol * (1.0 + std::abs(r.b))) return false;
        }
        return true;
    }

private:
    std::vector<halfspace> rows_;
};

/// A feasible point of `p`, or nothing when `p` is empty (decided by LP).
inline std::optional<vec> feasible_point(const polyhedron& p)
{
    lp::problem prob;
    prob.num_vars = static_cast<std::size_t>(p.dim());
    prob.objective.assign(prob.num_vars, 0.0);
    for (const auto& r : p.rows()) {
        lp::constraint c;
        c.coeffs.assign(r.a.data(), r.a.data() + r.a.size());
        c.rel = lp::relation::less_equal;
        c.rhs = r.b;
        prob.constraints.push_back(std::move(c));
    }
    const auto sol = lp::maximize(prob);
    if (sol.state != lp::status::optimal) return std::nullopt;
    return Eigen::Map<const vec>(sol.x.data(), static_cast<Eigen::Index>(sol.x.size()));
}

struct projection_options
{
    double tol = 1e-10;
    std::size_t max_iter = 100000;
    bool known_nonempty = false; ///< skip the emptiness LP (caller already checked)
};

struct projection_result
{
    bool empty = false;      ///< the polyhedron has no points; distance is +inf
    vec point;
    ext_real distance;
    std::size_t sweeps = 0;
    bool polished = false;   ///< finished by an exact active-set solve
};

namespace detail {

// Projection onto { <a_i, z> = b_i, i in active } and a KKT check against P.
inline std::optional<vec> polish_projection(const vec& x, const polyhedron& p,
                                            const std::vector<std::size_t>& active, double tol)
{
    if (active.empty()) return std::nullopt;
    const auto& rows = p.rows();
    const auto k = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd a(k, x.size());
    vec r(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        a.row(i) = rows[active[static_cast<std::size_t>(i)]].a.transpose();
        r[i] = a.row(i).dot(x) - rows[active[static_cast<std::size_t>(i)]].b;
    }
    const Eigen::MatrixXd gram = a * a.transpose();
    const vec mu = gram.completeOrthogonalDecomposition().solve(r);
    const double mu_scale = 1.0 + mu.cwiseAbs().maxCoeff();
    if ((mu.array() < -1e-12 * mu_scale).any()) return std::nullopt;
    const vec z = x - a.transpose() * mu;
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto& row = rows[active[static_cast<std::size_t>(i)]];
        if (std::abs(row.a.dot(z) - row.b) > tol * (1.0 + std::abs(row.b))) return std::nullopt;
    }
    if (!p.contains(z, tol)) return std::nullopt;
    return z;
}

// Tries the exact projection for every subset (up to dim rows) of the rows
// that carry a Dykstra increment or are nearly active at z. By Caratheodory
// the normal-cone multiplier needs at most dim independent rows, so the true
// projection is found once z is close enough to identify its active rows.
inline std::optional<vec> polish_from_iterate(const vec& x, const vec& z, const polyhedron& p,
                                              const std::vector<vec>& incr, double tol)
{
    const auto& rows = p.rows();
    std::vector<std::size_t> cand;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double slack = rows[i].a.dot(z) - rows[i].b;
        const double scale = 1.0 + std::abs(rows[i].b) + rows[i].a.norm() * z.norm();
        if (incr[i].squaredNorm() > 0.0 || slack >= -1e-6 * scale) cand.push_back(i);
    }
    if (cand.empty() || cand.size() > 16) return std::nullopt;
    const auto k_max = std::min<std::size_t>(cand.size(), static_cast<std::size_t>(x.size()));
    std::vector<std::size_t> pick;
    for (std::size_t k = 1; k <= k_max; ++k) {
        pick.resize(k);
        std::vector<std::size_t> idx(k);
        for (std::size_t i = 0; i < k; ++i) idx[i] = i;
        while (true) {
            for (std::size_t i = 0; i < k; ++i) pick[i] = cand[idx[i]];
            if (auto zz = polish_projection(x, p, pick, tol)) return zz;
            std::size_t pos = k;
            while (pos > 0 && idx[pos - 1] == cand.size() - k + pos - 1) --pos;
            if (pos == 0) break;
            ++idx[pos - 1];
            for (std::size_t j = pos; j < k; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    return std::nullopt;
}

inline bool complementary(const vec& z, const polyhedron& p, const std::vector<vec>& incr, double tol)
{
    const auto& rows = p.rows();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (incr[i].squaredNorm() == 0.0) continue;
        if (rows[i].a.dot(z) - rows[i].b < -tol * (1.0 + std::abs(rows[i].b))) return false;
    }
    return true;
}

} // namespace detail

/**
 *  Euclidean projection of `x` onto `p` by Dykstra's cyclic halfspace
 *  projections.
 *
 *  Emptiness is decided up front by a phase-I LP; an empty polyhedron is
 *  reported with distance +inf rather than as an error. While iterating, the
 *  rows carrying a nonzero Dykstra increment or nearly active at the iterate
 *  are candidates for the active set, and the exact projection onto each
 *  small subset of them is tried; one is accepted only if it satisfies the
 *  KKT conditions for `p`.
 */
inline projection_result project_polyhedron(const vec& x, const polyhedron& p,
                                            const projection_options& opt = {})
{
    require_valid(x, "project_polyhedron");
    ERRBOUND_REQUIRE(x.size() == p.dim(), "project_polyhedron: dimension mismatch");
    projection_result res;
    if (!opt.known_nonempty && !feasible_point(p)) {
        res.empty = true;
        res.point = x;
        res.distance = ext_real::infinity();
        return res;
    }
    if (p.contains(x)) {
        res.point = x;
        res.distance = 0.0;
        return res;
    }

    const auto& rows = p.rows();
    const std::size_t m = rows.size();
    std::vector<vec> incr(m, vec::Zero(x.size()));
    vec z = x;
    for (std::size_t sweep = 1; sweep <= opt.max_iter; ++sweep) {
        const vec before = z;
        for (std::size_t i = 0; i < m; ++i) {
            const vec y = z + incr[i];
            const double viol = rows[i].a.dot(y) - rows[i].b;
            if (viol > 0) {
                z = y - (viol / rows[i].a.squaredNorm()) * rows[i].a;
            } else {
                z = y;
            }
            incr[i] = y - z;
        }
        res.sweeps = sweep;

        const bool stalled = (z - before).norm() <= opt.tol && p.max_violation(z) <= opt.tol;
        if (stalled || sweep <= 8 || sweep % 16 == 0) {
            if (auto exact = detail::polish_from_iterate(x, z, p, incr, opt.tol)) {
                res.point = *exact;
                res.distance = (x - *exact).norm();
                res.polished = true;
                return res;
            }
        }
        // A stalled iterate is accepted only if every row carrying an
        // increment is active there; otherwise the sweep has merely slowed.
        if (stalled && detail::complementary(z, p, incr, 1e3 * opt.tol)) {
            res.point = z;
            res.distance = (x - z).norm();
            return res;
        }
    }
    fail(errc::numeric_failure, "project_polyhedron: no convergence after " +
                                    std::to_string(opt.max_iter) + " sweeps, residual " +
                                    format_real(p.max_violation(z)));
}

} // namespace errbound

#endif
