/**
 *  \file
 *  Convex functions: finite max-affine systems, named scalar functions,
 *  linear tilts of either, and user-supplied evaluators. Provides exact
 *  (Danskin) and numeric (monotone difference quotient) directional
 *  derivatives.
 */
#ifndef ERRBOUND_CONVEX_MODEL_HPP
#define ERRBOUND_CONVEX_MODEL_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "ext_real.hpp"
#include "geometry.hpp"

namespace errbound {

// ---------------------------------------------------------------------------
// Max-affine systems

struct affine_row
{
    std::string label;
    vec a;
    double b = 0.0;
};

/// f(x) = max_t (<a_t, x> - b_t) over a finite labelled family of rows.
class max_affine_system
{
public:
    explicit max_affine_system(std::vector<affine_row> rows, norm_kind norm = norm_kind::euclidean)
        : rows_(std::move(rows)), norm_(norm)
    {
        ERRBOUND_REQUIRE(!rows_.empty(), "max_affine_system: no rows");
        std::set<std::string> seen;
        for (const auto& r : rows_) {
            require_valid(r.a, "max_affine_system row '" + r.label + "'");
            require_same_dim(r.a, rows_[0].a, "max_affine_system row '" + r.label + "'");
            ERRBOUND_REQUIRE(std::isfinite(r.b), "max_affine_system: non-finite b in row '" + r.label + "'");
            ERRBOUND_REQUIRE(seen.insert(r.label).second, "max_affine_system: duplicate label '" + r.label + "'");
        }
    }

    const std::vector<affine_row>& rows() const noexcept { return rows_; }
    std::size_t size() const noexcept { return rows_.size(); }
    Eigen::Index dim() const noexcept { return rows_[0].a.size(); }
    norm_kind norm() const noexcept { return norm_; }

    std::size_t index_of(const std::string& label) const
    {
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            if (rows_[i].label == label) return i;
        }
        fail(errc::invalid_input, "unknown row label '" + label + "'");
    }

    double row_value(std::size_t i, const vec& x) const { return rows_[i].a.dot(x) - rows_[i].b; }

    /// The solution set { x : <a_t, x> <= b_t for all t }.
    polyhedron level_set() const
    {
        std::vector<halfspace> hs;
        hs.reserve(rows_.size());
        for (const auto& r : rows_) hs.push_back({r.a, r.b});
        return polyhedron(std::move(hs));
    }

    /// Largest Euclidean row norm; the natural scale for tolerances.
    double max_gradient_norm() const
    {
        double m = 0.0;
        for (const auto& r : rows_) m = std::max(m, r.a.norm());
        return m;
    }

private:
    std::vector<affine_row> rows_;
    norm_kind norm_;
};

inline double evaluate(const max_affine_system& sys, const vec& x)
{
    require_valid(x, "evaluate");
    ERRBOUND_REQUIRE(x.size() == sys.dim(), "evaluate: dimension mismatch");
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sys.size(); ++i) best = std::max(best, sys.row_value(i, x));
    return best;
}

/// Default slack for active-set identification, relative to 1 + |f(x)|.
inline constexpr double default_active_rel_tol = 1e-9;

/// Indices t with <a_t,x> - b_t >= f(x) - rel_tol * (1 + |f(x)|).
inline std::vector<std::size_t> active_indices(const max_affine_system& sys, const vec& x,
                                               double rel_tol = default_active_rel_tol)
{
    const double f = evaluate(sys, x);
    const double threshold = f - rel_tol * (1.0 + std::abs(f));
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < sys.size(); ++i) {
        if (sys.row_value(i, x) >= threshold) out.push_back(i);
    }
    return out;
}

inline std::vector<std::string> active_set(const max_affine_system& sys, const vec& x,
                                           double rel_tol = default_active_rel_tol)
{
    std::vector<std::string> out;
    for (auto i : active_indices(sys, x, rel_tol)) out.push_back(sys.rows()[i].label);
    return out;
}

/// Danskin: d+f(x, h) = max over active rows of <a_t, h>.
inline double dirderiv_exact(const max_affine_system& sys, const vec& x, const vec& h)
{
    require_valid(h, "dirderiv_exact");
    ERRBOUND_REQUIRE(h.size() == sys.dim(), "dirderiv_exact: dimension mismatch");
    double best = -std::numeric_limits<double>::infinity();
    for (auto i : active_indices(sys, x)) best = std::max(best, sys.rows()[i].a.dot(h));
    return best;
}

/// Rows (a_t + eps u, b_t + eps <u, anchor>): f + eps <u, . - anchor> as a system.
inline max_affine_system tilt_system(const max_affine_system& sys, const vec& anchor,
                                     const vec& direction, double eps)
{
    require_same_dim(anchor, sys.rows()[0].a, "tilt_system anchor");
    require_same_dim(direction, sys.rows()[0].a, "tilt_system direction");
    const double shift = eps * direction.dot(anchor);
    std::vector<affine_row> rows;
    rows.reserve(sys.size());
    for (const auto& r : sys.rows()) rows.push_back({r.label, r.a + eps * direction, r.b + shift});
    return max_affine_system(std::move(rows), sys.norm());
}

// ---------------------------------------------------------------------------
// Named scalar functions

enum class named_scalar { exp_minus_one, zero, abs };

inline std::string_view to_string(named_scalar n) noexcept
{
    switch (n) {
        case named_scalar::exp_minus_one: return "exp_minus_one";
        case named_scalar::zero: return "zero";
        case named_scalar::abs: return "abs";
    }
    return "?";
}

inline std::optional<named_scalar> parse_named_scalar(std::string_view s)
{
    if (s == "exp_minus_one") return named_scalar::exp_minus_one;
    if (s == "zero") return named_scalar::zero;
    if (s == "abs") return named_scalar::abs;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Generic convex functions

enum class provenance { max_affine, tilt, named_1d, user };

/// Closed interval [lower, upper] with possibly infinite ends.
struct interval_1d
{
    double lower = -HUGE_VAL;
    double upper = HUGE_VAL;
};

struct tilt_record
{
    vec anchor;
    vec direction;
    double magnitude = 0.0;
    double lip_bound = 0.0;   ///< magnitude * dual-norm(direction) = Lip(g - f)
    std::uint64_t base_id = 0;
};

/**
 *  A proper convex function on R^n with an optional exact directional
 *  derivative rule.
 *
 *  Max-affine functions (and tilts of them) keep their row data so the exact
 *  Danskin route stays available downstream. Instances are immutable and
 *  cheap to copy.
 */
class convex_function
{
public:
    using value_fn = std::function<double(const vec&)>;
    using dirderiv_fn = std::function<double(const vec& x, const vec& h)>;

    static convex_function from_system(max_affine_system sys, std::string name = "max_affine")
    {
        auto s = std::make_shared<const max_affine_system>(std::move(sys));
        convex_function f;
        f.name_ = std::move(name);
        f.dim_ = s->dim();
        f.norm_ = s->norm();
        f.origin_ = provenance::max_affine;
        f.value_ = [s](const vec& x) { return evaluate(*s, x); };
        f.dirderiv_ = [s](const vec& x, const vec& h) { return dirderiv_exact(*s, x, h); };
        f.system_ = std::move(s);
        return f;
    }

    static convex_function named(named_scalar which)
    {
        convex_function f;
        f.name_ = std::string(to_string(which));
        f.dim_ = 1;
        f.origin_ = provenance::named_1d;
        switch (which) {
            case named_scalar::exp_minus_one:
                f.value_ = [](const vec& x) { return std::expm1(x[0]); };
                f.dirderiv_ = [](const vec& x, const vec& h) { return std::exp(x[0]) * h[0]; };
                f.level_set_ = interval_1d{-HUGE_VAL, 0.0};
                break;
            case named_scalar::zero:
                f.value_ = [](const vec&) { return 0.0; };
                f.dirderiv_ = [](const vec&, const vec&) { return 0.0; };
                f.level_set_ = interval_1d{-HUGE_VAL, HUGE_VAL};
                break;
            case named_scalar::abs:
                f.value_ = [](const vec& x) { return std::abs(x[0]); };
                f.dirderiv_ = [](const vec& x, const vec& h) {
                    if (x[0] > 0) return h[0];
                    if (x[0] < 0) return -h[0];
                    return std::abs(h[0]);
                };
                f.level_set_ = interval_1d{0.0, 0.0};
                break;
        }
        return f;
    }

    /// Wraps an arbitrary evaluator; rejected if a midpoint-convexity probe fails.
    static convex_function user(std::string name, Eigen::Index dim, value_fn value,
                                std::optional<dirderiv_fn> dirderiv = std::nullopt,
                                norm_kind norm = norm_kind::euclidean);

    double operator()(const vec& x) const
    {
        ERRBOUND_REQUIRE(x.size() == dim_, "convex_function '" + name_ + "': dimension mismatch");
        return value_(x);
    }

    bool has_exact_dirderiv() const noexcept { return static_cast<bool>(dirderiv_); }

    std::optional<double> exact_dirderiv(const vec& x, const vec& h) const
    {
        if (!dirderiv_) return std::nullopt;
        ERRBOUND_REQUIRE(x.size() == dim_ && h.size() == dim_,
                         "convex_function '" + name_ + "': dimension mismatch");
        return dirderiv_(x, h);
    }

    /// Row data when the function is max-affine (including tilts of systems).
    const max_affine_system* system() const noexcept { return system_.get(); }

    /// Analytic lower level set for scalar functions, when known.
    const std::optional<interval_1d>& known_level_set() const noexcept { return level_set_; }

    const std::optional<tilt_record>& tilt() const noexcept { return tilt_; }

    Eigen::Index dim() const noexcept { return dim_; }
    norm_kind norm() const noexcept { return norm_; }
    provenance origin() const noexcept { return origin_; }
    const std::string& name() const noexcept { return name_; }
    std::uint64_t id() const noexcept { return id_; }

    /// g = f + eps <u, . - anchor>; max-affine inputs stay max-affine.
    convex_function tilted(const vec& anchor, const vec& direction, double eps) const
    {
        require_valid(anchor, "tilt anchor");
        require_valid(direction, "tilt direction");
        ERRBOUND_REQUIRE(anchor.size() == dim_ && direction.size() == dim_, "tilt: dimension mismatch");
        ERRBOUND_REQUIRE(eps >= 0 && std::isfinite(eps), "tilt: magnitude must be finite and >= 0");

        convex_function g;
        if (system_) {
            g = from_system(tilt_system(*system_, anchor, direction, eps), name_ + "+tilt");
        } else {
            g.name_ = name_ + "+tilt";
            g.dim_ = dim_;
            g.norm_ = norm_;
            auto base = value_;
            g.value_ = [base, anchor, direction, eps](const vec& x) {
                return base(x) + eps * direction.dot(x - anchor);
            };
            if (dirderiv_) {
                auto base_d = dirderiv_;
                g.dirderiv_ = [base_d, direction, eps](const vec& x, const vec& h) {
                    return base_d(x, h) + eps * direction.dot(h);
                };
            }
        }
        g.origin_ = provenance::tilt;
        g.tilt_ = tilt_record{anchor, direction, eps, eps * dual_norm(direction, norm_), id_};
        return g;
    }

private:
    convex_function() : id_(next_id()) {}

    static std::uint64_t next_id()
    {
        static std::atomic<std::uint64_t> counter{1};
        return counter.fetch_add(1);
    }

    std::string name_;
    Eigen::Index dim_ = 0;
    norm_kind norm_ = norm_kind::euclidean;
    provenance origin_ = provenance::user;
    value_fn value_;
    dirderiv_fn dirderiv_;
    std::shared_ptr<const max_affine_system> system_;
    std::optional<interval_1d> level_set_;
    std::optional<tilt_record> tilt_;
    std::uint64_t id_;
};

// ---------------------------------------------------------------------------
// Convexity guard

struct convexity_violation
{
    vec x, y;
    double f_mid = 0.0;
    double f_avg = 0.0;
};

/// Samples pairs in a ball and checks f((x+y)/2) <= (f(x)+f(y))/2 + slack.
inline std::optional<convexity_violation>
midpoint_convexity_violation(const convex_function::value_fn& f, Eigen::Index dim,
                             std::uint64_t seed = 7, std::size_t samples = 256,
                             double radius = 4.0, double slack = 1e-9)
{
    std::mt19937_64 rng(seed);
    const vec center = vec::Zero(dim);
    for (std::size_t i = 0; i < samples; ++i) {
        const vec x = random_in_ball(center, radius, rng);
        const vec y = random_in_ball(center, radius, rng);
        const double fx = f(x), fy = f(y);
        if (!std::isfinite(fx) || !std::isfinite(fy)) continue;
        const double fm = f(0.5 * (x + y));
        const double avg = 0.5 * (fx + fy);
        if (fm > avg + slack * (1.0 + std::abs(avg))) return convexity_violation{x, y, fm, avg};
    }
    return std::nullopt;
}

inline convex_function convex_function::user(std::string name, Eigen::Index dim, value_fn value,
                                              std::optional<dirderiv_fn> dirderiv, norm_kind norm)
{
    ERRBOUND_REQUIRE(dim >= 1, "convex_function::user: dimension must be >= 1");
    ERRBOUND_REQUIRE(static_cast<bool>(value), "convex_function::user: empty evaluator");
    if (auto v = midpoint_convexity_violation(value, dim)) {
        fail(errc::invalid_input, "convex_function '" + name + "' fails the midpoint convexity probe");
    }
    convex_function f;
    f.name_ = std::move(name);
    f.dim_ = dim;
    f.norm_ = norm;
    f.origin_ = provenance::user;
    f.value_ = std::move(value);
    if (dirderiv) f.dirderiv_ = std::move(*dirderiv);
    return f;
}

// ---------------------------------------------------------------------------
// Numeric directional derivative

struct quotient_schedule
{
    double t0 = 1.0;
    double gamma = 0.5;
    double tol = 1e-9;
    std::size_t kmax = 60;
};

/// (t_k, q(t_k)) with q(t) = (f(x + t h) - f(x)) / t on t_k = t0 * gamma^k.
inline std::vector<std::pair<double, double>>
difference_quotients(const convex_function& f, const vec& x, const vec& h, double t0,
                     double gamma, std::size_t count)
{
    const double fx = f(x);
    std::vector<std::pair<double, double>> out;
    out.reserve(count);
    double t = t0;
    for (std::size_t k = 0; k < count; ++k, t *= gamma) {
        const double ft = f(x + t * h);
        out.emplace_back(t, std::isfinite(ft) ? (ft - fx) / t : HUGE_VAL);
    }
    return out;
}

/**
 *  d+f(x, h) as the limit of difference quotients along a geometric
 *  schedule. For convex f the quotient is nondecreasing in t, so the
 *  sequence decreases toward the derivative; iteration stops once two
 *  consecutive quotients agree to tol * (1 + |q|) plus the rounding
 *  error of the newer quotient.
 */
inline ext_real dirderiv_numeric(const convex_function& f, const vec& x, const vec& h,
                                 const quotient_schedule& s = {})
{
    require_valid(x, "dirderiv_numeric");
    require_valid(h, "dirderiv_numeric");
    ERRBOUND_REQUIRE(!h.isZero(0.0), "dirderiv_numeric: h = 0");
    const double fx = f(x);
    ERRBOUND_REQUIRE(std::isfinite(fx), "dirderiv_numeric: f(x) is not finite");

    std::optional<double> prev;
    double t = s.t0;
    bool any_finite = false;
    for (std::size_t k = 0; k <= s.kmax; ++k, t *= s.gamma) {
        const double ft = f(x + t * h);
        if (!std::isfinite(ft)) {
            prev.reset();
            continue;
        }
        any_finite = true;
        const double q = (ft - fx) / t;
        // Rounding in ft - fx alone moves q by about this much; past that
        // point smaller t only adds noise.
        const double noise = 4.0 * std::numeric_limits<double>::epsilon() * (std::abs(fx) + std::abs(ft)) / t;
        if (prev && std::abs(*prev - q) <= s.tol * (1.0 + std::abs(*prev)) + noise) return q;
        prev = q;
    }
    if (!any_finite) return ext_real::infinity();
    fail(errc::inconclusive, "dirderiv_numeric: quotients did not stabilize within kmax");
}

/// Exact rule when available, numeric quotient limit otherwise.
inline ext_real dirderiv(const convex_function& f, const vec& x, const vec& h)
{
    if (auto d = f.exact_dirderiv(x, h)) return *d;
    return dirderiv_numeric(f, x, h);
}

} // namespace errbound

#endif
