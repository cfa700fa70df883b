/**
 *  \file
 *  Small dense two-phase simplex.
 *
 *  Intended for the handful-of-rows LPs that arise when deciding whether an
 *  active set is realizable or whether a polyhedron is empty. Bland's rule is
 *  used throughout, so degenerate problems terminate.
 */
#ifndef ERRBOUND_LP_HPP
#define ERRBOUND_LP_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "errors.hpp"

namespace errbound::lp {

enum class relation { less_equal, equal, greater_equal };

struct constraint
{
    std::vector<double> coeffs;
    relation rel = relation::less_equal;
    double rhs = 0.0;
};

/// maximize objective . x subject to constraints; all variables are free.
struct problem
{
    std::size_t num_vars = 0;
    std::vector<double> objective;
    std::vector<constraint> constraints;
};

enum class status { optimal, infeasible, unbounded, iteration_limit };

struct solution
{
    status state = status::infeasible;
    double objective = 0.0;
    std::vector<double> x;
};

struct options
{
    double pivot_tol = 1e-11;
    double feasibility_tol = 1e-9;
    std::size_t max_iterations = 20000;
};

namespace detail {

class tableau
{
public:
    tableau(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0)
    {}

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    void pivot(std::size_t pr, std::size_t pc)
    {
        const double p = (*this)(pr, pc);
        for (std::size_t c = 0; c < cols_; ++c) (*this)(pr, c) /= p;
        for (std::size_t r = 0; r < rows_; ++r) {
            if (r == pr) continue;
            const double f = (*this)(r, pc);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < cols_; ++c) (*this)(r, c) -= f * (*this)(pr, c);
            (*this)(r, pc) = 0.0;
        }
    }

private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
};

// Row `obj` holds reduced costs (c_j - z_j) for a maximization; column
// `rhs_col` holds the right-hand side. Columns in `allowed` may enter.
inline status run_simplex(tableau& t, std::vector<std::size_t>& basis, std::size_t obj,
                          std::size_t rhs_col, const std::vector<bool>& allowed,
                          const options& opt)
{
    const std::size_t m = basis.size();
    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
        std::size_t enter = rhs_col;
        for (std::size_t j = 0; j < rhs_col; ++j) {
            if (allowed[j] && t(obj, j) > opt.pivot_tol) {
                enter = j;
                break;
            }
        }
        if (enter == rhs_col) return status::optimal;

        std::size_t leave = m;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < m; ++r) {
            const double a = t(r, enter);
            if (a <= opt.pivot_tol) continue;
            const double ratio = t(r, rhs_col) / a;
            if (ratio < best - 1e-14 ||
                (std::abs(ratio - best) <= 1e-14 && leave < m && basis[r] < basis[leave])) {
                best = ratio;
                leave = r;
            }
        }
        if (leave == m) return status::unbounded;
        t.pivot(leave, enter);
        basis[leave] = enter;
    }
    return status::iteration_limit;
}

} // namespace detail

/**
 *  Solves `p` with the two-phase method.
 *
 *  Free variables are split as x = u - v with u, v >= 0. Rows are normalized
 *  to a nonnegative right-hand side, then equality and >= rows receive
 *  artificials that phase I drives to zero.
 */
inline solution maximize(const problem& p, const options& opt = {})
{
    const std::size_t n = p.num_vars;
    ERRBOUND_REQUIRE(p.objective.size() == n, "lp: objective size mismatch");
    for (const auto& c : p.constraints) {
        ERRBOUND_REQUIRE(c.coeffs.size() == n, "lp: constraint size mismatch");
    }

    const std::size_t m = p.constraints.size();
    std::size_t num_slack = 0, num_art = 0;
    struct row_plan { double sign; relation rel; };
    std::vector<row_plan> plan(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& c = p.constraints[i];
        double sign = c.rhs < 0 ? -1.0 : 1.0;
        relation rel = c.rel;
        if (sign < 0 && rel != relation::equal) {
            rel = (rel == relation::less_equal) ? relation::greater_equal : relation::less_equal;
        }
        plan[i] = {sign, rel};
        if (rel != relation::equal) ++num_slack;
        if (rel != relation::less_equal) ++num_art;
    }

    // Columns: [u (n) | v (n) | slacks | artificials | rhs]
    const std::size_t art0 = 2 * n + num_slack;
    const std::size_t rhs_col = art0 + num_art;
    detail::tableau t(m + 1, rhs_col + 1);
    const std::size_t obj = m;
    std::vector<std::size_t> basis(m);

    std::size_t s = 2 * n, a = art0;
    for (std::size_t i = 0; i < m; ++i) {
        const auto& c = p.constraints[i];
        const double sg = plan[i].sign;
        for (std::size_t j = 0; j < n; ++j) {
            t(i, j) = sg * c.coeffs[j];
            t(i, n + j) = -sg * c.coeffs[j];
        }
        t(i, rhs_col) = sg * c.rhs;
        switch (plan[i].rel) {
            case relation::less_equal:
                t(i, s) = 1.0;
                basis[i] = s++;
                break;
            case relation::greater_equal:
                t(i, s++) = -1.0;
                t(i, a) = 1.0;
                basis[i] = a++;
                break;
            case relation::equal:
                t(i, a) = 1.0;
                basis[i] = a++;
                break;
        }
    }

    std::vector<bool> allowed(rhs_col, true);
    solution sol;

    if (num_art > 0) {
        // Phase I: maximize -(sum of artificials).
        for (std::size_t c = 0; c <= rhs_col; ++c) t(obj, c) = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (basis[i] >= art0) {
                for (std::size_t c = 0; c <= rhs_col; ++c) {
                    if (c < art0 || c == rhs_col) t(obj, c) += t(i, c);
                }
            }
        }
        const status st = detail::run_simplex(t, basis, obj, rhs_col, allowed, opt);
        if (st == status::iteration_limit) {
            sol.state = st;
            return sol;
        }
        double scale = 1.0;
        for (const auto& c : p.constraints) scale = std::max(scale, std::abs(c.rhs));
        if (t(obj, rhs_col) > opt.feasibility_tol * scale) {
            sol.state = status::infeasible;
            return sol;
        }
        // Drive remaining (zero-valued) artificials out of the basis.
        for (std::size_t i = 0; i < m; ++i) {
            if (basis[i] < art0) continue;
            for (std::size_t j = 0; j < art0; ++j) {
                if (std::abs(t(i, j)) > 1e-9) {
                    t.pivot(i, j);
                    basis[i] = j;
                    break;
                }
            }
        }
        for (std::size_t j = art0; j < rhs_col; ++j) allowed[j] = false;
    }

    // Phase II objective row: c_j - z_j.
    for (std::size_t c = 0; c <= rhs_col; ++c) t(obj, c) = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        t(obj, j) = p.objective[j];
        t(obj, n + j) = -p.objective[j];
    }
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t b = basis[i];
        const double cb = t(obj, b);
        if (cb == 0.0) continue;
        for (std::size_t c = 0; c <= rhs_col; ++c) t(obj, c) -= cb * t(i, c);
    }

    const status st = detail::run_simplex(t, basis, obj, rhs_col, allowed, opt);
    sol.state = st;
    if (st != status::optimal) return sol;

    std::vector<double> z(rhs_col, 0.0);
    for (std::size_t i = 0; i < m; ++i) z[basis[i]] = t(i, rhs_col);
    sol.x.assign(n, 0.0);
    sol.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        sol.x[j] = z[j] - z[n + j];
        sol.objective += p.objective[j] * sol.x[j];
    }
    return sol;
}

} // namespace errbound::lp

#endif
