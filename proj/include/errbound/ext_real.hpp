#ifndef ERRBOUND_EXT_REAL_HPP
#define ERRBOUND_EXT_REAL_HPP

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdio>
#include <string>

#include "errors.hpp"

namespace errbound {

/**
 *  A real number or +infinity.
 *
 *  Moduli and distances may legitimately be infinite (empty level sets,
 *  functions without infeasible points). The infinite state is a separate
 *  flag rather than an IEEE infinity so it can never leak into arithmetic
 *  unnoticed, and it serializes as the literal "inf".
 */
class ext_real
{
public:
    constexpr ext_real() = default;

    constexpr ext_real(double value) // NOLINT(google-explicit-constructor)
        : value_(value)
    {}

    static constexpr ext_real infinity()
    {
        ext_real r;
        r.infinite_ = true;
        return r;
    }

    constexpr bool is_infinite() const noexcept { return infinite_; }
    constexpr bool is_finite() const noexcept { return !infinite_; }

    /// The finite value; throws on the infinite sentinel.
    double value() const
    {
        if (infinite_) fail(errc::invalid_input, "value() called on +inf");
        return value_;
    }

    /// IEEE view, for comparisons against tolerances.
    constexpr double as_double() const noexcept
    {
        return infinite_ ? HUGE_VAL : value_;
    }

    friend constexpr bool operator==(const ext_real& a, const ext_real& b) noexcept
    {
        if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
        return a.value_ == b.value_;
    }

    friend constexpr std::partial_ordering operator<=>(const ext_real& a, const ext_real& b) noexcept
    {
        if (a.infinite_ && b.infinite_) return std::partial_ordering::equivalent;
        if (a.infinite_) return std::partial_ordering::greater;
        if (b.infinite_) return std::partial_ordering::less;
        return a.value_ <=> b.value_;
    }

private:
    double value_ = 0.0;
    bool infinite_ = false;
};

inline ext_real min(const ext_real& a, const ext_real& b)
{
    return (b < a) ? b : a;
}

/// 17 significant digits, enough to round-trip a double.
inline std::string format_real(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_real(const ext_real& v)
{
    return v.is_infinite() ? std::string("inf") : format_real(v.value());
}

} // namespace errbound

#endif
