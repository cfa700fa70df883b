/**
 *  \file
 *  Error handling facilities.
 *
 *  Every failure raised by the library is an `errbound::error` carrying an
 *  `errc` code, so callers (notably the CLI) can map failures onto exit
 *  codes without parsing messages.
 */
#ifndef ERRBOUND_ERRORS_HPP
#define ERRBOUND_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace errbound {

/// Failure categories shared by all modules.
enum class errc {
    invalid_input,    ///< a precondition on the arguments does not hold
    numeric_failure,  ///< an iterative kernel did not converge
    not_applicable,   ///< the requested construction does not apply to the input
    inconclusive,     ///< the numerics cannot decide the question
};

inline std::string_view to_string(errc code) noexcept
{
    switch (code) {
        case errc::invalid_input: return "invalid-input";
        case errc::numeric_failure: return "numeric-failure";
        case errc::not_applicable: return "not-applicable";
        case errc::inconclusive: return "inconclusive";
    }
    return "unknown";
}

class error : public std::runtime_error
{
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what)
        , code_(code)
    {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what)
{
    throw error(code, what);
}

/// Throws `errc::invalid_input` naming the failed requirement.
#define ERRBOUND_REQUIRE(test, what)                                  \
    do {                                                              \
        if (!(test)) {                                                \
            ::errbound::fail(::errbound::errc::invalid_input, what);  \
        }                                                             \
    } while (false)

} // namespace errbound

#endif
