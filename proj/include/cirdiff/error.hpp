#pragma once

#include <stdexcept>
#include <string>

namespace cirdiff {

enum class ErrorCode {
    domain,                 // argument outside the mathematical domain
    invalid_phi,            // phi triple violates its invariants
    discriminant_negative,  // y-leg with k^2 < 2 sigma^2
    parse,                  // malformed input file
    validation,             // well-formed input that breaks an invariant
    io,                     // file missing or unwritable
    bootstrap_failure,
    extrapolation,          // request beyond the last curve pillar
    grid,                   // time not on the simulation grid
    infeasible_guess,
    non_convergence,
};

const char* to_string(ErrorCode code) noexcept;

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace cirdiff
