#include "cirdiff/error.hpp"

namespace cirdiff {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::domain: return "domain";
        case ErrorCode::invalid_phi: return "invalid-phi";
        case ErrorCode::discriminant_negative: return "discriminant-negative";
        case ErrorCode::parse: return "parse";
        case ErrorCode::validation: return "validation";
        case ErrorCode::io: return "io";
        case ErrorCode::bootstrap_failure: return "bootstrap-failure";
        case ErrorCode::extrapolation: return "extrapolation";
        case ErrorCode::grid: return "grid";
        case ErrorCode::infeasible_guess: return "infeasible-guess";
        case ErrorCode::non_convergence: return "non-convergence";
    }
    return "unknown";
}

}  // namespace cirdiff
