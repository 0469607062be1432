#include "hotelling/error.hpp"

namespace hotelling {

const char* error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ok: return "Ok";
        case ErrorCode::invalid_argument: return "InvalidArgument";
        case ErrorCode::duplicate_sites: return "DuplicateSites";
        case ErrorCode::out_of_domain: return "OutOfDomain";
        case ErrorCode::degenerate_polygon: return "DegeneratePolygon";
        case ErrorCode::dimension_mismatch: return "DimensionMismatch";
        case ErrorCode::infeasible_n: return "InfeasibleN";
        case ErrorCode::deterrence_impossible: return "DeterrenceImpossible";
        case ErrorCode::bracketing_failure: return "BracketingFailure";
        case ErrorCode::not_converged: return "NotConverged";
        case ErrorCode::config_error: return "ConfigError";
        case ErrorCode::io_error: return "IoError";
        case ErrorCode::internal: return "Internal";
    }
    return "Unknown";
}

}  // namespace hotelling
