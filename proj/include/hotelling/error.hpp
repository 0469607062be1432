#pragma once

#include <stdexcept>
#include <string>

namespace hotelling {

// Error codes shared by the C++ core and the C API (the numeric values are
// part of the C ABI, see hotelling.h).
enum class ErrorCode : int {
    ok = 0,
    invalid_argument = 1,
    duplicate_sites = 2,
    out_of_domain = 3,
    degenerate_polygon = 4,
    dimension_mismatch = 5,
    infeasible_n = 6,
    deterrence_impossible = 7,
    bracketing_failure = 8,
    not_converged = 9,
    config_error = 10,
    io_error = 11,
    internal = 99,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace hotelling
