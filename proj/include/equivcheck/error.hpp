#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace equivcheck {

enum class ErrorCode {
    parse,
    empty_input,
    duplicate_sample,
    insufficient_data,
    precondition,
    parameter_domain,
    support,
    degenerate_weights,
    degenerate_region,
    ratio_overflow,
    numerical,
    config,
    dependency,
    io,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers switch on code() when they
// need to map failures onto exit statuses.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace equivcheck
