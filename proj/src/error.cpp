#include "equivcheck/error.hpp"

namespace equivcheck {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::parse: return "parse";
        case ErrorCode::empty_input: return "empty-input";
        case ErrorCode::duplicate_sample: return "duplicate-sample";
        case ErrorCode::insufficient_data: return "insufficient-data";
        case ErrorCode::precondition: return "precondition";
        case ErrorCode::parameter_domain: return "parameter-domain";
        case ErrorCode::support: return "support";
        case ErrorCode::degenerate_weights: return "degenerate-weights";
        case ErrorCode::degenerate_region: return "degenerate-region";
        case ErrorCode::ratio_overflow: return "ratio-overflow";
        case ErrorCode::numerical: return "numerical";
        case ErrorCode::config: return "config";
        case ErrorCode::dependency: return "dependency";
        case ErrorCode::io: return "io";
    }
    return "unknown";
}

}  // namespace equivcheck
