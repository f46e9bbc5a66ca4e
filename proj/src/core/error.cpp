#include "kgqa/core/error.hpp"

namespace kgqa {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidInput: return "invalid_input";
        case ErrorCode::Parse: return "parse_error";
        case ErrorCode::NotFound: return "not_found";
        case ErrorCode::Io: return "io_error";
        case ErrorCode::Security: return "security_error";
        case ErrorCode::Upstream: return "upstream_error";
        case ErrorCode::ReplayMiss: return "replay_miss";
        case ErrorCode::Precondition: return "precondition_violation";
        case ErrorCode::Storage: return "storage_error";
        case ErrorCode::Config: return "config_error";
        case ErrorCode::LimitExceeded: return "limit_exceeded";
        case ErrorCode::Internal: return "internal_error";
    }
    return "unknown";
}

}  // namespace kgqa
