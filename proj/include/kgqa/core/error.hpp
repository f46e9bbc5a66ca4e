#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kgqa {

enum class ErrorCode {
    InvalidInput,
    Parse,
    NotFound,
    Io,
    Security,
    Upstream,
    ReplayMiss,
    Precondition,
    Storage,
    Config,
    LimitExceeded,
    Internal,
};

std::string_view to_string(ErrorCode code);

/// Error type thrown across module boundaries. `retriable` marks failures
/// that may succeed on a later attempt (network hiccups, 5xx responses).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message, bool retriable = false)
        : std::runtime_error(std::move(message)), code_(code), retriable_(retriable) {}

    ErrorCode code() const noexcept { return code_; }
    bool retriable() const noexcept { return retriable_; }

private:
    ErrorCode code_;
    bool retriable_;
};

}  // namespace kgqa
