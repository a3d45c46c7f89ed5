#pragma once

#include <stdexcept>
#include <string>

namespace depcag {

enum class ErrorCode {
    OutOfDomain,
    EvaluationFailure,
    NoConvergence,
    SingularD,
    SingularZ,
    DomainError,
    ZeroDenominator,
    NotDelayed,
    NoContraction,
    MaxIterExceeded,
    ParseError,
    ValidationError,
};

const char* to_string(ErrorCode code) noexcept;

/// Runtime failure carrying a machine-checkable code; thrown by every
/// operation whose contract names an error condition.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

} // namespace depcag
