#include "depcag/errors.hpp"

namespace depcag {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::OutOfDomain: return "OutOfDomain";
        case ErrorCode::EvaluationFailure: return "EvaluationFailure";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::SingularD: return "SingularD";
        case ErrorCode::SingularZ: return "SingularZ";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::ZeroDenominator: return "ZeroDenominator";
        case ErrorCode::NotDelayed: return "NotDelayed";
        case ErrorCode::NoContraction: return "NoContraction";
        case ErrorCode::MaxIterExceeded: return "MaxIterExceeded";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
    }
    return "Unknown";
}

void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace depcag
