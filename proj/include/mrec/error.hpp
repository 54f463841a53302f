#pragma once

#include <stdexcept>
#include <string>

namespace mrec {

enum class ErrorKind {
    NotHermitian,
    NonFinite,
    NegativeEigenvalue,
    DimMismatch,
    BadRank,
    UnknownName,
    ParseError,
    SchemaViolation,
    InvalidState,
    NonUnitaryParams,
    BudgetZero,
    NotCP,
    EpsilonOutOfRange,
    NotApplicable,
    PreconditionViolated,
    TooLarge,
    TooManyTypes,
    MarginalMismatch,
    OutOfRange,
    SingularInput,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NotHermitian: return "NotHermitian";
        case ErrorKind::NonFinite: return "NonFinite";
        case ErrorKind::NegativeEigenvalue: return "NegativeEigenvalue";
        case ErrorKind::DimMismatch: return "DimMismatch";
        case ErrorKind::BadRank: return "BadRank";
        case ErrorKind::UnknownName: return "UnknownName";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::SchemaViolation: return "SchemaViolation";
        case ErrorKind::InvalidState: return "InvalidState";
        case ErrorKind::NonUnitaryParams: return "NonUnitaryParams";
        case ErrorKind::BudgetZero: return "BudgetZero";
        case ErrorKind::NotCP: return "NotCP";
        case ErrorKind::EpsilonOutOfRange: return "EpsilonOutOfRange";
        case ErrorKind::NotApplicable: return "NotApplicable";
        case ErrorKind::PreconditionViolated: return "PreconditionViolated";
        case ErrorKind::TooLarge: return "TooLarge";
        case ErrorKind::TooManyTypes: return "TooManyTypes";
        case ErrorKind::MarginalMismatch: return "MarginalMismatch";
        case ErrorKind::OutOfRange: return "OutOfRange";
        case ErrorKind::SingularInput: return "SingularInput";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI) can map it to an exit status without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

} // namespace mrec
