#pragma once

#include <stdexcept>
#include <string>

namespace gspec {

enum class ErrorCode {
    ShapeMismatch,
    NonFiniteEntry,
    KindMismatch,
    KindUnsupported,
    NotInvertible,
    ParseError,
    EvalError,
    IndexOutOfRange,
    IndexingMismatch,
    NotSelfAdjoint,
    NotNormal,
    NotCommutative,
    NotApplicable,
    WitnessCheckFailed,
    PreconditionNotCertified,
    PreconditionFailed,
    SkewPartNotInvertible,
    BoundsNotClosedForm,
    DifferenceNotInvertible,
    ConfigError,
    UnknownSuite,
};

const char* error_name(ErrorCode code) noexcept;

/// Every failure raised by the library. `code` is stable and maps onto CLI exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Parse failures carry the byte offset into the source text.
class ParseError : public Error {
public:
    ParseError(std::size_t position, const std::string& message)
        : Error(ErrorCode::ParseError, "at position " + std::to_string(position) + ": " + message),
          position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

inline const char* error_name(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::KindUnsupported: return "KindUnsupported";
    case ErrorCode::NotInvertible: return "NotInvertible";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EvalError: return "EvalError";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::IndexingMismatch: return "IndexingMismatch";
    case ErrorCode::NotSelfAdjoint: return "NotSelfAdjoint";
    case ErrorCode::NotNormal: return "NotNormal";
    case ErrorCode::NotCommutative: return "NotCommutative";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::WitnessCheckFailed: return "WitnessCheckFailed";
    case ErrorCode::PreconditionNotCertified: return "PreconditionNotCertified";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::SkewPartNotInvertible: return "SkewPartNotInvertible";
    case ErrorCode::BoundsNotClosedForm: return "BoundsNotClosedForm";
    case ErrorCode::DifferenceNotInvertible: return "DifferenceNotInvertible";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::UnknownSuite: return "UnknownSuite";
    }
    return "Unknown";
}

} // namespace gspec
