#include "hotkit/error.hpp"

namespace hotkit {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidClass: return "InvalidClass";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonBinaryInput: return "NonBinaryInput";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::EmptyMask: return "EmptyMask";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::NoContactPixels: return "NoContactPixels";
    case ErrorKind::NoEvaluableClass: return "NoEvaluableClass";
    case ErrorKind::EmptyList: return "EmptyList";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::BadVersion: return "BadVersion";
    case ErrorKind::BadDtype: return "BadDtype";
    case ErrorKind::BadHeader: return "BadHeader";
    case ErrorKind::TruncatedPayload: return "TruncatedPayload";
    case ErrorKind::TrailingBytes: return "TrailingBytes";
    case ErrorKind::DimOverflow: return "DimOverflow";
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace hotkit
