#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hotkit {

enum class ErrorKind {
  InvalidClass,
  DimensionMismatch,
  NonBinaryInput,
  InvariantViolation,
  EmptyMask,
  ZeroVector,
  NotNormalized,
  NoContactPixels,
  NoEvaluableClass,
  EmptyList,
  ConfigInvalid,
  // HTF container and dataset layout
  BadMagic,
  BadVersion,
  BadDtype,
  BadHeader,
  TruncatedPayload,
  TrailingBytes,
  DimOverflow,
  MissingFile,
  ShapeMismatch,
  IoError,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace hotkit
