#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gecjudge {

enum class ErrorCode {
  EmptyId,
  EmptySource,
  InvalidMatrix,
  InvalidArgument,
  RangeError,
  NoConvergence,
  UnsupportedOrder,
  RepairFailed,
  InconsistentLevel,
  TransportError,
  ParseError,
  ScaleError,
  TemplateError,
  IoError,
  WeightSumError,
  UnknownSystem,
  LengthMismatch,
  ZeroVariance,
  MissingScore,
  DegenerateInput,
  SchemaError,
  DuplicateKey,
  LineCountMismatch,
  EmptyTable,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. `line` and `field` are filled in by
/// loaders and validators so messages can point at the offending input.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message, std::string field = {},
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

private:
  ErrorCode code_;
  std::string field_;
  std::optional<std::size_t> line_;
};

}  // namespace gecjudge
