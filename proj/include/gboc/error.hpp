#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gboc {

enum class ErrorCode {
  MissingFile,
  ParseError,
  NonBinaryLabel,
  DegenerateSeries,
  WindowTooLong,
  BadParams,
  ShapeMismatch,
  NonFiniteGradient,
  NonFiniteLoss,
  EmptyBall,
  EmptySet,
  DegenerateRange,
  NoAnomalies,
  DegenerateLabels,
  ModelMismatch,
  BadMagic,
  VersionUnsupported,
  TruncatedFile,
  InvariantViolation,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so
// callers (and tests) can branch on the class rather than on message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// ParseError with the offending location. Rows are 1-based data rows (the
// header is row 0), columns are 0-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::size_t col, const std::string& what)
      : Error(ErrorCode::ParseError,
              "row " + std::to_string(row) + ", col " + std::to_string(col) + ": " + what),
        row_(row), col_(col) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

}  // namespace gboc
