#pragma once

#include <stdexcept>
#include <string>

namespace gids {

enum class ErrorKind {
  MalformedLine,
  IdOutOfRange,
  UnsortedTimestamps,
  SinkFailure,
  EmptyProfile,
  WindowOutOfRange,
  ShapeMismatch,
  BadMagic,
  ShapeHeaderMismatch,
  TruncatedStream,
  EmptyDataset,
  DivergenceDetected,
  LengthMismatch,
  SingleClassInput,
};

const char* error_kind_name(ErrorKind k);

// All library failures are reported through this type. `line` is the
// 1-based input line for file parsing errors, 0 otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, std::size_t line = 0)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message +
                           (line ? " (line " + std::to_string(line) + ")" : "")),
        kind_(kind),
        line_(line) {}

  ErrorKind kind() const { return kind_; }
  std::size_t line() const { return line_; }

 private:
  ErrorKind kind_;
  std::size_t line_;
};

}  // namespace gids
