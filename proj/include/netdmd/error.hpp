#ifndef NETDMD_ERROR_HPP
#define NETDMD_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace netdmd {

enum class ErrorCode {
  AllZeroMatrix,
  NonFiniteEntry,
  NotSquare,
  ConvergenceFailure,
  DimensionMismatch,
  UnknownVertex,
  EmptyNetwork,
  RowRangeMismatch,
  BadConfig,
  ParseError,
  IoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::AllZeroMatrix: return "AllZeroMatrix";
    case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnknownVertex: return "UnknownVertex";
    case ErrorCode::EmptyNetwork: return "EmptyNetwork";
    case ErrorCode::RowRangeMismatch: return "RowRangeMismatch";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable error code. All library failures
/// are reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace netdmd

#endif  // NETDMD_ERROR_HPP
