#pragma once

#include <stdexcept>
#include <string>

namespace modeloc {

enum class ErrorCode {
  invalid_input,
  degenerate_input,
  invalid_frequency,
  no_peak,
  insufficient_data,
  no_mode,
  no_matching_mode,
  model_invariant,
  degenerate_weights,
  parse,
  io,
};

const char* to_string(ErrorCode code);

/// Single exception type for every recoverable failure in the library.
/// The code tells callers (and the CLI exit-status mapping) what went wrong.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace modeloc
