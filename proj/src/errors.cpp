#include "modeloc/errors.hpp"

namespace modeloc {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid input";
    case ErrorCode::degenerate_input: return "degenerate input";
    case ErrorCode::invalid_frequency: return "invalid frequency";
    case ErrorCode::no_peak: return "no spectral peak";
    case ErrorCode::insufficient_data: return "insufficient data";
    case ErrorCode::no_mode: return "no mode";
    case ErrorCode::no_matching_mode: return "no matching mode";
    case ErrorCode::model_invariant: return "model invariant violated";
    case ErrorCode::degenerate_weights: return "degenerate weights";
    case ErrorCode::parse: return "parse error";
    case ErrorCode::io: return "i/o error";
  }
  return "unknown error";
}

}  // namespace modeloc
