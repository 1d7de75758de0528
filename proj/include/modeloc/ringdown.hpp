#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "modeloc/errors.hpp"
#include "modeloc/types.hpp"

namespace modeloc {

/// Singular values below this fraction of the largest are treated as noise
/// when the model order is chosen automatically.
inline constexpr double kAutoOrderThreshold = 1e-3;

/// Matrix pencil identification over all channels jointly (stacked Hankel
/// matrices with pencil parameter L = length / 3).
///
/// `model_order` is the number of complex poles (0 picks it from the singular
/// value spectrum). Returns at most model_order / 2 oscillatory modes, highest
/// energy first. Shapes are per-channel residues relative to `reference`
/// (the first channel when empty).
std::vector<ModalEstimate> matrix_pencil(const ChannelSet& channels, std::size_t model_order,
                                         const std::string& reference = {});

/// Thrown by select_mode; carries the closest candidate for diagnostics.
class NoMatchingModeError : public Error {
 public:
  NoMatchingModeError(const std::string& message, ModalEstimate nearest)
      : Error(ErrorCode::no_matching_mode, message), nearest_(std::move(nearest)) {}

  const ModalEstimate& nearest() const noexcept { return nearest_; }

 private:
  ModalEstimate nearest_;
};

/// Mode closest in frequency to `f_target`, provided it lies within `tol` Hz.
/// Ties go to the lower fit error.
ModalEstimate select_mode(const std::vector<ModalEstimate>& modes, double f_target, double tol);

}  // namespace modeloc
