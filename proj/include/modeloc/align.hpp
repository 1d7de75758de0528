#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "modeloc/types.hpp"

namespace modeloc {

/// Optimal constant rotation of a forced shape onto a natural shape.
struct AlignmentResult {
  double delta = 0.0;                    // degrees added to every forced angle
  std::map<std::string, double> diffs;   // wrap(natural - (forced + delta)), degrees
  double rms = 0.0;                      // objective at delta, degrees
  std::set<std::string> channels_used;
  bool weighted = false;
  std::map<std::string, double> weights;  // empty when unweighted
};

/// Channels whose magnitude is at least `threshold_fraction` of the largest.
std::set<std::string> magnitude_filter(const ModeShape& shape, double threshold_fraction);

struct AlignOptions {
  /// Weight each channel by the product of its normalized magnitudes.
  bool weighted = false;
};

/// Global minimizer of the wrapped RMS angle difference over all rotations.
/// Solved exactly: the objective is piecewise quadratic between the points
/// where some residual crosses +-180 degrees, so every arc is minimized in
/// closed form. The arithmetic runs relative to the first channel, which makes
/// diffs and rms independent of any rotation applied to either shape.
AlignmentResult align_shapes(const ModeShape& forced, const ModeShape& natural,
                             const std::set<std::string>& channels,
                             const AlignOptions& options = {});

/// Objective value sqrt(sum w d^2 / sum w) at an arbitrary rotation.
double alignment_objective(const ModeShape& forced, const ModeShape& natural,
                           const std::set<std::string>& channels, double delta,
                           const AlignOptions& options = {});

struct RankedDiff {
  std::string channel;
  double abs_diff = 0.0;  // degrees

  bool operator==(const RankedDiff&) const = default;
};

/// Descending |diff|, ties by channel id.
std::vector<RankedDiff> rank_differences(const AlignmentResult& result);

enum class VerdictKind { single_source, ambiguous, no_source };

const char* to_string(VerdictKind kind);

struct Verdict {
  VerdictKind kind = VerdictKind::no_source;
  std::vector<std::string> channels;  // the source, or the comparable candidates

  bool operator==(const Verdict&) const = default;
};

Verdict dominance_verdict(const std::vector<RankedDiff>& ranked, double ratio_k, double min_angle);

}  // namespace modeloc
