#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "modeloc/align.hpp"
#include "modeloc/types.hpp"

namespace modeloc {

struct GeoPoint {
  double latitude = 0.0;   // degrees, [-90, 90]
  double longitude = 0.0;  // degrees, (-180, 180]

  void validate() const;
};

using GeoMap = std::map<std::string, GeoPoint>;

/// Angle-difference-weighted centroid of the geolocated candidates, computed
/// on the orthographic tangent plane around their unweighted centroid.
GeoPoint triangulate(const std::vector<RankedDiff>& candidates, const GeoMap& geo);

/// Every free parameter of the localization procedure.
struct PipelineConfig {
  FrequencyBand band{0.1, 1.5};
  double welch_segment_seconds = 0.0;  // 0 = automatic segment length
  double threshold_fraction = 0.2;
  double ratio_k = 1.2;
  double min_angle = 1.0;    // degrees
  double mode_tol = 0.1;     // Hz between forcing frequency and natural mode
  std::optional<std::string> reference_channel;
  bool weighted_alignment = false;
  std::size_t ringdown_order = 10;  // 0 = automatic
  /// Ring-down modes below this fraction of the strongest mode's energy are
  /// not considered as the natural mode.
  double ringdown_min_energy = 0.05;
  double min_prominence = 10.0;     // peak over median in-band power
  bool remove_common_mode = true;

  void validate() const;
};

struct Diagnostic {
  std::string stage;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

/// Natural-mode information: ring-down records or a known mode shape.
struct NaturalSource {
  std::optional<ChannelSet> ringdown;
  std::optional<ModeShape> baseline;
};

struct LocationReport {
  PipelineConfig config;
  double forcing_frequency = 0.0;  // Hz, 0 when no peak was found
  double peak_prominence = 0.0;
  double natural_frequency = 0.0;  // Hz
  std::optional<double> natural_damping;  // only for ring-down estimates
  std::string natural_origin;             // "ringdown", "baseline" or empty
  ModeShape forced_shape;
  ModeShape natural_shape;
  AlignmentResult alignment;
  std::vector<RankedDiff> ranking;
  Verdict verdict;
  std::optional<GeoPoint> triangulated;
  std::vector<Diagnostic> diagnostics;
};

/// Full localization: forcing frequency, forced shape, natural shape,
/// thresholding, alignment, ranking, verdict and (for ambiguous verdicts with
/// geo data) triangulation. Stage failures are rethrown with the stage name
/// prefixed; an absent spectral peak yields a NoSource report instead.
LocationReport locate_source(const ChannelSet& forced_window, const NaturalSource& natural,
                             const PipelineConfig& config,
                             const std::optional<GeoMap>& geo = std::nullopt);

}  // namespace modeloc
