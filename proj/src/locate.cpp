#include "modeloc/locate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "modeloc/angles.hpp"
#include "modeloc/errors.hpp"
#include "modeloc/ringdown.hpp"
#include "modeloc/signal.hpp"

namespace modeloc {

namespace {

// Common-mode removal is skipped for fewer than three channels: with two it
// would force them into exact anti-phase.
constexpr std::size_t kMinChannelsForCommonMode = 3;

using Vec3 = std::array<double, 3>;

Vec3 to_unit(const GeoPoint& p) {
  const double lat = deg_to_rad(p.latitude);
  const double lon = deg_to_rad(p.longitude);
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

template <class F>
auto staged(const char* stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(stage) + ": " + e.what());
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

ChannelSet demeaned(const ChannelSet& channels) {
  ChannelSet out = channels;
  for (auto& ch : out) {
    double mean = 0.0;
    for (double v : ch.samples) mean += v;
    mean /= static_cast<double>(ch.samples.size());
    for (double& v : ch.samples) v -= mean;
  }
  return out;
}

ModeShape without_common_mode(const ModeShape& shape, const std::set<std::string>& over) {
  std::complex<double> mean = 0.0;
  std::size_t count = 0;
  for (const auto& [id, p] : shape.entries) {
    if (over.count(id)) {
      mean += p.to_complex();
      ++count;
    }
  }
  mean /= static_cast<double>(count);
  ModeShape out = shape;
  out.entries.clear();
  for (const auto& [id, p] : shape.entries) {
    if (over.count(id)) out.entries[id] = ComplexPhasor::from_complex(p.to_complex() - mean);
  }
  return out;
}

// Reference-relative shape anchored at `reference` when present, otherwise at
// its largest entry.
ModeShape anchored(const ModeShape& shape, const std::string& reference) {
  if (shape.contains(reference)) return shape.rereferenced(reference);
  std::string best = shape.entries.begin()->first;
  for (const auto& [id, p] : shape.entries) {
    if (p.magnitude > shape.at(best).magnitude) best = id;
  }
  return shape.rereferenced(best);
}

}  // namespace

void GeoPoint::validate() const {
  if (!(latitude >= -90.0 && latitude <= 90.0)) {
    throw Error(ErrorCode::invalid_input, "latitude outside [-90, 90]");
  }
  if (!(longitude > -180.0 && longitude <= 180.0)) {
    throw Error(ErrorCode::invalid_input, "longitude outside (-180, 180]");
  }
}

GeoPoint triangulate(const std::vector<RankedDiff>& candidates, const GeoMap& geo) {
  std::vector<Vec3> points;
  std::vector<double> weights;
  for (const auto& c : candidates) {
    const auto it = geo.find(c.channel);
    if (it == geo.end()) continue;
    it->second.validate();
    if (!(c.abs_diff >= 0.0) || !std::isfinite(c.abs_diff)) {
      throw Error(ErrorCode::invalid_input, "triangulation weights must be finite and >= 0");
    }
    points.push_back(to_unit(it->second));
    weights.push_back(c.abs_diff);
  }
  if (points.size() < 2) {
    throw Error(ErrorCode::invalid_input, "triangulation needs at least two geolocated candidates");
  }
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  if (!(wsum > 0.0)) throw Error(ErrorCode::degenerate_weights, "all triangulation weights are zero");

  Vec3 c{0.0, 0.0, 0.0};
  for (const auto& p : points) {
    for (int k = 0; k < 3; ++k) c[k] += p[k];
  }
  const double norm = std::hypot(c[0], c[1], c[2]);
  if (!(norm > 1e-12)) {
    throw Error(ErrorCode::degenerate_weights, "candidates have no well-defined centroid");
  }
  const double lat0 = std::asin(std::clamp(c[2] / norm, -1.0, 1.0));
  const double lon0 = std::atan2(c[1], c[0]);

  // Orthographic projection onto the plane tangent at (lat0, lon0).
  double x = 0.0;
  double y = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const double lat = std::asin(std::clamp(p[2], -1.0, 1.0));
    const double dlon = std::atan2(p[1], p[0]) - lon0;
    const double px = std::cos(lat) * std::sin(dlon);
    const double py = std::cos(lat0) * std::sin(lat) - std::sin(lat0) * std::cos(lat) * std::cos(dlon);
    x += weights[i] * px;
    y += weights[i] * py;
  }
  x /= wsum;
  y /= wsum;

  const double rho = std::hypot(x, y);
  GeoPoint out;
  if (rho < 1e-15) {
    out.latitude = rad_to_deg(lat0);
    out.longitude = wrap_degrees(rad_to_deg(lon0));
    return out;
  }
  const double cc = std::asin(std::min(rho, 1.0));
  out.latitude = rad_to_deg(
      std::asin(std::cos(cc) * std::sin(lat0) + y * std::sin(cc) * std::cos(lat0) / rho));
  out.longitude = wrap_degrees(rad_to_deg(
      lon0 + std::atan2(x * std::sin(cc),
                        rho * std::cos(cc) * std::cos(lat0) - y * std::sin(cc) * std::sin(lat0))));
  return out;
}

void PipelineConfig::validate() const {
  if (!(band.lo > 0.0 && band.lo < band.hi) || !std::isfinite(band.hi)) {
    throw Error(ErrorCode::invalid_input, "band must satisfy 0 < lo < hi");
  }
  if (!(welch_segment_seconds >= 0.0) || !std::isfinite(welch_segment_seconds)) {
    throw Error(ErrorCode::invalid_input, "welch_segment_seconds must be >= 0");
  }
  if (!(threshold_fraction >= 0.0 && threshold_fraction <= 1.0)) {
    throw Error(ErrorCode::invalid_input, "threshold_fraction must lie in [0, 1]");
  }
  if (!(ratio_k > 1.0) || !std::isfinite(ratio_k)) {
    throw Error(ErrorCode::invalid_input, "ratio_k must exceed 1");
  }
  if (!(min_angle > 0.0) || !std::isfinite(min_angle)) {
    throw Error(ErrorCode::invalid_input, "min_angle must be positive");
  }
  if (!(mode_tol > 0.0) || !std::isfinite(mode_tol)) {
    throw Error(ErrorCode::invalid_input, "mode_tol must be positive");
  }
  if (ringdown_order == 1) throw Error(ErrorCode::invalid_input, "ringdown_order must be 0 or >= 2");
  if (!(ringdown_min_energy >= 0.0 && ringdown_min_energy <= 1.0)) {
    throw Error(ErrorCode::invalid_input, "ringdown_min_energy must lie in [0, 1]");
  }
  if (!(min_prominence >= 0.0) || !std::isfinite(min_prominence)) {
    throw Error(ErrorCode::invalid_input, "min_prominence must be >= 0");
  }
  if (reference_channel && reference_channel->empty()) {
    throw Error(ErrorCode::invalid_input, "reference_channel must not be empty");
  }
}

LocationReport locate_source(const ChannelSet& forced_window, const NaturalSource& natural,
                             const PipelineConfig& config, const std::optional<GeoMap>& geo) {
  LocationReport report;
  report.config = config;
  auto note = [&](const char* stage, std::string message) {
    report.diagnostics.push_back({stage, std::move(message)});
  };

  staged("config", [&] { config.validate(); });
  ChannelSet forced = staged("input", [&] {
    check_consistent(forced_window);
    config.band.validate_for(forced_window.front().sample_rate);
    if (!natural.ringdown && !natural.baseline) {
      throw Error(ErrorCode::invalid_input, "no ring-down data and no baseline shape supplied");
    }
    return forced_window;
  });
  const double fs = forced.front().sample_rate;
  const double t0 = forced.front().start_time;
  note("input", "forced window " + fmt(t0) + " s to " +
                    fmt(t0 + static_cast<double>(forced.front().size()) / fs) + " s, " +
                    std::to_string(forced.size()) + " channels at " + fmt(fs) + " Hz");

  const bool common_mode = config.remove_common_mode && forced.size() >= kMinChannelsForCommonMode;
  if (config.remove_common_mode && !common_mode) {
    note("input", "common-mode removal skipped: fewer than 3 channels");
  }
  if (common_mode) forced = remove_common_mode(forced);

  WelchOptions welch;
  if (config.welch_segment_seconds > 0.0) {
    welch.segment_length = static_cast<std::size_t>(std::llround(config.welch_segment_seconds * fs));
  }

  // Step 1a: forcing frequency.
  SpectralPeak peak;
  try {
    peak = staged("frequency", [&] { return find_spectral_peak(forced, config.band, welch); });
  } catch (const Error& e) {
    if (e.code() != ErrorCode::no_peak) throw;
    note("frequency", std::string("no spectral peak in band: ") + e.what());
    return report;
  }
  report.forcing_frequency = peak.frequency;
  report.peak_prominence = peak.prominence;
  note("frequency", "peak at " + fmt(peak.frequency) + " Hz, prominence " + fmt(peak.prominence));
  if (peak.prominence < config.min_prominence) {
    note("frequency", "no spectral peak: prominence " + fmt(peak.prominence) + " below " +
                          fmt(config.min_prominence));
    return report;
  }

  // Step 1b: forced mode shape.
  const std::string reference = staged("forced-shape", [&] {
    return config.reference_channel ? *config.reference_channel
                                    : strongest_channel(forced, peak.frequency, welch);
  });
  report.forced_shape = staged("forced-shape", [&] {
    return spectral_mode_shape(forced, peak.frequency, reference, welch);
  });

  // Step 1c: natural mode shape.
  if (natural.ringdown) {
    if (natural.baseline) note("natural-shape", "baseline shape ignored: ring-down data take precedence");
    const ModalEstimate mode = staged("ringdown", [&] {
      ChannelSet ring = *natural.ringdown;
      check_consistent(ring);
      if (common_mode && ring.size() >= kMinChannelsForCommonMode) ring = remove_common_mode(ring);
      ring = demeaned(ring);
      const auto modes = matrix_pencil(ring, config.ringdown_order);
      std::vector<ModalEstimate> strong;
      for (const auto& m : modes) {
        if (m.energy >= config.ringdown_min_energy * modes.front().energy) strong.push_back(m);
      }
      if (strong.size() < modes.size()) {
        note("ringdown", std::to_string(modes.size() - strong.size()) + " of " +
                             std::to_string(modes.size()) + " modes below the energy floor");
      }
      return select_mode(strong, peak.frequency, config.mode_tol);
    });
    report.natural_origin = "ringdown";
    report.natural_frequency = mode.frequency;
    report.natural_damping = mode.damping_ratio;
    report.natural_shape = anchored(mode.shape, reference);
    note("ringdown", "selected mode " + fmt(mode.frequency) + " Hz, damping " +
                         fmt(mode.damping_ratio) + ", fit error " + fmt(mode.fit_error));
  } else {
    report.natural_origin = "baseline";
    report.natural_shape = staged("natural-shape", [&] {
      ModeShape shape = *natural.baseline;
      shape.validate();
      if (common_mode) {
        std::set<std::string> shared;
        for (const auto& [id, p] : shape.entries) {
          if (report.forced_shape.contains(id)) shared.insert(id);
        }
        if (shared.size() < kMinChannelsForCommonMode) {
          throw Error(ErrorCode::invalid_input, "baseline shares fewer than 3 channels with the data");
        }
        shape = without_common_mode(shape, shared);
      }
      return anchored(shape, reference);
    });
    report.natural_frequency = report.natural_shape.frequency;
    if (report.natural_frequency > 0.0 &&
        std::abs(report.natural_frequency - peak.frequency) > config.mode_tol) {
      note("natural-shape", "baseline frequency " + fmt(report.natural_frequency) +
                                " Hz differs from the forcing frequency by more than mode_tol");
    }
  }

  // Steps 2-4.
  std::set<std::string> selected = staged("threshold", [&] {
    return magnitude_filter(report.forced_shape, config.threshold_fraction);
  });
  for (auto it = selected.begin(); it != selected.end();) {
    if (!report.natural_shape.contains(*it)) {
      note("threshold", "channel '" + *it + "' has no natural-shape entry and is skipped");
      it = selected.erase(it);
    } else {
      ++it;
    }
  }
  note("threshold", std::to_string(selected.size()) + " of " +
                        std::to_string(report.forced_shape.entries.size()) +
                        " channels at or above " + fmt(config.threshold_fraction) + " of peak magnitude");

  report.alignment = staged("align", [&] {
    AlignOptions opts;
    opts.weighted = config.weighted_alignment;
    return align_shapes(report.forced_shape, report.natural_shape, selected, opts);
  });
  report.ranking = rank_differences(report.alignment);
  report.verdict = staged("verdict", [&] {
    return dominance_verdict(report.ranking, config.ratio_k, config.min_angle);
  });

  if (report.verdict.kind == VerdictKind::ambiguous && geo) {
    std::vector<RankedDiff> candidates;
    for (const auto& r : report.ranking) {
      for (const auto& id : report.verdict.channels) {
        if (r.channel == id) candidates.push_back(r);
      }
    }
    try {
      report.triangulated = triangulate(candidates, *geo);
      note("triangulate",
           "weighted-centroid placeholder: angle-difference weights on a local tangent plane");
    } catch (const Error& e) {
      note("triangulate", std::string("triangulation skipped: ") + e.what());
    }
  }
  return report;
}

}  // namespace modeloc
