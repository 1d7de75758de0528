#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace modeloc {

/// One PMU channel: uniformly sampled frequency deviation in Hz.
struct ChannelSeries {
  std::string channel_id;
  std::vector<double> samples;
  double sample_rate = 0.0;  // Hz
  double start_time = 0.0;   // s, informational

  std::size_t size() const { return samples.size(); }
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }

  /// Throws Error(invalid_input / degenerate_input) when the invariants fail.
  void validate() const;
};

using ChannelSet = std::vector<ChannelSeries>;

struct FrequencyBand {
  double lo = 0.0;  // Hz
  double hi = 0.0;  // Hz

  /// Checks 0 < lo < hi < sample_rate / 2.
  void validate_for(double sample_rate) const;
};

/// Magnitude plus wrapped angle in degrees.
struct ComplexPhasor {
  double magnitude = 0.0;
  double angle_deg = 0.0;

  static ComplexPhasor from_complex(std::complex<double> z);
  std::complex<double> to_complex() const;
};

/// Per-channel phasors at one oscillation frequency. Angles are relative to
/// `reference`, whose angle is exactly zero.
struct ModeShape {
  double frequency = 0.0;  // Hz
  std::string reference;
  std::map<std::string, ComplexPhasor> entries;

  bool contains(const std::string& id) const { return entries.count(id) != 0; }
  const ComplexPhasor& at(const std::string& id) const;
  double max_magnitude() const;

  /// Same shape with magnitudes divided by the largest magnitude.
  ModeShape normalized() const;

  /// Rotates every angle so that `new_reference` sits at zero.
  ModeShape rereferenced(const std::string& new_reference) const;

  void validate() const;
};

/// One identified oscillatory mode.
struct ModalEstimate {
  double frequency = 0.0;     // Hz
  double damping_ratio = 0.0; // fraction of critical, negative for growing modes
  ModeShape shape;
  double fit_error = 0.0;     // normalized RMS reconstruction error
  double energy = 0.0;        // ranking score used by matrix_pencil
  double reference_phase_deg = 0.0;  // absolute residue angle of the reference at the first sample
};

}  // namespace modeloc
