#include "modeloc/types.hpp"

#include <algorithm>
#include <cmath>

#include "modeloc/angles.hpp"
#include "modeloc/errors.hpp"

namespace modeloc {

void ChannelSeries::validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw Error(ErrorCode::invalid_input,
                "channel '" + channel_id + "': sample rate must be positive");
  }
  if (samples.size() < 2) {
    throw Error(ErrorCode::degenerate_input,
                "channel '" + channel_id + "': need at least 2 samples");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) {
      throw Error(ErrorCode::invalid_input, "channel '" + channel_id +
                                                "': non-finite sample at index " +
                                                std::to_string(i));
    }
  }
}

void FrequencyBand::validate_for(double sample_rate) const {
  if (!(lo > 0.0 && lo < hi && hi < sample_rate / 2.0)) {
    throw Error(ErrorCode::invalid_input,
                "frequency band must satisfy 0 < lo < hi < Nyquist (" +
                    std::to_string(sample_rate / 2.0) + " Hz)");
  }
}

ComplexPhasor ComplexPhasor::from_complex(std::complex<double> z) {
  return {std::abs(z), arg_degrees(z)};
}

std::complex<double> ComplexPhasor::to_complex() const {
  return polar_degrees(magnitude, angle_deg);
}

const ComplexPhasor& ModeShape::at(const std::string& id) const {
  auto it = entries.find(id);
  if (it == entries.end()) {
    throw Error(ErrorCode::invalid_input, "channel '" + id + "' not in mode shape");
  }
  return it->second;
}

double ModeShape::max_magnitude() const {
  double m = 0.0;
  for (const auto& [id, p] : entries) m = std::max(m, p.magnitude);
  return m;
}

ModeShape ModeShape::normalized() const {
  ModeShape out = *this;
  const double m = max_magnitude();
  if (m > 0.0) {
    for (auto& [id, p] : out.entries) p.magnitude /= m;
  }
  return out;
}

ModeShape ModeShape::rereferenced(const std::string& new_reference) const {
  const double offset = at(new_reference).angle_deg;
  ModeShape out = *this;
  out.reference = new_reference;
  for (auto& [id, p] : out.entries) {
    p.angle_deg = id == new_reference ? 0.0 : wrap_degrees(p.angle_deg - offset);
  }
  return out;
}

void ModeShape::validate() const {
  if (entries.empty()) throw Error(ErrorCode::invalid_input, "mode shape has no entries");
  auto ref = entries.find(reference);
  if (ref == entries.end()) {
    throw Error(ErrorCode::invalid_input, "mode shape reference '" + reference + "' missing");
  }
  if (ref->second.angle_deg != 0.0) {
    throw Error(ErrorCode::invalid_input, "mode shape reference angle must be 0");
  }
  for (const auto& [id, p] : entries) {
    if (!std::isfinite(p.magnitude) || p.magnitude < 0.0) {
      throw Error(ErrorCode::invalid_input, "channel '" + id + "': bad magnitude");
    }
    if (!std::isfinite(p.angle_deg) || p.angle_deg <= -180.0 || p.angle_deg > 180.0) {
      throw Error(ErrorCode::invalid_input, "channel '" + id + "': angle not wrapped");
    }
  }
}

}  // namespace modeloc
