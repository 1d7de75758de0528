#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "modeloc/types.hpp"

namespace testing_support {

inline constexpr double kPi = std::numbers::pi;

inline modeloc::ChannelSeries tone(const std::string& id, double fs, double seconds, double freq,
                                   double amp, double phase_deg, double delay = 0.0) {
  modeloc::ChannelSeries ch;
  ch.channel_id = id;
  ch.sample_rate = fs;
  const auto n = static_cast<std::size_t>(std::llround(fs * seconds));
  ch.samples.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / fs - delay;
    ch.samples[k] = amp * std::cos(2.0 * kPi * freq * t + phase_deg * kPi / 180.0);
  }
  return ch;
}

inline modeloc::ChannelSeries noise(const std::string& id, double fs, std::size_t n, double sigma,
                                    std::mt19937_64& rng) {
  modeloc::ChannelSeries ch;
  ch.channel_id = id;
  ch.sample_rate = fs;
  std::normal_distribution<double> g(0.0, sigma);
  ch.samples.resize(n);
  for (auto& v : ch.samples) v = g(rng);
  return ch;
}

/// Plain O(N) DFT at one frequency, accumulated in long double.
inline std::complex<double> direct_dft(const std::vector<double>& x, double f, double fs) {
  long double re = 0.0L;
  long double im = 0.0L;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const long double arg = -2.0L * std::numbers::pi_v<long double> * f * n / fs;
    re += x[n] * std::cos(arg);
    im += x[n] * std::sin(arg);
  }
  return {static_cast<double>(re), static_cast<double>(im)};
}

/// Smallest absolute angular distance in degrees.
inline double angle_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

}  // namespace testing_support
