#include "modeloc/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <set>

#include <unsupported/Eigen/FFT>

#include "modeloc/angles.hpp"
#include "modeloc/errors.hpp"

namespace modeloc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_target_frequency(double f_target, double sample_rate) {
  if (!(f_target > 0.0 && f_target < sample_rate / 2.0)) {
    throw Error(ErrorCode::invalid_frequency,
                "target frequency " + std::to_string(f_target) + " Hz outside (0, " +
                    std::to_string(sample_rate / 2.0) + ")");
  }
}

struct Segmentation {
  std::size_t length = 0;
  std::size_t hop = 0;
  std::size_t count = 0;
};

Segmentation segment(std::size_t n, const WelchOptions& options) {
  Segmentation s;
  s.length = options.segment_length == 0 ? default_segment_length(n) : options.segment_length;
  if (s.length < 2 || s.length > n) {
    throw Error(ErrorCode::insufficient_data,
                "need at least one full Welch segment of " + std::to_string(s.length) +
                    " samples, have " + std::to_string(n));
  }
  if (!(options.overlap >= 0.0 && options.overlap < 1.0)) {
    throw Error(ErrorCode::invalid_input, "Welch overlap must lie in [0, 1)");
  }
  const auto step = static_cast<std::size_t>(std::llround(s.length * (1.0 - options.overlap)));
  s.hop = std::max<std::size_t>(1, step);
  s.count = (n - s.length) / s.hop + 1;
  return s;
}

// Mean-removed, Hann-tapered copy of x[start, start + length).
std::vector<double> taper_segment(std::span<const double> x, std::size_t start,
                                  const std::vector<double>& window) {
  const std::size_t len = window.size();
  double mean = 0.0;
  for (std::size_t i = 0; i < len; ++i) mean += x[start + i];
  mean /= static_cast<double>(len);
  std::vector<double> out(len);
  for (std::size_t i = 0; i < len; ++i) out[i] = (x[start + i] - mean) * window[i];
  return out;
}

// Amplitude-calibrated DFT of every Welch segment at one frequency.
std::vector<std::complex<double>> segment_phasors(const ChannelSeries& ch, double f,
                                                  const Segmentation& seg,
                                                  const std::vector<double>& window) {
  const double gain = 2.0 / std::accumulate(window.begin(), window.end(), 0.0);
  std::vector<std::complex<double>> out;
  out.reserve(seg.count);
  for (std::size_t k = 0; k < seg.count; ++k) {
    auto tapered = taper_segment(ch.samples, k * seg.hop, window);
    out.push_back(gain * goertzel(tapered, f, ch.sample_rate));
  }
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::size_t default_segment_length(std::size_t n_samples) {
  // n_segments = (n - L) / (L / 2) + 1 >= 6  <=>  L <= n / 3.5
  const double limit = static_cast<double>(n_samples) / 3.5;
  std::size_t length = 1;
  while (static_cast<double>(length * 2) <= limit) length *= 2;
  if (length < 8) length = std::min<std::size_t>(n_samples, 8);
  return length;
}

void check_consistent(const ChannelSet& channels, bool require_equal_length) {
  if (channels.empty()) throw Error(ErrorCode::invalid_input, "no channels supplied");
  std::set<std::string> ids;
  for (const auto& ch : channels) {
    ch.validate();
    if (!ids.insert(ch.channel_id).second) {
      throw Error(ErrorCode::invalid_input, "duplicate channel id '" + ch.channel_id + "'");
    }
    const double rate = channels.front().sample_rate;
    if (std::abs(ch.sample_rate - rate) > 1e-9 * rate) {
      throw Error(ErrorCode::invalid_input, "inconsistent sample rates across channels");
    }
    if (require_equal_length && ch.size() != channels.front().size()) {
      throw Error(ErrorCode::invalid_input,
                  "unequal channel lengths ('" + ch.channel_id + "' has " +
                      std::to_string(ch.size()) + ", expected " +
                      std::to_string(channels.front().size()) + ")");
    }
  }
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return w;
}

ChannelSeries condition(const ChannelSeries& series) {
  if (series.samples.size() < 2) {
    throw Error(ErrorCode::degenerate_input, "cannot condition fewer than 2 samples");
  }
  const std::size_t n = series.size();
  const double t_mean = 0.5 * static_cast<double>(n - 1);
  double x_mean = 0.0;
  for (double v : series.samples) x_mean += v;
  x_mean /= static_cast<double>(n);

  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = static_cast<double>(i) - t_mean;
    sxy += dt * (series.samples[i] - x_mean);
    sxx += dt * dt;
  }
  const double slope = sxy / sxx;

  ChannelSeries out = series;
  const auto window = hann_window(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = static_cast<double>(i) - t_mean;
    out.samples[i] = (series.samples[i] - x_mean - slope * dt) * window[i];
  }
  return out;
}

ChannelSet remove_common_mode(const ChannelSet& channels) {
  check_consistent(channels);
  const std::size_t n = channels.front().size();
  std::vector<double> mean(n, 0.0);
  for (const auto& ch : channels) {
    for (std::size_t i = 0; i < n; ++i) mean[i] += ch.samples[i];
  }
  const double count = static_cast<double>(channels.size());
  for (double& m : mean) m /= count;

  ChannelSet out = channels;
  for (auto& ch : out) {
    for (std::size_t i = 0; i < n; ++i) ch.samples[i] -= mean[i];
  }
  return out;
}

std::complex<double> goertzel(std::span<const double> x, double f_target, double sample_rate) {
  const double omega = kTwoPi * f_target / sample_rate;
  const double coeff = 2.0 * std::cos(omega);
  double s1 = 0.0;
  double s2 = 0.0;
  for (double v : x) {
    const double s0 = v + coeff * s1 - s2;
    s2 = s1;
    s1 = s0;
  }
  if (x.empty()) return {0.0, 0.0};
  const std::complex<double> y = s1 - std::polar(1.0, -omega) * s2;
  return std::polar(1.0, -omega * static_cast<double>(x.size() - 1)) * y;
}

ComplexPhasor goertzel_phasor(const ChannelSeries& series, double f_target) {
  check_target_frequency(f_target, series.sample_rate);
  const auto x = goertzel(series.samples, f_target, series.sample_rate);
  return ComplexPhasor::from_complex(x * (2.0 / static_cast<double>(series.size())));
}

Spectrum periodogram(std::span<const double> x, double sample_rate) {
  const std::size_t n = x.size();
  if (n < 2) throw Error(ErrorCode::degenerate_input, "periodogram needs at least 2 samples");
  Eigen::FFT<double> fft;
  std::vector<double> in(x.begin(), x.end());
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, in);

  Spectrum out;
  out.resolution = sample_rate / static_cast<double>(n);
  const std::size_t half = n / 2;
  for (std::size_t k = 0; k <= half; ++k) {
    double p = std::norm(spec[k]) / (sample_rate * static_cast<double>(n));
    const bool unpaired = k == 0 || (n % 2 == 0 && k == half);
    if (!unpaired) p *= 2.0;
    out.frequency.push_back(static_cast<double>(k) * out.resolution);
    out.power.push_back(p);
  }
  return out;
}

Spectrum welch_psd(const ChannelSet& channels, const WelchOptions& options) {
  check_consistent(channels);
  const auto seg = segment(channels.front().size(), options);
  const auto window = hann_window(seg.length);
  double w2 = 0.0;
  for (double w : window) w2 += w * w;
  const double fs = channels.front().sample_rate;

  Eigen::FFT<double> fft;
  const std::size_t half = seg.length / 2;
  Spectrum out;
  out.resolution = fs / static_cast<double>(seg.length);
  out.power.assign(half + 1, 0.0);
  for (std::size_t k = 0; k <= half; ++k) out.frequency.push_back(k * out.resolution);

  std::vector<std::complex<double>> spec;
  for (const auto& ch : channels) {
    for (std::size_t s = 0; s < seg.count; ++s) {
      auto tapered = taper_segment(ch.samples, s * seg.hop, window);
      fft.fwd(spec, tapered);
      for (std::size_t k = 0; k <= half; ++k) {
        double p = std::norm(spec[k]) / (fs * w2);
        const bool unpaired = k == 0 || (seg.length % 2 == 0 && k == half);
        if (!unpaired) p *= 2.0;
        out.power[k] += p;
      }
    }
  }
  const double norm = static_cast<double>(seg.count * channels.size());
  for (double& p : out.power) p /= norm;
  return out;
}

SpectralPeak find_spectral_peak(const ChannelSet& channels, const FrequencyBand& band,
                                const WelchOptions& options) {
  check_consistent(channels);
  const double fs = channels.front().sample_rate;
  band.validate_for(fs);
  const auto seg = segment(channels.front().size(), options);
  const auto window = hann_window(seg.length);
  double w2 = 0.0;
  for (double w : window) w2 += w * w;

  // In-band PSD on a 4x zero-padded grid, one bin either side for interpolation.
  const double df = fs / static_cast<double>(4 * seg.length);
  const auto k_lo = static_cast<long>(std::ceil(band.lo / df));
  const auto k_hi = static_cast<long>(std::floor(band.hi / df));
  std::vector<double> freqs;
  for (long k = std::max(1L, k_lo - 1); k <= k_hi + 1; ++k) {
    const double f = static_cast<double>(k) * df;
    if (f < fs / 2.0) freqs.push_back(f);
  }

  std::vector<double> power(freqs.size(), 0.0);
  for (const auto& ch : channels) {
    for (std::size_t s = 0; s < seg.count; ++s) {
      auto tapered = taper_segment(ch.samples, s * seg.hop, window);
      for (std::size_t i = 0; i < freqs.size(); ++i) {
        power[i] += 2.0 * std::norm(goertzel(tapered, freqs[i], fs)) / (fs * w2);
      }
    }
  }
  const double norm = static_cast<double>(seg.count * channels.size());
  for (double& p : power) p /= norm;

  std::vector<std::size_t> in_band;
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    if (freqs[i] >= band.lo && freqs[i] <= band.hi) in_band.push_back(i);
  }
  if (in_band.empty()) {
    throw Error(ErrorCode::insufficient_data, "frequency band narrower than the spectral grid");
  }

  std::size_t best = in_band.front();
  double p_min = power[best];
  std::vector<double> band_power;
  for (std::size_t i : in_band) {
    if (power[i] > power[best]) best = i;
    p_min = std::min(p_min, power[i]);
    band_power.push_back(power[i]);
  }
  const double p_max = power[best];
  if (!(p_max > 0.0) || p_max - p_min <= 1e-12 * p_max) {
    throw Error(ErrorCode::no_peak, "spectrum is flat inside the search band");
  }

  double f_peak = freqs[best];
  if (best > 0 && best + 1 < freqs.size() && power[best - 1] > 0.0 && power[best + 1] > 0.0) {
    const double a = std::log(power[best - 1]);
    const double b = std::log(power[best]);
    const double c = std::log(power[best + 1]);
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) {
      const double p = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
      f_peak += p * df;
    }
  }
  f_peak = std::clamp(f_peak, band.lo, band.hi);

  const double med = median(band_power);
  return {f_peak, p_max, med > 0.0 ? p_max / med : std::numeric_limits<double>::infinity()};
}

double dominant_frequency(const ChannelSet& channels, const FrequencyBand& band,
                          const WelchOptions& options) {
  return find_spectral_peak(channels, band, options).frequency;
}

ModeShape spectral_mode_shape(const ChannelSet& channels, double f_target,
                              const std::string& reference, const WelchOptions& options) {
  check_consistent(channels);
  const auto ref_it = std::find_if(channels.begin(), channels.end(),
                                   [&](const ChannelSeries& c) { return c.channel_id == reference; });
  if (ref_it == channels.end()) {
    throw Error(ErrorCode::invalid_input, "reference channel '" + reference + "' not found");
  }
  check_target_frequency(f_target, channels.front().sample_rate);
  const auto seg = segment(channels.front().size(), options);
  const auto window = hann_window(seg.length);

  const auto ref_phasors = segment_phasors(*ref_it, f_target, seg, window);
  ModeShape shape;
  shape.frequency = f_target;
  shape.reference = reference;
  for (const auto& ch : channels) {
    const auto phasors = ch.channel_id == reference ? ref_phasors
                                                    : segment_phasors(ch, f_target, seg, window);
    double auto_power = 0.0;
    std::complex<double> cross{0.0, 0.0};
    for (std::size_t s = 0; s < seg.count; ++s) {
      auto_power += std::norm(phasors[s]);
      cross += phasors[s] * std::conj(ref_phasors[s]);
    }
    ComplexPhasor p;
    p.magnitude = std::sqrt(auto_power / static_cast<double>(seg.count));
    p.angle_deg = ch.channel_id == reference ? 0.0 : arg_degrees(cross);
    shape.entries[ch.channel_id] = p;
  }
  return shape;
}

std::string strongest_channel(const ChannelSet& channels, double f_target,
                              const WelchOptions& options) {
  check_consistent(channels);
  check_target_frequency(f_target, channels.front().sample_rate);
  const auto seg = segment(channels.front().size(), options);
  const auto window = hann_window(seg.length);
  std::string best;
  double best_power = -1.0;
  for (const auto& ch : channels) {
    double power = 0.0;
    for (const auto& p : segment_phasors(ch, f_target, seg, window)) power += std::norm(p);
    if (power > best_power) {
      best_power = power;
      best = ch.channel_id;
    }
  }
  return best;
}

}  // namespace modeloc
