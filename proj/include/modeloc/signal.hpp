#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "modeloc/types.hpp"

namespace modeloc {

/// Welch segmentation. A zero segment length selects the longest power of
/// two that still yields at least six half-overlapping segments.
struct WelchOptions {
  std::size_t segment_length = 0;
  double overlap = 0.5;
};

std::size_t default_segment_length(std::size_t n_samples);

/// Removes the mean and least-squares linear trend, then applies a Hann taper.
ChannelSeries condition(const ChannelSeries& series);

/// Common-mode removal: subtracts the across-channel mean at every sample.
/// Channels must share sample rate and length.
ChannelSet remove_common_mode(const ChannelSet& channels);

std::vector<double> hann_window(std::size_t n);

/// Single-bin DFT at `f_target`, scaled so A*cos(2*pi*f*t + phi) sampled over
/// whole cycles yields magnitude A and angle phi (t = 0 at the first sample).
ComplexPhasor goertzel_phasor(const ChannelSeries& series, double f_target);

/// Raw Goertzel sum X(f) = sum_n x[n] exp(-j 2 pi f n / fs).
std::complex<double> goertzel(std::span<const double> x, double f_target, double sample_rate);

/// One-sided periodogram (mean-square per Hz) of a single record.
struct Spectrum {
  std::vector<double> frequency;  // Hz
  std::vector<double> power;      // units^2 / Hz
  double resolution = 0.0;        // Hz between bins
};

Spectrum periodogram(std::span<const double> x, double sample_rate);

/// Channel-averaged Welch PSD.
Spectrum welch_psd(const ChannelSet& channels, const WelchOptions& options = {});

struct SpectralPeak {
  double frequency = 0.0;   // Hz, parabolic-refined
  double power = 0.0;       // averaged PSD at the peak bin
  double prominence = 0.0;  // peak power over the median in-band power
};

/// Peak of the channel-averaged Welch PSD restricted to `band`.
SpectralPeak find_spectral_peak(const ChannelSet& channels, const FrequencyBand& band,
                                const WelchOptions& options = {});

double dominant_frequency(const ChannelSet& channels, const FrequencyBand& band,
                          const WelchOptions& options = {});

/// Welch-averaged cross-spectral phasors at `f_target`, relative to `reference`.
/// Magnitudes are amplitude-calibrated (a cosine of amplitude A reports A).
ModeShape spectral_mode_shape(const ChannelSet& channels, double f_target,
                              const std::string& reference, const WelchOptions& options = {});

/// Channel whose Welch amplitude at `f_target` is largest (first on ties).
std::string strongest_channel(const ChannelSet& channels, double f_target,
                              const WelchOptions& options = {});

/// Throws unless the set is non-empty and all channels share rate and length.
void check_consistent(const ChannelSet& channels, bool require_equal_length = true);

}  // namespace modeloc
