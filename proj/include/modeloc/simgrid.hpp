#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "modeloc/types.hpp"

namespace modeloc {

/// Linearized swing model  M d2(delta)/dt2 + D d(delta)/dt + L delta = P(t).
struct GridModel {
  std::vector<double> inertia;  // M, s^2/rad (scaled)
  std::vector<double> damping;  // D
  Eigen::MatrixXd laplacian;    // synchronizing coefficients
  std::vector<std::string> labels;

  std::size_t size() const { return inertia.size(); }

  /// Throws Error(model_invariant) when the model is malformed or disconnected.
  void validate() const;
};

/// Default channel label of bus `index` ("bus0", "bus1", ...).
std::string bus_label(std::size_t index);

/// Sinusoidal power injection at one bus, active for t < stop_time.
struct Forcing {
  std::size_t bus = 0;
  double frequency = 0.0;  // Hz
  double amplitude = 0.0;  // per-unit power
  double phase_deg = 0.0;
  double stop_time = std::numeric_limits<double>::infinity();  // s

  void validate(std::size_t n_buses) const;
};

/// Oscillatory eigenmodes, sorted by frequency. Shapes are rotor-speed
/// components normalized to the largest-magnitude bus.
std::vector<ModalEstimate> natural_modes(const GridModel& model);

/// Steady-state frequency-deviation phasors (Hz) for the given forcing,
/// from a direct complex solve of (L - w^2 M + j w D) x = e_b u.
std::vector<std::complex<double>> frequency_response(const GridModel& model,
                                                     const Forcing& forcing);

struct SimulationOptions {
  std::optional<double> noise_snr_db;  // none = noiseless
  std::uint64_t seed = 0;
  /// Noise power is set against the mean signal power inside this time range
  /// (the whole record when absent).
  std::optional<std::pair<double, double>> snr_window;
  /// Initial rotor angles and speeds (zero when empty).
  std::vector<double> initial_angle;
  std::vector<double> initial_speed;
};

/// Sampled rotor angles and speeds at t_k = k / sample_rate.
struct StateTrajectory {
  double sample_rate = 0.0;
  Eigen::MatrixXd angle;  // samples x buses
  Eigen::MatrixXd speed;  // samples x buses, rad/s
};

StateTrajectory simulate_states(const GridModel& model, const Forcing& forcing, double duration,
                                double sample_rate, const SimulationOptions& options = {});

/// Per-bus frequency deviation speed / (2 pi) in Hz, optionally with white
/// measurement noise at the requested SNR (deterministic per seed).
ChannelSet simulate(const GridModel& model, const Forcing& forcing, double duration,
                    double sample_rate, const SimulationOptions& options = {});

struct Scenario {
  GridModel model;
  Forcing forcing;
  std::size_t source_bus = 0;
  ModalEstimate natural_mode;  // the lightly damped mode being excited
};

/// Random two-area network (stiff ring-plus-chords areas joined by two weak
/// tie lines, generators behind branch reactances, Kron-reduced to the
/// generator buses). The forced mode is the inter-area mode, with damping
/// ratio below 5%. Deterministic per seed.
Scenario make_scenario(std::size_t n_buses, std::uint64_t seed, double resonance_offset);

/// Time layout used for generated events: forcing from t = 0, a settling
/// period, a steady forced window, then removal and a ring-down window.
struct EventTimeline {
  double forced_start = 120.0;
  double forced_end = 240.0;  // forcing is removed here
  double ringdown_end = 280.0;
  double sample_rate = 10.0;
};

/// Total energy 0.5 w'Mw + 0.5 d'Ld at every sample of a trajectory.
std::vector<double> swing_energy(const GridModel& model, const StateTrajectory& states);

}  // namespace modeloc
