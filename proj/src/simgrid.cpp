#include "modeloc/simgrid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "modeloc/angles.hpp"
#include "modeloc/errors.hpp"

namespace modeloc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool connected(const Eigen::MatrixXd& lap) {
  const auto n = lap.rows();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::queue<Eigen::Index> todo;
  todo.push(0);
  seen[0] = true;
  Eigen::Index count = 1;
  while (!todo.empty()) {
    const auto i = todo.front();
    todo.pop();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i && lap(i, j) != 0.0 && !seen[static_cast<std::size_t>(j)]) {
        seen[static_cast<std::size_t>(j)] = true;
        ++count;
        todo.push(j);
      }
    }
  }
  return count == n;
}

// Continuous-time matrix of x = [delta; speed] (2n states) augmented with a
// two-state oscillator [c; s] that generates cos / sin of the forcing phase.
Eigen::MatrixXd augmented_system(const GridModel& model, const Forcing& forcing) {
  const auto n = static_cast<Eigen::Index>(model.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n + 2, 2 * n + 2);
  a.block(0, n, n, n) = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = model.inertia[static_cast<std::size_t>(i)];
    a.block(n + i, 0, 1, n) = -model.laplacian.row(i) / m;
    a(n + i, n + i) = -model.damping[static_cast<std::size_t>(i)] / m;
  }
  const auto b = static_cast<Eigen::Index>(forcing.bus);
  a(n + b, 2 * n) = forcing.amplitude / model.inertia[forcing.bus];
  const double w = kTwoPi * forcing.frequency;
  a(2 * n, 2 * n + 1) = -w;
  a(2 * n + 1, 2 * n) = w;
  return a;
}

template <class Rng>
double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

std::string bus_label(std::size_t index) { return "bus" + std::to_string(index); }

void GridModel::validate() const {
  const std::size_t n = inertia.size();
  if (n < 2) throw Error(ErrorCode::model_invariant, "model needs at least two buses");
  if (damping.size() != n || static_cast<std::size_t>(laplacian.rows()) != n ||
      static_cast<std::size_t>(laplacian.cols()) != n) {
    throw Error(ErrorCode::model_invariant, "model dimensions disagree");
  }
  if (!labels.empty() && labels.size() != n) {
    throw Error(ErrorCode::model_invariant, "label count does not match bus count");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(inertia[i] > 0.0) || !std::isfinite(inertia[i])) {
      throw Error(ErrorCode::model_invariant, "inertia must be positive");
    }
    if (!(damping[i] >= 0.0) || !std::isfinite(damping[i])) {
      throw Error(ErrorCode::model_invariant, "damping must be non-negative");
    }
  }
  const double scale = std::max(1.0, laplacian.cwiseAbs().maxCoeff());
  const auto nn = static_cast<Eigen::Index>(n);
  for (Eigen::Index i = 0; i < nn; ++i) {
    if (std::abs(laplacian.row(i).sum()) > 1e-12 * scale) {
      throw Error(ErrorCode::model_invariant, "laplacian row sums must vanish");
    }
    for (Eigen::Index j = 0; j < nn; ++j) {
      if (!std::isfinite(laplacian(i, j))) {
        throw Error(ErrorCode::model_invariant, "laplacian entries must be finite");
      }
      if (std::abs(laplacian(i, j) - laplacian(j, i)) > 1e-12 * scale) {
        throw Error(ErrorCode::model_invariant, "laplacian must be symmetric");
      }
      if (i != j && laplacian(i, j) > 0.0) {
        throw Error(ErrorCode::model_invariant, "laplacian off-diagonals must be non-positive");
      }
    }
  }
  if (!connected(laplacian)) throw Error(ErrorCode::model_invariant, "network is disconnected");
}

void Forcing::validate(std::size_t n_buses) const {
  if (bus >= n_buses) throw Error(ErrorCode::invalid_input, "forcing bus out of range");
  if (!(frequency > 0.0) || !std::isfinite(frequency)) {
    throw Error(ErrorCode::invalid_input, "forcing frequency must be positive");
  }
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
    throw Error(ErrorCode::invalid_input, "forcing amplitude must be non-negative");
  }
  if (!std::isfinite(phase_deg) || std::isnan(stop_time)) {
    throw Error(ErrorCode::invalid_input, "forcing phase and stop time must be numbers");
  }
}

std::vector<ModalEstimate> natural_modes(const GridModel& model) {
  model.validate();
  const std::size_t n = model.size();
  Forcing none;
  const Eigen::MatrixXd a = augmented_system(model, none).topLeftCorner(2 * n, 2 * n);
  Eigen::EigenSolver<Eigen::MatrixXd> eig(a, true);
  const Eigen::VectorXcd lambda = eig.eigenvalues();
  const Eigen::MatrixXcd vectors = eig.eigenvectors();
  const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());

  std::vector<ModalEstimate> out;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    // Rigid-body drift (a double zero eigenvalue) can pick up an O(sqrt(eps))
    // imaginary part, so anything that slow is not treated as oscillatory.
    if (!(lambda(k).imag() > 1e-6 * scale)) continue;
    ModalEstimate m;
    m.frequency = lambda(k).imag() / kTwoPi;
    m.damping_ratio = -lambda(k).real() / std::abs(lambda(k));
    const Eigen::VectorXcd speed = vectors.col(k).tail(static_cast<Eigen::Index>(n));
    std::size_t ref = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (std::abs(speed(static_cast<Eigen::Index>(i))) >
          std::abs(speed(static_cast<Eigen::Index>(ref)))) {
        ref = i;
      }
    }
    const std::complex<double> pivot = speed(static_cast<Eigen::Index>(ref));
    m.shape.frequency = m.frequency;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string id = model.labels.empty() ? bus_label(i) : model.labels[i];
      ComplexPhasor p = ComplexPhasor::from_complex(speed(static_cast<Eigen::Index>(i)) / pivot);
      if (i == ref) p.angle_deg = 0.0;
      m.shape.entries[id] = p;
      if (i == ref) m.shape.reference = id;
    }
    out.push_back(std::move(m));
  }
  std::sort(out.begin(), out.end(), [](const ModalEstimate& a, const ModalEstimate& b) {
    return a.frequency < b.frequency;
  });
  return out;
}

std::vector<std::complex<double>> frequency_response(const GridModel& model,
                                                     const Forcing& forcing) {
  model.validate();
  forcing.validate(model.size());
  const auto n = static_cast<Eigen::Index>(model.size());
  const double w = kTwoPi * forcing.frequency;
  Eigen::MatrixXcd z = model.laplacian.cast<std::complex<double>>();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    z(i, i) += std::complex<double>(-w * w * model.inertia[k], w * model.damping[k]);
  }
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  rhs(static_cast<Eigen::Index>(forcing.bus)) =
      polar_degrees(forcing.amplitude, forcing.phase_deg);
  const Eigen::VectorXcd angle = z.partialPivLu().solve(rhs);
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = std::complex<double>(0.0, w) * angle(i) / kTwoPi;
  }
  return out;
}

StateTrajectory simulate_states(const GridModel& model, const Forcing& forcing, double duration,
                                double sample_rate, const SimulationOptions& options) {
  model.validate();
  forcing.validate(model.size());
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate) || !(duration > 0.0) ||
      !std::isfinite(duration)) {
    throw Error(ErrorCode::invalid_input, "duration and sample rate must be positive");
  }
  const auto samples = static_cast<Eigen::Index>(std::llround(duration * sample_rate));
  if (samples < 64) {
    throw Error(ErrorCode::invalid_input, "simulation must produce at least 64 samples");
  }
  const auto n = static_cast<Eigen::Index>(model.size());
  for (const auto* v : {&options.initial_angle, &options.initial_speed}) {
    if (!v->empty() && v->size() != model.size()) {
      throw Error(ErrorCode::invalid_input, "initial state length does not match bus count");
    }
  }

  const double dt = 1.0 / sample_rate;
  const Eigen::MatrixXd a = augmented_system(model, forcing);
  const Eigen::MatrixXd step = (a * dt).exp();

  Eigen::VectorXd x = Eigen::VectorXd::Zero(2 * n + 2);
  for (std::size_t i = 0; i < options.initial_angle.size(); ++i) {
    x(static_cast<Eigen::Index>(i)) = options.initial_angle[i];
  }
  for (std::size_t i = 0; i < options.initial_speed.size(); ++i) {
    x(n + static_cast<Eigen::Index>(i)) = options.initial_speed[i];
  }
  const double phase = deg_to_rad(forcing.phase_deg);
  x(2 * n) = std::cos(phase);
  x(2 * n + 1) = std::sin(phase);
  bool forcing_on = true;
  if (!(forcing.stop_time > 0.0)) {
    x(2 * n) = 0.0;
    x(2 * n + 1) = 0.0;
    forcing_on = false;
  }

  StateTrajectory out;
  out.sample_rate = sample_rate;
  out.angle.resize(samples, n);
  out.speed.resize(samples, n);
  for (Eigen::Index k = 0; k < samples; ++k) {
    out.angle.row(k) = x.head(n).transpose();
    out.speed.row(k) = x.segment(n, n).transpose();
    if (k + 1 == samples) break;
    const double t0 = static_cast<double>(k) * dt;
    if (forcing_on && forcing.stop_time < t0 + dt) {
      // Forcing ends inside this interval: advance exactly to the stop time,
      // silence the oscillator, then finish the interval unforced.
      const double tau = forcing.stop_time - t0;
      x = (a * tau).exp() * x;
      x(2 * n) = 0.0;
      x(2 * n + 1) = 0.0;
      x = (a * (dt - tau)).exp() * x;
      forcing_on = false;
    } else {
      x = step * x;
    }
  }
  return out;
}

ChannelSet simulate(const GridModel& model, const Forcing& forcing, double duration,
                    double sample_rate, const SimulationOptions& options) {
  const StateTrajectory states = simulate_states(model, forcing, duration, sample_rate, options);
  const auto samples = states.speed.rows();
  const std::size_t n = model.size();

  ChannelSet out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].channel_id = model.labels.empty() ? bus_label(i) : model.labels[i];
    out[i].sample_rate = sample_rate;
    out[i].samples.resize(static_cast<std::size_t>(samples));
    for (Eigen::Index k = 0; k < samples; ++k) {
      out[i].samples[static_cast<std::size_t>(k)] =
          states.speed(k, static_cast<Eigen::Index>(i)) / kTwoPi;
    }
  }

  if (options.noise_snr_db) {
    if (!std::isfinite(*options.noise_snr_db)) {
      throw Error(ErrorCode::invalid_input, "SNR must be finite");
    }
    std::size_t k0 = 0;
    std::size_t k1 = static_cast<std::size_t>(samples);
    if (options.snr_window) {
      const auto [t0, t1] = *options.snr_window;
      k0 = static_cast<std::size_t>(std::clamp<double>(std::ceil(t0 * sample_rate), 0.0,
                                                       static_cast<double>(samples)));
      k1 = static_cast<std::size_t>(std::clamp<double>(std::ceil(t1 * sample_rate), 0.0,
                                                       static_cast<double>(samples)));
      if (k1 <= k0) throw Error(ErrorCode::invalid_input, "empty SNR reference window");
    }
    double power = 0.0;
    for (const auto& ch : out) {
      for (std::size_t k = k0; k < k1; ++k) power += ch.samples[k] * ch.samples[k];
    }
    power /= static_cast<double>(n * (k1 - k0));
    const double sigma = std::sqrt(power / std::pow(10.0, *options.noise_snr_db / 10.0));
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (auto& ch : out) {
      for (double& v : ch.samples) v += sigma * noise(rng);
    }
  }
  return out;
}

std::vector<double> swing_energy(const GridModel& model, const StateTrajectory& states) {
  Eigen::VectorXd m(static_cast<Eigen::Index>(model.size()));
  for (std::size_t i = 0; i < model.size(); ++i) m(static_cast<Eigen::Index>(i)) = model.inertia[i];
  std::vector<double> out(static_cast<std::size_t>(states.angle.rows()));
  for (Eigen::Index k = 0; k < states.angle.rows(); ++k) {
    const Eigen::VectorXd d = states.angle.row(k).transpose();
    const Eigen::VectorXd w = states.speed.row(k).transpose();
    out[static_cast<std::size_t>(k)] =
        0.5 * w.dot(m.cwiseProduct(w)) + 0.5 * d.dot(model.laplacian * d);
  }
  return out;
}

Scenario make_scenario(std::size_t n_buses, std::uint64_t seed, double resonance_offset) {
  if (n_buses < 4) throw Error(ErrorCode::invalid_input, "scenarios need at least 4 buses");
  if (!std::isfinite(resonance_offset)) {
    throw Error(ErrorCode::invalid_input, "resonance offset must be finite");
  }
  std::mt19937_64 rng(seed);
  const auto n = static_cast<Eigen::Index>(n_buses);
  const std::size_t first_area = (n_buses + 1) / 2;
  auto area_of = [&](Eigen::Index i) -> std::size_t { return static_cast<std::size_t>(i) < first_area ? 0 : 1; };

  constexpr int kMaxAttempts = 200;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    // Network: stiff rings inside each area, two weak ties between them.
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index j = (i + 1) % n;
      const double scale = area_of(i) == area_of(j) ? 100.0 : 1.0;
      w(i, j) = w(j, i) = uniform(rng, 2.0, 10.0) * scale;
    }
    for (int a = 0; a < 2; ++a) {
      std::vector<Eigen::Index> members;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (area_of(i) == static_cast<std::size_t>(a)) members.push_back(i);
      }
      const std::size_t chords = std::max<std::size_t>(1, members.size() / 3);
      std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
      for (std::size_t c = 0; c < chords; ++c) {
        Eigen::Index i = 0;
        Eigen::Index j = 0;
        for (int tries = 0; tries < 100; ++tries) {
          i = members[pick(rng)];
          j = members[pick(rng)];
          if (i != j && w(i, j) == 0.0) break;
        }
        if (i == j) continue;
        w(i, j) = w(j, i) = uniform(rng, 2.0, 10.0) * 100.0;
      }
    }
    Eigen::MatrixXd net = -w;
    net.diagonal() = w.rowwise().sum();

    // Generator branches, then Kron reduction onto the generator buses.
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = uniform(rng, 2.0, 10.0) * 3.5;
    Eigen::MatrixXd g = net;
    g.diagonal() += y;
    const Eigen::MatrixXd inv_y = g.ldlt().solve(Eigen::MatrixXd(y.asDiagonal()));
    Eigen::MatrixXd lap = -(y.asDiagonal() * inv_y);
    lap.diagonal() += y;
    lap = 0.5 * (lap + lap.transpose()).eval();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i != j) lap(i, j) = std::min(lap(i, j), 0.0);
      }
      lap(i, i) = 0.0;
      lap(i, i) = -lap.row(i).sum();
    }

    GridModel model;
    model.inertia.resize(n_buses);
    for (auto& m : model.inertia) m = uniform(rng, 3.0, 10.0);

    // Scale so the slowest undamped mode lands at the drawn frequency.
    Eigen::VectorXd inv_sqrt_m(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      inv_sqrt_m(i) = 1.0 / std::sqrt(model.inertia[static_cast<std::size_t>(i)]);
    }
    const Eigen::MatrixXd sym = inv_sqrt_m.asDiagonal() * lap * inv_sqrt_m.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> modal(sym, Eigen::EigenvaluesOnly);
    const double target_f = uniform(rng, 0.2, 0.8);
    const double target_w = kTwoPi * target_f;
    lap *= target_w * target_w / modal.eigenvalues()(1);
    for (Eigen::Index i = 0; i < n; ++i) {
      lap(i, i) = 0.0;
      lap(i, i) = -lap.row(i).sum();
    }
    model.laplacian = lap;

    const double zeta = uniform(rng, 0.03, 0.048);
    model.damping.resize(n_buses);
    for (std::size_t i = 0; i < n_buses; ++i) {
      model.damping[i] = 2.0 * zeta * target_w * model.inertia[i] * uniform(rng, 0.8, 1.2);
    }

    const std::size_t bus = std::uniform_int_distribution<std::size_t>(0, n_buses - 1)(rng);
    const double phase = uniform(rng, -180.0, 180.0);

    const auto modes = natural_modes(model);
    if (modes.empty() || !(modes.front().damping_ratio < 0.05)) continue;
    const double f_force = modes.front().frequency + resonance_offset;
    if (!(f_force > 0.0)) continue;

    Scenario s;
    s.model = std::move(model);
    s.source_bus = bus;
    s.natural_mode = modes.front();
    s.forcing.bus = bus;
    s.forcing.frequency = f_force;
    s.forcing.phase_deg = phase;
    s.forcing.amplitude = 1.0;
    // Unit-amplitude response, rescaled for a 0.01 Hz peak deviation.
    double peak = 0.0;
    for (const auto& v : frequency_response(s.model, s.forcing)) peak = std::max(peak, std::abs(v));
    s.forcing.amplitude = 0.01 / peak;
    return s;
  }
  throw Error(ErrorCode::model_invariant,
              "no scenario with a lightly damped mode after " + std::to_string(kMaxAttempts) +
                  " attempts");
}

}  // namespace modeloc
