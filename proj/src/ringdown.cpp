#include "modeloc/ringdown.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "modeloc/angles.hpp"
#include "modeloc/signal.hpp"

namespace modeloc {

namespace {

using cd = std::complex<double>;

std::size_t channel_index(const ChannelSet& channels, const std::string& id) {
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (channels[i].channel_id == id) return i;
  }
  throw Error(ErrorCode::invalid_input, "reference channel '" + id + "' not present");
}

// Energy of R e^{st} over the observed window [0, T] (tends to |R|^2 / 2|sigma|
// for decaying modes once the window covers the decay).
double window_energy(double norm_r, double sigma, double duration) {
  const double x = 2.0 * sigma * duration;
  if (std::abs(x) < 1e-8) return norm_r * duration;
  return norm_r * std::expm1(x) / (2.0 * sigma);
}

// Least-squares residues of every channel on the discrete poles `z`, returned
// as one estimate per pole with positive frequency (energy-sorted).
std::vector<ModalEstimate> fit_residues(const ChannelSet& channels, const std::vector<cd>& z,
                                        std::size_t ref, double total_power) {
  const std::size_t n = channels.front().size();
  const std::size_t n_ch = channels.size();
  const double fs = channels.front().sample_rate;
  const auto m = static_cast<Eigen::Index>(z.size());
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::MatrixXcd vander(nn, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    cd p(1.0, 0.0);
    for (Eigen::Index k = 0; k < nn; ++k) {
      vander(k, i) = p;
      p *= z[static_cast<std::size_t>(i)];
    }
  }
  Eigen::MatrixXcd data(nn, static_cast<Eigen::Index>(n_ch));
  for (std::size_t c = 0; c < n_ch; ++c) {
    for (Eigen::Index k = 0; k < nn; ++k) {
      data(k, static_cast<Eigen::Index>(c)) = channels[c].samples[static_cast<std::size_t>(k)];
    }
  }
  const Eigen::MatrixXcd residues = vander.colPivHouseholderQr().solve(data);

  const double duration = static_cast<double>(n) / fs;
  std::vector<ModalEstimate> out;
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < m; ++i) {
    const cd zi = z[static_cast<std::size_t>(i)];
    if (zi == cd(0.0, 0.0)) continue;
    const cd s = std::log(zi) * fs;
    if (!(s.imag() > 1e-9 * fs)) continue;  // one member per conjugate pair, no real poles
    ModalEstimate est;
    est.frequency = s.imag() / (2.0 * std::numbers::pi);
    est.damping_ratio = -s.real() / std::abs(s);
    est.shape.frequency = est.frequency;
    est.shape.reference = channels[ref].channel_id;
    const double ref_arg = std::arg(residues(i, static_cast<Eigen::Index>(ref)));
    est.reference_phase_deg = arg_degrees(residues(i, static_cast<Eigen::Index>(ref)));
    double energy = 0.0;
    for (std::size_t c = 0; c < n_ch; ++c) {
      const cd r = residues(i, static_cast<Eigen::Index>(c));
      ComplexPhasor p;
      p.magnitude = 2.0 * std::abs(r);
      p.angle_deg = c == ref ? 0.0 : wrap_degrees(rad_to_deg(std::arg(r) - ref_arg));
      est.shape.entries[channels[c].channel_id] = p;
      energy += window_energy(std::norm(r), s.real(), duration);
    }
    est.energy = energy;
    out.push_back(std::move(est));
    kept.push_back(i);
  }
  if (out.empty()) throw Error(ErrorCode::no_mode, "no oscillatory mode identified");

  // Residual of the data reconstructed from the returned modes only.
  Eigen::MatrixXd recon = Eigen::MatrixXd::Zero(nn, static_cast<Eigen::Index>(n_ch));
  for (Eigen::Index i : kept) {
    recon += 2.0 * (vander.col(i) * residues.row(i)).real();
  }
  const double fit_error = std::sqrt((data.real() - recon).squaredNorm() / total_power);
  for (auto& est : out) est.fit_error = fit_error;

  std::stable_sort(out.begin(), out.end(), [](const ModalEstimate& a, const ModalEstimate& b) {
    if (a.energy != b.energy) return a.energy > b.energy;
    return a.frequency < b.frequency;
  });
  return out;
}

}  // namespace

std::vector<ModalEstimate> matrix_pencil(const ChannelSet& channels, std::size_t model_order,
                                         const std::string& reference) {
  check_consistent(channels);
  const std::size_t n = channels.front().size();
  const std::size_t n_ch = channels.size();
  const std::size_t pencil = n / 3;
  if (model_order != 0 && (model_order < 2 || model_order > pencil)) {
    throw Error(ErrorCode::invalid_input, "model order " + std::to_string(model_order) +
                                              " outside [2, " + std::to_string(pencil) + "]");
  }
  if (pencil < 2) {
    throw Error(ErrorCode::insufficient_data, "ring-down window too short for a matrix pencil");
  }
  const std::size_t ref = reference.empty() ? 0 : channel_index(channels, reference);

  double total_power = 0.0;
  for (const auto& ch : channels) {
    for (double v : ch.samples) total_power += v * v;
  }
  if (total_power == 0.0) throw Error(ErrorCode::no_mode, "ring-down data are identically zero");

  // Exact copies of a channel add no information but would reweight the
  // noise in the subspace estimate, so each distinct record enters once.
  std::vector<std::size_t> distinct;
  for (std::size_t c = 0; c < n_ch; ++c) {
    const bool seen = std::any_of(distinct.begin(), distinct.end(), [&](std::size_t d) {
      return channels[d].samples == channels[c].samples;
    });
    if (!seen) distinct.push_back(c);
  }

  // Stacked Hankel matrix: every channel contributes n - L rows of width L + 1.
  const std::size_t rows_per = n - pencil;
  const auto cols = static_cast<Eigen::Index>(pencil + 1);
  Eigen::MatrixXd hankel(static_cast<Eigen::Index>(rows_per * distinct.size()), cols);
  for (std::size_t c = 0; c < distinct.size(); ++c) {
    const auto& x = channels[distinct[c]].samples;
    for (std::size_t r = 0; r < rows_per; ++r) {
      for (Eigen::Index k = 0; k < cols; ++k) {
        hankel(static_cast<Eigen::Index>(c * rows_per + r), k) = x[r + static_cast<std::size_t>(k)];
      }
    }
  }

  // The right singular vectors only depend on R from a QR factorization, which
  // keeps the SVD small for long records.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(hankel);
  const Eigen::Index k_r = std::min(hankel.rows(), cols);
  Eigen::MatrixXd r_factor =
      qr.matrixQR().topRows(k_r).triangularView<Eigen::Upper>();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(r_factor, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (!(sv(0) > 0.0)) throw Error(ErrorCode::no_mode, "ring-down data are rank deficient");

  std::size_t order = model_order;
  if (order == 0) {
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) >= kAutoOrderThreshold * sv(0)) ++order;
    }
    order = std::clamp<std::size_t>(order, 2, pencil);
  }
  order = std::min<std::size_t>(order, static_cast<std::size_t>(sv.size()));
  const auto m = static_cast<Eigen::Index>(order);

  const Eigen::MatrixXd v = svd.matrixV().leftCols(m);
  const Eigen::MatrixXd v1 = v.topRows(cols - 1);
  const Eigen::MatrixXd v2 = v.bottomRows(cols - 1);
  const Eigen::MatrixXd pencil_matrix = v1.completeOrthogonalDecomposition().solve(v2);
  Eigen::EigenSolver<Eigen::MatrixXd> eig(pencil_matrix, false);
  const Eigen::VectorXcd z = eig.eigenvalues();

  std::vector<cd> poles(z.data(), z.data() + z.size());
  return fit_residues(channels, poles, ref, total_power);
}

ModalEstimate select_mode(const std::vector<ModalEstimate>& modes, double f_target, double tol) {
  if (modes.empty()) throw Error(ErrorCode::invalid_input, "no candidate modes");
  if (!(tol > 0.0)) throw Error(ErrorCode::invalid_input, "mode tolerance must be positive");
  const ModalEstimate* best = nullptr;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& m : modes) {
    const double d = std::abs(m.frequency - f_target);
    if (d < best_dist || (d == best_dist && best && m.fit_error < best->fit_error)) {
      best = &m;
      best_dist = d;
    }
  }
  if (best_dist > tol) {
    throw NoMatchingModeError("no mode within " + std::to_string(tol) + " Hz of " +
                                  std::to_string(f_target) + " Hz (nearest at " +
                                  std::to_string(best->frequency) + " Hz)",
                              *best);
  }
  return *best;
}

}  // namespace modeloc
