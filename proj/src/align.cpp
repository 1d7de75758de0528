#include "modeloc/align.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "modeloc/angles.hpp"
#include "modeloc/errors.hpp"

namespace modeloc {

namespace {

struct Prepared {
  std::vector<std::string> ids;
  std::vector<double> d;  // wrap(natural - forced)
  std::vector<double> w;
};

Prepared prepare(const ModeShape& forced, const ModeShape& natural,
                 const std::set<std::string>& channels, const AlignOptions& options) {
  if (channels.size() < 2) {
    throw Error(ErrorCode::invalid_input, "alignment needs at least two channels");
  }
  Prepared p;
  const double f_max = forced.max_magnitude();
  const double n_max = natural.max_magnitude();
  for (const auto& id : channels) {
    if (!forced.contains(id) || !natural.contains(id)) {
      throw Error(ErrorCode::invalid_input, "channel '" + id + "' missing from a mode shape");
    }
    const auto& f = forced.at(id);
    const auto& n = natural.at(id);
    p.ids.push_back(id);
    p.d.push_back(wrap_degrees(n.angle_deg - f.angle_deg));
    double w = 1.0;
    if (options.weighted) {
      w = (f_max > 0.0 ? f.magnitude / f_max : 0.0) * (n_max > 0.0 ? n.magnitude / n_max : 0.0);
    }
    p.w.push_back(w);
  }
  double total = 0.0;
  for (double w : p.w) total += w;
  if (!(total > 0.0)) {
    throw Error(ErrorCode::degenerate_weights, "all alignment weights are zero");
  }
  return p;
}

double objective(const std::vector<double>& e, const std::vector<double>& w, double eps) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double r = wrap_degrees(e[i] - eps);
    num += w[i] * r * r;
    den += w[i];
  }
  return std::sqrt(num / den);
}

// Exact minimizer of objective(e, w, .) over one full turn.
double minimize_rotation(const std::vector<double>& e, const std::vector<double>& w) {
  std::vector<double> breaks;
  breaks.reserve(e.size());
  for (double v : e) breaks.push_back(wrap_degrees(v + 180.0));
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  double wsum = 0.0;
  for (double x : w) wsum += x;

  double best_eps = 0.0;
  double best_val = std::numeric_limits<double>::infinity();
  const std::size_t k = breaks.size();
  for (std::size_t a = 0; a < k; ++a) {
    const double lo = breaks[a];
    const double hi = a + 1 < k ? breaks[a + 1] : breaks[0] + 360.0;
    if (hi <= lo) continue;
    const double mid = 0.5 * (lo + hi);
    double shift = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) shift += w[i] * wrap_degrees(e[i] - mid);
    const double eps = wrap_degrees(std::clamp(mid + shift / wsum, lo, hi));
    const double val = objective(e, w, eps);
    if (val < best_val) {
      best_val = val;
      best_eps = eps;
    }
  }
  return best_eps;
}

}  // namespace

std::set<std::string> magnitude_filter(const ModeShape& shape, double threshold_fraction) {
  if (shape.entries.empty()) throw Error(ErrorCode::invalid_input, "empty mode shape");
  if (!(threshold_fraction >= 0.0 && threshold_fraction <= 1.0)) {
    throw Error(ErrorCode::invalid_input, "threshold fraction must lie in [0, 1]");
  }
  const double cut = threshold_fraction * shape.max_magnitude();
  std::set<std::string> out;
  for (const auto& [id, p] : shape.entries) {
    if (p.magnitude >= cut) out.insert(id);
  }
  return out;
}

AlignmentResult align_shapes(const ModeShape& forced, const ModeShape& natural,
                             const std::set<std::string>& channels, const AlignOptions& options) {
  const Prepared p = prepare(forced, natural, channels, options);

  // Work relative to the pivot so a common rotation cancels exactly.
  const double pivot = p.d.front();
  std::vector<double> e;
  e.reserve(p.d.size());
  for (double v : p.d) e.push_back(wrap_degrees(v - pivot));

  const double eps = minimize_rotation(e, p.w);

  AlignmentResult out;
  out.delta = wrap_degrees(pivot + eps);
  out.rms = objective(e, p.w, eps);
  out.weighted = options.weighted;
  for (std::size_t i = 0; i < p.ids.size(); ++i) {
    out.diffs[p.ids[i]] = wrap_degrees(e[i] - eps);
    out.channels_used.insert(p.ids[i]);
    if (options.weighted) out.weights[p.ids[i]] = p.w[i];
  }
  return out;
}

double alignment_objective(const ModeShape& forced, const ModeShape& natural,
                           const std::set<std::string>& channels, double delta,
                           const AlignOptions& options) {
  const Prepared p = prepare(forced, natural, channels, options);
  return objective(p.d, p.w, delta);
}

std::vector<RankedDiff> rank_differences(const AlignmentResult& result) {
  std::vector<RankedDiff> out;
  out.reserve(result.diffs.size());
  for (const auto& [id, d] : result.diffs) out.push_back({id, std::abs(d)});
  std::stable_sort(out.begin(), out.end(), [](const RankedDiff& a, const RankedDiff& b) {
    if (a.abs_diff != b.abs_diff) return a.abs_diff > b.abs_diff;
    return a.channel < b.channel;
  });
  return out;
}

const char* to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::single_source: return "SingleSource";
    case VerdictKind::ambiguous: return "Ambiguous";
    case VerdictKind::no_source: return "NoSource";
  }
  return "unknown";
}

Verdict dominance_verdict(const std::vector<RankedDiff>& ranked, double ratio_k, double min_angle) {
  if (!(ratio_k > 1.0)) throw Error(ErrorCode::invalid_input, "ratio_k must exceed 1");
  if (!(min_angle > 0.0)) throw Error(ErrorCode::invalid_input, "min_angle must be positive");
  Verdict v;
  if (ranked.empty() || ranked.front().abs_diff < min_angle) return v;
  const double top = ranked.front().abs_diff;
  const double second = ranked.size() > 1 ? ranked[1].abs_diff : 0.0;
  if (top >= ratio_k * second) {
    v.kind = VerdictKind::single_source;
    v.channels = {ranked.front().channel};
    return v;
  }
  v.kind = VerdictKind::ambiguous;
  for (const auto& r : ranked) {
    if (r.abs_diff >= top / ratio_k) v.channels.push_back(r.channel);
  }
  return v;
}

}  // namespace modeloc
