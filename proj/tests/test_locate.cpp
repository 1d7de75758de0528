#include "doctest.h"

#include <algorithm>
#include <array>
#include <random>

#include "modeloc/angles.hpp"
#include "modeloc/errors.hpp"
#include "modeloc/io.hpp"
#include "modeloc/locate.hpp"
#include "modeloc/simgrid.hpp"
#include "modeloc/trials.hpp"
#include "support.hpp"

using namespace modeloc;
using namespace testing_support;

namespace {

using V3 = std::array<double, 3>;

V3 unit(double lat, double lon) {
  const double a = deg_to_rad(lat);
  const double b = deg_to_rad(lon);
  return {std::cos(a) * std::cos(b), std::cos(a) * std::sin(b), std::sin(a)};
}

double dot(const V3& a, const V3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// Tangent-plane centroid built from an explicit east/north basis.
GeoPoint tangent_oracle(const std::vector<std::pair<GeoPoint, double>>& pts) {
  V3 c{0, 0, 0};
  for (const auto& [p, w] : pts) {
    const auto u = unit(p.latitude, p.longitude);
    for (int k = 0; k < 3; ++k) c[k] += u[k];
  }
  const double cn = std::sqrt(dot(c, c));
  for (auto& v : c) v /= cn;
  const double lon0 = std::atan2(c[1], c[0]);
  const double lat0 = std::asin(c[2]);
  const V3 east{-std::sin(lon0), std::cos(lon0), 0.0};
  const V3 north{-std::sin(lat0) * std::cos(lon0), -std::sin(lat0) * std::sin(lon0), std::cos(lat0)};
  double x = 0, y = 0, ws = 0;
  for (const auto& [p, w] : pts) {
    const auto u = unit(p.latitude, p.longitude);
    x += w * dot(u, east);
    y += w * dot(u, north);
    ws += w;
  }
  x /= ws;
  y /= ws;
  const double up = std::sqrt(1.0 - x * x - y * y);
  V3 q;
  for (int k = 0; k < 3; ++k) q[k] = up * c[k] + x * east[k] + y * north[k];
  return {rad_to_deg(std::asin(q[2])), rad_to_deg(std::atan2(q[1], q[0]))};
}

ChannelSet add(const ChannelSet& a, const ChannelSet& b) {
  ChannelSet out = a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < a[i].size(); ++k) out[i].samples[k] += b[i].samples[k];
  }
  return out;
}

struct Event {
  ChannelSet forced;
  ChannelSet ring;
};

Event event_for(const Scenario& sc, std::optional<double> snr, std::uint64_t noise_seed) {
  const EventTimeline tl;
  const auto rec = simulate_event(sc, tl, snr, noise_seed);
  return {slice_window(rec, tl.forced_start, tl.forced_end), slice_window(rec, tl.forced_end, tl.ringdown_end)};
}

}  // namespace

TEST_CASE("triangulate examples") {
  const GeoMap geo{{"A", {30.0, -85.0}}, {"B", {32.0, -85.0}}, {"C", {31.0, -83.0}}};
  const auto mid = triangulate({{"A", 12.0}, {"B", 12.0}}, geo);
  CHECK(std::abs(mid.latitude - 31.0) <= 0.01);
  CHECK(std::abs(mid.longitude + 85.0) <= 0.01);

  const auto only = triangulate({{"A", 0.0}, {"B", 40.0}}, geo);
  CHECK(std::abs(only.latitude - 32.0) <= 1e-9);
  CHECK(std::abs(only.longitude + 85.0) <= 1e-9);

  // Flat-plane oracle: weighted average of local east/north offsets in degrees.
  const auto tri = triangulate({{"A", 30.0}, {"B", 20.0}, {"C", 10.0}}, geo);
  const double lat_c = 31.0;
  const double flat_lat = (30.0 * 30.0 + 20.0 * 32.0 + 10.0 * 31.0) / 60.0;
  const double flat_lon = (30.0 * -85.0 + 20.0 * -85.0 + 10.0 * -83.0) / 60.0;
  CHECK(std::abs(tri.latitude - flat_lat) <= 0.01);
  CHECK(std::abs((tri.longitude - flat_lon) * std::cos(deg_to_rad(lat_c))) <= 0.01);

  // Candidates without coordinates are ignored.
  const auto skip = triangulate({{"A", 12.0}, {"Z", 50.0}, {"B", 12.0}}, geo);
  CHECK(std::abs(skip.latitude - 31.0) <= 0.01);
}

TEST_CASE("triangulate errors") {
  const GeoMap geo{{"A", {30.0, -85.0}}, {"B", {32.0, -85.0}}};
  try {
    triangulate({{"A", 5.0}, {"Z", 3.0}}, geo);
    FAIL("expected invalid input");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_input);
  }
  try {
    triangulate({{"A", 0.0}, {"B", 0.0}}, geo);
    FAIL("expected degenerate weights");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate_weights);
  }
  CHECK_THROWS_AS(triangulate({{"A", 1.0}, {"B", 1.0}}, GeoMap{{"A", {95.0, 0.0}}, {"B", {0.0, 0.0}}}),
                  Error);
}

TEST_CASE("triangulate matches an independent tangent-plane construction") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> lat(-60.0, 60.0);
  std::uniform_real_distribution<double> lon(-179.0, 179.0);
  std::uniform_real_distribution<double> spread(-3.0, 3.0);
  std::uniform_real_distribution<double> weight(0.0, 50.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double la = lat(rng);
    const double lo = lon(rng);
    GeoMap geo;
    std::vector<RankedDiff> cands;
    std::vector<std::pair<GeoPoint, double>> pts;
    for (int i = 0; i < 4; ++i) {
      GeoPoint p{la + spread(rng), wrap_degrees(lo + spread(rng))};
      const std::string id = "c" + std::to_string(i);
      geo[id] = p;
      const double w = weight(rng);
      cands.push_back({id, w});
      pts.emplace_back(p, w);
    }
    const auto got = triangulate(cands, geo);
    const auto want = tangent_oracle(pts);
    CHECK(std::abs(got.latitude - want.latitude) <= 1e-9);
    CHECK(angle_distance(got.longitude, want.longitude) <= 1e-9);
  }
}

TEST_CASE("noise-only input yields NoSource") {
  std::mt19937_64 rng(3);
  ChannelSet forced;
  ChannelSet ring;
  for (int i = 0; i < 6; ++i) {
    forced.push_back(noise("n" + std::to_string(i), 10.0, 1200, 0.01, rng));
    ring.push_back(noise("n" + std::to_string(i), 10.0, 400, 0.01, rng));
  }
  NaturalSource nat;
  nat.ringdown = ring;
  const auto r = locate_source(forced, nat, PipelineConfig{});
  CHECK(r.verdict.kind == VerdictKind::no_source);
  CHECK(r.ranking.empty());
  const bool flagged = std::any_of(r.diagnostics.begin(), r.diagnostics.end(), [](const Diagnostic& d) {
    return d.message.find("no spectral peak") != std::string::npos;
  });
  CHECK(flagged);
}

TEST_CASE("simulated forcing at bus 3 is localized") {
  int hits = 0;
  for (std::uint64_t seed : {101u, 102u, 103u, 104u, 105u}) {
    auto sc = make_scenario(10, seed, 0.005);
    sc.forcing.bus = 3;
    sc.source_bus = 3;
    const auto ev = event_for(sc, std::nullopt, 0);
    NaturalSource nat;
    nat.ringdown = ev.ring;
    const auto r = locate_source(ev.forced, nat, PipelineConfig{});
    CHECK(r.natural_origin == "ringdown");
    CHECK(std::abs(r.forcing_frequency - sc.forcing.frequency) <= 0.01);
    REQUIRE(!r.ranking.empty());
    CHECK(r.ranking.front().channel == "bus3");
    if (r.verdict.kind == VerdictKind::single_source && r.verdict.channels.front() == "bus3") ++hits;
    CHECK(!r.triangulated.has_value());
  }
  CHECK(hits == 5);
}

TEST_CASE("two mirrored sources forced jointly are ambiguous and triangulated between them") {
  // Buses 0 and 1 are tightly coupled to each other and hang off area
  // {2,3,4}; area {5,6,7} sits across one weak tie. Swapping 0 and 1 is a
  // symmetry of the network.
  GridModel g;
  g.inertia = {4.0, 4.0, 6.0, 5.0, 7.0, 5.0, 6.0, 4.0};
  g.laplacian = Eigen::MatrixXd::Zero(8, 8);
  auto edge = [&](int a, int b, double w) {
    g.laplacian(a, b) -= w;
    g.laplacian(b, a) -= w;
    g.laplacian(a, a) += w;
    g.laplacian(b, b) += w;
  };
  edge(0, 1, 200.0);
  edge(0, 2, 40.0);
  edge(1, 2, 40.0);
  edge(2, 3, 600.0);
  edge(3, 4, 600.0);
  edge(2, 4, 450.0);
  edge(4, 5, 15.0);
  edge(5, 6, 600.0);
  edge(6, 7, 600.0);
  edge(5, 7, 450.0);
  const auto free_modes = [&] {
    g.damping.assign(8, 0.0);
    return natural_modes(g);
  }();
  const double w = 2.0 * kPi * free_modes.front().frequency;
  g.damping.clear();
  for (double m : g.inertia) g.damping.push_back(2.0 * 0.03 * w * m);
  const auto mode = natural_modes(g).front();

  Forcing f;
  f.frequency = mode.frequency;
  f.amplitude = 0.02;
  f.phase_deg = 20.0;
  f.stop_time = 240.0;
  Forcing f0 = f;
  f0.bus = 0;
  Forcing f1 = f;
  f1.bus = 1;
  const auto rec = add(simulate(g, f0, 280.0, 10.0), simulate(g, f1, 280.0, 10.0));
  NaturalSource nat;
  nat.ringdown = slice_window(rec, 240.0, 280.0);
  const GeoMap geo{{"bus0", {35.0, -90.0}}, {"bus1", {35.5, -89.0}}, {"bus2", {36.0, -90.0}},
                   {"bus3", {36.5, -91.0}}, {"bus4", {37.0, -89.5}}, {"bus5", {40.0, -80.0}},
                   {"bus6", {41.0, -79.0}}, {"bus7", {40.5, -81.0}}};
  const auto r = locate_source(slice_window(rec, 120.0, 240.0), nat, PipelineConfig{}, geo);
  REQUIRE(r.verdict.kind == VerdictKind::ambiguous);
  CHECK(std::count(r.verdict.channels.begin(), r.verdict.channels.end(), "bus0") == 1);
  CHECK(std::count(r.verdict.channels.begin(), r.verdict.channels.end(), "bus1") == 1);
  REQUIRE(r.triangulated.has_value());
  REQUIRE(r.verdict.channels.size() == 2);
  // Equal weights put the estimate at the midpoint of the two buses.
  CHECK(std::abs(r.triangulated->latitude - 35.25) <= 0.01);
  CHECK(std::abs(r.triangulated->longitude + 89.5) <= 0.01);
  const bool labeled = std::any_of(r.diagnostics.begin(), r.diagnostics.end(), [](const Diagnostic& d) {
    return d.stage == "triangulate" && d.message.find("placeholder") != std::string::npos;
  });
  CHECK(labeled);

  const auto no_geo = locate_source(slice_window(rec, 120.0, 240.0), nat, PipelineConfig{});
  CHECK(!no_geo.triangulated.has_value());
}

TEST_CASE("reports are reproducible and verdicts recomputable") {
  TrialSpec spec;
  spec.seed = 555;
  spec.resonance_offset = 0.01;
  const auto a = run_trial(spec);
  const auto b = run_trial(spec);
  CHECK(report_to_json(a.report).dump() == report_to_json(b.report).dump());
  CHECK(dominance_verdict(a.report.ranking, a.report.config.ratio_k, a.report.config.min_angle) ==
        a.report.verdict);
  CHECK(a.report.natural_damping.has_value());
}

TEST_CASE("channel outside the aligned set does not change the answer") {
  for (std::uint64_t seed : {7u, 8u, 9u}) {
    const auto sc = make_scenario(10, seed, 0.0);
    const auto ev = event_for(sc, 30.0, seed);
    PipelineConfig cfg;
    cfg.remove_common_mode = false;
    cfg.threshold_fraction = 0.3;
    NaturalSource nat;
    nat.baseline = sc.natural_mode.shape;
    const auto full = locate_source(ev.forced, nat, cfg);
    std::string unused;
    for (const auto& [id, p] : full.forced_shape.entries) {
      if (!full.alignment.channels_used.count(id) && id != full.forced_shape.reference) unused = id;
    }
    if (unused.empty()) continue;
    ChannelSet reduced;
    for (const auto& ch : ev.forced) {
      if (ch.channel_id != unused) reduced.push_back(ch);
    }
    const auto r = locate_source(reduced, nat, cfg);
    CHECK(angle_distance(r.alignment.delta, full.alignment.delta) <= 0.1);
    CHECK(r.alignment.channels_used == full.alignment.channels_used);
    std::vector<std::string> order_full;
    std::vector<std::string> order_red;
    for (const auto& d : full.ranking) order_full.push_back(d.channel);
    for (const auto& d : r.ranking) order_red.push_back(d.channel);
    CHECK(order_full == order_red);
    CHECK(r.verdict.kind == full.verdict.kind);
    CHECK(r.verdict.channels == full.verdict.channels);
  }
}

TEST_CASE("baseline natural shape and precedence") {
  const auto sc = make_scenario(10, 77, 0.0);
  const auto ev = event_for(sc, std::nullopt, 0);

  NaturalSource base;
  base.baseline = sc.natural_mode.shape;
  const auto rb = locate_source(ev.forced, base, PipelineConfig{});
  CHECK(rb.natural_origin == "baseline");
  CHECK(!rb.natural_damping.has_value());
  REQUIRE(!rb.ranking.empty());
  CHECK(rb.ranking.front().channel == bus_label(sc.source_bus));

  NaturalSource both = base;
  both.ringdown = ev.ring;
  const auto rr = locate_source(ev.forced, both, PipelineConfig{});
  CHECK(rr.natural_origin == "ringdown");
  const bool noted = std::any_of(rr.diagnostics.begin(), rr.diagnostics.end(), [](const Diagnostic& d) {
    return d.message.find("baseline shape ignored") != std::string::npos;
  });
  CHECK(noted);
}

TEST_CASE("pipeline errors carry the stage") {
  const auto sc = make_scenario(6, 5, 0.0);
  const auto ev = event_for(sc, std::nullopt, 0);
  try {
    locate_source(ev.forced, NaturalSource{}, PipelineConfig{});
    FAIL("expected an input error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).rfind("input: ", 0) == 0);
  }
  PipelineConfig bad;
  bad.ratio_k = 0.5;
  NaturalSource nat;
  nat.ringdown = ev.ring;
  try {
    locate_source(ev.forced, nat, bad);
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).rfind("config: ", 0) == 0);
  }
  PipelineConfig tight;
  tight.mode_tol = 1e-6;
  try {
    locate_source(ev.forced, nat, tight);
    FAIL("expected no matching mode");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::no_matching_mode);
    CHECK(std::string(e.what()).rfind("ringdown: ", 0) == 0);
  }
}
