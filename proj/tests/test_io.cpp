#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "modeloc/compass.hpp"
#include "modeloc/errors.hpp"
#include "modeloc/io.hpp"
#include "modeloc/trials.hpp"
#include "support.hpp"

using namespace modeloc;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

std::string parse_error(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_csv(in, "x.csv");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse);
    return e.what();
  }
  FAIL("expected a parse error");
  return {};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "modeloc_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("small CSV parses") {
  std::ostringstream text;
  text << "# two channels\n" << "t,A,B\n";
  for (int k = 0; k < 10; ++k) text << 100.0 + 0.1 * k << "," << k << "," << -k * 0.5 << "\n";
  std::istringstream in(text.str());
  const auto ch = parse_csv(in);
  REQUIRE(ch.size() == 2);
  CHECK(ch[0].channel_id == "A");
  CHECK(ch[1].channel_id == "B");
  CHECK(ch[0].size() == 10);
  CHECK(ch[0].sample_rate == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(ch[0].start_time == 100.0);
  CHECK(ch[1].samples[4] == -2.0);
}

TEST_CASE("CSV errors name the line") {
  const std::string head = "t,A,B\n";
  std::string rows;
  for (int k = 0; k < 8; ++k) {
    rows += std::to_string(k * 0.1) + "," + (k == 5 ? std::string("NaN") : std::to_string(k)) + ",1\n";
  }
  // Header is line 1, so the sixth data row sits on line 7.
  CHECK(parse_error(head + rows).find("x.csv:7:") != std::string::npos);
  CHECK(parse_error("time,A\n0,1\n0.1,2\n").find("'t'") != std::string::npos);
  CHECK(parse_error("t,A\n0,1\n0.2,2\n0.1,3\n").find(":4:") != std::string::npos);
  CHECK(parse_error("t,A\n0,1\n0.1,2\n0.2003,3\n0.3,4\n").find("jitter") != std::string::npos);
  CHECK(parse_error("t,A,A\n0,1,1\n0.1,2,2\n").find("duplicate") != std::string::npos);
  CHECK(parse_error("t,A,B\n0,1\n0.1,2,2\n").find(":2:") != std::string::npos);
  CHECK(parse_error("t,A\n0,1\n0.1,inf\n").find(":3:") != std::string::npos);
  CHECK(parse_error("t,A\n0,1\n0.1,\n0.2,3\n0.3,4\n").find("empty cell") != std::string::npos);
}

TEST_CASE("ragged edges shorten a channel") {
  std::istringstream in("t,A,B\n0,1,\n0.1,2,5\n0.2,3,6\n0.3,4,\n");
  const auto ch = parse_csv(in);
  CHECK(ch[0].size() == 4);
  CHECK(ch[1].size() == 2);
  CHECK(ch[1].start_time == doctest::Approx(0.1));
  const auto common = trim_to_common(ch);
  CHECK(common[0].samples == std::vector<double>{2, 3});
  CHECK(common[1].samples == std::vector<double>{5, 6});
}

TEST_CASE("CSV round trip is lossless") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1e-2);
  ChannelSet set;
  for (int c = 0; c < 5; ++c) {
    ChannelSeries ch;
    ch.channel_id = "ch" + std::to_string(c);
    ch.sample_rate = 30.0;
    ch.start_time = 1547200000.0;
    for (int k = 0; k < 900; ++k) ch.samples.push_back(g(rng));
    set.push_back(ch);
  }
  const auto path = scratch("round.csv");
  write_csv(path, set);
  const auto back = load_csv(path);
  REQUIRE(back.size() == set.size());
  for (std::size_t c = 0; c < set.size(); ++c) {
    CHECK(back[c].channel_id == set[c].channel_id);
    CHECK(std::abs(back[c].sample_rate - 30.0) <= 1e-9 * 30.0);
    CHECK(std::abs(back[c].start_time - set[c].start_time) <= 1e-9 * set[c].start_time);
    REQUIRE(back[c].size() == set[c].size());
    for (std::size_t k = 0; k < set[c].size(); ++k) {
      CHECK(std::abs(back[c].samples[k] - set[c].samples[k]) <= 1e-9 * std::abs(set[c].samples[k]));
    }
  }
}

TEST_CASE("windows and ranges") {
  ChannelSeries ch;
  ch.channel_id = "A";
  ch.sample_rate = 10.0;
  ch.start_time = 5.0;
  for (int k = 0; k < 100; ++k) ch.samples.push_back(k);
  const auto w = slice_window({ch}, 6.0, 7.0);
  CHECK(w[0].size() == 10);
  CHECK(w[0].samples.front() == 10.0);
  CHECK(w[0].start_time == doctest::Approx(6.0));
  CHECK_THROWS_AS(slice_window({ch}, 7.0, 6.0), Error);
  CHECK(parse_range("120:240") == std::pair<double, double>{120.0, 240.0});
  CHECK_THROWS_AS(parse_range("240:120"), Error);
  CHECK_THROWS_AS(parse_range("abc"), Error);
}

TEST_CASE("report JSON round trip and validation") {
  TrialSpec spec;
  spec.seed = 404;
  auto out = run_trial(spec);
  const auto j = report_to_json(out.report);
  CHECK(validate_report_json(j).empty());
  CHECK(j.at("schema_version") == kReportSchemaVersion);
  const auto path = scratch("report.json");
  write_report(out.report, path);
  const auto back = load_report(path);
  CHECK(report_to_json(back).dump() == j.dump());

  auto broken = j;
  broken.erase("verdict");
  CHECK(!validate_report_json(broken).empty());
  broken = j;
  broken["verdict"]["kind"] = "Maybe";
  CHECK(!validate_report_json(broken).empty());

  const auto baseline = load_baseline(path);
  CHECK(baseline.entries.size() == out.report.natural_shape.entries.size());
  const auto shape_path = scratch("shape.json");
  write_shape(out.report.natural_shape, shape_path);
  CHECK(load_baseline(shape_path).reference == out.report.natural_shape.reference);
}

TEST_CASE("config JSON") {
  PipelineConfig cfg;
  cfg.ratio_k = 1.7;
  cfg.reference_channel = "bus2";
  cfg.band = {0.2, 0.9};
  const auto back = config_from_json(config_to_json(cfg));
  CHECK(back.ratio_k == 1.7);
  CHECK(back.reference_channel == std::optional<std::string>("bus2"));
  CHECK(back.band.hi == 0.9);
  CHECK(config_from_json(nlohmann::json::object()).threshold_fraction == PipelineConfig{}.threshold_fraction);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"ratio", 2.0}}), Error);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"ratio_k", "big"}}), Error);
}

TEST_CASE("geo file") {
  const auto path = scratch("geo.csv");
  {
    std::ofstream f(path);
    f << "channel,lat,lon\nA,30.5,-85\nB,32,-84.25\n";
  }
  const auto geo = load_geo(path);
  CHECK(geo.at("B").longitude == -84.25);
  {
    std::ofstream f(path);
    f << "channel,lat,lon\nA,95,-85\n";
  }
  CHECK_THROWS_AS(load_geo(path), Error);
  CHECK_THROWS_AS(load_csv(scratch("missing.csv")), Error);
}

TEST_CASE("compass plot structure") {
  ModeShape forced;
  forced.reference = "A";
  forced.entries = {{"A", {1.0, 0.0}}, {"B", {0.5, 30.0}}, {"C", {0.8, -60.0}}, {"D", {0.3, 10.0}}};
  ModeShape natural = forced;
  natural.entries.erase("D");
  natural.entries["C"].angle_deg = 20.0;
  const auto align = align_shapes(forced, natural, {"A", "B", "C"});
  const auto svg = compass_svg(forced, natural, align);
  auto count = [&](const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = svg.find(needle); pos != std::string::npos; pos = svg.find(needle, pos + 1)) ++n;
    return n;
  };
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(count("class=\"unit-circle\"") == 1);
  CHECK(count("class=\"arrow forced") == 3);
  CHECK(count("class=\"arrow natural") == 3);
  CHECK(count("highlight") >= 1);
  CHECK(count("<line class=\"arrow forced highlight\" data-channel=\"C\"") == 1);
  CHECK(count("data-channel=\"D\"") == 0);

  ModeShape other;
  other.reference = "X";
  other.entries = {{"X", {1.0, 0.0}}};
  CHECK_THROWS_AS(compass_svg(forced, other, AlignmentResult{}), Error);

  const auto path = scratch("compass.svg");
  render_compass(forced, natural, align, path);
  CHECK(fs::file_size(path) == svg.size());
}
