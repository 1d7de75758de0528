// Command-line driver: locate, simulate, sweep.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "modeloc/compass.hpp"
#include "modeloc/errors.hpp"
#include "modeloc/io.hpp"
#include "modeloc/locate.hpp"
#include "modeloc/simgrid.hpp"
#include "modeloc/trials.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace modeloc;

constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

struct LocateArgs {
  std::string input;
  std::string forced_window;
  std::string ringdown_window;
  std::string baseline;
  std::string band;
  std::string geo;
  std::string config;
  std::string report;
  std::string plot;
  bool trim = false;
};

struct SimulateArgs {
  std::size_t buses = 10;
  std::uint64_t seed = 0;
  double offset = 0.0;
  double snr_db = 20.0;
  bool noiseless = false;
  std::string out;
  std::string truth;
};

struct SweepArgs {
  std::size_t trials = 200;
  std::uint64_t seed = 1;
  std::string out;
};

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::io, "failed writing '" + path.string() + "'");
}

json modal_json(const ModalEstimate& m) {
  return {{"frequency", m.frequency}, {"damping_ratio", m.damping_ratio}, {"shape", shape_to_json(m.shape)}};
}

int run_locate(const LocateArgs& a) {
  PipelineConfig config = a.config.empty() ? PipelineConfig{} : load_config(a.config);
  const auto [lo, hi] = parse_range(a.band);
  config.band = {lo, hi};

  ChannelSet data = load_csv(a.input);
  if (a.trim) data = trim_to_common(data);

  const auto [f0, f1] = parse_range(a.forced_window);
  const ChannelSet forced = slice_window(data, f0, f1);

  NaturalSource natural;
  if (!a.ringdown_window.empty()) {
    const auto [r0, r1] = parse_range(a.ringdown_window);
    natural.ringdown = slice_window(data, r0, r1);
  } else {
    natural.baseline = load_baseline(a.baseline);
  }

  std::optional<GeoMap> geo;
  if (!a.geo.empty()) geo = load_geo(a.geo);

  const LocationReport report = locate_source(forced, natural, config, geo);
  write_report(report, a.report);
  if (!a.plot.empty()) {
    if (report.alignment.diffs.empty()) {
      std::cerr << "no alignment to plot; " << a.plot << " not written\n";
    } else {
      render_compass(report.forced_shape, report.natural_shape, report.alignment, a.plot);
    }
  }

  std::cout << to_string(report.verdict.kind);
  for (const auto& ch : report.verdict.channels) std::cout << ' ' << ch;
  std::cout << "\nforcing " << report.forcing_frequency << " Hz";
  if (!report.natural_origin.empty()) {
    std::cout << ", natural " << report.natural_frequency << " Hz (" << report.natural_origin << ")";
  }
  std::cout << '\n';
  for (std::size_t i = 0; i < report.ranking.size() && i < 5; ++i) {
    std::cout << "  " << report.ranking[i].channel << ' ' << report.ranking[i].abs_diff << " deg\n";
  }
  if (report.triangulated) {
    std::cout << "triangulated " << report.triangulated->latitude << ", "
              << report.triangulated->longitude << '\n';
  }
  return 0;
}

int run_simulate(const SimulateArgs& a) {
  const Scenario scenario = make_scenario(a.buses, a.seed, a.offset);
  const EventTimeline timeline;
  std::optional<double> snr;
  if (!a.noiseless) snr = a.snr_db;
  const ChannelSet record = simulate_event(scenario, timeline, snr, a.seed ^ 0x9e3779b97f4a7c15ULL);
  write_csv(a.out, record);

  json truth = {
      {"seed", a.seed},
      {"buses", a.buses},
      {"resonance_offset", a.offset},
      {"snr_db", snr ? json(*snr) : json(nullptr)},
      {"source_bus", scenario.source_bus},
      {"source_channel", bus_label(scenario.source_bus)},
      {"forcing",
       {{"bus", scenario.forcing.bus},
        {"frequency", scenario.forcing.frequency},
        {"amplitude", scenario.forcing.amplitude},
        {"phase_deg", scenario.forcing.phase_deg},
        {"stop_time", timeline.forced_end}}},
      {"natural_mode", modal_json(scenario.natural_mode)},
      {"timeline",
       {{"sample_rate", timeline.sample_rate},
        {"forced_window", {timeline.forced_start, timeline.forced_end}},
        {"ringdown_window", {timeline.forced_end, timeline.ringdown_end}}}}};
  write_json(a.truth, truth);
  std::cout << "source " << bus_label(scenario.source_bus) << ", forcing "
            << scenario.forcing.frequency << " Hz, natural " << scenario.natural_mode.frequency
            << " Hz (damping " << scenario.natural_mode.damping_ratio << ")\n";
  return 0;
}

int run_sweep(const SweepArgs& a) {
  const fs::path dir(a.out);
  fs::create_directories(dir);
  std::size_t single = 0;
  std::size_t top1 = 0;
  std::size_t top2 = 0;
  json trials = json::array();
  std::size_t index = 0;
  for (const auto& spec : sweep_specs(a.trials, a.seed)) {
    const TrialOutcome o = run_trial(spec);
    char name[32];
    std::snprintf(name, sizeof name, "trial_%04zu.json", index++);
    write_report(o.report, dir / name);
    single += o.single_at_truth;
    top1 += o.truth_top1;
    top2 += o.truth_top2;
    trials.push_back({{"report", name},
                      {"seed", spec.seed},
                      {"resonance_offset", spec.resonance_offset},
                      {"truth", o.truth_channel},
                      {"verdict", to_string(o.report.verdict.kind)},
                      {"verdict_channels", o.report.verdict.channels},
                      {"single_at_truth", o.single_at_truth},
                      {"truth_top2", o.truth_top2}});
  }
  const double n = static_cast<double>(a.trials);
  json summary = {{"trials", a.trials},
                  {"seed", a.seed},
                  {"single_at_truth", single},
                  {"truth_top1", top1},
                  {"truth_top2", top2},
                  {"single_fraction", a.trials ? single / n : 0.0},
                  {"top2_fraction", a.trials ? top2 / n : 0.0},
                  {"results", trials}};
  write_json(dir / "summary.json", summary);
  std::cout << "trials " << a.trials << ": SingleSource at truth " << single << ", truth top-1 "
            << top1 << ", truth top-2 " << top2 << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forced-oscillation source location from multi-channel frequency data"};
  app.require_subcommand(1);

  LocateArgs la;
  auto* locate = app.add_subcommand("locate", "Locate the source of a forced oscillation");
  locate->add_option("--input", la.input, "CSV with a 't' column and one column per channel")->required();
  locate->add_option("--forced-window", la.forced_window, "t0:t1 of the forced oscillation")->required();
  auto* ring = locate->add_option("--ringdown-window", la.ringdown_window, "t0:t1 after the forcing stops");
  auto* base = locate->add_option("--baseline", la.baseline, "Natural mode-shape file");
  ring->excludes(base);
  base->excludes(ring);
  locate->add_option("--band", la.band, "lo:hi search band in Hz")->required();
  locate->add_option("--geo", la.geo, "CSV with columns channel,lat,lon");
  locate->add_option("--config", la.config, "Pipeline configuration (JSON)");
  locate->add_option("--report", la.report, "Report output path")->required();
  locate->add_option("--plot", la.plot, "Compass plot output path (SVG)");
  locate->add_flag("--trim", la.trim, "Crop channels to their common time range");

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic forced-oscillation event");
  simulate->add_option("--buses", sa.buses, "Number of buses")->required()->check(CLI::Range(4, 500));
  simulate->add_option("--seed", sa.seed, "Scenario seed")->required();
  simulate->add_option("--offset", sa.offset, "Forcing minus natural frequency, Hz")->required();
  simulate->add_option("--snr", sa.snr_db, "Measurement SNR in dB")->capture_default_str();
  simulate->add_flag("--noiseless", sa.noiseless, "Skip measurement noise");
  simulate->add_option("--out", sa.out, "CSV output path")->required();
  simulate->add_option("--truth", sa.truth, "Ground-truth JSON output path")->required();

  SweepArgs wa;
  auto* sweep = app.add_subcommand("sweep", "Run the randomized localization trial harness");
  sweep->add_option("--trials", wa.trials, "Number of trials")->required();
  sweep->add_option("--seed", wa.seed, "Sweep seed")->required();
  sweep->add_option("--out", wa.out, "Output directory for reports and summary")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*locate) {
      if (la.ringdown_window.empty() && la.baseline.empty()) {
        throw Error(ErrorCode::invalid_input, "one of --ringdown-window or --baseline is required");
      }
      return run_locate(la);
    }
    if (*simulate) return run_simulate(sa);
    if (*sweep) return run_sweep(wa);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
