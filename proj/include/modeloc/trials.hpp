#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "modeloc/locate.hpp"
#include "modeloc/simgrid.hpp"

namespace modeloc {

/// One synthetic localization event: a generated scenario, its simulated
/// record (forced window then ring-down), and the pipeline's report.
struct TrialSpec {
  std::size_t n_buses = 10;
  std::uint64_t seed = 0;
  double resonance_offset = 0.0;  // Hz
  std::optional<double> snr_db = 20.0;
  EventTimeline timeline;
  PipelineConfig config;
};

struct TrialOutcome {
  TrialSpec spec;
  Scenario scenario;
  std::string truth_channel;
  LocationReport report;
  bool single_at_truth = false;   // SingleSource naming the forcing bus
  bool truth_top1 = false;
  bool truth_top2 = false;
};

/// Simulated record for a scenario under the event timeline.
ChannelSet simulate_event(const Scenario& scenario, const EventTimeline& timeline,
                          std::optional<double> snr_db, std::uint64_t noise_seed);

TrialOutcome run_trial(const TrialSpec& spec);

/// Trial specs for a sweep: per-trial seeds and offsets in [-max_offset,
/// max_offset] drawn deterministically from `seed`.
std::vector<TrialSpec> sweep_specs(std::size_t trials, std::uint64_t seed, double max_offset = 0.02,
                                   std::size_t n_buses = 10);

}  // namespace modeloc
