#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "siwsim/aodv.hpp"
#include "siwsim/kvdoc.hpp"
#include "siwsim/mac.hpp"
#include "siwsim/mobility.hpp"
#include "siwsim/phy.hpp"
#include "siwsim/traffic.hpp"

namespace siwsim::scenario {

struct MobilityConfig {
  enum class Source { manhattan, trace };
  Source source = Source::manhattan;
  std::string trace_file;  // resolved against the config file's directory
  mobility::ManhattanParams manhattan;
  double max_speed_mps = 100.0;  // cap enforced on trace playback
};

// One flow as configured; `random` endpoints are resolved per run from the
// traffic random stream, in declaration order.
struct FlowConfig {
  bool src_random = false;
  bool dst_random = false;
  int src = 0;
  int dst = 0;
  int payload_bytes = 512;
  double rate_bps = 500e3;
  double start_s = 0.0;
  double stop_s = -1.0;  // <0: run until the scenario ends
};

struct ScenarioConfig {
  double duration_s = 150.0;
  std::uint64_t seed = 1;
  MobilityConfig mobility;
  phy::RadioParams radio;
  mac::MacParams mac;
  aodv::AodvParams aodv;
  std::vector<FlowConfig> flows;
  double metrics_window_s = 1.0;

  void validate() const;  // everything except per-node flow endpoint checks
};

ScenarioConfig parse_scenario(const kvdoc::Document& doc,
                              const std::string& base_dir);
ScenarioConfig load_scenario(const std::string& path);

// Built-in preset: 15 vehicles on a 820 m x 620 m street grid with 200 m
// blocks, 8..14 m/s with stop pauses, the default cavity-backed antenna at
// full transmit power, and three randomly assigned 500 kb/s flows.
ScenarioConfig urban_grid_preset();

struct NodeRoutes {
  int node = 0;
  std::vector<aodv::RouteEntry> routes;
};

struct RunResult {
  traffic::Report report;
  std::vector<aodv::RouterStats> router_stats;   // indexed by node
  aodv::RouterStats routing_totals;
  mac::MacStats mac_totals;
  std::vector<NodeRoutes> final_routes;
  std::vector<traffic::FlowSpec> flows;  // with random endpoints resolved
  double comm_range_m = 0.0;
  int nodes = 0;
};

// Executes the scenario to completion. Identical configs (same seed) give
// identical results, byte for byte once rendered.
RunResult run_scenario(const ScenarioConfig& config);

std::string render_summary(const ScenarioConfig& config,
                           const RunResult& result);

// Writes metrics.csv, gaps.csv, control.csv, and summary.txt, creating
// out_dir if needed.
void write_outputs(const ScenarioConfig& config, const RunResult& result,
                   const std::string& out_dir);

}  // namespace siwsim::scenario
