// Acceptance suite: one line per criterion, pass or FAIL with the reason.
// Usage: acceptance <siwsim-binary> <data-dir>
// Exit status is 0 only when every criterion passes.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "siwsim/antenna.hpp"
#include "siwsim/errors.hpp"
#include "siwsim/kvdoc.hpp"
#include "siwsim/phy.hpp"
#include "siwsim/scenario.hpp"
#include "siwsim/traffic.hpp"

using namespace siwsim;

namespace {

namespace fs = std::filesystem;

std::string g_binary;
fs::path g_data_dir;
fs::path g_work_dir;

struct CommandResult {
  int exit_code = -1;
  std::string out;
  double wall_s = 0.0;
};

CommandResult run_command(const std::string& args) {
  std::string cmd = "\"" + g_binary + "\" " + args + " 2>/dev/null";
  auto t0 = std::chrono::steady_clock::now();
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) throw RuntimeFailure("popen failed for: " + cmd);
  CommandResult result;
  std::array<char, 4096> buf;
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
    result.out.append(buf.data(), n);
  }
  int status = pclose(pipe);
  auto t1 = std::chrono::steady_clock::now();
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.wall_s = std::chrono::duration<double>(t1 - t0).count();
  return result;
}

// Each criterion body appends failure text via this collector; an empty
// collection is a pass.
struct Problems {
  std::vector<std::string> items;

  void expect(bool ok, const std::string& what) {
    if (!ok) items.push_back(what);
  }
  std::string str() const {
    std::string all;
    for (const auto& item : items) {
      if (!all.empty()) all += "; ";
      all += item;
    }
    return all;
  }
};

bool near_rel(double value, double target, double rel) {
  return std::abs(value - target) <= rel * std::abs(target);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

fs::path write_file(const std::string& name, const std::string& text) {
  fs::path path = g_work_dir / name;
  std::ofstream out(path, std::ios::binary);
  out << text;
  return path;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Static-node scenario over an ad hoc trace file; shared by the single-hop
// and chain criteria.
scenario::ScenarioConfig static_line_scenario(const std::string& trace_name,
                                              int n_nodes, double spacing_m,
                                              double gain_dbi) {
  std::ostringstream trace;
  trace << "bounds " << (spacing_m * n_nodes + 100.0) << " 100\n";
  for (int node = 0; node < n_nodes; ++node) {
    trace << "0 " << node << " " << (node * spacing_m) << " 0\n";
  }
  fs::path path = write_file(trace_name, trace.str());

  scenario::ScenarioConfig config;
  config.duration_s = 60.0;
  config.seed = 1;
  config.mobility.source = scenario::MobilityConfig::Source::trace;
  config.mobility.trace_file = path.string();
  config.radio.antenna.gain_dbi = gain_dbi;
  config.radio.antenna.pattern = antenna::Pattern::isotropic;

  scenario::FlowConfig flow;
  flow.src = 0;
  flow.dst = n_nodes - 1;
  flow.payload_bytes = 512;
  flow.rate_bps = 500e3;
  flow.start_s = 0.0;
  config.flows.push_back(flow);
  return config;
}

std::string criterion_design_cli() {
  Problems p;
  CommandResult r = run_command(
      "design --f0-ghz 2.4 --delta-ghz 0.7 --eps-r 2.2 --h-mm 1.575");
  p.expect(r.exit_code == 0, "exit code " + std::to_string(r.exit_code));
  p.expect(r.wall_s < 1.0, "runtime " + fmt(r.wall_s) + " s exceeds 1 s");
  if (r.exit_code == 0) {
    kvdoc::Document doc = kvdoc::Document::parse(r.out);
    const kvdoc::Section* cavity = doc.find_section("cavity");
    if (cavity == nullptr) {
      p.expect(false, "no [cavity] section in output");
    } else {
      double a = cavity->get_double("a_mm");
      double d = cavity->get_double("d_mm");
      p.expect(near_rel(a, 59.550818, 0.01),
               "width " + fmt(a) + " mm not within 1% of 59.550818 mm");
      p.expect(near_rel(d, 59.550818, 0.01),
               "length " + fmt(d) + " mm not within 1% of 59.550818 mm");
    }
    double f0 = doc.top().get_double("f0_hz");
    double fc = doc.top().get_double("fc_hz");
    p.expect(near_rel(f0 - fc, 700e6, 0.02),
             "f0 - fc = " + fmt(f0 - fc) + " Hz not within 2% of 700 MHz");
  }
  return p.str();
}

std::string criterion_round_trip() {
  Problems p;
  std::mt19937_64 rng(20240811);
  std::uniform_real_distribution<double> f0_ghz(0.5, 10.0);
  std::uniform_real_distribution<double> ratio(0.05, 0.95);
  std::uniform_real_distribution<double> eps(1.05, 12.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    antenna::SubstrateSpec substrate;
    substrate.eps_r = eps(rng);
    double f0 = f0_ghz(rng) * 1e9;
    double delta = ratio(rng) * f0;
    antenna::CavityDesign cavity = antenna::design_cavity(f0, delta, substrate);
    double back = antenna::resonant_freq_hz(cavity.a_mm, cavity.d_mm,
                                            substrate.eps_r, {1, 1});
    worst = std::max(worst, std::abs(back - f0) / f0);
  }
  p.expect(worst <= 1e-9,
           "worst relative error " + fmt(worst) + " exceeds 1e-9");
  return p.str();
}

std::string criterion_mode_chart() {
  Problems p;
  const double f0 = 2.4e9;
  antenna::SubstrateSpec substrate;
  std::vector<double> deltas;
  for (double d = 0.1e9; d <= 1.2e9 + 0.5e6; d += 1e6) deltas.push_back(d);
  auto chart = antenna::mode_chart(f0, deltas, substrate);
  for (const auto& row : chart) {
    std::string label = row.nearest.label();
    if (label != "TE102" && label != "TE201") {
      p.expect(false, "nearest mode " + label + " at delta " +
                          fmt(row.delta_hz / 1e9) + " GHz");
      break;
    }
  }

  // A square cavity puts the two candidates at the same frequency,
  // sqrt(5/2) times the operating one.
  double delta_square = f0 * (1.0 - 1.0 / std::sqrt(2.0));
  antenna::CavityDesign square =
      antenna::design_cavity(f0, delta_square, substrate);
  double f102 = antenna::resonant_freq_hz(square.a_mm, square.d_mm,
                                          substrate.eps_r, {1, 2});
  double f201 = antenna::resonant_freq_hz(square.a_mm, square.d_mm,
                                          substrate.eps_r, {2, 1});
  double tie = std::sqrt(2.5) * f0;
  p.expect(std::abs(square.a_mm - square.d_mm) <= 1e-9 * square.a_mm,
           "cavity not square at the crossing offset");
  p.expect(near_rel(f102, tie, 1e-6),
           "TE102 at " + fmt(f102) + " Hz, expected " + fmt(tie));
  p.expect(near_rel(f201, tie, 1e-6),
           "TE201 at " + fmt(f201) + " Hz, expected " + fmt(tie));
  return p.str();
}

std::string criterion_via_rules() {
  Problems p;
  try {
    antenna::check_via_constraints(1.0, 1.9, 2.4e9);
  } catch (const std::exception& e) {
    p.expect(false, std::string("1 mm / 1.9 mm rejected: ") + e.what());
  }
  try {
    antenna::check_via_constraints(1.0, 2.5, 2.4e9);
    p.expect(false, "pitch 2.5 mm accepted");
  } catch (const ConstraintViolation& e) {
    p.expect(e.rule() == "via_pitch_ratio",
             "pitch 2.5 mm hit rule " + e.rule());
  }
  try {
    antenna::check_via_constraints(13.0, 26.0, 2.4e9);
    p.expect(false, "diameter 13 mm accepted");
  } catch (const ConstraintViolation& e) {
    p.expect(e.rule() == "via_diameter_ratio",
             "diameter 13 mm hit rule " + e.rule());
  }

  // The same limits gate the command line with exit code 2.
  p.expect(run_command("design --via-d-mm 1 --via-p-mm 1.9").exit_code == 0,
           "CLI rejected the valid fence");
  p.expect(run_command("design --via-d-mm 1 --via-p-mm 2.5").exit_code == 2,
           "CLI accepted the leaky fence");
  p.expect(run_command("design --via-d-mm 13 --via-p-mm 26").exit_code == 2,
           "CLI accepted the oversized via");
  return p.str();
}

std::string criterion_comm_range() {
  Problems p;
  phy::RadioParams radio;
  radio.antenna.gain_dbi = 0.0;
  radio.antenna.pattern = antenna::Pattern::isotropic;
  double unit_range = phy::comm_range_m(radio);
  p.expect(near_rel(unit_range, 250.0, 0.005),
           "unit-gain range " + fmt(unit_range) + " m not within 0.5% of 250 m");

  phy::RadioParams gain4;
  gain4.antenna.gain_dbi = 4.0;
  double gain_range = phy::comm_range_m(gain4);
  p.expect(near_rel(gain_range, 396.0, 0.01),
           "4 dBi range " + fmt(gain_range) + " m not within 1% of 396 m");
  return p.str();
}

std::string criterion_single_hop() {
  Problems p;
  scenario::ScenarioConfig config =
      static_line_scenario("single_hop.trace", 2, 100.0, 4.0);
  auto t0 = std::chrono::steady_clock::now();
  scenario::RunResult result = scenario::run_scenario(config);
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
  p.expect(wall < 5.0, "runtime " + fmt(wall) + " s exceeds 5 s");

  const auto& windows = result.report.windows;
  p.expect(windows.size() == 60,
           "expected 60 windows, got " + std::to_string(windows.size()));
  double goodput_sum = 0.0;
  std::uint64_t sent_after_first = 0;
  std::uint64_t lost_after_first = 0;
  for (std::size_t i = 1; i < windows.size(); ++i) {
    goodput_sum += windows[i].goodput_bps;
    sent_after_first += windows[i].sent;
    lost_after_first += windows[i].lost;
  }
  double steady = goodput_sum / static_cast<double>(windows.size() - 1);
  p.expect(near_rel(steady, 500e3, 0.02),
           "steady goodput " + fmt(steady) + " b/s not within 2% of 500 kb/s");
  double loss_pct = sent_after_first == 0
                        ? 100.0
                        : 100.0 * static_cast<double>(lost_after_first) /
                              static_cast<double>(sent_after_first);
  p.expect(loss_pct < 1.0,
           "loss " + fmt(loss_pct) + "% at or above 1% after the first window");
  return p.str();
}

std::string criterion_chain() {
  Problems p;
  scenario::ScenarioConfig config =
      static_line_scenario("chain.trace", 3, 200.0, 0.0);
  scenario::RunResult result = scenario::run_scenario(config);

  bool found = false;
  for (const auto& node : result.final_routes) {
    if (node.node != 0) continue;
    for (const auto& route : node.routes) {
      if (route.dest == 2 && route.valid) {
        found = true;
        p.expect(route.hop_count == 2, "route to the far node has " +
                                           std::to_string(route.hop_count) +
                                           " hops, expected 2");
      }
    }
  }
  p.expect(found, "source holds no valid route to the far node at the end");
  p.expect(result.report.totals.pdr > 0.90,
           "PDR " + fmt(result.report.totals.pdr) + " at or below 0.90");
  return p.str();
}

std::string criterion_partition_reconnect() {
  Problems p;
  fs::path cfg = g_data_dir / "configs" / "partition_reconnect.cfg";
  scenario::ScenarioConfig config = scenario::load_scenario(cfg.string());
  scenario::RunResult result = scenario::run_scenario(config);

  const auto& gaps = result.report.gaps;
  p.expect(gaps.size() == 1,
           "expected exactly 1 outage annotation, got " +
               std::to_string(gaps.size()));
  if (!gaps.empty()) {
    double duration = gaps.front().duration_s;
    p.expect(duration >= 0.1 && duration <= 5.0,
             "outage lasts " + fmt(duration) + " s, outside [0.1, 5]");
  }

  // Reconnection shows up as a burst of routing traffic: the busiest
  // signaling window carries more than five times the run's median.
  std::vector<double> per_window;
  for (const auto& w : result.report.windows) {
    per_window.push_back(static_cast<double>(w.control_bytes));
  }
  double med = median(per_window);
  double peak = per_window.empty()
                    ? 0.0
                    : *std::max_element(per_window.begin(), per_window.end());
  p.expect(peak > 5.0 * med, "signaling peak " + fmt(peak) +
                                 " B not above 5x the median " + fmt(med) +
                                 " B");
  p.expect(peak > 0.0, "no signaling traffic recorded at all");
  return p.str();
}

std::string criterion_conservation_determinism() {
  Problems p;
  scenario::ScenarioConfig config = scenario::urban_grid_preset();
  auto t0 = std::chrono::steady_clock::now();
  scenario::RunResult first = scenario::run_scenario(config);
  scenario::RunResult second = scenario::run_scenario(config);
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
  p.expect(wall < 60.0, "two runs took " + fmt(wall) + " s, limit 60 s");

  const auto& totals = first.report.totals;
  p.expect(totals.sent ==
               totals.delivered + totals.dropped() + totals.in_flight,
           "ledger imbalance: sent " + std::to_string(totals.sent) +
               " != delivered " + std::to_string(totals.delivered) +
               " + dropped " + std::to_string(totals.dropped()) +
               " + in flight " + std::to_string(totals.in_flight));
  p.expect(totals.sent > 0, "preset produced no traffic");

  p.expect(traffic::render_metrics_csv(first.report) ==
               traffic::render_metrics_csv(second.report),
           "metrics.csv differs between same-seed runs");
  p.expect(traffic::render_gaps_csv(first.report) ==
               traffic::render_gaps_csv(second.report),
           "gaps.csv differs between same-seed runs");
  p.expect(traffic::render_control_csv(first.report) ==
               traffic::render_control_csv(second.report),
           "control.csv differs between same-seed runs");
  p.expect(scenario::render_summary(config, first) ==
               scenario::render_summary(config, second),
           "summary differs between same-seed runs");
  return p.str();
}

struct Criterion {
  int id;
  std::string label;
  std::function<std::string()> body;
};

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <siwsim-binary> <data-dir>\n";
    return 2;
  }
  g_binary = argv[1];
  g_data_dir = argv[2];
  g_work_dir = fs::temp_directory_path() / "siwsim_acceptance";
  fs::create_directories(g_work_dir);

  std::vector<Criterion> criteria = {
      {1, "closed-form cavity design from the command line",
       criterion_design_cli},
      {2, "design/analysis round trip over 1000 random cavities",
       criterion_round_trip},
      {3, "nearest higher-order mode identification and crossing",
       criterion_mode_chart},
      {4, "via fence fabrication rules", criterion_via_rules},
      {5, "radio range calibration by closed-form inversion",
       criterion_comm_range},
      {6, "single-hop saturation-free goodput", criterion_single_hop},
      {7, "two-hop chain routing and delivery", criterion_chain},
      {8, "relay loss and recovery ends a single bounded outage",
       criterion_partition_reconnect},
      {9, "packet conservation and same-seed determinism",
       criterion_conservation_determinism},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    std::string detail;
    try {
      detail = criterion.body();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (detail.empty()) {
      std::cout << "criterion " << criterion.id << ": " << criterion.label
                << " ... pass\n";
    } else {
      ++failures;
      std::cout << "criterion " << criterion.id << ": " << criterion.label
                << " ... FAIL (" << detail << ")\n";
    }
  }

  // Full-wave electromagnetic outputs (reflection curves, measured radiation
  // patterns) and the internals of other simulators are out of scope by
  // design; criteria 1-5 stand in with closed-form agreement and criteria
  // 6-9 with behavioral properties of the network model.
  std::cout << "criterion 10: out-of-scope outputs are covered by closed-form"
               " and behavioral checks ... pass (informational)\n";

  std::cout << "acceptance: " << (9 - failures) << "/9 checked criteria pass"
            << (failures == 0 ? ", 1 informational\n" : "\n");
  return failures == 0 ? 0 : 1;
}
