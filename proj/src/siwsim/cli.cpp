#include "siwsim/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "siwsim/antenna.hpp"
#include "siwsim/errors.hpp"
#include "siwsim/kvdoc.hpp"
#include "siwsim/scenario.hpp"
#include "siwsim/units.hpp"

namespace siwsim::cli {
namespace {

namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kInvalid = 2;
constexpr int kFailed = 3;

struct DesignArgs {
  double f0_ghz = 2.4;
  double delta_ghz = 0.7;
  double eps_r = 2.2;
  double tan_delta = 0.0009;
  double h_mm = 1.575;
  double via_d_mm = 1.0;
  double via_p_mm = 1.85;
  double eps_eff = 0.0;  // 0: use the substrate permittivity
  double bw_mhz = 20.0;
  double gain_dbi = 4.0;
  std::string pattern = "hemispheric";
  std::string out_path;
};

struct RunArgs {
  std::string config_path;
  std::string preset = "urban";
  std::optional<std::uint64_t> seed;
  std::optional<double> duration_s;
  std::string out_dir;
};

struct SweepArgs {
  RunArgs base;
  int runs = 5;
  std::optional<std::uint64_t> base_seed;
  int threads = 0;  // 0: hardware concurrency
};

std::string default_out_dir() {
  if (const char* env = std::getenv("SIWSIM_OUT_DIR")) {
    if (*env) return env;
  }
  return "out";
}

scenario::ScenarioConfig load_run_config(const RunArgs& args) {
  scenario::ScenarioConfig config;
  if (!args.config_path.empty()) {
    config = scenario::load_scenario(args.config_path);
  } else if (args.preset == "urban") {
    config = scenario::urban_grid_preset();
  } else {
    throw ValidationError("unknown preset '" + args.preset +
                          "' (available: urban)");
  }
  if (args.seed) config.seed = *args.seed;
  if (args.duration_s) {
    config.duration_s = *args.duration_s;
    for (auto& flow : config.flows) {
      if (flow.stop_s > config.duration_s) flow.stop_s = -1.0;
    }
  }
  config.validate();
  return config;
}

int do_design(const DesignArgs& args, std::ostream& out) {
  antenna::SubstrateSpec substrate;
  substrate.eps_r = args.eps_r;
  substrate.tan_delta = args.tan_delta;
  substrate.h_mm = args.h_mm;

  double f0_hz = hz_from_ghz(args.f0_ghz);
  antenna::DesignReport report;
  report.cavity =
      antenna::design_cavity(f0_hz, hz_from_ghz(args.delta_ghz), substrate);
  antenna::check_via_constraints(args.via_d_mm, args.via_p_mm, f0_hz);
  report.vias = antenna::synth_via_wall(report.cavity, args.via_d_mm,
                                        args.via_p_mm);
  double eps_eff = args.eps_eff > 0.0 ? args.eps_eff : args.eps_r;
  report.meander = antenna::design_meander(f0_hz, eps_eff);

  antenna::AntennaOverrides overrides;
  overrides.f0_hz = f0_hz;
  overrides.bandwidth_hz = hz_from_mhz(args.bw_mhz);
  overrides.gain_dbi = args.gain_dbi;
  overrides.pattern = antenna::pattern_from_string(args.pattern);
  report.spec = antenna::export_antenna_spec(overrides);

  std::string text = antenna::to_document(report).serialize();
  out << text;
  if (!args.out_path.empty()) {
    std::ofstream file(args.out_path, std::ios::binary);
    file << text;
    if (!file) throw RuntimeFailure("cannot write " + args.out_path);
  }
  return kOk;
}

int do_run(const RunArgs& args, std::ostream& out) {
  scenario::ScenarioConfig config = load_run_config(args);
  scenario::RunResult result = scenario::run_scenario(config);
  std::string dir = args.out_dir.empty() ? default_out_dir() : args.out_dir;
  scenario::write_outputs(config, result, dir);
  out << scenario::render_summary(config, result);
  out << "outputs_dir = " << dir << "\n";
  return kOk;
}

int do_sweep(const SweepArgs& args, std::ostream& out) {
  if (args.runs < 1) throw ValidationError("sweep needs at least one run");
  scenario::ScenarioConfig base = load_run_config(args.base);
  std::uint64_t seed0 = args.base_seed.value_or(base.seed);
  std::string dir = args.base.out_dir.empty() ? default_out_dir()
                                              : args.base.out_dir;

  struct Slot {
    std::uint64_t seed = 0;
    scenario::RunResult result;
    std::exception_ptr error;
    bool failed = false;
  };
  std::vector<Slot> slots(args.runs);

  int hw = static_cast<int>(std::thread::hardware_concurrency());
  int want = args.threads > 0 ? args.threads : (hw > 0 ? hw : 1);
  int workers = std::min(want, args.runs);

  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next.fetch_add(1); i < args.runs; i = next.fetch_add(1)) {
      Slot& slot = slots[i];
      slot.seed = seed0 + static_cast<std::uint64_t>(i);
      try {
        scenario::ScenarioConfig config = base;
        config.seed = slot.seed;
        slot.result = scenario::run_scenario(config);
        scenario::write_outputs(config, slot.result,
                                (fs::path(dir) /
                                 ("run_" + std::to_string(i) + "_seed_" +
                                  std::to_string(slot.seed)))
                                    .string());
      } catch (...) {
        slot.error = std::current_exception();
        slot.failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < workers; ++i) pool.emplace_back(work);
  for (auto& t : pool) t.join();

  for (const Slot& slot : slots) {
    if (slot.failed) std::rethrow_exception(slot.error);
  }

  double pdr_sum = 0.0;
  for (int i = 0; i < args.runs; ++i) {
    const auto& totals = slots[i].result.report.totals;
    pdr_sum += totals.pdr;
    out << "run = " << i << " seed = " << slots[i].seed
        << " pdr = " << kvdoc::format_double(totals.pdr)
        << " goodput_bps = " << kvdoc::format_double(totals.goodput_bps)
        << " mean_delay_s = " << kvdoc::format_double(totals.mean_delay_s)
        << " gaps = " << slots[i].result.report.gaps.size() << "\n";
  }
  out << "runs = " << args.runs << "\n";
  out << "mean_pdr = " << kvdoc::format_double(pdr_sum / args.runs) << "\n";
  out << "outputs_dir = " << dir << "\n";
  return kOk;
}

int do_report(const std::string& dir, std::ostream& out) {
  fs::path summary = fs::path(dir) / "summary.txt";
  if (!fs::exists(summary)) {
    throw ValidationError("no summary.txt under " + dir);
  }
  std::ifstream in(summary, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  out << buffer.str();

  fs::path gaps = fs::path(dir) / "gaps.csv";
  if (fs::exists(gaps)) {
    std::ifstream gin(gaps);
    std::string line;
    std::getline(gin, line);  // header
    std::vector<std::string> rows;
    while (std::getline(gin, line)) {
      if (!line.empty()) rows.push_back(line);
    }
    if (!rows.empty()) {
      out << "outage_windows:\n";
      for (const auto& row : rows) out << "  " << row << "\n";
    }
  }
  return kOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Cavity-backed slot antenna design and vehicular network "
               "simulation"};
  app.name("siwsim");
  app.require_subcommand(1);

  DesignArgs design_args;
  CLI::App* design =
      app.add_subcommand("design", "Compute the closed-form antenna design");
  design->add_option("--f0-ghz", design_args.f0_ghz, "Operating frequency");
  design->add_option("--delta-ghz", design_args.delta_ghz,
                     "Offset of the cutoff below f0");
  design->add_option("--eps-r", design_args.eps_r, "Substrate permittivity");
  design->add_option("--tan-delta", design_args.tan_delta, "Loss tangent");
  design->add_option("--h-mm", design_args.h_mm, "Substrate thickness");
  design->add_option("--via-d-mm", design_args.via_d_mm, "Via diameter");
  design->add_option("--via-p-mm", design_args.via_p_mm, "Via pitch");
  design->add_option("--eps-eff", design_args.eps_eff,
                     "Effective permittivity for the slot (default: eps-r)");
  design->add_option("--bw-mhz", design_args.bw_mhz, "Exported bandwidth");
  design->add_option("--gain-dbi", design_args.gain_dbi, "Exported peak gain");
  design->add_option("--pattern", design_args.pattern,
                     "Exported pattern: isotropic|hemispheric");
  design->add_option("--out", design_args.out_path,
                     "Also write the design to this file");

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "Simulate one scenario");
  run->add_option("--config", run_args.config_path, "Scenario config file");
  run->add_option("--preset", run_args.preset, "Built-in scenario (urban)");
  std::uint64_t seed_opt = 0;
  double duration_opt = 0.0;
  CLI::Option* seed_flag = run->add_option("--seed", seed_opt, "Seed override");
  CLI::Option* duration_flag =
      run->add_option("--duration-s", duration_opt, "Duration override");
  run->add_option("--out-dir", run_args.out_dir,
                  "Output directory (default: $SIWSIM_OUT_DIR or ./out)");

  SweepArgs sweep_args;
  CLI::App* sweep =
      app.add_subcommand("sweep", "Simulate the same scenario over many seeds");
  sweep->add_option("--config", sweep_args.base.config_path,
                    "Scenario config file");
  sweep->add_option("--preset", sweep_args.base.preset,
                    "Built-in scenario (urban)");
  sweep->add_option("--runs", sweep_args.runs, "Number of seeds");
  std::uint64_t sweep_seed_opt = 0;
  CLI::Option* sweep_seed_flag =
      sweep->add_option("--base-seed", sweep_seed_opt, "First seed");
  sweep->add_option("--threads", sweep_args.threads,
                    "Worker threads (default: all cores)");
  sweep->add_option("--out-dir", sweep_args.base.out_dir,
                    "Parent directory for per-run outputs");

  std::string report_dir;
  CLI::App* report =
      app.add_subcommand("report", "Summarize a finished run directory");
  report->add_option("--dir", report_dir, "Run output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalid;
  }

  try {
    if (design->parsed()) return do_design(design_args, out);
    if (run->parsed()) {
      if (*seed_flag) run_args.seed = seed_opt;
      if (*duration_flag) run_args.duration_s = duration_opt;
      return do_run(run_args, out);
    }
    if (sweep->parsed()) {
      if (*sweep_seed_flag) sweep_args.base_seed = sweep_seed_opt;
      return do_sweep(sweep_args, out);
    }
    if (report->parsed()) return do_report(report_dir, out);
    err << "error: no subcommand\n";
    return kInvalid;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const RuntimeFailure& e) {
    err << "error: " << e.what() << "\n";
    return kFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailed;
  }
}

}  // namespace siwsim::cli
