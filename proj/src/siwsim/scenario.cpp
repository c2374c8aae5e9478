#include "siwsim/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <memory>
#include <string_view>
#include <utility>

#include "siwsim/errors.hpp"
#include "siwsim/rng.hpp"
#include "siwsim/units.hpp"

namespace siwsim::scenario {
namespace {

namespace fs = std::filesystem;

void check_keys(const kvdoc::Section& section,
                std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  for (const auto& [key, value] : section.entries()) {
    bool known = false;
    for (std::string_view k : allowed) {
      if (key == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ValidationError("unknown key '" + key + "' in " + where);
    }
  }
}

std::string resolve_path(const std::string& path, const std::string& base_dir) {
  fs::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (fs::path(base_dir) / p).string();
}

void parse_mobility(const kvdoc::Section& section, MobilityConfig& out,
                    const std::string& base_dir) {
  check_keys(section,
             {"source", "trace_file", "width_m", "height_m", "nodes",
              "street_spacing_m", "speed_min_mps", "speed_max_mps",
              "pause_fraction", "pause_max_s", "max_speed_mps"},
             "[mobility]");
  std::string source = section.get_or("source", "manhattan");
  if (source == "manhattan") {
    out.source = MobilityConfig::Source::manhattan;
  } else if (source == "trace") {
    out.source = MobilityConfig::Source::trace;
  } else {
    throw ValidationError("mobility source must be 'manhattan' or 'trace'");
  }
  if (auto file = section.find("trace_file")) {
    out.trace_file = resolve_path(*file, base_dir);
  }
  auto& m = out.manhattan;
  m.width_m = section.get_double_or("width_m", m.width_m);
  m.height_m = section.get_double_or("height_m", m.height_m);
  m.nodes = static_cast<int>(section.get_int_or("nodes", m.nodes));
  m.street_spacing_m =
      section.get_double_or("street_spacing_m", m.street_spacing_m);
  m.speed_min_mps = section.get_double_or("speed_min_mps", m.speed_min_mps);
  m.speed_max_mps = section.get_double_or("speed_max_mps", m.speed_max_mps);
  m.pause_fraction = section.get_double_or("pause_fraction", m.pause_fraction);
  m.pause_max_s = section.get_double_or("pause_max_s", m.pause_max_s);
  out.max_speed_mps = section.get_double_or("max_speed_mps", out.max_speed_mps);
}

void parse_radio(const kvdoc::Section& section, phy::RadioParams& out,
                 const std::string& base_dir) {
  check_keys(section,
             {"antenna_spec", "f0_ghz", "bandwidth_mhz", "gain_dbi", "pattern",
              "tx_power_w", "sensitivity_w", "antenna_height_m", "model",
              "use_pattern", "back_attenuation_db", "capture",
              "capture_threshold_db"},
             "[radio]");
  bool inline_antenna = section.has("f0_ghz") || section.has("bandwidth_mhz") ||
                        section.has("gain_dbi") || section.has("pattern");
  if (auto file = section.find("antenna_spec")) {
    if (inline_antenna) {
      throw ValidationError(
          "[radio] gives both antenna_spec and inline antenna keys");
    }
    out.antenna = antenna::load_antenna_spec(resolve_path(*file, base_dir));
  } else if (inline_antenna) {
    if (section.has("f0_ghz")) {
      out.antenna.f0_hz = hz_from_ghz(section.get_double("f0_ghz"));
    }
    if (section.has("bandwidth_mhz")) {
      out.antenna.bandwidth_hz = hz_from_mhz(section.get_double("bandwidth_mhz"));
    }
    out.antenna.gain_dbi = section.get_double_or("gain_dbi", out.antenna.gain_dbi);
    if (section.has("pattern")) {
      out.antenna.pattern = antenna::pattern_from_string(section.get("pattern"));
    }
  }
  out.tx_power_w = section.get_double_or("tx_power_w", out.tx_power_w);
  out.sensitivity_w = section.get_double_or("sensitivity_w", out.sensitivity_w);
  out.antenna_height_m =
      section.get_double_or("antenna_height_m", out.antenna_height_m);
  if (section.has("model")) {
    out.model = phy::propagation_model_from_string(section.get("model"));
  }
  out.use_pattern = section.get_bool_or("use_pattern", out.use_pattern);
  out.back_attenuation_db =
      section.get_double_or("back_attenuation_db", out.back_attenuation_db);
  out.capture = section.get_bool_or("capture", out.capture);
  out.capture_threshold_db =
      section.get_double_or("capture_threshold_db", out.capture_threshold_db);
}

void parse_mac(const kvdoc::Section& section, mac::MacParams& out) {
  check_keys(section, {"queue_cap", "retry_limit", "rts_cts"}, "[mac]");
  out.queue_cap = static_cast<int>(section.get_int_or("queue_cap", out.queue_cap));
  out.retry_limit =
      static_cast<int>(section.get_int_or("retry_limit", out.retry_limit));
  if (section.get_bool_or("rts_cts", false)) {
    throw ValidationError(
        "rts_cts = true is not supported: virtual carrier sense is not "
        "modeled");
  }
}

void parse_routing(const kvdoc::Section& section, aodv::AodvParams& out) {
  check_keys(section,
             {"buffer_cap", "active_route_timeout_s", "hello_enabled"},
             "[routing]");
  out.buffer_cap =
      static_cast<int>(section.get_int_or("buffer_cap", out.buffer_cap));
  out.active_route_timeout_s = section.get_double_or(
      "active_route_timeout_s", out.active_route_timeout_s);
  out.hello_enabled = section.get_bool_or("hello_enabled", out.hello_enabled);
}

FlowConfig parse_flow(const kvdoc::Section& section) {
  check_keys(section,
             {"src", "dst", "payload_bytes", "rate_bps", "start_s", "stop_s"},
             "[flow]");
  FlowConfig flow;
  auto endpoint = [&](const char* key, bool& random, int& fixed) {
    std::string value = section.get(key);
    if (value == "random") {
      random = true;
      return;
    }
    fixed = static_cast<int>(section.get_int(key));
  };
  endpoint("src", flow.src_random, flow.src);
  endpoint("dst", flow.dst_random, flow.dst);
  flow.payload_bytes =
      static_cast<int>(section.get_int_or("payload_bytes", flow.payload_bytes));
  flow.rate_bps = section.get_double_or("rate_bps", flow.rate_bps);
  flow.start_s = section.get_double_or("start_s", flow.start_s);
  flow.stop_s = section.get_double_or("stop_s", flow.stop_s);
  return flow;
}

std::uint64_t parse_seed(const kvdoc::Section& top) {
  std::int64_t raw = top.get_int_or("seed", 1);
  if (raw < 0) throw ValidationError("seed must be >= 0");
  return static_cast<std::uint64_t>(raw);
}

traffic::FlowSpec resolve_flow(const FlowConfig& flow, int flow_id, int nodes,
                               double duration_s, RngStream& rng) {
  traffic::FlowSpec spec;
  spec.flow_id = flow_id;
  spec.payload_bytes = flow.payload_bytes;
  spec.rate_bps = flow.rate_bps;
  spec.start_s = flow.start_s;
  spec.stop_s = flow.stop_s < 0.0 ? duration_s : flow.stop_s;
  spec.src = flow.src_random ? static_cast<int>(rng.uniform_int(nodes))
                             : flow.src;
  spec.dst = flow.dst_random ? static_cast<int>(rng.uniform_int(nodes))
                             : flow.dst;
  if (flow.src_random && !flow.dst_random) {
    while (spec.src == spec.dst) spec.src = static_cast<int>(rng.uniform_int(nodes));
  } else {
    while (spec.dst == spec.src && flow.dst_random) {
      spec.dst = static_cast<int>(rng.uniform_int(nodes));
    }
  }
  spec.validate(nodes);
  return spec;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) {
    throw RuntimeFailure("cannot write " + path.string());
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  if (duration_s <= 0.0) throw ValidationError("duration_s must be positive");
  if (metrics_window_s <= 0.0) {
    throw ValidationError("metrics window must be positive");
  }
  if (mobility.source == MobilityConfig::Source::manhattan) {
    mobility.manhattan.validate();
  } else if (mobility.trace_file.empty()) {
    throw ValidationError("mobility source 'trace' needs trace_file");
  }
  if (mobility.max_speed_mps <= 0.0) {
    throw ValidationError("max_speed_mps must be positive");
  }
  radio.validate();
  mac.validate();
  aodv.validate();
  for (const FlowConfig& flow : flows) {
    if (!flow.src_random && !flow.dst_random && flow.src == flow.dst) {
      throw ValidationError("flow source and destination differ");
    }
    if (flow.payload_bytes < 1) {
      throw ValidationError("flow payload must be positive");
    }
    if (flow.rate_bps <= 0.0) throw ValidationError("flow rate must be positive");
    if (flow.start_s < 0.0) throw ValidationError("flow start must be >= 0");
    if (flow.stop_s >= 0.0 && flow.stop_s <= flow.start_s) {
      throw ValidationError("flow stop must follow start");
    }
  }
}

ScenarioConfig parse_scenario(const kvdoc::Document& doc,
                              const std::string& base_dir) {
  ScenarioConfig config;
  check_keys(doc.top(), {"duration_s", "seed"}, "the top section");
  config.duration_s = doc.top().get_double_or("duration_s", config.duration_s);
  config.seed = parse_seed(doc.top());

  for (const kvdoc::Section& section : doc.sections()) {
    if (section.name() == "mobility") {
      parse_mobility(section, config.mobility, base_dir);
    } else if (section.name() == "radio") {
      parse_radio(section, config.radio, base_dir);
    } else if (section.name() == "mac") {
      parse_mac(section, config.mac);
    } else if (section.name() == "routing") {
      parse_routing(section, config.aodv);
    } else if (section.name() == "flow") {
      config.flows.push_back(parse_flow(section));
    } else {
      throw ValidationError("unknown section [" + section.name() + "]");
    }
  }
  config.validate();
  return config;
}

ScenarioConfig load_scenario(const std::string& path) {
  kvdoc::Document doc = kvdoc::Document::load(path);
  return parse_scenario(doc, fs::path(path).parent_path().string());
}

ScenarioConfig urban_grid_preset() {
  ScenarioConfig config;
  config.duration_s = 150.0;
  config.seed = 1;
  for (int i = 0; i < 3; ++i) {
    FlowConfig flow;
    flow.src_random = true;
    flow.dst_random = true;
    flow.payload_bytes = 512;
    flow.rate_bps = 500e3;
    flow.start_s = 5.0;
    flow.stop_s = -1.0;
    config.flows.push_back(flow);
  }
  return config;
}

RunResult run_scenario(const ScenarioConfig& config) {
  config.validate();

  RngStream mobility_rng(config.seed, StreamId::mobility);
  RngStream mac_rng(config.seed, StreamId::mac);
  RngStream traffic_rng(config.seed, StreamId::traffic);

  mobility::FieldTrajectories field;
  if (config.mobility.source == MobilityConfig::Source::manhattan) {
    field = mobility::generate_manhattan(config.mobility.manhattan,
                                         config.duration_s, mobility_rng);
  } else {
    field = mobility::load_trace(config.mobility.trace_file,
                                 config.mobility.max_speed_mps);
  }
  int nodes = static_cast<int>(field.nodes.size());
  if (nodes < 1) throw ValidationError("scenario has no nodes");
  if (!config.flows.empty() && nodes < 2) {
    throw ValidationError("flows need at least two nodes");
  }

  std::vector<traffic::FlowSpec> flows;
  for (std::size_t i = 0; i < config.flows.size(); ++i) {
    flows.push_back(resolve_flow(config.flows[i], static_cast<int>(i), nodes,
                                 config.duration_s, traffic_rng));
  }

  sim::Scheduler sched;
  phy::Medium medium(sched, config.radio, field);
  traffic::MetricsCollector metrics(config.duration_s, config.metrics_window_s);

  std::vector<std::unique_ptr<mac::Mac>> macs;
  std::vector<std::unique_ptr<aodv::Router>> routers;
  for (int node = 0; node < nodes; ++node) {
    macs.push_back(
        std::make_unique<mac::Mac>(node, config.mac, medium, sched, mac_rng));
    routers.push_back(std::make_unique<aodv::Router>(node, config.aodv,
                                                     *macs.back(), sched));
    macs.back()->on_transmit = [&metrics](const net::Frame& frame,
                                          double end_s) {
      metrics.on_mac_tx(frame, end_s);
    };
    routers.back()->on_deliver = [&metrics, &sched](const net::DataHeader& h) {
      metrics.on_delivered(h, sched.now());
    };
    routers.back()->on_data_drop = [&metrics, &sched](const net::DataHeader& h,
                                                      net::DropCause cause) {
      metrics.on_dropped(h, cause, sched.now());
    };
  }

  std::vector<std::unique_ptr<traffic::CbrSource>> sources;
  for (const traffic::FlowSpec& spec : flows) {
    aodv::Router* origin = routers[spec.src].get();
    sources.push_back(std::make_unique<traffic::CbrSource>(
        spec, [origin](net::DataHeader h) { origin->send_data(h); }, sched,
        metrics));
  }

  for (auto& router : routers) router->start();
  for (auto& source : sources) source->start();
  sched.run_until(config.duration_s);

  RunResult result;
  result.report = metrics.finalize();
  result.flows = std::move(flows);
  result.comm_range_m = phy::comm_range_m(config.radio);
  result.nodes = nodes;
  for (int node = 0; node < nodes; ++node) {
    const aodv::RouterStats& rs = routers[node]->stats();
    result.router_stats.push_back(rs);
    result.routing_totals.rreq_sent += rs.rreq_sent;
    result.routing_totals.rreq_forwarded += rs.rreq_forwarded;
    result.routing_totals.rrep_sent += rs.rrep_sent;
    result.routing_totals.rrep_forwarded += rs.rrep_forwarded;
    result.routing_totals.rerr_sent += rs.rerr_sent;
    result.routing_totals.hello_sent += rs.hello_sent;
    result.routing_totals.discoveries_started += rs.discoveries_started;
    result.routing_totals.discoveries_failed += rs.discoveries_failed;
    result.routing_totals.data_forwarded += rs.data_forwarded;
    result.routing_totals.link_breaks += rs.link_breaks;

    const mac::MacStats& ms = macs[node]->stats();
    result.mac_totals.tx_frames += ms.tx_frames;
    result.mac_totals.tx_retries += ms.tx_retries;
    result.mac_totals.rx_delivered += ms.rx_delivered;
    result.mac_totals.rx_duplicates += ms.rx_duplicates;
    result.mac_totals.corrupted_frames += ms.corrupted_frames;
    result.mac_totals.queue_drops += ms.queue_drops;
    result.mac_totals.retry_failures += ms.retry_failures;

    result.final_routes.push_back(NodeRoutes{node, routers[node]->route_table()});
  }
  return result;
}

std::string render_summary(const ScenarioConfig& config,
                           const RunResult& result) {
  using kvdoc::format_double;
  const traffic::Totals& t = result.report.totals;
  std::string out;
  auto line = [&out](const std::string& key, const std::string& value) {
    out += key + " = " + value + "\n";
  };
  auto num = [&line](const std::string& key, double v) {
    line(key, format_double(v));
  };
  auto count = [&line](const std::string& key, std::uint64_t v) {
    line(key, std::to_string(v));
  };

  count("nodes", static_cast<std::uint64_t>(result.nodes));
  num("duration_s", config.duration_s);
  count("seed", config.seed);
  num("comm_range_m", result.comm_range_m);
  count("flows", result.flows.size());
  for (const traffic::FlowSpec& flow : result.flows) {
    line("flow_" + std::to_string(flow.flow_id),
         std::to_string(flow.src) + " -> " + std::to_string(flow.dst));
  }
  count("sent", t.sent);
  count("delivered", t.delivered);
  count("in_flight", t.in_flight);
  count("dropped", t.dropped());
  count("drop_no_route", t.drops_no_route);
  count("drop_mac_retry", t.drops_mac_retry);
  count("drop_mac_queue", t.drops_mac_queue);
  count("drop_ttl", t.drops_ttl);
  count("drop_collision", t.drops_collision);
  count("conflicting_fates", t.conflicting_fates);
  num("pdr", t.pdr);
  num("mean_delay_s", t.mean_delay_s);
  num("goodput_bps", t.goodput_bps);
  num("mac_throughput_bps", t.mac_throughput_bps);
  count("control_bytes", t.control_bytes);
  count("gaps", result.report.gaps.size());

  const aodv::RouterStats& r = result.routing_totals;
  count("rreq_sent", r.rreq_sent);
  count("rreq_forwarded", r.rreq_forwarded);
  count("rrep_sent", r.rrep_sent);
  count("rrep_forwarded", r.rrep_forwarded);
  count("rerr_sent", r.rerr_sent);
  count("hello_sent", r.hello_sent);
  count("discoveries_started", r.discoveries_started);
  count("discoveries_failed", r.discoveries_failed);
  count("data_forwarded", r.data_forwarded);
  count("link_breaks", r.link_breaks);

  const mac::MacStats& m = result.mac_totals;
  count("mac_tx_frames", m.tx_frames);
  count("mac_tx_retries", m.tx_retries);
  count("mac_rx_delivered", m.rx_delivered);
  count("mac_rx_duplicates", m.rx_duplicates);
  count("mac_corrupted_frames", m.corrupted_frames);
  count("mac_queue_drops", m.queue_drops);
  count("mac_retry_failures", m.retry_failures);
  return out;
}

void write_outputs(const ScenarioConfig& config, const RunResult& result,
                   const std::string& out_dir) {
  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw RuntimeFailure("cannot create output directory " + dir.string() +
                         ": " + ec.message());
  }
  write_file(dir / "metrics.csv", traffic::render_metrics_csv(result.report));
  write_file(dir / "gaps.csv", traffic::render_gaps_csv(result.report));
  write_file(dir / "control.csv", traffic::render_control_csv(result.report));
  write_file(dir / "summary.txt", render_summary(config, result));
}

}  // namespace siwsim::scenario
