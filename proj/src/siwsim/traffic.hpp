#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "siwsim/kernel.hpp"
#include "siwsim/packet.hpp"

namespace siwsim::traffic {

// Constant-bit-rate flow: fixed-size packets at a fixed period so the
// offered load equals rate_bps exactly.
struct FlowSpec {
  int flow_id = 0;
  int src = 0;
  int dst = 0;
  int payload_bytes = 512;
  double rate_bps = 500e3;
  double start_s = 0.0;
  double stop_s = 0.0;

  double interval_s() const { return payload_bytes * 8.0 / rate_bps; }
  void validate(int node_count) const;
};

class MetricsCollector;

// Emits one packet per period into a sink (normally the origin's router),
// reporting each send to the collector first.
class CbrSource {
 public:
  using Sink = std::function<void(net::DataHeader)>;

  CbrSource(FlowSpec spec, Sink sink, sim::Scheduler& sched,
            MetricsCollector& metrics);
  void start();
  const FlowSpec& spec() const { return spec_; }

 private:
  void emit(std::uint64_t seq);

  FlowSpec spec_;
  Sink sink_;
  sim::Scheduler& sched_;
  MetricsCollector& metrics_;
};

// Per-window slice of the run. Rates are averaged over the window width.
struct WindowRow {
  double t_s = 0.0;  // window end time
  double goodput_bps = 0.0;        // delivered payload bits
  double mac_throughput_bps = 0.0; // every airing: data, control, acks, retries
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t lost = 0;  // terminal drops reported in this window
  double loss_pct = 0.0;
  double mean_delay_s = 0.0;
  std::uint64_t control_bytes = 0;  // routing frames and their acks
};

// Delivery outage on one flow: a run of at least `min_gap_run` consecutive
// sequence numbers that never arrived, bounded by the send time of the
// first missing packet and the arrival that ends the drought.
struct GapRow {
  int flow_id = 0;
  double start_s = 0.0;
  double end_s = 0.0;
  double duration_s = 0.0;
};

struct Totals {
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t in_flight = 0;  // no terminal fate when the run ended
  std::uint64_t drops_no_route = 0;
  std::uint64_t drops_mac_retry = 0;
  std::uint64_t drops_mac_queue = 0;
  std::uint64_t drops_ttl = 0;
  std::uint64_t drops_collision = 0;
  // Second fate reports for already-settled packets (e.g. delivered but the
  // last ack was lost and the sender gave up). First fate wins; this only
  // counts the conflicts.
  std::uint64_t conflicting_fates = 0;
  double pdr = 0.0;
  double mean_delay_s = 0.0;
  double goodput_bps = 0.0;
  double mac_throughput_bps = 0.0;
  std::uint64_t control_bytes = 0;

  std::uint64_t dropped() const {
    return drops_no_route + drops_mac_retry + drops_mac_queue + drops_ttl +
           drops_collision;
  }
};

struct Report {
  double duration_s = 0.0;
  double window_s = 1.0;
  std::vector<WindowRow> windows;
  std::vector<GapRow> gaps;
  Totals totals;
};

// Accounts every data packet from send to terminal fate and aggregates
// per-window rates. finalize() cross-checks the ledger: sent ==
// delivered + dropped + in_flight, exactly.
class MetricsCollector {
 public:
  MetricsCollector(double duration_s, double window_s = 1.0);

  void on_sent(const net::DataHeader& header);
  void on_delivered(const net::DataHeader& header, double t);
  void on_dropped(const net::DataHeader& header, net::DropCause cause,
                  double t);
  void on_mac_tx(const net::Frame& frame, double end_s);

  Report finalize() const;

  static constexpr int kMinGapRun = 10;

 private:
  enum class Fate { in_flight, delivered, dropped };
  struct PacketRecord {
    double sent_s = 0.0;
    int payload_bytes = 0;
    Fate fate = Fate::in_flight;
    net::DropCause cause = net::DropCause::no_route;
    double settled_s = 0.0;
  };
  struct WindowAccum {
    std::uint64_t sent = 0, delivered = 0, lost = 0;
    std::uint64_t goodput_bits = 0, mac_bits = 0, control_bytes = 0;
    double delay_sum = 0.0;
    std::uint64_t delay_count = 0;
  };

  std::size_t window_index(double t) const;
  PacketRecord& record_for(const net::DataHeader& header, const char* what);

  double duration_s_;
  double window_s_;
  std::vector<WindowAccum> windows_;
  std::map<int, std::vector<PacketRecord>> flows_;
  std::uint64_t conflicting_fates_ = 0;
};

// Deterministic CSV/text renderings of a report; identical inputs yield
// byte-identical output.
std::string render_metrics_csv(const Report& report);
std::string render_gaps_csv(const Report& report);
std::string render_control_csv(const Report& report);

}  // namespace siwsim::traffic
