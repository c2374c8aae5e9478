#include "siwsim/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>

#include "siwsim/errors.hpp"

namespace siwsim::traffic {
namespace {

constexpr int kMaxPayloadBytes =
    2304 - net::kMacHeaderBytes - net::kEncapsulationBytes;

void append_row(std::string& out, const char* fmt, ...) {
  char buf[192];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  out += buf;
}

}  // namespace

void FlowSpec::validate(int node_count) const {
  if (flow_id < 0) throw ValidationError("flow id must be >= 0");
  if (src < 0 || src >= node_count || dst < 0 || dst >= node_count) {
    throw ValidationError("flow endpoints must name nodes in [0, " +
                          std::to_string(node_count) + ")");
  }
  if (src == dst) throw ValidationError("flow source and destination differ");
  if (payload_bytes < 1 || payload_bytes > kMaxPayloadBytes) {
    throw ValidationError("flow payload must be 1.." +
                          std::to_string(kMaxPayloadBytes) + " bytes");
  }
  if (rate_bps <= 0.0) throw ValidationError("flow rate must be positive");
  if (start_s < 0.0) throw ValidationError("flow start must be >= 0");
  if (stop_s <= start_s) throw ValidationError("flow stop must follow start");
}

CbrSource::CbrSource(FlowSpec spec, Sink sink, sim::Scheduler& sched,
                     MetricsCollector& metrics)
    : spec_(std::move(spec)), sink_(std::move(sink)), sched_(sched),
      metrics_(metrics) {
  if (!sink_) throw ValidationError("flow source needs a sink");
}

void CbrSource::start() {
  sched_.at(spec_.start_s, [this] { emit(0); });
}

void CbrSource::emit(std::uint64_t seq) {
  net::DataHeader header;
  header.flow_id = spec_.flow_id;
  header.seq = seq;
  header.origin = spec_.src;
  header.dest = spec_.dst;
  header.payload_bytes = spec_.payload_bytes;
  header.sent_time_s = sched_.now();
  metrics_.on_sent(header);
  sink_(header);
  // Absolute schedule (start + k*period) so accumulated rounding cannot
  // drift the offered rate.
  double next = spec_.start_s + (seq + 1) * spec_.interval_s();
  if (next < spec_.stop_s) {
    sched_.at(next, [this, seq] { emit(seq + 1); });
  }
}

MetricsCollector::MetricsCollector(double duration_s, double window_s)
    : duration_s_(duration_s), window_s_(window_s) {
  if (duration_s <= 0.0) throw ValidationError("duration must be positive");
  if (window_s <= 0.0) throw ValidationError("metrics window must be positive");
  auto count = static_cast<std::size_t>(std::ceil(duration_s / window_s));
  windows_.resize(std::max<std::size_t>(count, 1));
}

std::size_t MetricsCollector::window_index(double t) const {
  if (t <= 0.0) return 0;
  auto idx = static_cast<std::size_t>(t / window_s_);
  return std::min(idx, windows_.size() - 1);
}

void MetricsCollector::on_sent(const net::DataHeader& header) {
  auto& records = flows_[header.flow_id];
  if (header.seq != records.size()) {
    throw RuntimeFailure("flow " + std::to_string(header.flow_id) +
                         " sequence numbers must be dense and ordered");
  }
  PacketRecord rec;
  rec.sent_s = header.sent_time_s;
  rec.payload_bytes = header.payload_bytes;
  records.push_back(rec);
  windows_[window_index(header.sent_time_s)].sent++;
}

MetricsCollector::PacketRecord& MetricsCollector::record_for(
    const net::DataHeader& header, const char* what) {
  auto it = flows_.find(header.flow_id);
  if (it == flows_.end() || header.seq >= it->second.size()) {
    throw RuntimeFailure(std::string(what) + " for a packet never sent (flow " +
                         std::to_string(header.flow_id) + ", seq " +
                         std::to_string(header.seq) + ")");
  }
  return it->second[header.seq];
}

void MetricsCollector::on_delivered(const net::DataHeader& header, double t) {
  PacketRecord& rec = record_for(header, "delivery");
  if (rec.fate != Fate::in_flight) {
    conflicting_fates_++;
    return;
  }
  rec.fate = Fate::delivered;
  rec.settled_s = t;
  WindowAccum& w = windows_[window_index(t)];
  w.delivered++;
  w.goodput_bits += static_cast<std::uint64_t>(rec.payload_bytes) * 8;
  w.delay_sum += t - rec.sent_s;
  w.delay_count++;
}

void MetricsCollector::on_dropped(const net::DataHeader& header,
                                  net::DropCause cause, double t) {
  PacketRecord& rec = record_for(header, "drop");
  if (rec.fate != Fate::in_flight) {
    conflicting_fates_++;
    return;
  }
  rec.fate = Fate::dropped;
  rec.cause = cause;
  rec.settled_s = t;
  windows_[window_index(t)].lost++;
}

void MetricsCollector::on_mac_tx(const net::Frame& frame, double end_s) {
  WindowAccum& w = windows_[window_index(end_s)];
  auto bytes = static_cast<std::uint64_t>(frame.air_bytes());
  w.mac_bits += bytes * 8;
  if (frame.is_control) w.control_bytes += bytes;
}

Report MetricsCollector::finalize() const {
  Report report;
  report.duration_s = duration_s_;
  report.window_s = window_s_;

  for (std::size_t i = 0; i < windows_.size(); ++i) {
    const WindowAccum& w = windows_[i];
    double t_end = std::min((i + 1) * window_s_, duration_s_);
    double width = t_end - i * window_s_;
    WindowRow row;
    row.t_s = t_end;
    row.goodput_bps = w.goodput_bits / width;
    row.mac_throughput_bps = w.mac_bits / width;
    row.sent = w.sent;
    row.delivered = w.delivered;
    row.lost = w.lost;
    if (w.sent > 0) {
      row.loss_pct = 100.0 * static_cast<double>(w.lost) / w.sent;
    } else {
      row.loss_pct = w.lost > 0 ? 100.0 : 0.0;
    }
    row.mean_delay_s = w.delay_count > 0 ? w.delay_sum / w.delay_count : 0.0;
    row.control_bytes = w.control_bytes;
    report.windows.push_back(row);
  }

  Totals& totals = report.totals;
  std::uint64_t goodput_bits = 0;
  std::uint64_t mac_bits = 0;
  double delay_sum = 0.0;
  for (const WindowAccum& w : windows_) {
    mac_bits += w.mac_bits;
    totals.control_bytes += w.control_bytes;
  }
  for (const auto& [flow_id, records] : flows_) {
    for (const PacketRecord& rec : records) {
      totals.sent++;
      switch (rec.fate) {
        case Fate::in_flight:
          totals.in_flight++;
          break;
        case Fate::delivered:
          totals.delivered++;
          goodput_bits += static_cast<std::uint64_t>(rec.payload_bytes) * 8;
          delay_sum += rec.settled_s - rec.sent_s;
          break;
        case Fate::dropped:
          switch (rec.cause) {
            case net::DropCause::no_route: totals.drops_no_route++; break;
            case net::DropCause::mac_retry: totals.drops_mac_retry++; break;
            case net::DropCause::mac_queue: totals.drops_mac_queue++; break;
            case net::DropCause::ttl: totals.drops_ttl++; break;
            case net::DropCause::collision: totals.drops_collision++; break;
          }
          break;
      }
    }
  }
  totals.conflicting_fates = conflicting_fates_;
  if (totals.sent != totals.delivered + totals.dropped() + totals.in_flight) {
    throw RuntimeFailure("packet ledger out of balance");
  }
  totals.pdr =
      totals.sent > 0 ? static_cast<double>(totals.delivered) / totals.sent : 0.0;
  totals.mean_delay_s =
      totals.delivered > 0 ? delay_sum / totals.delivered : 0.0;
  totals.goodput_bps = goodput_bits / duration_s_;
  totals.mac_throughput_bps = mac_bits / duration_s_;

  for (const auto& [flow_id, records] : flows_) {
    std::size_t i = 0;
    while (i < records.size()) {
      if (records[i].fate == Fate::delivered) {
        ++i;
        continue;
      }
      std::size_t run_start = i;
      while (i < records.size() && records[i].fate != Fate::delivered) ++i;
      std::size_t run_len = i - run_start;
      if (run_len >= kMinGapRun && i < records.size()) {
        GapRow gap;
        gap.flow_id = flow_id;
        gap.start_s = records[run_start].sent_s;
        gap.end_s = records[i].settled_s;
        gap.duration_s = gap.end_s - gap.start_s;
        report.gaps.push_back(gap);
      }
    }
  }
  std::sort(report.gaps.begin(), report.gaps.end(),
            [](const GapRow& a, const GapRow& b) {
              return a.start_s != b.start_s ? a.start_s < b.start_s
                                            : a.flow_id < b.flow_id;
            });
  return report;
}

std::string render_metrics_csv(const Report& report) {
  std::string out =
      "t,goodput_bps,mac_throughput_bps,sent,delivered,lost,loss_pct,"
      "mean_delay_s\n";
  for (const WindowRow& row : report.windows) {
    append_row(out, "%.3f,%.3f,%.3f,%llu,%llu,%llu,%.3f,%.6f\n", row.t_s,
               row.goodput_bps, row.mac_throughput_bps,
               static_cast<unsigned long long>(row.sent),
               static_cast<unsigned long long>(row.delivered),
               static_cast<unsigned long long>(row.lost), row.loss_pct,
               row.mean_delay_s);
  }
  return out;
}

std::string render_gaps_csv(const Report& report) {
  std::string out = "start_s,end_s,duration_s\n";
  for (const GapRow& gap : report.gaps) {
    append_row(out, "%.6f,%.6f,%.6f\n", gap.start_s, gap.end_s,
               gap.duration_s);
  }
  return out;
}

std::string render_control_csv(const Report& report) {
  std::string out = "t,control_bytes\n";
  for (const WindowRow& row : report.windows) {
    append_row(out, "%.3f,%llu\n", row.t_s,
               static_cast<unsigned long long>(row.control_bytes));
  }
  return out;
}

}  // namespace siwsim::traffic
