#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "siwsim/kernel.hpp"
#include "siwsim/mac.hpp"
#include "siwsim/packet.hpp"

namespace siwsim::aodv {

struct AodvParams {
  double active_route_timeout_s = 3.0;
  double my_route_timeout_s = 6.0;  // lifetime a destination grants its replies
  int net_diameter = 35;
  double node_traversal_time_s = 0.040;
  int rreq_retries = 2;      // rebroadcasts after the first request
  int buffer_cap = 64;       // pending data packets awaiting a route
  double buffer_timeout_s = 30.0;
  double delete_period_s = 15.0;  // invalid routes linger this long
  bool hello_enabled = false;
  double hello_interval_s = 1.0;
  int allowed_hello_loss = 2;

  double net_traversal_time_s() const {
    return 2.0 * node_traversal_time_s * net_diameter;
  }
  double seen_cache_s() const { return 2.0 * net_traversal_time_s(); }
  void validate() const;
};

struct RouteEntry {
  int dest = -1;
  int next_hop = -1;
  int hop_count = 0;
  std::uint32_t dest_seq = 0;
  bool seq_known = false;
  bool valid = false;
  // While valid: freshness deadline. While invalid: deletion deadline.
  double expiry_s = 0.0;
  std::vector<int> precursors;  // neighbors routing through this entry
};

struct RouterStats {
  std::uint64_t rreq_sent = 0;
  std::uint64_t rreq_forwarded = 0;
  std::uint64_t rrep_sent = 0;
  std::uint64_t rrep_forwarded = 0;
  std::uint64_t rerr_sent = 0;
  std::uint64_t hello_sent = 0;
  std::uint64_t discoveries_started = 0;
  std::uint64_t discoveries_failed = 0;
  std::uint64_t data_forwarded = 0;
  std::uint64_t link_breaks = 0;
};

// Reactive route maintenance for one node: on-demand flooding discovery,
// destination-controlled sequence numbers, expiring routes, error
// propagation on link breaks, and a bounded send buffer that holds data
// while discovery runs. Loop freedom is asserted per forwarded packet via
// the (sequence number, hop count) stamp it carries.
class Router {
 public:
  Router(int node, const AodvParams& params, mac::Mac& mac,
         sim::Scheduler& sched);

  // Arms periodic beacons when enabled; call once before the run starts.
  void start();

  // Entry point for locally generated data.
  void send_data(net::DataHeader header);

  // Data that reached its destination.
  std::function<void(const net::DataHeader&)> on_deliver;
  // Terminal loss of a data packet, with its cause.
  std::function<void(const net::DataHeader&, net::DropCause)> on_data_drop;

  std::optional<RouteEntry> route_to(int dest);
  std::vector<RouteEntry> route_table();
  const RouterStats& stats() const { return stats_; }
  std::size_t buffered() const { return buffer_.size(); }

 private:
  struct Discovery {
    std::uint32_t rreq_id = 0;
    int retries_done = 0;
    sim::EventId timeout_ev = 0;
  };
  struct Buffered {
    std::uint64_t id;
    net::DataHeader header;
    sim::EventId timeout_ev;
  };

  // MAC upcalls.
  void packet_from_mac(net::NetPacket&& pkt, int from);
  void unicast_failed(const net::Frame& frame);
  void queue_dropped(const net::Frame& frame);

  void handle_data(net::NetPacket&& pkt, int from);
  void handle_rreq(const net::RreqHeader& rq, int ttl, int from);
  void handle_rrep(const net::RrepHeader& rp, int from);
  void handle_rerr(const net::RerrHeader& re, int from);
  void handle_hello(const net::HelloHeader& h, int from);

  void transmit_data(net::NetPacket pkt, RouteEntry& route);
  void buffer_packet(const net::DataHeader& header);
  void flush_buffer(int dest);
  void start_discovery(int dest);
  void send_rreq(int dest, Discovery& disc);
  void discovery_timeout(int dest);
  void break_link(int dead_hop);
  void send_rerr(std::vector<std::pair<int, std::uint32_t>> unreachable);
  void hello_tick();

  RouteEntry* lookup(int dest);  // applies lazy expiry/deletion
  RouteEntry* valid_route(int dest);
  void update_route(int dest, int next_hop, int hop_count, std::uint32_t seq,
                    bool seq_known, double lifetime_s);
  void refresh_route(int dest);
  bool seen_rreq(int origin, std::uint32_t rreq_id);
  void remember_rreq(int origin, std::uint32_t rreq_id);
  void drop_data(const net::DataHeader& header, net::DropCause cause);
  void send_control(net::NetPacket pkt, int next_hop);

  int node_;
  AodvParams params_;
  mac::Mac& mac_;
  sim::Scheduler& sched_;

  std::map<int, RouteEntry> routes_;
  std::map<int, Discovery> discoveries_;
  std::deque<Buffered> buffer_;
  std::uint64_t next_buffer_id_ = 1;

  std::uint32_t own_seq_ = 0;
  std::uint32_t next_rreq_id_ = 0;

  std::unordered_map<std::uint64_t, double> seen_;
  std::deque<std::pair<std::uint64_t, double>> seen_order_;

  std::map<int, double> last_hello_;
  RouterStats stats_;
};

}  // namespace siwsim::aodv
