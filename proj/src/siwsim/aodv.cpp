#include "siwsim/aodv.hpp"

#include <algorithm>
#include <utility>

#include "siwsim/errors.hpp"

namespace siwsim::aodv {
namespace {

std::uint64_t rreq_key(int origin, std::uint32_t rreq_id) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(origin)) << 32) |
         rreq_id;
}

void add_precursor(RouteEntry& entry, int node) {
  auto it = std::lower_bound(entry.precursors.begin(), entry.precursors.end(),
                             node);
  if (it == entry.precursors.end() || *it != node) {
    entry.precursors.insert(it, node);
  }
}

}  // namespace

void AodvParams::validate() const {
  if (active_route_timeout_s <= 0.0) {
    throw ValidationError("active route timeout must be positive");
  }
  if (my_route_timeout_s <= 0.0) {
    throw ValidationError("destination route lifetime must be positive");
  }
  if (net_diameter < 1) throw ValidationError("network diameter must be >= 1");
  if (node_traversal_time_s <= 0.0) {
    throw ValidationError("node traversal time must be positive");
  }
  if (rreq_retries < 0) throw ValidationError("request retries must be >= 0");
  if (buffer_cap < 1) throw ValidationError("send buffer capacity must be >= 1");
  if (buffer_timeout_s <= 0.0) {
    throw ValidationError("send buffer timeout must be positive");
  }
  if (delete_period_s <= 0.0) {
    throw ValidationError("route delete period must be positive");
  }
  if (hello_interval_s <= 0.0) {
    throw ValidationError("hello interval must be positive");
  }
  if (allowed_hello_loss < 1) {
    throw ValidationError("allowed hello loss must be >= 1");
  }
}

Router::Router(int node, const AodvParams& params, mac::Mac& mac,
               sim::Scheduler& sched)
    : node_(node), params_(params), mac_(mac), sched_(sched) {
  params_.validate();
  mac_.on_receive = [this](net::NetPacket&& pkt, int from) {
    packet_from_mac(std::move(pkt), from);
  };
  mac_.on_unicast_failed = [this](const net::Frame& frame) {
    unicast_failed(frame);
  };
  mac_.on_queue_drop = [this](const net::Frame& frame) {
    queue_dropped(frame);
  };
}

void Router::start() {
  if (!params_.hello_enabled) return;
  // Stagger first beacons so co-started nodes do not collide forever.
  sched_.after(params_.hello_interval_s + node_ * 1e-3,
               [this] { hello_tick(); });
}

void Router::send_data(net::DataHeader header) {
  net::NetPacket pkt{net::NetHeader{header}, params_.net_diameter};
  if (RouteEntry* route = valid_route(header.dest)) {
    transmit_data(std::move(pkt), *route);
    return;
  }
  buffer_packet(header);
  if (!discoveries_.count(header.dest)) start_discovery(header.dest);
}

std::optional<RouteEntry> Router::route_to(int dest) {
  RouteEntry* entry = lookup(dest);
  if (!entry) return std::nullopt;
  return *entry;
}

std::vector<RouteEntry> Router::route_table() {
  std::vector<RouteEntry> out;
  // Touch every destination first: lookup may erase expired entries.
  std::vector<int> dests;
  dests.reserve(routes_.size());
  for (const auto& [dest, entry] : routes_) dests.push_back(dest);
  for (int dest : dests) {
    if (RouteEntry* entry = lookup(dest)) out.push_back(*entry);
  }
  return out;
}

void Router::packet_from_mac(net::NetPacket&& pkt, int from) {
  struct Dispatch {
    Router* self;
    net::NetPacket& pkt;
    int from;
    void operator()(const net::DataHeader&) {
      self->handle_data(std::move(pkt), from);
    }
    void operator()(const net::RreqHeader& h) {
      self->handle_rreq(h, pkt.ttl, from);
    }
    void operator()(const net::RrepHeader& h) { self->handle_rrep(h, from); }
    void operator()(const net::RerrHeader& h) { self->handle_rerr(h, from); }
    void operator()(const net::HelloHeader& h) { self->handle_hello(h, from); }
  };
  std::visit(Dispatch{this, pkt, from}, pkt.header);
}

void Router::handle_data(net::NetPacket&& pkt, int from) {
  auto& header = std::get<net::DataHeader>(pkt.header);
  // Forwarding data keeps the path and its reverse alive.
  refresh_route(from);
  refresh_route(header.origin);
  if (header.dest == node_) {
    if (on_deliver) on_deliver(header);
    return;
  }
  if (RouteEntry* route = valid_route(header.dest)) {
    pkt.ttl -= 1;
    if (pkt.ttl <= 0) {
      drop_data(header, net::DropCause::ttl);
      return;
    }
    stats_.data_forwarded++;
    transmit_data(std::move(pkt), *route);
    return;
  }
  // No usable route mid-path: report the hole so upstream nodes stop
  // using us, and drop the packet.
  RouteEntry* stale = lookup(header.dest);
  std::uint32_t seq = stale ? stale->dest_seq + 1 : 0;
  if (stale) {
    stale->dest_seq = seq;
    stale->seq_known = true;
  }
  send_rerr({{header.dest, seq}});
  drop_data(header, net::DropCause::no_route);
}

void Router::handle_rreq(const net::RreqHeader& rq, int ttl, int from) {
  if (rq.origin == node_) return;  // flooded copy of our own request
  if (seen_rreq(rq.origin, rq.rreq_id)) return;
  remember_rreq(rq.origin, rq.rreq_id);

  update_route(from, from, 1, 0, false, params_.active_route_timeout_s);
  // Reverse route must outlive the reply's trip back.
  double reverse_life = 2.0 * params_.net_traversal_time_s() -
                        2.0 * (rq.hop_count + 1) * params_.node_traversal_time_s;
  update_route(rq.origin, from, rq.hop_count + 1, rq.origin_seq, true,
               std::max(reverse_life, params_.active_route_timeout_s));

  if (rq.dest == node_) {
    std::uint32_t floor_seq = rq.dest_seq_known ? rq.dest_seq : 0;
    own_seq_ = std::max(own_seq_, floor_seq) + 1;
    net::RrepHeader reply{rq.origin, node_, own_seq_, 0,
                          params_.my_route_timeout_s};
    stats_.rrep_sent++;
    send_control(net::NetPacket{net::NetHeader{reply}, params_.net_diameter},
                 from);
    return;
  }

  RouteEntry* fwd = valid_route(rq.dest);
  if (fwd && fwd->seq_known &&
      (!rq.dest_seq_known || fwd->dest_seq >= rq.dest_seq)) {
    // Answer from cache on the destination's behalf.
    net::RrepHeader reply{rq.origin, rq.dest, fwd->dest_seq, fwd->hop_count,
                          fwd->expiry_s - sched_.now()};
    add_precursor(*fwd, from);
    if (RouteEntry* rev = lookup(rq.origin)) {
      add_precursor(*rev, fwd->next_hop);
    }
    stats_.rrep_sent++;
    send_control(net::NetPacket{net::NetHeader{reply}, params_.net_diameter},
                 from);
    return;
  }

  if (ttl - 1 <= 0) return;
  net::RreqHeader fwd_rq = rq;
  fwd_rq.hop_count += 1;
  stats_.rreq_forwarded++;
  send_control(net::NetPacket{net::NetHeader{fwd_rq}, ttl - 1}, -1);
}

void Router::handle_rrep(const net::RrepHeader& rp, int from) {
  update_route(from, from, 1, 0, false, params_.active_route_timeout_s);
  update_route(rp.dest, from, rp.hop_count + 1, rp.dest_seq, true,
               rp.lifetime_s);

  if (rp.origin == node_) {
    auto disc = discoveries_.find(rp.dest);
    if (disc != discoveries_.end()) {
      sched_.cancel(disc->second.timeout_ev);
      discoveries_.erase(disc);
    }
    flush_buffer(rp.dest);
    return;
  }

  RouteEntry* reverse = valid_route(rp.origin);
  if (!reverse) return;  // reverse path expired; reply dies here
  if (RouteEntry* fwd = lookup(rp.dest)) {
    add_precursor(*fwd, reverse->next_hop);
  }
  if (RouteEntry* nbr = lookup(from)) {
    add_precursor(*nbr, reverse->next_hop);
  }
  net::RrepHeader fwd_rp = rp;
  fwd_rp.hop_count += 1;
  stats_.rrep_forwarded++;
  send_control(net::NetPacket{net::NetHeader{fwd_rp}, params_.net_diameter},
               reverse->next_hop);
}

void Router::handle_rerr(const net::RerrHeader& re, int from) {
  std::vector<std::pair<int, std::uint32_t>> affected;
  for (const auto& [dest, seq] : re.unreachable) {
    RouteEntry* entry = lookup(dest);
    if (!entry || !entry->valid || entry->next_hop != from) continue;
    if (entry->seq_known && entry->dest_seq > seq) continue;  // newer info
    entry->dest_seq = std::max(entry->dest_seq, seq);
    entry->seq_known = true;
    entry->valid = false;
    entry->expiry_s = sched_.now() + params_.delete_period_s;
    if (!entry->precursors.empty()) affected.emplace_back(dest, entry->dest_seq);
    entry->precursors.clear();
  }
  if (!affected.empty()) send_rerr(std::move(affected));
}

void Router::handle_hello(const net::HelloHeader& h, int from) {
  double life = (1.0 + params_.allowed_hello_loss) * params_.hello_interval_s;
  update_route(h.origin, from, 1, h.origin_seq, true, life);
  last_hello_[from] = sched_.now();
}

void Router::transmit_data(net::NetPacket pkt, RouteEntry& route) {
  auto& header = std::get<net::DataHeader>(pkt.header);
  if (header.tag.known && route.seq_known) {
    bool advances =
        route.dest_seq > header.tag.dest_seq ||
        (route.dest_seq == header.tag.dest_seq &&
         route.hop_count < header.tag.hop_count);
    if (!advances) {
      throw RuntimeFailure("routing loop: node " + std::to_string(node_) +
                           " would forward a packet for " +
                           std::to_string(header.dest) +
                           " without route progress");
    }
  }
  header.tag = net::RouteTag{route.dest_seq, route.hop_count, route.seq_known};
  refresh_route(route.dest);
  refresh_route(route.next_hop);
  net::Frame frame;
  frame.rx = route.next_hop;
  frame.is_control = false;
  frame.packet = std::move(pkt);
  mac_.enqueue(std::move(frame));
}

void Router::buffer_packet(const net::DataHeader& header) {
  if (buffer_.size() >= static_cast<std::size_t>(params_.buffer_cap)) {
    Buffered oldest = std::move(buffer_.front());
    buffer_.pop_front();
    sched_.cancel(oldest.timeout_ev);
    drop_data(oldest.header, net::DropCause::no_route);
  }
  std::uint64_t id = next_buffer_id_++;
  sim::EventId ev = sched_.after(params_.buffer_timeout_s, [this, id] {
    for (auto it = buffer_.begin(); it != buffer_.end(); ++it) {
      if (it->id != id) continue;
      net::DataHeader header = it->header;
      buffer_.erase(it);
      drop_data(header, net::DropCause::no_route);
      return;
    }
  });
  buffer_.push_back(Buffered{id, header, ev});
}

void Router::flush_buffer(int dest) {
  std::deque<Buffered> keep;
  std::vector<Buffered> ready;
  for (auto& item : buffer_) {
    if (item.header.dest == dest) {
      ready.push_back(std::move(item));
    } else {
      keep.push_back(std::move(item));
    }
  }
  buffer_ = std::move(keep);
  for (auto& item : ready) {
    sched_.cancel(item.timeout_ev);
    RouteEntry* route = valid_route(dest);
    if (!route) {
      drop_data(item.header, net::DropCause::no_route);
      continue;
    }
    transmit_data(
        net::NetPacket{net::NetHeader{item.header}, params_.net_diameter},
        *route);
  }
}

void Router::start_discovery(int dest) {
  stats_.discoveries_started++;
  Discovery& disc = discoveries_[dest];
  disc.retries_done = 0;
  send_rreq(dest, disc);
}

void Router::send_rreq(int dest, Discovery& disc) {
  ++own_seq_;
  disc.rreq_id = ++next_rreq_id_;
  remember_rreq(node_, disc.rreq_id);  // ignore our own flood echoes

  net::RreqHeader rq;
  rq.origin = node_;
  rq.dest = dest;
  rq.rreq_id = disc.rreq_id;
  rq.origin_seq = own_seq_;
  if (RouteEntry* stale = lookup(dest)) {
    rq.dest_seq = stale->dest_seq;
    rq.dest_seq_known = stale->seq_known;
  }
  stats_.rreq_sent++;
  send_control(net::NetPacket{net::NetHeader{rq}, params_.net_diameter}, -1);

  double timeout =
      params_.net_traversal_time_s() * static_cast<double>(1 << disc.retries_done);
  disc.timeout_ev = sched_.after(timeout, [this, dest] {
    discovery_timeout(dest);
  });
}

void Router::discovery_timeout(int dest) {
  auto it = discoveries_.find(dest);
  if (it == discoveries_.end()) return;
  Discovery& disc = it->second;
  disc.retries_done++;
  if (disc.retries_done > params_.rreq_retries) {
    discoveries_.erase(it);
    stats_.discoveries_failed++;
    // Everything queued for this destination is undeliverable.
    std::deque<Buffered> keep;
    std::vector<net::DataHeader> doomed;
    for (auto& item : buffer_) {
      if (item.header.dest == dest) {
        sched_.cancel(item.timeout_ev);
        doomed.push_back(item.header);
      } else {
        keep.push_back(std::move(item));
      }
    }
    buffer_ = std::move(keep);
    for (const auto& header : doomed) {
      drop_data(header, net::DropCause::no_route);
    }
    return;
  }
  send_rreq(dest, disc);
}

void Router::unicast_failed(const net::Frame& frame) {
  int dead = frame.rx;
  if (frame.packet && frame.packet->is_data()) {
    drop_data(std::get<net::DataHeader>(frame.packet->header),
              net::DropCause::mac_retry);
  }
  break_link(dead);
}

void Router::queue_dropped(const net::Frame& frame) {
  if (frame.packet && frame.packet->is_data()) {
    drop_data(std::get<net::DataHeader>(frame.packet->header),
              net::DropCause::mac_queue);
  }
}

void Router::break_link(int dead_hop) {
  stats_.link_breaks++;
  std::vector<std::pair<int, std::uint32_t>> unreachable;
  for (auto& [dest, entry] : routes_) {
    if (!entry.valid || entry.next_hop != dead_hop) continue;
    entry.dest_seq += 1;  // lost routes come back only with fresher state
    entry.seq_known = true;
    entry.valid = false;
    entry.expiry_s = sched_.now() + params_.delete_period_s;
    if (!entry.precursors.empty()) {
      unreachable.emplace_back(dest, entry.dest_seq);
    }
    entry.precursors.clear();
  }
  last_hello_.erase(dead_hop);
  // Frames already queued for the dead hop would each burn the full retry
  // ladder; fail them now.
  for (net::Frame& frame : mac_.extract_unicasts_to(dead_hop)) {
    if (frame.packet && frame.packet->is_data()) {
      drop_data(std::get<net::DataHeader>(frame.packet->header),
                net::DropCause::mac_retry);
    }
  }
  if (!unreachable.empty()) send_rerr(std::move(unreachable));
}

void Router::send_rerr(std::vector<std::pair<int, std::uint32_t>> unreachable) {
  net::RerrHeader re;
  re.unreachable = std::move(unreachable);
  stats_.rerr_sent++;
  send_control(net::NetPacket{net::NetHeader{re}, 1}, -1);
}

void Router::hello_tick() {
  net::HelloHeader h{node_, own_seq_};
  stats_.hello_sent++;
  send_control(net::NetPacket{net::NetHeader{h}, 1}, -1);

  double now = sched_.now();
  double limit =
      (1.0 + params_.allowed_hello_loss) * params_.hello_interval_s;
  std::vector<int> silent;
  std::vector<int> stale;
  for (const auto& [nbr, last] : last_hello_) {
    if (now - last <= limit) continue;
    bool in_use = false;
    for (const auto& [dest, entry] : routes_) {
      if (entry.valid && entry.expiry_s > now && entry.next_hop == nbr) {
        in_use = true;
        break;
      }
    }
    if (in_use) {
      silent.push_back(nbr);
    } else {
      stale.push_back(nbr);  // nothing rides through it; just forget
    }
  }
  for (int nbr : stale) last_hello_.erase(nbr);
  for (int nbr : silent) break_link(nbr);

  sched_.after(params_.hello_interval_s, [this] { hello_tick(); });
}

RouteEntry* Router::lookup(int dest) {
  auto it = routes_.find(dest);
  if (it == routes_.end()) return nullptr;
  RouteEntry& entry = it->second;
  double now = sched_.now();
  if (entry.valid && entry.expiry_s <= now) {
    entry.valid = false;
    entry.expiry_s = now + params_.delete_period_s;
    entry.precursors.clear();
  }
  if (!entry.valid && entry.expiry_s <= now) {
    routes_.erase(it);
    return nullptr;
  }
  return &entry;
}

RouteEntry* Router::valid_route(int dest) {
  RouteEntry* entry = lookup(dest);
  return (entry && entry->valid) ? entry : nullptr;
}

void Router::update_route(int dest, int next_hop, int hop_count,
                          std::uint32_t seq, bool seq_known,
                          double lifetime_s) {
  if (dest == node_) return;
  double expiry = sched_.now() + lifetime_s;
  RouteEntry* entry = lookup(dest);
  if (!entry) {
    RouteEntry fresh;
    fresh.dest = dest;
    fresh.next_hop = next_hop;
    fresh.hop_count = hop_count;
    fresh.dest_seq = seq;
    fresh.seq_known = seq_known;
    fresh.valid = true;
    fresh.expiry_s = expiry;
    routes_[dest] = std::move(fresh);
    return;
  }
  bool better = false;
  if (!entry->valid) {
    // A dead entry only revives on provably fresh state.
    better = !entry->seq_known || !seq_known || seq >= entry->dest_seq;
  } else if (seq_known && entry->seq_known) {
    better = seq > entry->dest_seq ||
             (seq == entry->dest_seq && hop_count < entry->hop_count);
  } else if (seq_known && !entry->seq_known) {
    better = true;
  }
  if (better) {
    entry->next_hop = next_hop;
    entry->hop_count = hop_count;
    entry->dest_seq = seq_known ? seq : entry->dest_seq;
    entry->seq_known = entry->seq_known || seq_known;
    entry->valid = true;
    entry->expiry_s = std::max(entry->expiry_s, expiry);
  } else if (entry->valid && entry->next_hop == next_hop) {
    entry->expiry_s = std::max(entry->expiry_s, expiry);
    if (seq_known && (!entry->seq_known || seq > entry->dest_seq)) {
      entry->dest_seq = seq;
      entry->seq_known = true;
    }
  }
}

void Router::refresh_route(int dest) {
  RouteEntry* entry = lookup(dest);
  if (!entry || !entry->valid) return;
  entry->expiry_s =
      std::max(entry->expiry_s, sched_.now() + params_.active_route_timeout_s);
}

bool Router::seen_rreq(int origin, std::uint32_t rreq_id) {
  double now = sched_.now();
  while (!seen_order_.empty() && seen_order_.front().second <= now) {
    seen_.erase(seen_order_.front().first);
    seen_order_.pop_front();
  }
  return seen_.count(rreq_key(origin, rreq_id)) > 0;
}

void Router::remember_rreq(int origin, std::uint32_t rreq_id) {
  std::uint64_t key = rreq_key(origin, rreq_id);
  double expiry = sched_.now() + params_.seen_cache_s();
  auto [it, inserted] = seen_.emplace(key, expiry);
  if (!inserted) it->second = expiry;
  seen_order_.emplace_back(key, expiry);
}

void Router::drop_data(const net::DataHeader& header, net::DropCause cause) {
  if (on_data_drop) on_data_drop(header, cause);
}

void Router::send_control(net::NetPacket pkt, int next_hop) {
  net::Frame frame;
  frame.rx = next_hop;
  frame.is_control = true;
  frame.packet = std::move(pkt);
  mac_.enqueue(std::move(frame));
}

}  // namespace siwsim::aodv
