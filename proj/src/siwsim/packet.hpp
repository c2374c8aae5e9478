#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace siwsim::net {

// Terminal fate of a data packet that was not delivered.
enum class DropCause {
  no_route,   // buffer overflow/timeout, failed discovery, or no route mid-path
  mac_retry,  // unicast retry limit exhausted
  mac_queue,  // interface queue overflow
  ttl,        // hop limit reached
  collision,  // kept for accounting symmetry; overlaps trigger MAC retries
              // instead of terminal drops, so this stays zero by design
};

std::string to_string(DropCause cause);

// Monotone (sequence number, hop count) stamp carried by data packets.
// Along any forwarding path the sequence number must not decrease, and on
// equal sequence numbers the hop count must strictly shrink; this is the
// loop-freedom argument of the routing protocol, checked at every hop.
struct RouteTag {
  std::uint32_t dest_seq = 0;
  int hop_count = 0;
  bool known = false;
};

struct DataHeader {
  int flow_id = 0;
  std::uint64_t seq = 0;
  int origin = 0;
  int dest = 0;
  int payload_bytes = 0;
  double sent_time_s = 0.0;
  RouteTag tag;
};

struct RreqHeader {
  int origin = 0;
  int dest = 0;
  std::uint32_t rreq_id = 0;
  std::uint32_t origin_seq = 0;
  std::uint32_t dest_seq = 0;  // last known; ignored when !dest_seq_known
  bool dest_seq_known = false;
  int hop_count = 0;
};

struct RrepHeader {
  int origin = 0;  // discovery originator the reply travels toward
  int dest = 0;
  std::uint32_t dest_seq = 0;
  int hop_count = 0;
  double lifetime_s = 0.0;
};

struct RerrHeader {
  std::vector<std::pair<int, std::uint32_t>> unreachable;  // (dest, seq)
};

struct HelloHeader {
  int origin = 0;
  std::uint32_t origin_seq = 0;
};

using NetHeader =
    std::variant<DataHeader, RreqHeader, RrepHeader, RerrHeader, HelloHeader>;

// Encapsulation added to every network body: UDP + IP.
inline constexpr int kEncapsulationBytes = 28;

struct NetPacket {
  NetHeader header;
  int ttl = 0;

  bool is_data() const { return std::holds_alternative<DataHeader>(header); }
  // Size on the wire including encapsulation; the MAC adds its own header.
  int size_bytes() const;
};

inline constexpr int kMacHeaderBytes = 34;
inline constexpr int kAckFrameBytes = 14;  // complete ack frame

// Link-layer unit. A frame either carries a network packet or is a bare
// acknowledgement.
struct Frame {
  int tx = 0;
  int rx = -1;  // -1 = link broadcast
  std::uint32_t mac_seq = 0;
  bool is_ack = false;
  bool is_control = false;  // routing traffic (acks inherit the flag)
  std::optional<NetPacket> packet;

  bool broadcast() const { return rx < 0; }
  int air_bytes() const;  // bytes contributing to airtime and channel load
};

inline std::string to_string(DropCause cause) {
  switch (cause) {
    case DropCause::no_route: return "no_route";
    case DropCause::mac_retry: return "mac_retry";
    case DropCause::mac_queue: return "mac_queue";
    case DropCause::ttl: return "ttl";
    case DropCause::collision: return "collision";
  }
  return "unknown";
}

inline int NetPacket::size_bytes() const {
  struct Sizer {
    int operator()(const DataHeader& h) const { return h.payload_bytes; }
    int operator()(const RreqHeader&) const { return 24; }
    int operator()(const RrepHeader&) const { return 20; }
    int operator()(const RerrHeader& h) const {
      return 4 + 8 * static_cast<int>(h.unreachable.size());
    }
    int operator()(const HelloHeader&) const { return 20; }
  };
  return std::visit(Sizer{}, header) + kEncapsulationBytes;
}

inline int Frame::air_bytes() const {
  if (is_ack) return kAckFrameBytes;
  return (packet ? packet->size_bytes() : 0) + kMacHeaderBytes;
}

}  // namespace siwsim::net
