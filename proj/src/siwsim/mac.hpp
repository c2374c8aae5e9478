#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <unordered_map>
#include <vector>

#include "siwsim/kernel.hpp"
#include "siwsim/packet.hpp"
#include "siwsim/phy.hpp"
#include "siwsim/rng.hpp"

namespace siwsim::mac {

// DSSS/11 Mb/s contention parameters. Times are seconds.
struct MacParams {
  double slot_s = 20e-6;
  double sifs_s = 10e-6;
  double difs_s = 50e-6;
  double plcp_s = 192e-6;  // preamble + header, fixed cost per frame
  int cw_min = 31;
  int cw_max = 1023;
  int retry_limit = 7;  // retransmissions after the first attempt
  double data_rate_bps = 11e6;
  int queue_cap = 50;
  int mtu_bytes = 2304;

  void validate() const;
  double airtime_s(const net::Frame& frame) const;
  double ack_airtime_s() const;
  // Generous enough that a sole responder's ack always beats it.
  double ack_timeout_s() const {
    return sifs_s + ack_airtime_s() + 2.0 * slot_s;
  }
};

struct MacStats {
  std::uint64_t tx_frames = 0;  // every airing, including retries and acks
  std::uint64_t tx_retries = 0;
  std::uint64_t rx_delivered = 0;
  std::uint64_t rx_duplicates = 0;
  std::uint64_t corrupted_frames = 0;
  std::uint64_t queue_drops = 0;
  std::uint64_t retry_failures = 0;
};

// One node's link layer: a FIFO interface queue drained by CSMA/CA with
// binary exponential backoff, positive acks for unicast, and duplicate
// suppression by per-sender frame sequence numbers. Broadcast frames are
// fire-and-forget. All nodes share one rng stream; event order makes the
// draws reproducible.
class Mac : public phy::MediumClient {
 public:
  Mac(int node, const MacParams& params, phy::Medium& medium,
      sim::Scheduler& sched, RngStream& rng);

  // Takes ownership; sets the transmitter and frame sequence. Full queue
  // drops are reported through on_queue_drop.
  void enqueue(net::Frame frame);

  // A decoded packet for this node (unicast to it or broadcast).
  std::function<void(net::NetPacket&&, int from)> on_receive;
  // Unicast gave up after the retry limit; the frame names the dead hop.
  std::function<void(const net::Frame&)> on_unicast_failed;
  std::function<void(const net::Frame&)> on_queue_drop;
  // Fired at transmission start with the airing's end time.
  std::function<void(const net::Frame&, double end_s)> on_transmit;

  // Pulls every queued unicast addressed to dest (the routing layer calls
  // this when the hop is declared dead). The in-flight head stays put.
  std::vector<net::Frame> extract_unicasts_to(int dest);

  const MacStats& stats() const { return stats_; }
  std::size_t queue_size() const { return queue_.size(); }

  void channel_busy_changed(bool busy) override;
  void frame_received(const net::Frame& frame) override;
  void frame_corrupted(const net::Frame& frame) override;

 private:
  enum class TxKind { none, frame, ack };

  void maybe_start_contention();
  void arm_difs();
  void difs_done();
  void slot_elapsed();
  void commit();
  void tx_done();
  void ack_timeout();
  void start_ack(int to, bool control);
  void finish_current();
  void cancel_defer();

  int node_;
  MacParams params_;
  phy::Medium& medium_;
  sim::Scheduler& sched_;
  RngStream& rng_;

  std::deque<net::Frame> queue_;
  std::uint32_t next_mac_seq_ = 1;

  bool contending_ = false;    // backoff machinery owns the head frame
  bool have_backoff_ = false;  // slots drawn for the current attempt
  int backoff_slots_ = 0;
  int cw_;
  int retries_ = 0;
  bool defer_armed_ = false;
  sim::EventId defer_ev_ = 0;

  TxKind tx_kind_ = TxKind::none;
  net::Frame current_tx_;
  bool awaiting_ack_ = false;
  sim::EventId ack_timeout_ev_ = 0;

  std::unordered_map<int, std::uint32_t> last_seq_from_;
  MacStats stats_;
};

}  // namespace siwsim::mac
