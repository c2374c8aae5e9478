#include "siwsim/mac.hpp"

#include <algorithm>
#include <utility>

namespace siwsim::mac {

void MacParams::validate() const {
  if (!(slot_s > 0.0) || !(sifs_s > 0.0) || !(plcp_s > 0.0)) {
    throw ValidationError("mac timing parameters must be positive");
  }
  if (!(difs_s > sifs_s)) {
    throw ValidationError("difs must exceed sifs");
  }
  if (cw_min < 1 || cw_max < cw_min) {
    throw ValidationError("contention window must satisfy 1 <= cw_min <= cw_max");
  }
  if (retry_limit < 0) {
    throw ValidationError("retry limit must be >= 0");
  }
  if (!(data_rate_bps > 0.0)) {
    throw ValidationError("data rate must be positive");
  }
  if (queue_cap < 1) {
    throw ValidationError("queue capacity must be >= 1");
  }
  if (mtu_bytes < 1) {
    throw ValidationError("mtu must be >= 1");
  }
}

double MacParams::airtime_s(const net::Frame& frame) const {
  return plcp_s + frame.air_bytes() * 8.0 / data_rate_bps;
}

double MacParams::ack_airtime_s() const {
  return plcp_s + net::kAckFrameBytes * 8.0 / data_rate_bps;
}

Mac::Mac(int node, const MacParams& params, phy::Medium& medium,
         sim::Scheduler& sched, RngStream& rng)
    : node_(node), params_(params), medium_(medium), sched_(sched), rng_(rng),
      cw_(params.cw_min) {
  params_.validate();
  medium_.attach(node_, this);
}

void Mac::enqueue(net::Frame frame) {
  frame.tx = node_;
  if (!frame.packet) {
    throw RuntimeFailure("mac: enqueued frame carries no packet");
  }
  if (frame.packet->size_bytes() > params_.mtu_bytes) {
    throw RuntimeFailure("mac: frame exceeds the mtu");
  }
  if (queue_.size() >= (std::size_t)params_.queue_cap) {
    ++stats_.queue_drops;
    if (on_queue_drop) on_queue_drop(frame);
    return;
  }
  frame.mac_seq = next_mac_seq_++;
  queue_.push_back(std::move(frame));
  maybe_start_contention();
}

void Mac::maybe_start_contention() {
  if (contending_ || tx_kind_ != TxKind::none || awaiting_ack_ ||
      queue_.empty()) {
    return;
  }
  contending_ = true;
  if (!have_backoff_) {
    backoff_slots_ = (int)rng_.uniform_int(cw_ + 1);
    have_backoff_ = true;
  }
  arm_difs();
}

void Mac::arm_difs() {
  if (tx_kind_ != TxKind::none || medium_.busy(node_)) {
    return;  // resumed on idle or at own tx end
  }
  defer_ev_ = sched_.after(params_.difs_s, [this] { difs_done(); });
  defer_armed_ = true;
}

void Mac::cancel_defer() {
  if (defer_armed_) {
    sched_.cancel(defer_ev_);
    defer_armed_ = false;
  }
}

void Mac::channel_busy_changed(bool busy) {
  if (busy) {
    cancel_defer();  // remaining backoff slots stay frozen
  } else if (contending_ && tx_kind_ == TxKind::none) {
    arm_difs();
  }
}

void Mac::difs_done() {
  defer_armed_ = false;
  if (backoff_slots_ == 0) {
    commit();
  } else {
    defer_ev_ = sched_.after(params_.slot_s, [this] { slot_elapsed(); });
    defer_armed_ = true;
  }
}

void Mac::slot_elapsed() {
  defer_armed_ = false;
  --backoff_slots_;
  if (backoff_slots_ == 0) {
    commit();
  } else {
    defer_ev_ = sched_.after(params_.slot_s, [this] { slot_elapsed(); });
    defer_armed_ = true;
  }
}

void Mac::commit() {
  // Signals starting at this exact instant are unsensable; only something
  // strictly older forces another deferral round.
  if (medium_.busy_before(node_, sched_.now())) {
    arm_difs();
    return;
  }
  contending_ = false;
  current_tx_ = queue_.front();
  double duration = params_.airtime_s(current_tx_);
  tx_kind_ = TxKind::frame;
  ++stats_.tx_frames;
  if (on_transmit) on_transmit(current_tx_, sched_.now() + duration);
  medium_.transmit(current_tx_, duration);
  sched_.after(duration, [this] { tx_done(); });
}

void Mac::tx_done() {
  tx_kind_ = TxKind::none;
  if (current_tx_.broadcast()) {
    finish_current();
    return;
  }
  awaiting_ack_ = true;
  ack_timeout_ev_ = sched_.after(params_.ack_timeout_s(), [this] { ack_timeout(); });
}

void Mac::ack_timeout() {
  awaiting_ack_ = false;
  ++retries_;
  if (retries_ > params_.retry_limit) {
    ++stats_.retry_failures;
    net::Frame failed = queue_.front();
    finish_current();
    if (on_unicast_failed) on_unicast_failed(failed);
    return;
  }
  ++stats_.tx_retries;
  cw_ = std::min(2 * (cw_ + 1) - 1, params_.cw_max);
  backoff_slots_ = (int)rng_.uniform_int(cw_ + 1);
  have_backoff_ = true;
  contending_ = true;
  arm_difs();
}

void Mac::finish_current() {
  queue_.pop_front();
  cw_ = params_.cw_min;
  retries_ = 0;
  have_backoff_ = false;
  contending_ = false;
  maybe_start_contention();
}

void Mac::start_ack(int to, bool control) {
  if (tx_kind_ != TxKind::none) {
    return;  // own transmission in progress; the sender will retry
  }
  cancel_defer();
  net::Frame ack;
  ack.tx = node_;
  ack.rx = to;
  ack.mac_seq = next_mac_seq_++;
  ack.is_ack = true;
  ack.is_control = control;
  double duration = params_.ack_airtime_s();
  tx_kind_ = TxKind::ack;
  ++stats_.tx_frames;
  if (on_transmit) on_transmit(ack, sched_.now() + duration);
  medium_.transmit(ack, duration);
  sched_.after(duration, [this] {
    tx_kind_ = TxKind::none;
    if (contending_) {
      arm_difs();
    } else {
      maybe_start_contention();  // frames may have queued while acking
    }
  });
}

std::vector<net::Frame> Mac::extract_unicasts_to(int dest) {
  // The head is untouchable while it is on the air or awaiting its ack;
  // it resolves through its own success or retry-failure path.
  std::size_t protect = (tx_kind_ == TxKind::frame || awaiting_ack_) ? 1 : 0;
  std::vector<net::Frame> out;
  bool head_removed = false;
  std::deque<net::Frame> kept;
  for (std::size_t i = 0; i < queue_.size(); ++i) {
    net::Frame& frame = queue_[i];
    if (i >= protect && !frame.broadcast() && frame.rx == dest) {
      if (i == 0) head_removed = true;
      out.push_back(std::move(frame));
    } else {
      kept.push_back(std::move(frame));
    }
  }
  queue_ = std::move(kept);
  if (head_removed) {
    if (contending_) {
      cancel_defer();
      contending_ = false;
      have_backoff_ = false;
    }
    maybe_start_contention();
  }
  return out;
}

void Mac::frame_received(const net::Frame& frame) {
  if (frame.is_ack) {
    if (frame.rx == node_ && awaiting_ack_) {
      awaiting_ack_ = false;
      sched_.cancel(ack_timeout_ev_);
      finish_current();
    }
    return;
  }

  if (frame.rx == node_) {
    // Ack even duplicates: the sender retried because its ack got lost.
    int from = frame.tx;
    bool control = frame.is_control;
    sched_.after(params_.sifs_s, [this, from, control] { start_ack(from, control); });
    auto it = last_seq_from_.find(frame.tx);
    if (it != last_seq_from_.end() && it->second == frame.mac_seq) {
      ++stats_.rx_duplicates;
      return;
    }
    last_seq_from_[frame.tx] = frame.mac_seq;
    ++stats_.rx_delivered;
    if (on_receive && frame.packet) {
      on_receive(net::NetPacket(*frame.packet), frame.tx);
    }
    return;
  }

  if (frame.broadcast()) {
    ++stats_.rx_delivered;
    if (on_receive && frame.packet) {
      on_receive(net::NetPacket(*frame.packet), frame.tx);
    }
  }
  // Unicast addressed elsewhere is ignored.
}

void Mac::frame_corrupted(const net::Frame&) { ++stats_.corrupted_frames; }

}  // namespace siwsim::mac
