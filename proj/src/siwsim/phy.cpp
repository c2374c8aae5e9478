#include "siwsim/phy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace siwsim::phy {
namespace {

constexpr double kPi = std::numbers::pi;

// Below this separation the far-field expressions blow up; clamp instead.
constexpr double kMinDistanceM = 1e-3;

}  // namespace

std::string to_string(PropagationModel m) {
  return m == PropagationModel::free_space ? "free_space" : "two_ray";
}

PropagationModel propagation_model_from_string(const std::string& s) {
  if (s == "free_space") return PropagationModel::free_space;
  if (s == "two_ray") return PropagationModel::two_ray;
  throw ValidationError("unknown propagation model '" + s +
                        "' (expected free_space or two_ray)");
}

void RadioParams::validate() const {
  antenna.validate();
  if (!(tx_power_w > 0.0)) {
    throw ValidationError("tx power must be positive");
  }
  if (!(sensitivity_w > 0.0)) {
    throw ValidationError("sensitivity must be positive");
  }
  if (!(antenna_height_m > 0.0)) {
    throw ValidationError("antenna height must be positive");
  }
  if (!(back_attenuation_db >= 0.0)) {
    throw ValidationError("back attenuation must be >= 0 dB");
  }
  if (!(capture_threshold_db > 0.0)) {
    throw ValidationError("capture threshold must be positive");
  }
}

double RadioParams::gain_linear() const {
  double dbi = use_pattern ? antenna.gain_dbi_toward(0.0, back_attenuation_db)
                           : antenna.gain_dbi;
  return ratio_from_db(dbi);
}

double friis_rx_w(double tx_w, double gain_tx, double gain_rx,
                  double wavelength_m, double distance_m) {
  double d = std::max(distance_m, kMinDistanceM);
  double factor = wavelength_m / (4.0 * kPi * d);
  return tx_w * gain_tx * gain_rx * factor * factor;
}

double two_ray_rx_w(double tx_w, double gain_tx, double gain_rx, double ht_m,
                    double hr_m, double distance_m) {
  double d = std::max(distance_m, kMinDistanceM);
  return tx_w * gain_tx * gain_rx * ht_m * ht_m * hr_m * hr_m / (d * d * d * d);
}

double crossover_distance_m(double ht_m, double hr_m, double wavelength_m) {
  return 4.0 * kPi * ht_m * hr_m / wavelength_m;
}

double free_space_path_loss_db(double distance_m, double f_hz) {
  if (!(distance_m > 0.0) || !(f_hz > 0.0)) {
    throw ValidationError("path loss needs positive distance and frequency");
  }
  return 20.0 * std::log10(4.0 * kPi * distance_m * f_hz / kSpeedOfLightMps);
}

double rx_power_w(const RadioParams& params, double distance_m) {
  double g = params.gain_linear();
  double lambda = params.wavelength_m();
  if (params.model == PropagationModel::free_space) {
    return friis_rx_w(params.tx_power_w, g, g, lambda, distance_m);
  }
  double dc = crossover_distance_m(params.antenna_height_m,
                                   params.antenna_height_m, lambda);
  if (distance_m < dc) {
    return friis_rx_w(params.tx_power_w, g, g, lambda, distance_m);
  }
  return two_ray_rx_w(params.tx_power_w, g, g, params.antenna_height_m,
                      params.antenna_height_m, distance_m);
}

double comm_range_m(const RadioParams& params) {
  params.validate();
  double g = params.gain_linear();
  double lambda = params.wavelength_m();
  double friis_range = lambda / (4.0 * kPi) *
                       std::sqrt(params.tx_power_w * g * g / params.sensitivity_w);
  if (params.model == PropagationModel::free_space) {
    return friis_range;
  }
  double h2 = params.antenna_height_m * params.antenna_height_m;
  double two_ray_range = std::pow(
      params.tx_power_w * g * g * h2 * h2 / params.sensitivity_w, 0.25);
  double dc = crossover_distance_m(params.antenna_height_m,
                                   params.antenna_height_m, lambda);
  // The combined curve is continuous and strictly decreasing, so exactly
  // one branch inversion is consistent with the crossover.
  return two_ray_range >= dc ? two_ray_range : friis_range;
}

Medium::Medium(sim::Scheduler& sched, const RadioParams& params,
               const mobility::FieldTrajectories& field)
    : sched_(sched), params_(params), field_(field) {
  params_.validate();
  clients_.resize(field.nodes.size(), nullptr);
  active_.resize(field.nodes.size());
  tx_until_.resize(field.nodes.size(), -1.0);
}

void Medium::attach(int node, MediumClient* client) {
  if (node < 0 || (std::size_t)node >= clients_.size()) {
    throw RuntimeFailure("medium: node id out of range");
  }
  clients_[node] = client;
}

bool Medium::busy_before(int node, double t) const {
  for (const Signal& s : active_[node]) {
    if (s.start_s < t) return true;
  }
  return false;
}

void Medium::transmit(const net::Frame& frame, double duration_s) {
  int tx = frame.tx;
  if (tx < 0 || (std::size_t)tx >= clients_.size() || clients_[tx] == nullptr) {
    throw RuntimeFailure("medium: transmit from unattached node");
  }
  if (!(duration_s > 0.0)) {
    throw RuntimeFailure("medium: transmission needs positive duration");
  }
  double now = sched_.now();
  ++transmissions_;
  tx_until_[tx] = now + duration_s;

  // The sender's receiver is off while it talks.
  for (Signal& s : active_[tx]) {
    s.corrupted = true;
  }

  double capture_ratio = ratio_from_db(params_.capture_threshold_db);
  mobility::Position from = field_.nodes[tx].at(now);
  for (std::size_t node = 0; node < clients_.size(); ++node) {
    if ((int)node == tx || clients_[node] == nullptr) continue;
    mobility::Position to = field_.nodes[node].at(now);
    double distance = std::hypot(to.x - from.x, to.y - from.y);
    double power = rx_power_w(params_, distance);
    if (power < params_.sensitivity_w) continue;

    Signal sig{next_signal_id_++, frame, now, power, false};
    if (transmitting(node)) {
      sig.corrupted = true;
    }
    for (Signal& other : active_[node]) {
      if (!params_.capture) {
        other.corrupted = true;
        sig.corrupted = true;
      } else if (sig.power_w >= other.power_w * capture_ratio) {
        other.corrupted = true;
      } else if (other.power_w >= sig.power_w * capture_ratio) {
        sig.corrupted = true;
      } else {
        other.corrupted = true;
        sig.corrupted = true;
      }
    }

    bool was_idle = active_[node].empty();
    active_[node].push_back(sig);
    std::uint64_t sig_id = sig.id;
    sched_.after(duration_s, [this, node, sig_id] {
      signal_ended((int)node, sig_id);
    });
    if (was_idle) {
      clients_[node]->channel_busy_changed(true);
    }
  }
}

void Medium::signal_ended(int node, std::uint64_t signal_id) {
  auto& signals = active_[node];
  auto it = std::find_if(signals.begin(), signals.end(),
                         [signal_id](const Signal& s) { return s.id == signal_id; });
  if (it == signals.end()) {
    throw RuntimeFailure("medium: signal bookkeeping out of sync");
  }
  Signal sig = std::move(*it);
  signals.erase(it);
  if (signals.empty()) {
    clients_[node]->channel_busy_changed(false);
  }
  if (sig.corrupted) {
    clients_[node]->frame_corrupted(sig.frame);
  } else {
    clients_[node]->frame_received(sig.frame);
  }
}

}  // namespace siwsim::phy
