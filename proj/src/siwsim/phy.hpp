#pragma once

#include <cstdint>
#include <vector>

#include "siwsim/antenna.hpp"
#include "siwsim/errors.hpp"
#include "siwsim/kernel.hpp"
#include "siwsim/mobility.hpp"
#include "siwsim/packet.hpp"

namespace siwsim::phy {

enum class PropagationModel { free_space, two_ray };

std::string to_string(PropagationModel m);
PropagationModel propagation_model_from_string(const std::string& s);

struct RadioParams {
  antenna::AntennaSpec antenna;
  double tx_power_w = 0.28183815;
  // Receive threshold; signals below it are invisible (no interference).
  double sensitivity_w = 3.652e-10;
  double antenna_height_m = 1.5;
  PropagationModel model = PropagationModel::two_ray;
  // Pattern shaping only matters out of plane; all links here are in-plane,
  // where the hemispheric pattern gives full gain.
  bool use_pattern = false;
  double back_attenuation_db = 15.0;
  // When off, any overlap corrupts every signal involved. When on, a signal
  // at least capture_threshold_db stronger than the one it meets survives.
  bool capture = false;
  double capture_threshold_db = 10.0;

  void validate() const;
  double wavelength_m() const { return kSpeedOfLightMps / antenna.f0_hz; }
  double gain_linear() const;
};

// Free-space received power, isotropic reference.
double friis_rx_w(double tx_w, double gain_tx, double gain_rx,
                  double wavelength_m, double distance_m);

// Flat-earth two-ray ground approximation, valid past the crossover.
double two_ray_rx_w(double tx_w, double gain_tx, double gain_rx, double ht_m,
                    double hr_m, double distance_m);

// Distance where the two-ray model takes over from free space; the two
// expressions agree exactly there.
double crossover_distance_m(double ht_m, double hr_m, double wavelength_m);

double free_space_path_loss_db(double distance_m, double f_hz);

// Received power under the configured model (two_ray switches to free
// space below the crossover).
double rx_power_w(const RadioParams& params, double distance_m);

// Largest distance still received at or above the sensitivity threshold,
// by closed-form inversion of the active model branch.
double comm_range_m(const RadioParams& params);

// What the MAC sees from the channel.
class MediumClient {
 public:
  virtual ~MediumClient() = default;
  // Received energy appeared (busy=true) or the last signal ended (false).
  // A node's own transmissions do not raise its channel-busy state.
  virtual void channel_busy_changed(bool busy) = 0;
  // A frame finished and decoded cleanly at this node.
  virtual void frame_received(const net::Frame& frame) = 0;
  // A frame finished but was corrupted by overlap; counters only.
  virtual void frame_corrupted(const net::Frame& frame) = 0;
};

// Shared broadcast channel. Propagation delay is not modeled, so a frame
// occupies the air at every reachable receiver for exactly the sender's
// transmission interval. Receiver positions are sampled at the moment the
// transmission starts.
class Medium {
 public:
  Medium(sim::Scheduler& sched, const RadioParams& params,
         const mobility::FieldTrajectories& field);

  void attach(int node, MediumClient* client);

  // Starts a transmission now, lasting duration_s. The sender is deaf for
  // the interval (anything arriving at it is corrupted) and anything it
  // was receiving is corrupted too.
  void transmit(const net::Frame& frame, double duration_s);

  bool busy(int node) const { return !active_[node].empty(); }
  bool transmitting(int node) const { return tx_until_[node] > sched_.now(); }
  // True when some signal at the node began strictly before t. Signals
  // starting exactly at t are physically unsensable at t, which is what
  // makes same-instant transmit decisions collide instead of defer.
  bool busy_before(int node, double t) const;

  std::uint64_t transmissions() const { return transmissions_; }

 private:
  struct Signal {
    std::uint64_t id;
    net::Frame frame;
    double start_s;
    double power_w;
    bool corrupted;
  };

  void signal_ended(int node, std::uint64_t signal_id);

  sim::Scheduler& sched_;
  const RadioParams& params_;
  const mobility::FieldTrajectories& field_;
  std::vector<MediumClient*> clients_;
  std::vector<std::vector<Signal>> active_;
  std::vector<double> tx_until_;
  std::uint64_t next_signal_id_ = 1;
  std::uint64_t transmissions_ = 0;
};

}  // namespace siwsim::phy
