#pragma once

#include <cstdint>
#include <random>

namespace siwsim {

// Independent random streams per subsystem, all derived from one master
// seed. mt19937_64 with seed_seq initialization is fully specified by the
// standard, so sequences are identical across platforms and toolchains.
enum class StreamId : std::uint32_t {
  mobility = 1,
  mac = 2,
  traffic = 3,
};

class RngStream {
 public:
  RngStream(std::uint64_t master_seed, StreamId stream);

  std::uint64_t raw() { return rng_(); }

  // Uniform in [0, 1). The top 53 bits are used so the mapping does not
  // depend on library distribution internals.
  double uniform01() { return (rng_() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  // Unbiased uniform integer in [0, n), n >= 1.
  std::uint64_t uniform_int(std::uint64_t n);

 private:
  std::mt19937_64 rng_;
};

}  // namespace siwsim
