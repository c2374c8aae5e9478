#include "siwsim/rng.hpp"

#include "siwsim/errors.hpp"

namespace siwsim {

RngStream::RngStream(std::uint64_t master_seed, StreamId stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed & 0xffffffffu),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  rng_.seed(seq);
}

std::uint64_t RngStream::uniform_int(std::uint64_t n) {
  if (n == 0) {
    throw RuntimeFailure("uniform_int requires n >= 1");
  }
  // Rejection below 2^64 mod n removes modulo bias.
  std::uint64_t threshold = (0 - n) % n;
  std::uint64_t x;
  do {
    x = rng_();
  } while (x < threshold);
  return x % n;
}

}  // namespace siwsim
