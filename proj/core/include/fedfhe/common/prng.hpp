#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace fedfhe {

// Deterministic ChaCha20 keystream generator. The key is SHA-256 of the
// seed and a domain label, so independent streams can share one seed.
class Prng {
 public:
  explicit Prng(std::uint64_t seed, std::uint64_t stream = 0);

  // Seeds from the operating system.
  static Prng from_entropy();

  std::uint64_t next_u64();
  std::uint32_t next_u32() { return static_cast<std::uint32_t>(next_u64() >> 32); }
  // Uniform in [0, bound), rejection sampled.
  std::uint64_t uniform(std::uint64_t bound);
  // Uniform in [0, 1) with 53 random bits.
  double uniform01();
  // Uniform in the open interval (0, 1).
  double uniform_open01();
  double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double gaussian(double stddev);
  void fill(std::uint8_t* out, std::size_t n);

  template <class It>
  void shuffle(It first, It last) {
    auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      auto j = uniform(i);
      std::swap(first[i - 1], first[j]);
    }
  }

  // Child generator derived from this one's next output.
  Prng fork(std::uint64_t label);

 private:
  Prng() = default;
  void refill();

  std::array<std::uint8_t, 32> key_{};
  std::uint64_t counter_ = 0;
  std::array<std::uint8_t, 512> buf_{};
  std::size_t pos_ = 512;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fedfhe
