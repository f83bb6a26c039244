#include "fedfhe/common/prng.hpp"

#include <sodium.h>

#include <cmath>
#include <numbers>

#include "fedfhe/common/hash.hpp"

namespace fedfhe {

Prng::Prng(std::uint64_t seed, std::uint64_t stream) {
  crypto_init();
  Sha256 h;
  h.update("fedfhe.prng");
  h.update_u64(seed);
  h.update_u64(stream);
  key_ = h.finish();
}

Prng Prng::from_entropy() {
  crypto_init();
  Prng p;
  randombytes_buf(p.key_.data(), p.key_.size());
  return p;
}

void Prng::refill() {
  std::uint8_t nonce[crypto_stream_chacha20_NONCEBYTES];
  for (int i = 0; i < 8; ++i) nonce[i] = static_cast<std::uint8_t>(counter_ >> (8 * i));
  ++counter_;
  crypto_stream_chacha20(buf_.data(), buf_.size(), nonce, key_.data());
  pos_ = 0;
}

std::uint64_t Prng::next_u64() {
  if (pos_ + 8 > buf_.size()) refill();
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return v;
}

void Prng::fill(std::uint8_t* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (pos_ >= buf_.size()) refill();
    out[i] = buf_[pos_++];
  }
}

std::uint64_t Prng::uniform(std::uint64_t bound) {
  if (bound <= 1) return 0;
  // Reject the tail that would bias the modulo.
  std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  for (;;) {
    auto v = next_u64();
    if (v < limit) return v % bound;
  }
}

double Prng::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Prng::uniform_open01() {
  for (;;) {
    double u = uniform01();
    if (u > 0.0) return u;
  }
}

double Prng::gaussian(double stddev) {
  if (has_spare_) {
    has_spare_ = false;
    return spare_ * stddev;
  }
  double u1 = uniform_open01();
  double u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double t = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t) * stddev;
}

Prng Prng::fork(std::uint64_t label) {
  Prng child;
  Sha256 h;
  h.update("fedfhe.prng.fork");
  h.update(std::span<const std::uint8_t>(key_.data(), key_.size()));
  h.update_u64(next_u64());
  h.update_u64(label);
  child.key_ = h.finish();
  return child;
}

}  // namespace fedfhe
