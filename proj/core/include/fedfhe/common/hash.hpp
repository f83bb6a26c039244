#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "fedfhe/common/bytes.hpp"

namespace fedfhe {

// Initializes libsodium once; safe to call repeatedly.
void crypto_init();

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view text);
std::array<std::uint8_t, 64> sha512(std::span<const std::uint8_t> data);

// Incremental SHA-256.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::span<const std::uint8_t> data);
  void update(std::string_view text);
  void update_u64(std::uint64_t v);
  Digest finish();

 private:
  alignas(16) std::array<std::uint8_t, 128> state_;
};

}  // namespace fedfhe
