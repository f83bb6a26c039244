#pragma once

#include <cstdint>

#include "fedfhe/ckks/context.hpp"
#include "fedfhe/ckks/encoder.hpp"
#include "fedfhe/ckks/types.hpp"
#include "fedfhe/common/prng.hpp"

namespace fedfhe::ckks {

class Encryptor {
 public:
  Encryptor(ContextPtr ctx, PublicKey pk, std::uint64_t seed);
  // Draws encryption randomness from the operating system.
  Encryptor(ContextPtr ctx, PublicKey pk);

  Ciphertext encrypt(const Plaintext& pt);
  // Encodes at the default scale and the top level.
  Ciphertext encrypt(std::span<const double> values);
  Ciphertext encrypt(std::span<const double> values, int scale_bits, int level);

  const ContextPtr& context() const { return ctx_; }

 private:
  ContextPtr ctx_;
  PublicKey pk_;
  Prng prng_;
  Encoder encoder_;
};

class Decryptor {
 public:
  Decryptor(ContextPtr ctx, SecretKey sk);

  Plaintext decrypt(const Ciphertext& ct) const;
  std::vector<double> decrypt_values(const Ciphertext& ct) const;

 private:
  ContextPtr ctx_;
  SecretKey sk_;
  Encoder encoder_;
};

}  // namespace fedfhe::ckks
