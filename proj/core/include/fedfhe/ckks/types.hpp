#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "fedfhe/ckks/modarith.hpp"

namespace fedfhe::ckks {

// Ring element in residue form. Limb i is reduced modulo prime index moduli[i].
struct RnsPoly {
  std::size_t n = 0;
  std::vector<int> moduli;
  std::vector<u64> data;
  bool ntt = true;

  RnsPoly() = default;
  RnsPoly(std::size_t degree, std::vector<int> mods, bool ntt_form = true)
      : n(degree), moduli(std::move(mods)), data(n * moduli.size(), 0), ntt(ntt_form) {}

  std::size_t limbs() const { return moduli.size(); }
  u64* limb(std::size_t i) { return data.data() + i * n; }
  const u64* limb(std::size_t i) const { return data.data() + i * n; }
  bool operator==(const RnsPoly&) const = default;
};

// Prime indices 0..level.
std::vector<int> chain_indices(int level);

struct Plaintext {
  RnsPoly poly;
  int level = 0;
  int scale_bits = 0;
};

struct Ciphertext {
  std::vector<RnsPoly> parts;
  int level = 0;
  int scale_bits = 0;
  std::uint64_t context_id = 0;

  std::size_t size() const { return parts.size(); }
};

struct SecretKey {
  RnsPoly poly;  // NTT form over all chain primes and the special prime
  std::uint64_t context_id = 0;
};

struct PublicKey {
  RnsPoly b, a;  // NTT form over all chain primes
  std::uint64_t context_id = 0;
};

// One digit per chain prime; each digit is an (b, a) pair over all primes plus the special prime.
struct SwitchKey {
  std::vector<RnsPoly> b, a;
};

struct EvaluationKeys {
  PublicKey public_key;
  SwitchKey relin_key;
  std::map<int, SwitchKey> rotation_keys;
  std::uint64_t context_id = 0;

  bool has_rotation(int step) const { return rotation_keys.count(step) != 0; }
};

struct KeySet {
  SecretKey secret_key;
  std::shared_ptr<const EvaluationKeys> eval;

  const PublicKey& public_key() const { return eval->public_key; }
};

}  // namespace fedfhe::ckks
