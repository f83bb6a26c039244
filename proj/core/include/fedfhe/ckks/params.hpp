#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedfhe/common/bytes.hpp"

namespace fedfhe::ckks {

enum class SecurityProfile { desk, std128 };

std::string to_string(SecurityProfile p);
SecurityProfile profile_from_string(const std::string& s);

struct FheParams {
  std::size_t ring_degree = 0;
  // q_0 .. q_L; level l uses the first l+1 primes.
  std::vector<std::uint64_t> modulus_chain;
  // Key-switching prime, never part of a ciphertext modulus.
  std::uint64_t special_prime = 0;
  int scale_bits = 40;
  int aux_scale_bits = 20;
  double error_stddev = 3.2;
  SecurityProfile security_profile = SecurityProfile::desk;

  std::size_t slot_count() const { return ring_degree / 2; }
  int max_level() const { return static_cast<int>(modulus_chain.size()) - 1; }
  double total_modulus_bits() const;

  // Throws invalid_params when an invariant is violated.
  void validate() const;
  Digest digest() const;

  // N = 2^13; q_0 ~ 2^60, five primes near 2^scale_bits, special prime ~ 2^61.
  static FheParams desk();
  // Same chain at N = 2^14.
  static FheParams std128();
  static FheParams for_profile(SecurityProfile p);
  // Custom chain: one 60-bit base prime plus `depth` primes near 2^scale_bits.
  static FheParams build(std::size_t ring_degree, int depth, int scale_bits, int aux_scale_bits,
                         SecurityProfile profile);
};

}  // namespace fedfhe::ckks
