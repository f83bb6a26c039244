#include "fedfhe/ckks/params.hpp"

#include <bit>
#include <cmath>

#include "fedfhe/ckks/modarith.hpp"
#include "fedfhe/common/error.hpp"
#include "fedfhe/common/hash.hpp"

namespace fedfhe::ckks {

namespace {

// Largest total log2(Q*P) for 128-bit classical security with ternary secrets.
double std128_modulus_bound(std::size_t n) {
  switch (n) {
    case 4096: return 109;
    case 8192: return 218;
    case 16384: return 438;
    case 32768: return 881;
    default: return 0;
  }
}

}  // namespace

std::string to_string(SecurityProfile p) { return p == SecurityProfile::desk ? "desk" : "std128"; }

SecurityProfile profile_from_string(const std::string& s) {
  if (s == "desk") return SecurityProfile::desk;
  if (s == "std128") return SecurityProfile::std128;
  fail(ErrorCode::invalid_argument, "unknown security profile '" + s + "'");
}

double FheParams::total_modulus_bits() const {
  double bits = std::log2(static_cast<double>(special_prime));
  for (auto q : modulus_chain) bits += std::log2(static_cast<double>(q));
  return bits;
}

void FheParams::validate() const {
  require(ring_degree >= 16 && std::has_single_bit(ring_degree), ErrorCode::invalid_params,
          "ring degree must be a power of two");
  require(modulus_chain.size() >= 6, ErrorCode::invalid_params, "modulus chain must hold at least 6 primes");
  require(scale_bits > 0 && aux_scale_bits > 0 && aux_scale_bits <= scale_bits, ErrorCode::invalid_params,
          "scale bits out of range");
  require(error_stddev > 0, ErrorCode::invalid_params, "error stddev must be positive");
  const std::uint64_t step = 2 * ring_degree;
  auto check_prime = [&](std::uint64_t q) {
    require(q < (std::uint64_t{1} << 62), ErrorCode::invalid_params, "prime exceeds 62 bits");
    require(q % step == 1, ErrorCode::invalid_params, "prime " + std::to_string(q) + " is not 1 mod 2N");
    require(is_prime(q), ErrorCode::invalid_params, std::to_string(q) + " is not prime");
  };
  for (auto q : modulus_chain) check_prime(q);
  check_prime(special_prime);
  for (auto q : modulus_chain) {
    require(q < special_prime, ErrorCode::invalid_params, "special prime must exceed every chain prime");
  }
  for (std::size_t i = 1; i < modulus_chain.size(); ++i) {
    require(std::log2(static_cast<double>(modulus_chain[i])) > scale_bits - 1.0, ErrorCode::invalid_params,
            "chain primes must be near 2^scale_bits");
  }
  if (security_profile == SecurityProfile::std128) {
    require(ring_degree >= 4096, ErrorCode::invalid_params, "std128 requires N >= 2^12");
    double bound = std128_modulus_bound(ring_degree);
    require(bound > 0 && total_modulus_bits() <= bound, ErrorCode::invalid_params,
            "modulus too large for 128-bit security at this ring degree");
  }
}

Digest FheParams::digest() const {
  Sha256 h;
  h.update("fedfhe.ckks.params.v1");
  h.update_u64(ring_degree);
  h.update_u64(modulus_chain.size());
  for (auto q : modulus_chain) h.update_u64(q);
  h.update_u64(special_prime);
  h.update_u64(static_cast<std::uint64_t>(scale_bits));
  h.update_u64(static_cast<std::uint64_t>(aux_scale_bits));
  h.update_u64(static_cast<std::uint64_t>(std::llround(error_stddev * 1e6)));
  h.update_u64(static_cast<std::uint64_t>(security_profile));
  return h.finish();
}

FheParams FheParams::build(std::size_t ring_degree, int depth, int scale_bits, int aux_scale_bits,
                           SecurityProfile profile) {
  FheParams p;
  p.ring_degree = ring_degree;
  p.scale_bits = scale_bits;
  p.aux_scale_bits = aux_scale_bits;
  p.security_profile = profile;
  const std::uint64_t step = 2 * ring_degree;
  std::uint64_t q0 = largest_prime_below(60, step, {});
  auto mids = primes_near_power(scale_bits, depth, step, {q0});
  p.modulus_chain.push_back(q0);
  p.modulus_chain.insert(p.modulus_chain.end(), mids.begin(), mids.end());
  std::vector<std::uint64_t> used = p.modulus_chain;
  p.special_prime = largest_prime_below(61, step, used);
  p.validate();
  return p;
}

FheParams FheParams::desk() { return build(8192, 5, 40, 20, SecurityProfile::desk); }

FheParams FheParams::std128() { return build(16384, 5, 40, 20, SecurityProfile::std128); }

FheParams FheParams::for_profile(SecurityProfile p) { return p == SecurityProfile::desk ? desk() : std128(); }

}  // namespace fedfhe::ckks
