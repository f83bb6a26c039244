#pragma once

#include <cstdint>
#include <vector>

namespace fedfhe::ckks {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

// Word-sized prime modulus with a precomputed Barrett constant floor(2^128 / q).
struct Modulus {
  u64 value = 0;
  u64 ratio_lo = 0;
  u64 ratio_hi = 0;

  Modulus() = default;
  explicit Modulus(u64 q) : value(q) {
    u128 r = ~u128(0) / q;
    ratio_lo = static_cast<u64>(r);
    ratio_hi = static_cast<u64>(r >> 64);
  }

  double log2() const;
};

inline u64 reduce_128(u128 x, const Modulus& m) {
  u64 lo = static_cast<u64>(x), hi = static_cast<u64>(x >> 64);
  u128 t = u128(lo) * m.ratio_lo;
  u64 carry = static_cast<u64>(t >> 64);
  t = u128(lo) * m.ratio_hi;
  u128 s = t + carry;
  u64 tmp1 = static_cast<u64>(s);
  u64 tmp3 = static_cast<u64>(s >> 64);
  t = u128(hi) * m.ratio_lo;
  s = u128(tmp1) + static_cast<u64>(t);
  carry = static_cast<u64>(t >> 64) + static_cast<u64>(s >> 64);
  u64 quot = hi * m.ratio_hi + tmp3 + carry;
  u64 r = lo - quot * m.value;
  return r >= m.value ? r - m.value : r;
}

inline u64 reduce(u64 x, const Modulus& m) { return reduce_128(x, m); }

inline u64 mul_mod(u64 a, u64 b, const Modulus& m) { return reduce_128(u128(a) * b, m); }

inline u64 add_mod(u64 a, u64 b, u64 q) {
  u64 s = a + b;
  return s >= q ? s - q : s;
}

inline u64 sub_mod(u64 a, u64 b, u64 q) { return a >= b ? a - b : a + q - b; }

inline u64 neg_mod(u64 a, u64 q) { return a == 0 ? 0 : q - a; }

// Shoup multiplication by a fixed operand w with w_shoup = floor(w * 2^64 / q).
inline u64 shoup_precompute(u64 w, u64 q) { return static_cast<u64>((u128(w) << 64) / q); }

inline u64 mul_shoup(u64 x, u64 w, u64 w_shoup, u64 q) {
  u64 hi = static_cast<u64>((u128(x) * w_shoup) >> 64);
  u64 r = x * w - hi * q;
  return r >= q ? r - q : r;
}

u64 pow_mod(u64 base, u64 exp, const Modulus& m);
u64 inv_mod(u64 a, const Modulus& m);

// Maps a signed integer into [0, q).
inline u64 from_signed(std::int64_t v, u64 q) {
  if (v >= 0) return static_cast<u64>(v) % q;
  u64 r = static_cast<u64>(-(v + 1)) % q;
  return q - 1 - r;
}

bool is_prime(u64 n);

// Primes p == 1 (mod modulus_step) with bit length close to 2^bits, taken
// alternately just above and just below 2^bits to keep the product near 2^(bits*count).
std::vector<u64> primes_near_power(int bits, int count, u64 modulus_step, const std::vector<u64>& exclude);

// Largest prime below 2^bits congruent to 1 mod modulus_step.
u64 largest_prime_below(int bits, u64 modulus_step, const std::vector<u64>& exclude);

}  // namespace fedfhe::ckks
