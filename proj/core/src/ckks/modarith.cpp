#include "fedfhe/ckks/modarith.hpp"

#include <algorithm>
#include <cmath>

#include "fedfhe/common/error.hpp"

namespace fedfhe::ckks {

double Modulus::log2() const { return std::log2(static_cast<double>(value)); }

u64 pow_mod(u64 base, u64 exp, const Modulus& m) {
  u64 result = 1 % m.value;
  base = reduce(base, m);
  while (exp) {
    if (exp & 1) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return result;
}

u64 inv_mod(u64 a, const Modulus& m) {
  a = reduce(a, m);
  if (a == 0) fail(ErrorCode::invalid_argument, "zero has no modular inverse");
  return pow_mod(a, m.value - 2, m);
}

namespace {

u64 mulmod_plain(u64 a, u64 b, u64 n) { return static_cast<u64>(u128(a) * b % n); }

u64 powmod_plain(u64 b, u64 e, u64 n) {
  u64 r = 1;
  b %= n;
  while (e) {
    if (e & 1) r = mulmod_plain(r, b, n);
    b = mulmod_plain(b, b, n);
    e >>= 1;
  }
  return r;
}

}  // namespace

bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // This witness set is deterministic for all 64-bit inputs.
  for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    u64 x = powmod_plain(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod_plain(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::vector<u64> primes_near_power(int bits, int count, u64 modulus_step, const std::vector<u64>& exclude) {
  const u64 center = u64{1} << bits;
  std::vector<u64> out;
  u64 up = center + 1;
  u64 down = center + 1 - modulus_step;
  auto taken = [&](u64 p) {
    return std::find(exclude.begin(), exclude.end(), p) != exclude.end() ||
           std::find(out.begin(), out.end(), p) != out.end();
  };
  bool above = true;
  while (static_cast<int>(out.size()) < count) {
    if (above) {
      while (!is_prime(up) || taken(up)) up += modulus_step;
      out.push_back(up);
      up += modulus_step;
    } else {
      while (!is_prime(down) || taken(down)) down -= modulus_step;
      out.push_back(down);
      down -= modulus_step;
    }
    above = !above;
  }
  return out;
}

u64 largest_prime_below(int bits, u64 modulus_step, const std::vector<u64>& exclude) {
  u64 p = (u64{1} << bits) + 1 - modulus_step;
  while (!is_prime(p) || std::find(exclude.begin(), exclude.end(), p) != exclude.end()) p -= modulus_step;
  return p;
}

}  // namespace fedfhe::ckks
