#include "fedfhe/ckks/ntt.hpp"

#include <bit>

#include "fedfhe/common/error.hpp"

namespace fedfhe::ckks {

std::size_t bit_reverse(std::size_t x, int bits) {
  std::size_t r = 0;
  for (int i = 0; i < bits; ++i) {
    r = (r << 1) | (x & 1);
    x >>= 1;
  }
  return r;
}

namespace {

u64 find_primitive_2n_root(std::size_t n, const Modulus& q) {
  const u64 order = 2 * n;
  if ((q.value - 1) % order != 0) fail(ErrorCode::invalid_params, "modulus is not NTT friendly");
  const u64 cofactor = (q.value - 1) / order;
  for (u64 g = 2; g < 1000000; ++g) {
    u64 psi = pow_mod(g, cofactor, q);
    if (pow_mod(psi, n, q) == q.value - 1) return psi;
  }
  fail(ErrorCode::invalid_params, "no primitive root found");
}

}  // namespace

NttTables::NttTables(std::size_t n, const Modulus& q) : n_(n), log_n_(std::countr_zero(n)), q_(q) {
  if (!std::has_single_bit(n)) fail(ErrorCode::invalid_params, "ring degree must be a power of two");
  psi_ = find_primitive_2n_root(n, q);
  const u64 psi_inv = inv_mod(psi_, q);
  psi_rev_.resize(n);
  psi_inv_rev_.resize(n);
  psi_rev_shoup_.resize(n);
  psi_inv_rev_shoup_.resize(n);
  u64 pw = 1, pw_inv = 1;
  std::vector<u64> pows(n), inv_pows(n);
  for (std::size_t i = 0; i < n; ++i) {
    pows[i] = pw;
    inv_pows[i] = pw_inv;
    pw = mul_mod(pw, psi_, q);
    pw_inv = mul_mod(pw_inv, psi_inv, q);
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto r = bit_reverse(i, log_n_);
    psi_rev_[i] = pows[r];
    psi_inv_rev_[i] = inv_pows[r];
    psi_rev_shoup_[i] = shoup_precompute(psi_rev_[i], q.value);
    psi_inv_rev_shoup_[i] = shoup_precompute(psi_inv_rev_[i], q.value);
  }
  n_inv_ = inv_mod(n, q);
  n_inv_shoup_ = shoup_precompute(n_inv_, q.value);
}

void NttTables::forward(u64* a) const {
  const u64 q = q_.value;
  std::size_t t = n_;
  for (std::size_t m = 1; m < n_; m <<= 1) {
    t >>= 1;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j1 = 2 * i * t;
      const u64 w = psi_rev_[m + i], ws = psi_rev_shoup_[m + i];
      u64* x = a + j1;
      u64* y = x + t;
      for (std::size_t j = 0; j < t; ++j) {
        u64 u = x[j];
        u64 v = mul_shoup(y[j], w, ws, q);
        x[j] = add_mod(u, v, q);
        y[j] = sub_mod(u, v, q);
      }
    }
  }
}

void NttTables::inverse(u64* a) const {
  const u64 q = q_.value;
  std::size_t t = 1;
  for (std::size_t m = n_; m > 1; m >>= 1) {
    std::size_t j1 = 0;
    const std::size_t h = m >> 1;
    for (std::size_t i = 0; i < h; ++i) {
      const u64 w = psi_inv_rev_[h + i], ws = psi_inv_rev_shoup_[h + i];
      u64* x = a + j1;
      u64* y = x + t;
      for (std::size_t j = 0; j < t; ++j) {
        u64 u = x[j];
        u64 v = y[j];
        x[j] = add_mod(u, v, q);
        y[j] = mul_shoup(sub_mod(u, v, q), w, ws, q);
      }
      j1 += 2 * t;
    }
    t <<= 1;
  }
  for (std::size_t j = 0; j < n_; ++j) a[j] = mul_shoup(a[j], n_inv_, n_inv_shoup_, q);
}

}  // namespace fedfhe::ckks
