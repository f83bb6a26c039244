#include "fedfhe/ckks/poly.hpp"

#include <cmath>

#include "fedfhe/common/error.hpp"

namespace fedfhe::ckks::poly {

namespace {

void same_shape(const RnsPoly& a, const RnsPoly& b) {
  if (a.n != b.n || a.moduli != b.moduli || a.ntt != b.ntt) {
    fail(ErrorCode::level_mismatch, "ring elements have different shapes");
  }
}

}  // namespace

void to_ntt(const Context& ctx, RnsPoly& p) {
  if (p.ntt) return;
  for (std::size_t i = 0; i < p.limbs(); ++i) ctx.ntt(p.moduli[i]).forward(p.limb(i));
  p.ntt = true;
}

void from_ntt(const Context& ctx, RnsPoly& p) {
  if (!p.ntt) return;
  for (std::size_t i = 0; i < p.limbs(); ++i) ctx.ntt(p.moduli[i]).inverse(p.limb(i));
  p.ntt = false;
}

void add_inplace(const Context& ctx, RnsPoly& a, const RnsPoly& b) {
  same_shape(a, b);
  for (std::size_t i = 0; i < a.limbs(); ++i) {
    const u64 q = ctx.modulus(a.moduli[i]).value;
    u64* x = a.limb(i);
    const u64* y = b.limb(i);
    for (std::size_t j = 0; j < a.n; ++j) x[j] = add_mod(x[j], y[j], q);
  }
}

void sub_inplace(const Context& ctx, RnsPoly& a, const RnsPoly& b) {
  same_shape(a, b);
  for (std::size_t i = 0; i < a.limbs(); ++i) {
    const u64 q = ctx.modulus(a.moduli[i]).value;
    u64* x = a.limb(i);
    const u64* y = b.limb(i);
    for (std::size_t j = 0; j < a.n; ++j) x[j] = sub_mod(x[j], y[j], q);
  }
}

void negate_inplace(const Context& ctx, RnsPoly& a) {
  for (std::size_t i = 0; i < a.limbs(); ++i) {
    const u64 q = ctx.modulus(a.moduli[i]).value;
    u64* x = a.limb(i);
    for (std::size_t j = 0; j < a.n; ++j) x[j] = neg_mod(x[j], q);
  }
}

RnsPoly mul(const Context& ctx, const RnsPoly& a, const RnsPoly& b) {
  RnsPoly out = a;
  mul_inplace(ctx, out, b);
  return out;
}

void mul_inplace(const Context& ctx, RnsPoly& a, const RnsPoly& b) {
  same_shape(a, b);
  for (std::size_t i = 0; i < a.limbs(); ++i) {
    const auto& m = ctx.modulus(a.moduli[i]);
    u64* x = a.limb(i);
    const u64* y = b.limb(i);
    for (std::size_t j = 0; j < a.n; ++j) x[j] = mul_mod(x[j], y[j], m);
  }
}

void mul_acc(const Context& ctx, RnsPoly& a, const RnsPoly& b, const RnsPoly& c) {
  same_shape(b, c);
  same_shape(a, b);
  for (std::size_t i = 0; i < a.limbs(); ++i) {
    const auto& m = ctx.modulus(a.moduli[i]);
    u64* x = a.limb(i);
    const u64* y = b.limb(i);
    const u64* z = c.limb(i);
    for (std::size_t j = 0; j < a.n; ++j) x[j] = add_mod(x[j], mul_mod(y[j], z[j], m), m.value);
  }
}

void mul_scalar_inplace(const Context& ctx, RnsPoly& a, std::int64_t s) {
  std::vector<u64> res(a.limbs());
  for (std::size_t i = 0; i < a.limbs(); ++i) res[i] = fedfhe::ckks::from_signed(s, ctx.modulus(a.moduli[i]).value);
  mul_residues_inplace(ctx, a, res);
}

void mul_residues_inplace(const Context& ctx, RnsPoly& a, std::span<const u64> residues) {
  for (std::size_t i = 0; i < a.limbs(); ++i) {
    const u64 q = ctx.modulus(a.moduli[i]).value;
    const u64 w = residues[i], ws = shoup_precompute(w, q);
    u64* x = a.limb(i);
    for (std::size_t j = 0; j < a.n; ++j) x[j] = mul_shoup(x[j], w, ws, q);
  }
}

RnsPoly from_signed(const Context& ctx, std::span<const std::int64_t> coeffs, const std::vector<int>& moduli) {
  RnsPoly out(ctx.n(), moduli, false);
  for (std::size_t i = 0; i < moduli.size(); ++i) {
    const u64 q = ctx.modulus(moduli[i]).value;
    u64* x = out.limb(i);
    for (std::size_t j = 0; j < out.n; ++j) x[j] = fedfhe::ckks::from_signed(coeffs[j], q);
  }
  return out;
}

void truncate_limbs(RnsPoly& a, std::size_t count) {
  if (count > a.limbs()) fail(ErrorCode::level_mismatch, "cannot raise limb count");
  a.moduli.resize(count);
  a.data.resize(count * a.n);
}

RnsPoly select_limbs(const RnsPoly& a, const std::vector<int>& moduli) {
  RnsPoly out(a.n, moduli, a.ntt);
  for (std::size_t i = 0; i < moduli.size(); ++i) {
    std::size_t src = a.limbs();
    for (std::size_t k = 0; k < a.limbs(); ++k) {
      if (a.moduli[k] == moduli[i]) src = k;
    }
    if (src == a.limbs()) fail(ErrorCode::level_mismatch, "missing limb");
    std::copy(a.limb(src), a.limb(src) + a.n, out.limb(i));
  }
  return out;
}

RnsPoly permute(const RnsPoly& a, const std::vector<std::uint32_t>& perm) {
  RnsPoly out(a.n, a.moduli, a.ntt);
  for (std::size_t i = 0; i < a.limbs(); ++i) {
    const u64* x = a.limb(i);
    u64* y = out.limb(i);
    for (std::size_t j = 0; j < a.n; ++j) y[j] = x[perm[j]];
  }
  return out;
}

std::vector<std::int64_t> sample_ternary(Prng& prng, std::size_t n) {
  std::vector<std::int64_t> out(n);
  for (auto& v : out) v = static_cast<std::int64_t>(prng.uniform(3)) - 1;
  return out;
}

std::vector<std::int64_t> sample_gaussian(Prng& prng, std::size_t n, double stddev) {
  std::vector<std::int64_t> out(n);
  const double bound = 6.0 * stddev;
  for (auto& v : out) {
    double x;
    do {
      x = prng.gaussian(stddev);
    } while (std::abs(x) > bound);
    v = std::llround(x);
  }
  return out;
}

RnsPoly sample_uniform(const Context& ctx, Prng& prng, const std::vector<int>& moduli) {
  RnsPoly out(ctx.n(), moduli, true);
  for (std::size_t i = 0; i < moduli.size(); ++i) {
    const u64 q = ctx.modulus(moduli[i]).value;
    u64* x = out.limb(i);
    for (std::size_t j = 0; j < out.n; ++j) x[j] = prng.uniform(q);
  }
  return out;
}

}  // namespace fedfhe::ckks::poly

namespace fedfhe::ckks {

std::vector<int> chain_indices(int level) {
  std::vector<int> out(static_cast<std::size_t>(level) + 1);
  for (int i = 0; i <= level; ++i) out[i] = i;
  return out;
}

}  // namespace fedfhe::ckks
