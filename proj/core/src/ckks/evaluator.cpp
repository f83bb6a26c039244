#include "fedfhe/ckks/evaluator.hpp"

#include <cmath>

#include "fedfhe/ckks/keys.hpp"
#include "fedfhe/ckks/poly.hpp"
#include "fedfhe/common/error.hpp"

namespace fedfhe::ckks {

namespace {

// Bits kept free above the scale so logical values up to 2^headroom decrypt correctly.
constexpr double kHeadroomBits = 10.0;

void check_pair(const Ciphertext& a, const Ciphertext& b) {
  if (a.context_id != b.context_id) fail(ErrorCode::key_mismatch, "ciphertexts from different params");
  if (a.level != b.level) {
    fail(ErrorCode::level_mismatch, "levels " + std::to_string(a.level) + " and " + std::to_string(b.level));
  }
  if (a.scale_bits != b.scale_bits) {
    fail(ErrorCode::scale_mismatch,
         "scales 2^" + std::to_string(a.scale_bits) + " and 2^" + std::to_string(b.scale_bits));
  }
  if (a.size() != b.size()) fail(ErrorCode::invalid_argument, "ciphertext sizes differ");
}

}  // namespace

Evaluator::Evaluator(ContextPtr ctx, std::shared_ptr<const EvaluationKeys> keys)
    : ctx_(std::move(ctx)), keys_(std::move(keys)) {
  if (keys_ && keys_->context_id != ctx_->id()) fail(ErrorCode::key_mismatch, "keys belong to other params");
}

void Evaluator::check_context(const Ciphertext& a) const {
  if (a.context_id != ctx_->id()) fail(ErrorCode::key_mismatch, "ciphertext belongs to other params");
}

void Evaluator::check_scale_room(int scale_bits, int level) const {
  if (scale_bits + kHeadroomBits >= ctx_->modulus_bits(level)) {
    fail(ErrorCode::scale_overflow, "scale 2^" + std::to_string(scale_bits) + " does not fit level " +
                                        std::to_string(level));
  }
}

Ciphertext Evaluator::add(const Ciphertext& a, const Ciphertext& b) const {
  Ciphertext out = a;
  add_inplace(out, b);
  return out;
}

Ciphertext Evaluator::sub(const Ciphertext& a, const Ciphertext& b) const {
  Ciphertext out = a;
  sub_inplace(out, b);
  return out;
}

void Evaluator::add_inplace(Ciphertext& a, const Ciphertext& b) const {
  check_context(a);
  check_pair(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) poly::add_inplace(*ctx_, a.parts[i], b.parts[i]);
}

void Evaluator::sub_inplace(Ciphertext& a, const Ciphertext& b) const {
  check_context(a);
  check_pair(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) poly::sub_inplace(*ctx_, a.parts[i], b.parts[i]);
}

Ciphertext Evaluator::negate(const Ciphertext& a) const {
  check_context(a);
  Ciphertext out = a;
  for (auto& p : out.parts) poly::negate_inplace(*ctx_, p);
  return out;
}

Ciphertext Evaluator::add_plain(const Ciphertext& a, const Plaintext& p) const {
  check_context(a);
  if (p.scale_bits != a.scale_bits) fail(ErrorCode::scale_mismatch, "plaintext scale differs");
  if (p.level < a.level) fail(ErrorCode::level_mismatch, "plaintext level below ciphertext level");
  Ciphertext out = a;
  poly::add_inplace(*ctx_, out.parts[0], poly::select_limbs(p.poly, out.parts[0].moduli));
  return out;
}

Ciphertext Evaluator::add_const(const Ciphertext& a, double c) const {
  check_context(a);
  Ciphertext out = a;
  const int base_bits = std::min(a.scale_bits, 50);
  const double scaled = c * std::ldexp(1.0, base_bits);
  if (std::abs(scaled) >= 0x1.0p62) fail(ErrorCode::scale_overflow, "constant too large for scale");
  const std::int64_t v = std::llround(scaled);
  RnsPoly& p = out.parts[0];
  for (std::size_t i = 0; i < p.limbs(); ++i) {
    const auto& m = ctx_->modulus(p.moduli[i]);
    u64 r = from_signed(v, m.value);
    r = mul_mod(r, pow_mod(2, static_cast<u64>(a.scale_bits - base_bits), m), m);
    u64* x = p.limb(i);
    for (std::size_t j = 0; j < p.n; ++j) x[j] = add_mod(x[j], r, m.value);
  }
  return out;
}

std::pair<RnsPoly, RnsPoly> Evaluator::key_switch(const RnsPoly& d, const SwitchKey& key) const {
  const Context& ctx = *ctx_;
  const std::size_t n = ctx.n();
  const int level = static_cast<int>(d.limbs()) - 1;
  const int sp = ctx.special_index();
  auto ext = chain_indices(level);
  ext.push_back(sp);

  RnsPoly acc0(n, ext, true), acc1(n, ext, true);
  RnsPoly dc = d;
  poly::from_ntt(ctx, dc);
  std::vector<u64> tmp(n);
  for (int j = 0; j <= level; ++j) {
    const u64* dj = dc.limb(static_cast<std::size_t>(j));
    for (std::size_t t = 0; t < ext.size(); ++t) {
      const int mt = ext[t];
      const auto& m = ctx.modulus(mt);
      if (mt == j) {
        std::copy(d.limb(static_cast<std::size_t>(j)), d.limb(static_cast<std::size_t>(j)) + n, tmp.begin());
      } else {
        for (std::size_t c = 0; c < n; ++c) tmp[c] = reduce(dj[c], m);
        ctx.ntt(mt).forward(tmp.data());
      }
      const u64* kb = key.b[j].limb(static_cast<std::size_t>(mt));
      const u64* ka = key.a[j].limb(static_cast<std::size_t>(mt));
      u64* x0 = acc0.limb(t);
      u64* x1 = acc1.limb(t);
      for (std::size_t c = 0; c < n; ++c) {
        x0[c] = add_mod(x0[c], mul_mod(tmp[c], kb[c], m), m.value);
        x1[c] = add_mod(x1[c], mul_mod(tmp[c], ka[c], m), m.value);
      }
    }
  }
  divide_round_by_last(acc0);
  divide_round_by_last(acc1);
  return {std::move(acc0), std::move(acc1)};
}

void Evaluator::divide_round_by_last(RnsPoly& p) const {
  const Context& ctx = *ctx_;
  const std::size_t n = p.n;
  const std::size_t last = p.limbs() - 1;
  const int ml = p.moduli[last];
  const u64 ql = ctx.modulus(ml).value;
  const u64 half = ql >> 1;
  std::vector<u64> x(p.limb(last), p.limb(last) + n);
  if (p.ntt) ctx.ntt(ml).inverse(x.data());
  std::vector<u64> r(n);
  for (std::size_t i = 0; i < last; ++i) {
    const int mi = p.moduli[i];
    const auto& m = ctx.modulus(mi);
    const u64 ql_mod = reduce(ql, m);
    for (std::size_t c = 0; c < n; ++c) {
      u64 v = reduce(x[c], m);
      r[c] = x[c] > half ? sub_mod(v, ql_mod, m.value) : v;
    }
    if (p.ntt) ctx.ntt(mi).forward(r.data());
    const u64 inv = ctx.inv_q(ml, mi);
    const u64 inv_s = shoup_precompute(inv, m.value);
    u64* y = p.limb(i);
    for (std::size_t c = 0; c < n; ++c) y[c] = mul_shoup(sub_mod(y[c], r[c], m.value), inv, inv_s, m.value);
  }
  poly::truncate_limbs(p, last);
}

Ciphertext Evaluator::mult(const Ciphertext& a, const Ciphertext& b) const {
  check_context(a);
  if (a.context_id != b.context_id) fail(ErrorCode::key_mismatch, "ciphertexts from different params");
  if (a.level != b.level) fail(ErrorCode::level_mismatch, "mult operands at different levels");
  if (a.size() != 2 || b.size() != 2) fail(ErrorCode::invalid_argument, "mult expects relinearized inputs");
  if (a.level == 0) fail(ErrorCode::level_exhausted, "no level left to rescale a product");
  check_scale_room(a.scale_bits + b.scale_bits, a.level);
  if (!keys_ || keys_->relin_key.b.empty()) fail(ErrorCode::key_mismatch, "relinearization key unavailable");
  const Context& ctx = *ctx_;
  RnsPoly c0 = poly::mul(ctx, a.parts[0], b.parts[0]);
  RnsPoly c1 = poly::mul(ctx, a.parts[0], b.parts[1]);
  poly::mul_acc(ctx, c1, a.parts[1], b.parts[0]);
  RnsPoly c2 = poly::mul(ctx, a.parts[1], b.parts[1]);
  auto [u0, u1] = key_switch(c2, keys_->relin_key);
  poly::add_inplace(ctx, c0, u0);
  poly::add_inplace(ctx, c1, u1);
  Ciphertext out;
  out.parts.push_back(std::move(c0));
  out.parts.push_back(std::move(c1));
  out.level = a.level;
  out.scale_bits = a.scale_bits + b.scale_bits;
  out.context_id = a.context_id;
  return out;
}

Ciphertext Evaluator::cmult(const Ciphertext& a, const Plaintext& p) const {
  check_context(a);
  if (p.level < a.level) fail(ErrorCode::level_mismatch, "plaintext level below ciphertext level");
  check_scale_room(a.scale_bits + p.scale_bits, a.level);
  RnsPoly pp = poly::select_limbs(p.poly, a.parts[0].moduli);
  Ciphertext out = a;
  for (auto& part : out.parts) poly::mul_inplace(*ctx_, part, pp);
  out.scale_bits = a.scale_bits + p.scale_bits;
  return out;
}

Ciphertext Evaluator::cmult_const(const Ciphertext& a, double c, int bits) const {
  check_context(a);
  check_scale_room(a.scale_bits + bits, a.level);
  const double scaled = c * std::ldexp(1.0, bits);
  if (!std::isfinite(scaled) || std::abs(scaled) >= 0x1.0p62) fail(ErrorCode::scale_overflow, "constant too large");
  Ciphertext out = mult_integer(a, std::llround(scaled));
  out.scale_bits = a.scale_bits + bits;
  return out;
}

Ciphertext Evaluator::mult_integer(const Ciphertext& a, std::int64_t k) const {
  check_context(a);
  Ciphertext out = a;
  for (auto& part : out.parts) poly::mul_scalar_inplace(*ctx_, part, k);
  return out;
}

Ciphertext Evaluator::rescale(const Ciphertext& a, int bits) const {
  check_context(a);
  const int p = ctx_->params().scale_bits;
  if (a.level == 0) fail(ErrorCode::level_exhausted, "rescale at level 0");
  if (bits <= 0 || bits > p) fail(ErrorCode::invalid_argument, "rescale bits must be in (0, scale_bits]");
  if (a.scale_bits < bits) fail(ErrorCode::scale_mismatch, "rescale below unit scale");
  Ciphertext out = a;
  if (bits < p) {
    for (auto& part : out.parts) poly::mul_scalar_inplace(*ctx_, part, std::int64_t{1} << (p - bits));
  }
  for (auto& part : out.parts) divide_round_by_last(part);
  out.level = a.level - 1;
  out.scale_bits = a.scale_bits - bits;
  return out;
}

Ciphertext Evaluator::drop_to_level(const Ciphertext& a, int level) const {
  check_context(a);
  if (level > a.level || level < 0) fail(ErrorCode::level_mismatch, "cannot raise ciphertext level");
  Ciphertext out = a;
  for (auto& part : out.parts) poly::truncate_limbs(part, static_cast<std::size_t>(level) + 1);
  out.level = level;
  return out;
}

Ciphertext Evaluator::rotate_pow2(const Ciphertext& a, int step) const {
  if (!keys_ || !keys_->has_rotation(step)) {
    fail(ErrorCode::missing_rotation_key, "no rotation key for step " + std::to_string(step));
  }
  const auto& perm = ctx_->step_permutation(step);
  RnsPoly c0 = poly::permute(a.parts[0], perm);
  RnsPoly c1 = poly::permute(a.parts[1], perm);
  auto [u0, u1] = key_switch(c1, keys_->rotation_keys.at(step));
  poly::add_inplace(*ctx_, c0, u0);
  Ciphertext out;
  out.parts.push_back(std::move(c0));
  out.parts.push_back(std::move(u1));
  out.level = a.level;
  out.scale_bits = a.scale_bits;
  out.context_id = a.context_id;
  return out;
}

Ciphertext Evaluator::rotate(const Ciphertext& a, int k) const {
  check_context(a);
  if (a.size() != 2) fail(ErrorCode::invalid_argument, "rotate expects a relinearized ciphertext");
  Ciphertext out = a;
  for (int step : decompose_rotation(k, ctx_->slots())) out = rotate_pow2(out, step);
  return out;
}

}  // namespace fedfhe::ckks
