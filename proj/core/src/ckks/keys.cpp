#include "fedfhe/ckks/keys.hpp"

#include <bit>

#include "fedfhe/ckks/poly.hpp"
#include "fedfhe/common/error.hpp"
#include "fedfhe/common/hash.hpp"
#include "fedfhe/common/prng.hpp"

namespace fedfhe::ckks {

namespace {

std::vector<int> all_indices(const Context& ctx) { return chain_indices(ctx.special_index()); }

RnsPoly small_poly(const Context& ctx, std::span<const std::int64_t> coeffs, const std::vector<int>& moduli) {
  auto p = poly::from_signed(ctx, coeffs, moduli);
  poly::to_ntt(ctx, p);
  return p;
}

// Digit j encrypts P * s_target under s, restricted to the residue of q_j.
SwitchKey make_switch_key(const Context& ctx, Prng& prng, const RnsPoly& s, const RnsPoly& s_target) {
  const auto mods = all_indices(ctx);
  const int top = ctx.max_level();
  const u64 special = ctx.modulus(ctx.special_index()).value;
  SwitchKey key;
  for (int j = 0; j <= top; ++j) {
    RnsPoly a = poly::sample_uniform(ctx, prng, mods);
    auto e_coeffs = poly::sample_gaussian(prng, ctx.n(), ctx.params().error_stddev);
    RnsPoly b = small_poly(ctx, e_coeffs, mods);
    RnsPoly as = poly::mul(ctx, a, s);
    poly::sub_inplace(ctx, b, as);
    const auto& qj = ctx.modulus(j);
    const u64 p_mod = reduce(special, qj);
    const u64 ps = shoup_precompute(p_mod, qj.value);
    u64* bj = b.limb(static_cast<std::size_t>(j));
    const u64* tj = s_target.limb(static_cast<std::size_t>(j));
    for (std::size_t c = 0; c < ctx.n(); ++c) bj[c] = add_mod(bj[c], mul_shoup(tj[c], p_mod, ps, qj.value), qj.value);
    key.b.push_back(std::move(b));
    key.a.push_back(std::move(a));
  }
  return key;
}

void hash_poly(Sha256& h, const RnsPoly& p) {
  h.update_u64(p.n);
  for (auto m : p.moduli) h.update_u64(static_cast<std::uint64_t>(m));
  h.update(std::span(reinterpret_cast<const std::uint8_t*>(p.data.data()), p.data.size() * sizeof(u64)));
}

}  // namespace

KeySet keygen(const ContextPtr& ctx_ptr, std::uint64_t seed) {
  const Context& ctx = *ctx_ptr;
  Prng prng(seed, 0x6b657967656eULL);
  const auto mods = all_indices(ctx);
  const auto chain = chain_indices(ctx.max_level());

  auto s_coeffs = poly::sample_ternary(prng, ctx.n());
  KeySet keys;
  keys.secret_key.poly = small_poly(ctx, s_coeffs, mods);
  keys.secret_key.context_id = ctx.id();
  const RnsPoly& s = keys.secret_key.poly;

  auto eval = std::make_shared<EvaluationKeys>();
  eval->context_id = ctx.id();
  {
    RnsPoly a = poly::sample_uniform(ctx, prng, chain);
    auto e = poly::sample_gaussian(prng, ctx.n(), ctx.params().error_stddev);
    RnsPoly b = small_poly(ctx, e, chain);
    RnsPoly s_chain = poly::select_limbs(s, chain);
    poly::sub_inplace(ctx, b, poly::mul(ctx, a, s_chain));
    eval->public_key = PublicKey{std::move(b), std::move(a), ctx.id()};
  }
  eval->relin_key = make_switch_key(ctx, prng, s, poly::mul(ctx, s, s));
  for (std::size_t step = 1; step < ctx.slots(); step <<= 1) {
    for (int sign : {1, -1}) {
      int k = sign * static_cast<int>(step);
      auto s_rot = poly::permute(s, ctx.step_permutation(k));
      eval->rotation_keys.emplace(k, make_switch_key(ctx, prng, s, s_rot));
    }
  }
  keys.eval = std::move(eval);
  return keys;
}

Digest keyset_digest(const KeySet& keys) {
  Sha256 h;
  hash_poly(h, keys.secret_key.poly);
  hash_poly(h, keys.eval->public_key.b);
  hash_poly(h, keys.eval->public_key.a);
  auto hash_switch = [&](const SwitchKey& k) {
    for (std::size_t j = 0; j < k.b.size(); ++j) {
      hash_poly(h, k.b[j]);
      hash_poly(h, k.a[j]);
    }
  };
  hash_switch(keys.eval->relin_key);
  for (const auto& [step, k] : keys.eval->rotation_keys) {
    h.update_u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(step)));
    hash_switch(k);
  }
  return h.finish();
}

std::vector<int> decompose_rotation(int step, std::size_t slots) {
  const auto sl = static_cast<long long>(slots);
  long long k = ((static_cast<long long>(step) % sl) + sl) % sl;
  std::vector<int> out;
  if (k == 0) return out;
  auto pos = static_cast<unsigned long long>(k);
  auto neg = static_cast<unsigned long long>(sl - k);
  if (std::popcount(pos) <= std::popcount(neg)) {
    for (int b = 0; pos; ++b, pos >>= 1) {
      if (pos & 1) out.push_back(1 << b);
    }
  } else {
    for (int b = 0; neg; ++b, neg >>= 1) {
      if (neg & 1) out.push_back(-(1 << b));
    }
  }
  return out;
}

EvaluationKeys restrict_keys(const EvaluationKeys& keys, std::span<const int> rotation_steps, bool keep_relin) {
  EvaluationKeys out;
  out.public_key = keys.public_key;
  out.context_id = keys.context_id;
  if (keep_relin) out.relin_key = keys.relin_key;
  for (int step : rotation_steps) {
    auto it = keys.rotation_keys.find(step);
    if (it == keys.rotation_keys.end()) fail(ErrorCode::missing_rotation_key, "no key for step " + std::to_string(step));
    out.rotation_keys.emplace(step, it->second);
  }
  return out;
}

}  // namespace fedfhe::ckks
