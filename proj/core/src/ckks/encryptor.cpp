#include "fedfhe/ckks/encryptor.hpp"

#include "fedfhe/ckks/poly.hpp"
#include "fedfhe/common/error.hpp"

namespace fedfhe::ckks {

Encryptor::Encryptor(ContextPtr ctx, PublicKey pk, std::uint64_t seed)
    : ctx_(ctx), pk_(std::move(pk)), prng_(seed, 0x656e63ULL), encoder_(ctx) {
  if (pk_.context_id != ctx_->id()) fail(ErrorCode::key_mismatch, "public key belongs to other params");
}

Encryptor::Encryptor(ContextPtr ctx, PublicKey pk)
    : ctx_(ctx), pk_(std::move(pk)), prng_(Prng::from_entropy()), encoder_(ctx) {
  if (pk_.context_id != ctx_->id()) fail(ErrorCode::key_mismatch, "public key belongs to other params");
}

Ciphertext Encryptor::encrypt(const Plaintext& pt) {
  const Context& ctx = *ctx_;
  const auto mods = chain_indices(pt.level);
  if (pt.poly.moduli != mods) fail(ErrorCode::level_mismatch, "plaintext limbs do not match its level");
  auto v_coeffs = poly::sample_ternary(prng_, ctx.n());
  auto e0 = poly::sample_gaussian(prng_, ctx.n(), ctx.params().error_stddev);
  auto e1 = poly::sample_gaussian(prng_, ctx.n(), ctx.params().error_stddev);
  RnsPoly v = poly::from_signed(ctx, v_coeffs, mods);
  poly::to_ntt(ctx, v);
  RnsPoly c0 = poly::from_signed(ctx, e0, mods);
  RnsPoly c1 = poly::from_signed(ctx, e1, mods);
  poly::to_ntt(ctx, c0);
  poly::to_ntt(ctx, c1);
  poly::mul_acc(ctx, c0, v, poly::select_limbs(pk_.b, mods));
  poly::mul_acc(ctx, c1, v, poly::select_limbs(pk_.a, mods));
  poly::add_inplace(ctx, c0, pt.poly);
  Ciphertext ct;
  ct.parts.push_back(std::move(c0));
  ct.parts.push_back(std::move(c1));
  ct.level = pt.level;
  ct.scale_bits = pt.scale_bits;
  ct.context_id = ctx.id();
  return ct;
}

Ciphertext Encryptor::encrypt(std::span<const double> values) {
  return encrypt(encoder_.encode(values, ctx_->params().scale_bits));
}

Ciphertext Encryptor::encrypt(std::span<const double> values, int scale_bits, int level) {
  return encrypt(encoder_.encode(values, scale_bits, level));
}

Decryptor::Decryptor(ContextPtr ctx, SecretKey sk) : ctx_(ctx), sk_(std::move(sk)), encoder_(ctx) {
  if (sk_.context_id != ctx_->id()) fail(ErrorCode::key_mismatch, "secret key belongs to other params");
}

Plaintext Decryptor::decrypt(const Ciphertext& ct) const {
  const Context& ctx = *ctx_;
  if (ct.context_id != ctx.id()) fail(ErrorCode::key_mismatch, "ciphertext belongs to other params");
  const auto mods = chain_indices(ct.level);
  RnsPoly s = poly::select_limbs(sk_.poly, mods);
  RnsPoly m = ct.parts[0];
  RnsPoly s_pow = s;
  for (std::size_t i = 1; i < ct.parts.size(); ++i) {
    poly::mul_acc(ctx, m, ct.parts[i], s_pow);
    if (i + 1 < ct.parts.size()) s_pow = poly::mul(ctx, s_pow, s);
  }
  Plaintext pt;
  pt.poly = std::move(m);
  pt.level = ct.level;
  pt.scale_bits = ct.scale_bits;
  return pt;
}

std::vector<double> Decryptor::decrypt_values(const Ciphertext& ct) const { return encoder_.decode(decrypt(ct)); }

}  // namespace fedfhe::ckks
