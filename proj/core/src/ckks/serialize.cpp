#include "fedfhe/ckks/serialize.hpp"

#include <algorithm>

#include "fedfhe/common/error.hpp"

namespace fedfhe::ckks {

namespace {

constexpr std::uint8_t kCtMagic[4] = {'F', 'H', 'E', '1'};
constexpr std::uint8_t kPkMagic[4] = {'F', 'H', 'P', '1'};
constexpr std::uint8_t kEkMagic[4] = {'F', 'H', 'K', '1'};

void write_header(ByteWriter& w, const std::uint8_t (&magic)[4], const Context& ctx) {
  w.raw(std::span<const std::uint8_t>(magic, 4));
  w.raw(ctx.digest());
}

void read_header(ByteReader& r, const std::uint8_t (&magic)[4], const Context& ctx) {
  auto m = r.raw(4);
  if (!std::equal(m.begin(), m.end(), magic)) fail(ErrorCode::decode_failure, "bad magic");
  auto d = r.raw(32);
  if (!std::equal(d.begin(), d.end(), ctx.digest().begin())) {
    fail(ErrorCode::key_mismatch, "serialized object was produced under different params");
  }
}

void write_limbs(ByteWriter& w, const RnsPoly& p) {
  for (auto v : p.data) w.u64(v);
}

RnsPoly read_poly(ByteReader& r, const Context& ctx, const std::vector<int>& moduli) {
  RnsPoly p(ctx.n(), moduli, true);
  for (std::size_t i = 0; i < moduli.size(); ++i) {
    const u64 q = ctx.modulus(moduli[i]).value;
    u64* x = p.limb(i);
    for (std::size_t j = 0; j < p.n; ++j) {
      x[j] = r.u64();
      if (x[j] >= q) fail(ErrorCode::decode_failure, "limb coefficient not reduced");
    }
  }
  return p;
}

void write_switch_key(ByteWriter& w, const SwitchKey& k) {
  w.u32(static_cast<std::uint32_t>(k.b.size()));
  for (std::size_t j = 0; j < k.b.size(); ++j) {
    write_limbs(w, k.b[j]);
    write_limbs(w, k.a[j]);
  }
}

SwitchKey read_switch_key(ByteReader& r, const Context& ctx) {
  const auto digits = r.u32();
  // Zero digits marks an absent key.
  if (digits != 0 && digits != static_cast<std::uint32_t>(ctx.max_level() + 1))
    fail(ErrorCode::decode_failure, "digit count");
  const auto mods = chain_indices(ctx.special_index());
  SwitchKey k;
  for (std::uint32_t j = 0; j < digits; ++j) {
    k.b.push_back(read_poly(r, ctx, mods));
    k.a.push_back(read_poly(r, ctx, mods));
  }
  return k;
}

}  // namespace

Bytes serialize(const Context& ctx, const Ciphertext& ct) {
  if (ct.context_id != ctx.id()) fail(ErrorCode::key_mismatch, "ciphertext belongs to other params");
  ByteWriter w;
  w.bytes().reserve(43 + ct.size() * (ct.level + 1) * ctx.n() * 8);
  write_header(w, kCtMagic, ctx);
  w.u8(static_cast<std::uint8_t>(ct.level));
  w.u16(static_cast<std::uint16_t>(ct.scale_bits));
  w.u32(static_cast<std::uint32_t>(ct.size() * (ct.level + 1)));
  for (const auto& p : ct.parts) write_limbs(w, p);
  return w.take();
}

Ciphertext deserialize_ciphertext(const Context& ctx, std::span<const std::uint8_t> data) {
  ByteReader r(data);
  read_header(r, kCtMagic, ctx);
  Ciphertext ct;
  ct.level = r.u8();
  ct.scale_bits = r.u16();
  const auto limbs = r.u32();
  if (ct.level > ctx.max_level()) fail(ErrorCode::decode_failure, "level above chain top");
  const auto per_part = static_cast<std::uint32_t>(ct.level + 1);
  if (limbs == 0 || limbs % per_part != 0 || limbs / per_part > 3) fail(ErrorCode::decode_failure, "limb count");
  const auto mods = chain_indices(ct.level);
  for (std::uint32_t i = 0; i < limbs / per_part; ++i) ct.parts.push_back(read_poly(r, ctx, mods));
  if (!r.done()) fail(ErrorCode::decode_failure, "trailing bytes");
  ct.context_id = ctx.id();
  return ct;
}

Bytes serialize(const Context& ctx, const PublicKey& pk) {
  ByteWriter w;
  write_header(w, kPkMagic, ctx);
  write_limbs(w, pk.b);
  write_limbs(w, pk.a);
  return w.take();
}

PublicKey deserialize_public_key(const Context& ctx, std::span<const std::uint8_t> data) {
  ByteReader r(data);
  read_header(r, kPkMagic, ctx);
  const auto mods = chain_indices(ctx.max_level());
  PublicKey pk;
  pk.b = read_poly(r, ctx, mods);
  pk.a = read_poly(r, ctx, mods);
  pk.context_id = ctx.id();
  if (!r.done()) fail(ErrorCode::decode_failure, "trailing bytes");
  return pk;
}

Bytes serialize(const Context& ctx, const EvaluationKeys& keys) {
  ByteWriter w;
  write_header(w, kEkMagic, ctx);
  auto pk = serialize(ctx, keys.public_key);
  w.u32(static_cast<std::uint32_t>(pk.size()));
  w.raw(pk);
  write_switch_key(w, keys.relin_key);
  w.u32(static_cast<std::uint32_t>(keys.rotation_keys.size()));
  for (const auto& [step, k] : keys.rotation_keys) {
    w.u32(static_cast<std::uint32_t>(step));
    write_switch_key(w, k);
  }
  return w.take();
}

std::shared_ptr<const EvaluationKeys> deserialize_evaluation_keys(const Context& ctx,
                                                                  std::span<const std::uint8_t> data) {
  ByteReader r(data);
  read_header(r, kEkMagic, ctx);
  auto keys = std::make_shared<EvaluationKeys>();
  auto pk_len = r.u32();
  keys->public_key = deserialize_public_key(ctx, r.raw(pk_len));
  keys->relin_key = read_switch_key(r, ctx);
  auto count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    int step = static_cast<int>(r.u32());
    keys->rotation_keys.emplace(step, read_switch_key(r, ctx));
  }
  if (!r.done()) fail(ErrorCode::decode_failure, "trailing bytes");
  keys->context_id = ctx.id();
  return keys;
}

std::size_t ciphertext_wire_size(const Context& ctx, int level) {
  return 4 + 32 + 1 + 2 + 4 + 2 * static_cast<std::size_t>(level + 1) * ctx.n() * 8;
}

Bytes serialize(const Context& ctx, std::span<const Ciphertext> cts) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(cts.size()));
  for (const auto& ct : cts) {
    auto b = serialize(ctx, ct);
    w.u32(static_cast<std::uint32_t>(b.size()));
    w.raw(b);
  }
  return w.take();
}

std::vector<Ciphertext> deserialize_ciphertexts(const Context& ctx, std::span<const std::uint8_t> data) {
  ByteReader r(data);
  std::vector<Ciphertext> cts(r.u32());
  for (auto& ct : cts) {
    auto len = r.u32();
    ct = deserialize_ciphertext(ctx, r.raw(len));
  }
  require(r.done(), ErrorCode::decode_failure, "trailing bytes after ciphertexts");
  return cts;
}

}  // namespace fedfhe::ckks
