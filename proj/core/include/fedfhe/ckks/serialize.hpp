#pragma once

#include <memory>
#include <span>
#include <vector>

#include "fedfhe/ckks/context.hpp"
#include "fedfhe/ckks/types.hpp"
#include "fedfhe/common/bytes.hpp"

namespace fedfhe::ckks {

// "FHE1" | params digest (32) | level u8 | scale exponent u16 | limb count u32 | limbs.
// Limbs are little-endian u64 words in NTT form, part 0 limbs first.
Bytes serialize(const Context& ctx, const Ciphertext& ct);
Ciphertext deserialize_ciphertext(const Context& ctx, std::span<const std::uint8_t> data);

Bytes serialize(const Context& ctx, const PublicKey& pk);
PublicKey deserialize_public_key(const Context& ctx, std::span<const std::uint8_t> data);

Bytes serialize(const Context& ctx, const EvaluationKeys& keys);
std::shared_ptr<const EvaluationKeys> deserialize_evaluation_keys(const Context& ctx,
                                                                  std::span<const std::uint8_t> data);

// u32 count, then u32 length + ciphertext for each.
Bytes serialize(const Context& ctx, std::span<const Ciphertext> cts);
std::vector<Ciphertext> deserialize_ciphertexts(const Context& ctx, std::span<const std::uint8_t> data);

// Size in bytes of a serialized two-part ciphertext at `level`.
std::size_t ciphertext_wire_size(const Context& ctx, int level);

}  // namespace fedfhe::ckks
