#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedfhe/ckks/context.hpp"
#include "fedfhe/ckks/types.hpp"
#include "fedfhe/common/bytes.hpp"

namespace fedfhe::ckks {

// Deterministic in (params, seed). Rotation keys cover every step +-2^j, 0 <= j < log2(slots).
KeySet keygen(const ContextPtr& ctx, std::uint64_t seed);

// Copy holding only the listed power-of-two rotation keys, and the relin key if asked.
EvaluationKeys restrict_keys(const EvaluationKeys& keys, std::span<const int> rotation_steps, bool keep_relin);

// Hash over every key limb; equal digests mean bitwise-identical key material.
Digest keyset_digest(const KeySet& keys);

// Power-of-two steps whose product of rotations realises `step`, choosing the
// shorter of the positive and negative binary decompositions.
std::vector<int> decompose_rotation(int step, std::size_t slots);

}  // namespace fedfhe::ckks
