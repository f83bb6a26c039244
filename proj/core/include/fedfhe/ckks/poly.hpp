#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedfhe/ckks/context.hpp"
#include "fedfhe/ckks/types.hpp"
#include "fedfhe/common/prng.hpp"

namespace fedfhe::ckks::poly {

void to_ntt(const Context& ctx, RnsPoly& p);
void from_ntt(const Context& ctx, RnsPoly& p);

void add_inplace(const Context& ctx, RnsPoly& a, const RnsPoly& b);
void sub_inplace(const Context& ctx, RnsPoly& a, const RnsPoly& b);
void negate_inplace(const Context& ctx, RnsPoly& a);
// Pointwise product; both operands in NTT form.
RnsPoly mul(const Context& ctx, const RnsPoly& a, const RnsPoly& b);
void mul_inplace(const Context& ctx, RnsPoly& a, const RnsPoly& b);
// a += b * c pointwise.
void mul_acc(const Context& ctx, RnsPoly& a, const RnsPoly& b, const RnsPoly& c);
// Multiplies every limb by the residues of a signed scalar.
void mul_scalar_inplace(const Context& ctx, RnsPoly& a, std::int64_t s);
// Multiplies limb i by the given residue (already reduced mod that limb's prime).
void mul_residues_inplace(const Context& ctx, RnsPoly& a, std::span<const u64> residues);

// Lifts small signed coefficients into coefficient-form residues.
RnsPoly from_signed(const Context& ctx, std::span<const std::int64_t> coeffs, const std::vector<int>& moduli);

// Keeps the first `count` limbs.
void truncate_limbs(RnsPoly& a, std::size_t count);
// Restricts a poly to the given prime indices (must be a subset of its own).
RnsPoly select_limbs(const RnsPoly& a, const std::vector<int>& moduli);

RnsPoly permute(const RnsPoly& a, const std::vector<std::uint32_t>& perm);

std::vector<std::int64_t> sample_ternary(Prng& prng, std::size_t n);
std::vector<std::int64_t> sample_gaussian(Prng& prng, std::size_t n, double stddev);
RnsPoly sample_uniform(const Context& ctx, Prng& prng, const std::vector<int>& moduli);

}  // namespace fedfhe::ckks::poly
