#include "fedfhe/ckks/context.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "fedfhe/common/error.hpp"

namespace fedfhe::ckks {

std::shared_ptr<const Context> Context::create(const FheParams& params) {
  params.validate();
  return std::shared_ptr<const Context>(new Context(params));
}

Context::Context(const FheParams& params) : params_(params) {
  const std::size_t n = params.ring_degree;
  for (auto q : params.modulus_chain) moduli_.emplace_back(q);
  moduli_.emplace_back(params.special_prime);
  ntt_.reserve(moduli_.size());
  for (const auto& m : moduli_) ntt_.emplace_back(n, m);
  digest_ = params.digest();
  for (int i = 0; i < 8; ++i) id_ |= static_cast<std::uint64_t>(digest_[i]) << (8 * i);

  double acc = 0;
  for (int l = 0; l <= max_level(); ++l) {
    acc += moduli_[l].log2();
    level_bits_.push_back(acc);
  }
  inv_q_.assign(moduli_.size(), std::vector<u64>(moduli_.size(), 0));
  for (std::size_t j = 0; j < moduli_.size(); ++j) {
    for (std::size_t i = 0; i < moduli_.size(); ++i) {
      if (i != j) inv_q_[j][i] = inv_mod(reduce(moduli_[j].value, moduli_[i]), moduli_[i]);
    }
  }

  const std::size_t m = 2 * n;
  ksi_pows_.resize(m + 1);
  for (std::size_t j = 0; j <= m; ++j) {
    double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(m);
    ksi_pows_[j] = {std::cos(angle), std::sin(angle)};
  }
  rot_group_.resize(n / 2);
  std::uint64_t five = 1;
  for (std::size_t j = 0; j < n / 2; ++j) {
    rot_group_[j] = five;
    five = five * 5 % m;
  }

  for (std::size_t s = 1; s < slots(); s <<= 1) {
    int step = static_cast<int>(s);
    step_perms_[step] = galois_permutation(galois_element(step));
    step_perms_[-step] = galois_permutation(galois_element(-step));
  }
}

u64 Context::galois_element(int step) const {
  const auto sl = static_cast<long long>(slots());
  long long k = ((static_cast<long long>(step) % sl) + sl) % sl;
  return rot_group_[static_cast<std::size_t>(k)];
}

std::vector<std::uint32_t> Context::galois_permutation(u64 g) const {
  const std::size_t n = this->n();
  const int log_n = std::countr_zero(n);
  const u64 two_n = 2 * n;
  std::vector<std::uint32_t> perm(n);
  for (std::size_t j = 0; j < n; ++j) {
    u64 e = 2 * bit_reverse(j, log_n) + 1;
    u64 eg = (e * g) % two_n;
    perm[j] = static_cast<std::uint32_t>(bit_reverse((eg - 1) / 2, log_n));
  }
  return perm;
}

const std::vector<std::uint32_t>& Context::step_permutation(int step) const {
  auto it = step_perms_.find(step);
  if (it == step_perms_.end()) {
    fail(ErrorCode::missing_rotation_key, "no cached permutation for step " + std::to_string(step));
  }
  return it->second;
}

}  // namespace fedfhe::ckks
