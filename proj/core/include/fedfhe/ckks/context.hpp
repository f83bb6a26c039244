#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "fedfhe/ckks/modarith.hpp"
#include "fedfhe/ckks/ntt.hpp"
#include "fedfhe/ckks/params.hpp"

namespace fedfhe::ckks {

// Immutable precomputation shared by every engine object built on one parameter set.
// Prime index L+1 is the special key-switching prime.
class Context {
 public:
  static std::shared_ptr<const Context> create(const FheParams& params);

  const FheParams& params() const { return params_; }
  std::size_t n() const { return params_.ring_degree; }
  std::size_t slots() const { return params_.ring_degree / 2; }
  int max_level() const { return params_.max_level(); }
  int special_index() const { return params_.max_level() + 1; }
  const Modulus& modulus(int i) const { return moduli_[i]; }
  const NttTables& ntt(int i) const { return ntt_[i]; }
  const Digest& digest() const { return digest_; }
  std::uint64_t id() const { return id_; }

  // log2 of q_0 * ... * q_level.
  double modulus_bits(int level) const { return level_bits_[level]; }
  // q_j^{-1} mod q_i.
  u64 inv_q(int j, int i) const { return inv_q_[j][i]; }

  // 5^step mod 2N; negative steps wrap modulo the slot count.
  u64 galois_element(int step) const;
  // NTT-domain permutation: out[j] = in[perm[j]] realises X -> X^g.
  std::vector<std::uint32_t> galois_permutation(u64 g) const;
  // Cached permutation for the power-of-two steps and their negatives.
  const std::vector<std::uint32_t>& step_permutation(int step) const;

  const std::vector<std::complex<double>>& ksi_pows() const { return ksi_pows_; }
  const std::vector<std::uint64_t>& rot_group() const { return rot_group_; }

 private:
  explicit Context(const FheParams& params);

  FheParams params_;
  std::vector<Modulus> moduli_;
  std::vector<NttTables> ntt_;
  Digest digest_{};
  std::uint64_t id_ = 0;
  std::vector<double> level_bits_;
  std::vector<std::vector<u64>> inv_q_;
  std::map<int, std::vector<std::uint32_t>> step_perms_;
  std::vector<std::complex<double>> ksi_pows_;
  std::vector<std::uint64_t> rot_group_;
};

using ContextPtr = std::shared_ptr<const Context>;

}  // namespace fedfhe::ckks
