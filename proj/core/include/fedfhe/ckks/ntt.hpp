#pragma once

#include <cstddef>
#include <vector>

#include "fedfhe/ckks/modarith.hpp"

namespace fedfhe::ckks {

// Negacyclic NTT over Z_q[X]/(X^N + 1). Forward output is in bit-reversed
// order: slot j holds A(psi^(2*bitrev(j)+1)).
class NttTables {
 public:
  NttTables(std::size_t n, const Modulus& q);

  void forward(u64* a) const;
  void inverse(u64* a) const;

  std::size_t size() const { return n_; }
  const Modulus& modulus() const { return q_; }
  u64 root() const { return psi_; }

 private:
  std::size_t n_;
  int log_n_;
  Modulus q_;
  u64 psi_;
  std::vector<u64> psi_rev_, psi_rev_shoup_;
  std::vector<u64> psi_inv_rev_, psi_inv_rev_shoup_;
  u64 n_inv_, n_inv_shoup_;
};

std::size_t bit_reverse(std::size_t x, int bits);

}  // namespace fedfhe::ckks
