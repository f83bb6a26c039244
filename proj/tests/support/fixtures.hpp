#pragma once

#include <cmath>
#include <vector>

#include "fedfhe/ckks/ckks.hpp"
#include "fedfhe/common/matrix.hpp"
#include "fedfhe/common/prng.hpp"

namespace fedfhe::testing {

struct DeskKeys {
  ckks::ContextPtr ctx;
  ckks::KeySet keys;
};

// One desk key set per test binary; key generation dominates test time otherwise.
inline const DeskKeys& desk() {
  static const DeskKeys d = [] {
    DeskKeys x;
    x.ctx = ckks::Context::create(ckks::FheParams::desk());
    x.keys = ckks::keygen(x.ctx, 1);
    return x;
  }();
  return d;
}

inline std::vector<double> random_values(std::size_t n, double lo, double hi, std::uint64_t seed) {
  Prng prng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = prng.uniform_real(lo, hi);
  return v;
}

inline Matrix random_matrix(std::size_t r, std::size_t c, double lo, double hi, std::uint64_t seed) {
  Matrix m(r, c);
  m.data = random_values(r * c, lo, hi, seed);
  return m;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace fedfhe::testing
