#pragma once

#include "fedfhe/packed/backend.hpp"
#include "fedfhe/packed/layout.hpp"

namespace fedfhe::packed {

// Column 0 of the result holds per-row sums; other columns hold garbage.
template <Backend B>
typename B::Ct row_sum_rotate(B& b, typename B::Ct x, const MatrixLayout& layout) {
  for (std::size_t k = 1; k < layout.padded_cols; k <<= 1) x = b.add(x, b.rotate(x, static_cast<int>(k)));
  return x;
}

// Every row of the result holds the column sums; no garbage.
template <Backend B>
typename B::Ct col_sum_rotate(B& b, typename B::Ct x, const MatrixLayout& layout) {
  for (std::size_t k = layout.padded_cols; k < layout.block(); k <<= 1) x = b.add(x, b.rotate(x, static_cast<int>(k)));
  return x;
}

// Column 0 scaled by c, other columns zero. One cmult at p_c bits and one rescale.
template <Backend B>
typename B::Ct mask_first_column(B& b, const typename B::Ct& x, const MatrixLayout& layout, double c = 1.0) {
  return b.rescale(b.cmult_vec(x, first_column_mask(layout, c), b.pc()), b.pc());
}

// Copies column 0 into every column; expects zeros outside column 0.
template <Backend B>
typename B::Ct replicate_first_column(B& b, typename B::Ct x, const MatrixLayout& layout) {
  for (std::size_t k = 1; k < layout.padded_cols; k <<= 1) x = b.add(x, b.rotate(x, -static_cast<int>(k)));
  return x;
}

}  // namespace fedfhe::packed
