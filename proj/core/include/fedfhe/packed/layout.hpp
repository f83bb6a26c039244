#pragma once

#include <cstddef>
#include <vector>

#include "fedfhe/common/matrix.hpp"

namespace fedfhe::packed {

std::size_t next_pow2(std::size_t v);
int log2_exact(std::size_t v);

// Row-major placement of an n x m matrix into the slot vector. The padded
// block is repeated to fill every slot so cyclic rotations stay consistent.
struct MatrixLayout {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t padded_rows = 0;
  std::size_t padded_cols = 0;
  std::size_t slots = 0;

  std::size_t block() const { return padded_rows * padded_cols; }
  std::size_t replicas() const { return slots / block(); }
  std::size_t index(std::size_t r, std::size_t c) const { return r * padded_cols + c; }
};

// Throws slot_budget when the padded matrix does not fit one ciphertext.
MatrixLayout plan_layout(std::size_t rows, std::size_t cols, std::size_t slots);

std::vector<double> pack(const Matrix& m, const MatrixLayout& layout);
Matrix unpack(const std::vector<double>& slots, const MatrixLayout& layout);

// Ones (or c) in column 0 of every row, zeros elsewhere; the matrix C of the garbage mask.
std::vector<double> first_column_mask(const MatrixLayout& layout, double c = 1.0);

// Row-block split of a matrix too large for one ciphertext. Blocks hold a
// power-of-two row count; the last one is zero filled.
struct ChunkPlan {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t rows_per_chunk = 0;
  std::size_t chunks = 0;
  MatrixLayout chunk_layout;             // rows_per_chunk x cols
  MatrixLayout transposed_chunk_layout;  // cols x rows_per_chunk
};

ChunkPlan plan_chunks(std::size_t rows, std::size_t cols, std::size_t slots);

// Rows [k*rpc, (k+1)*rpc) of m, zero filled past the end.
Matrix chunk_rows(const Matrix& m, const ChunkPlan& plan, std::size_t k);
std::vector<std::vector<double>> pack_chunks(const Matrix& m, const ChunkPlan& plan);
// Each chunk is transposed before packing (samples become columns).
std::vector<std::vector<double>> pack_chunks_transposed(const Matrix& m, const ChunkPlan& plan);

// Interleaves g in even slots and h in odd slots.
std::vector<double> pack_gh_pairs(const std::vector<double>& g, const std::vector<double>& h);
void unpack_gh_pairs(const std::vector<double>& slots, std::size_t n, std::vector<double>& g,
                     std::vector<double>& h);

}  // namespace fedfhe::packed
