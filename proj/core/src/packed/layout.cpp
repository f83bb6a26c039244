#include "fedfhe/packed/layout.hpp"

#include <bit>

#include "fedfhe/common/error.hpp"

namespace fedfhe::packed {

std::size_t next_pow2(std::size_t v) { return v <= 1 ? 1 : std::bit_ceil(v); }

int log2_exact(std::size_t v) {
  if (!std::has_single_bit(v)) fail(ErrorCode::invalid_argument, "not a power of two");
  return std::countr_zero(v);
}

MatrixLayout plan_layout(std::size_t rows, std::size_t cols, std::size_t slots) {
  require(rows > 0 && cols > 0, ErrorCode::empty_input, "matrix must be nonempty");
  MatrixLayout l{rows, cols, next_pow2(rows), next_pow2(cols), slots};
  if (l.block() > slots) {
    fail(ErrorCode::slot_budget, "padded " + std::to_string(l.padded_rows) + "x" + std::to_string(l.padded_cols) +
                                     " exceeds " + std::to_string(slots) + " slots");
  }
  return l;
}

std::vector<double> pack(const Matrix& m, const MatrixLayout& layout) {
  require(m.rows == layout.rows && m.cols == layout.cols, ErrorCode::invalid_argument, "matrix/layout shape");
  std::vector<double> out(layout.slots, 0.0);
  for (std::size_t rep = 0; rep < layout.replicas(); ++rep) {
    const std::size_t base = rep * layout.block();
    for (std::size_t r = 0; r < m.rows; ++r)
      for (std::size_t c = 0; c < m.cols; ++c) out[base + layout.index(r, c)] = m(r, c);
  }
  return out;
}

Matrix unpack(const std::vector<double>& slots, const MatrixLayout& layout) {
  Matrix m(layout.rows, layout.cols);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) m(r, c) = slots[layout.index(r, c)];
  return m;
}

std::vector<double> first_column_mask(const MatrixLayout& layout, double c) {
  std::vector<double> out(layout.slots, 0.0);
  for (std::size_t i = 0; i < layout.slots; i += layout.padded_cols) out[i] = c;
  return out;
}

ChunkPlan plan_chunks(std::size_t rows, std::size_t cols, std::size_t slots) {
  require(rows > 0 && cols > 0, ErrorCode::empty_input, "matrix must be nonempty");
  ChunkPlan p;
  p.rows = rows;
  p.cols = cols;
  const std::size_t pc = next_pow2(cols);
  require(pc <= slots, ErrorCode::slot_budget, "a single row does not fit the slots");
  const std::size_t pr = next_pow2(rows);
  p.rows_per_chunk = std::min(pr, slots / pc);
  p.chunks = (rows + p.rows_per_chunk - 1) / p.rows_per_chunk;
  p.chunk_layout = plan_layout(p.rows_per_chunk, cols, slots);
  p.transposed_chunk_layout = plan_layout(cols, p.rows_per_chunk, slots);
  return p;
}

Matrix chunk_rows(const Matrix& m, const ChunkPlan& plan, std::size_t k) {
  Matrix out(plan.rows_per_chunk, m.cols);
  for (std::size_t r = 0; r < plan.rows_per_chunk; ++r) {
    std::size_t src = k * plan.rows_per_chunk + r;
    if (src >= m.rows) break;
    for (std::size_t c = 0; c < m.cols; ++c) out(r, c) = m(src, c);
  }
  return out;
}

std::vector<std::vector<double>> pack_chunks(const Matrix& m, const ChunkPlan& plan) {
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k < plan.chunks; ++k) out.push_back(pack(chunk_rows(m, plan, k), plan.chunk_layout));
  return out;
}

std::vector<std::vector<double>> pack_chunks_transposed(const Matrix& m, const ChunkPlan& plan) {
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k < plan.chunks; ++k) {
    out.push_back(pack(chunk_rows(m, plan, k).transpose(), plan.transposed_chunk_layout));
  }
  return out;
}

std::vector<double> pack_gh_pairs(const std::vector<double>& g, const std::vector<double>& h) {
  require(g.size() == h.size(), ErrorCode::invalid_argument, "g and h lengths differ");
  std::vector<double> out(2 * g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    out[2 * i] = g[i];
    out[2 * i + 1] = h[i];
  }
  return out;
}

void unpack_gh_pairs(const std::vector<double>& slots, std::size_t n, std::vector<double>& g,
                     std::vector<double>& h) {
  require(slots.size() >= 2 * n, ErrorCode::invalid_argument, "slot vector too short");
  g.resize(n);
  h.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = slots[2 * i];
    h[i] = slots[2 * i + 1];
  }
}

}  // namespace fedfhe::packed
