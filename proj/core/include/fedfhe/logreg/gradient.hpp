#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "fedfhe/ckks/ckks.hpp"
#include "fedfhe/common/error.hpp"
#include "fedfhe/common/matrix.hpp"
#include "fedfhe/logreg/sigmoid.hpp"
#include "fedfhe/packed/kernels.hpp"

namespace fedfhe::logreg {

using packed::Backend;
using packed::MatrixLayout;
using packed::OpCounts;
using packed::OpSection;

enum class Procedure { baseline, improved };

const char* to_string(Procedure p);

struct LrConfig {
  double learning_rate = 0.1;
  // alpha_t = learning_rate / (1 + decay * t)
  double decay = 0.0;
  int iterations = 30;
  // 0 means every row in each round.
  std::size_t batch_size = 0;
  int sigmoid_degree = 3;
  double sigmoid_lo = -8.0;
  double sigmoid_hi = 8.0;
  std::uint64_t seed = 1;

  double alpha(int t) const { return learning_rate / (1.0 + decay * t); }
  void validate() const;
};

// c rounded to the grid 2^-bits, which is what a constant encoded at `bits` carries.
double quantize(double c, int bits);

// z_i = y_i * (1, x_i) with y in {-1, +1}; the bias becomes column 0.
Matrix encode_samples(const Matrix& X, std::span<const int> y_pm);
Matrix with_bias(const Matrix& X);

// Baseline layout: every row holds beta. Improved layout: row j holds beta_j.
std::vector<double> pack_beta_rows(std::span<const double> beta, const MatrixLayout& layout);
std::vector<double> pack_beta_columns(std::span<const double> beta, const MatrixLayout& layout_t);

// Beta read back from row 0 (baseline) or column 0 (improved), with the
// largest deviation between replicas of the same coefficient.
struct BetaReadout {
  std::vector<double> beta;
  double replica_spread = 0.0;
};
BetaReadout read_beta_rows(std::span<const double> slots, const MatrixLayout& layout, std::size_t f1);
BetaReadout read_beta_columns(std::span<const double> slots, const MatrixLayout& layout_t, std::size_t f1);

// x holds inner products replicated across the data layout and z the
// matching data at a higher level. Returns s g(x) z for a degree-3 g in two
// levels below x: s/2 z + x (s c1 z) + x^2 (x (s c3 z)). The constants ride
// on z at full precision. The multiplication that brings the data in counts
// as the step; the rest belongs to the polynomial.
template <Backend B>
typename B::Ct poly_times_data(B& b, const typename B::Ct& x, const typename B::Ct& z, const SigmoidPoly& g,
                               double s = 1.0) {
  require(g.degree == 3 && g.coeffs.size() == 2, ErrorCode::invalid_argument,
          "encrypted gradient supports a degree-3 sigmoid polynomial");
  const int lx = b.level(x);
  require(b.level(z) > lx, ErrorCode::level_exhausted, "data must sit above the inner products");
  require(lx >= 2, ErrorCode::level_exhausted, "polynomial needs two levels");
  auto& cnt = b.counter();
  const int p = b.p();
  cnt.section(OpSection::poly);
  auto scaled = [&](double c) { return b.drop_to_level(b.rescale(b.cmult_const(z, c, p), p), lx); };
  auto zh = scaled(0.5 * s);
  auto z1 = scaled(g.coeffs[0] * s);
  auto z3 = scaled(g.coeffs[1] * s);
  auto x2 = b.rescale(b.mult(x, x), p);
  auto w = b.rescale(b.mult(x, z3), p);
  auto cubic = b.rescale(b.mult(x2, w), p);
  cnt.section(OpSection::step);
  auto linear = b.rescale(b.mult(x, z1), p);
  cnt.section(OpSection::poly);
  auto out = b.add(b.drop_to_level(zh, lx - 2), b.drop_to_level(linear, lx - 2));
  out = b.add(out, cubic);
  cnt.section(OpSection::step);
  return out;
}

// One update beta + alpha/n sum g(-z_i . beta) z_i on row-major chunks of Z.
// The 1/n travels with the polynomial constants; alpha is the p_c-bit factor.
// ct_beta must hold beta in every row of the chunk layout.
template <Backend B>
typename B::Ct grad_step_baseline(B& b, std::span<const typename B::Ct> z_chunks, const typename B::Ct& ct_beta,
                                  const MatrixLayout& layout, std::size_t n, const SigmoidPoly& g, double alpha) {
  require(!z_chunks.empty() && n > 0, ErrorCode::empty_input, "no samples");
  const auto gm = g.reflected();
  std::vector<typename B::Ct> parts;
  for (const auto& z : z_chunks) {
    auto ct1 = b.rescale(b.mult(z, ct_beta), b.p());
    auto ct2 = packed::row_sum_rotate(b, ct1, layout);
    auto ct3 = packed::mask_first_column(b, ct2, layout);
    auto ct4 = packed::replicate_first_column(b, ct3, layout);
    parts.push_back(poly_times_data(b, ct4, z, gm, 1.0 / static_cast<double>(n)));
  }
  auto ct6 = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) ct6 = b.add(ct6, parts[i]);
  auto ct7 = packed::col_sum_rotate(b, ct6, layout);
  auto ct8 = b.rescale(b.cmult_const(ct7, alpha, b.pc()), b.pc());
  return b.add(b.drop_to_level(ct_beta, b.level(ct8)), ct8);
}

// Same update on transposed chunks (features as rows, samples as columns);
// ct_beta_t holds beta_j across row j.
template <Backend B>
typename B::Ct grad_step_improved(B& b, std::span<const typename B::Ct> zt_chunks, const typename B::Ct& ct_beta_t,
                                  const MatrixLayout& layout_t, std::size_t n, const SigmoidPoly& g, double alpha) {
  require(!zt_chunks.empty() && n > 0, ErrorCode::empty_input, "no samples");
  const auto gm = g.reflected();
  std::vector<typename B::Ct> parts;
  for (const auto& zt : zt_chunks) {
    auto ct1 = b.rescale(b.mult(zt, ct_beta_t), b.p());
    auto ct2 = packed::col_sum_rotate(b, ct1, layout_t);
    parts.push_back(poly_times_data(b, ct2, zt, gm, 1.0 / static_cast<double>(n)));
  }
  auto ct4 = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) ct4 = b.add(ct4, parts[i]);
  auto ct5 = packed::row_sum_rotate(b, ct4, layout_t);
  auto ct6 = packed::mask_first_column(b, ct5, layout_t, alpha);
  auto ct7 = packed::replicate_first_column(b, ct6, layout_t);
  return b.add(b.drop_to_level(ct_beta_t, b.level(ct7)), ct7);
}

// What the encrypted step computes, in plaintext: beta + (D/n) sum g(-z_i . beta) z_i
// with D = alpha quantized to p_c bits.
std::vector<double> grad_step_plain(const Matrix& Z, std::span<const double> beta, const SigmoidPoly& g, double alpha,
                                    int pc);

// Single-chunk symbolic dry run at the desk chain (top level 5, p = 40, p_c = 20).
OpCounts count_ops(Procedure procedure, std::size_t n, std::size_t f);

struct TableCounts {
  int add = 0;
  int rot = 0;
};
// log2(n (f+1)) + log2 n + 3 additions and + 2 rotations, on padded sizes.
TableCounts table_formula(std::size_t n, std::size_t f);

// Holds an encrypted design matrix and runs repeated steps, decrypting
// beta between them (the data owner refreshes the weights each round).
class EncryptedStepper {
 public:
  EncryptedStepper(ckks::ContextPtr ctx, const ckks::KeySet& keys, const Matrix& Z, Procedure procedure,
                   std::uint64_t seed);

  // Encrypts beta in the procedure's layout, applies one step, decrypts.
  BetaReadout step(std::span<const double> beta, const SigmoidPoly& g, double alpha);
  // The encrypted step alone; beta must already be encrypted.
  ckks::Ciphertext step_encrypted(const ckks::Ciphertext& beta, const SigmoidPoly& g, double alpha);
  ckks::Ciphertext encrypt_beta(std::span<const double> beta);
  BetaReadout decrypt_beta(const ckks::Ciphertext& ct) const;

  const packed::ChunkPlan& plan() const { return plan_; }
  const MatrixLayout& layout() const;
  OpCounts last_counts() { return backend_.counter().counts(); }
  int last_level() const { return last_level_; }

 private:
  ckks::ContextPtr ctx_;
  Procedure procedure_;
  packed::ChunkPlan plan_;
  std::size_t n_ = 0;
  packed::CkksBackend backend_;
  ckks::Encryptor enc_;
  ckks::Decryptor dec_;
  std::vector<ckks::Ciphertext> chunks_;
  int last_level_ = 0;
};

}  // namespace fedfhe::logreg
