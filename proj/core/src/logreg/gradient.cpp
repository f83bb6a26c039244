#include "fedfhe/logreg/gradient.hpp"

#include <algorithm>

namespace fedfhe::logreg {

const char* to_string(Procedure p) { return p == Procedure::baseline ? "baseline" : "improved"; }

void LrConfig::validate() const {
  require(learning_rate > 0 && std::isfinite(learning_rate), ErrorCode::invalid_argument, "learning rate must be > 0");
  require(decay >= 0, ErrorCode::invalid_argument, "decay must be >= 0");
  require(iterations >= 0, ErrorCode::invalid_argument, "iterations must be >= 0");
  require(sigmoid_degree == 3 || sigmoid_degree == 5 || sigmoid_degree == 7, ErrorCode::invalid_argument,
          "sigmoid degree must be 3, 5 or 7");
  require(sigmoid_lo < sigmoid_hi, ErrorCode::invalid_argument, "sigmoid range is empty");
}

double quantize(double c, int bits) { return std::ldexp(std::round(std::ldexp(c, bits)), -bits); }

Matrix with_bias(const Matrix& X) {
  Matrix out(X.rows, X.cols + 1);
  for (std::size_t i = 0; i < X.rows; ++i) {
    out(i, 0) = 1.0;
    for (std::size_t j = 0; j < X.cols; ++j) out(i, j + 1) = X(i, j);
  }
  return out;
}

Matrix encode_samples(const Matrix& X, std::span<const int> y_pm) {
  require(y_pm.size() == X.rows, ErrorCode::invalid_argument, "row/label mismatch");
  Matrix Z = with_bias(X);
  for (std::size_t i = 0; i < Z.rows; ++i) {
    require(y_pm[i] == 1 || y_pm[i] == -1, ErrorCode::invalid_argument, "labels must be -1 or +1");
    for (std::size_t j = 0; j < Z.cols; ++j) Z(i, j) *= y_pm[i];
  }
  return Z;
}

std::vector<double> pack_beta_rows(std::span<const double> beta, const MatrixLayout& layout) {
  require(beta.size() <= layout.padded_cols, ErrorCode::invalid_argument, "beta longer than the row width");
  std::vector<double> out(layout.slots, 0.0);
  for (std::size_t s = 0; s < layout.slots; ++s) {
    const std::size_t c = (s % layout.block()) % layout.padded_cols;
    if (c < beta.size()) out[s] = beta[c];
  }
  return out;
}

std::vector<double> pack_beta_columns(std::span<const double> beta, const MatrixLayout& layout_t) {
  require(beta.size() <= layout_t.padded_rows, ErrorCode::invalid_argument, "beta longer than the column height");
  std::vector<double> out(layout_t.slots, 0.0);
  for (std::size_t s = 0; s < layout_t.slots; ++s) {
    const std::size_t r = (s % layout_t.block()) / layout_t.padded_cols;
    if (r < beta.size()) out[s] = beta[r];
  }
  return out;
}

BetaReadout read_beta_rows(std::span<const double> slots, const MatrixLayout& layout, std::size_t f1) {
  BetaReadout out;
  out.beta.assign(slots.begin(), slots.begin() + f1);
  for (std::size_t s = 0; s < layout.slots; ++s) {
    const std::size_t c = (s % layout.block()) % layout.padded_cols;
    if (c < f1) out.replica_spread = std::max(out.replica_spread, std::abs(slots[s] - out.beta[c]));
  }
  return out;
}

BetaReadout read_beta_columns(std::span<const double> slots, const MatrixLayout& layout_t, std::size_t f1) {
  BetaReadout out;
  for (std::size_t j = 0; j < f1; ++j) out.beta.push_back(slots[j * layout_t.padded_cols]);
  for (std::size_t s = 0; s < layout_t.slots; ++s) {
    const std::size_t r = (s % layout_t.block()) / layout_t.padded_cols;
    if (r < f1) out.replica_spread = std::max(out.replica_spread, std::abs(slots[s] - out.beta[r]));
  }
  return out;
}

std::vector<double> grad_step_plain(const Matrix& Z, std::span<const double> beta, const SigmoidPoly& g, double alpha,
                                    int pc) {
  require(beta.size() == Z.cols, ErrorCode::invalid_argument, "beta/feature mismatch");
  require(Z.rows > 0, ErrorCode::empty_input, "no samples");
  const auto gm = g.reflected();
  std::vector<double> acc(Z.cols, 0.0);
  for (std::size_t i = 0; i < Z.rows; ++i) {
    double t = 0;
    for (std::size_t j = 0; j < Z.cols; ++j) t += Z(i, j) * beta[j];
    const double s = gm(t);
    for (std::size_t j = 0; j < Z.cols; ++j) acc[j] += s * Z(i, j);
  }
  const double d = quantize(alpha, pc) / static_cast<double>(Z.rows);
  std::vector<double> out(beta.begin(), beta.end());
  for (std::size_t j = 0; j < Z.cols; ++j) out[j] += d * acc[j];
  return out;
}

OpCounts count_ops(Procedure procedure, std::size_t n, std::size_t f) {
  const std::size_t slots = std::max<std::size_t>(4096, packed::next_pow2(n) * packed::next_pow2(f + 1));
  packed::SymbolicBackend sym(5, 40, 20);
  const auto g = fit_sigmoid_poly(3);
  sym.counter().start(5);
  const auto z = sym.fresh();
  const auto beta = sym.fresh();
  std::vector<packed::SymbolicBackend::Ct> chunks{z};
  if (procedure == Procedure::baseline) {
    grad_step_baseline(sym, std::span<const packed::SymbolicBackend::Ct>(chunks), beta,
                       packed::plan_layout(n, f + 1, slots), n, g, 0.1);
  } else {
    grad_step_improved(sym, std::span<const packed::SymbolicBackend::Ct>(chunks), beta,
                       packed::plan_layout(f + 1, n, slots), n, g, 0.1);
  }
  return sym.counter().counts();
}

TableCounts table_formula(std::size_t n, std::size_t f) {
  const int ln = packed::log2_exact(packed::next_pow2(n));
  const int lf = packed::log2_exact(packed::next_pow2(f + 1));
  return {ln + lf + ln + 3, ln + lf + ln + 2};
}

EncryptedStepper::EncryptedStepper(ckks::ContextPtr ctx, const ckks::KeySet& keys, const Matrix& Z,
                                   Procedure procedure, std::uint64_t seed)
    : ctx_(ctx),
      procedure_(procedure),
      plan_(packed::plan_chunks(Z.rows, Z.cols, ctx->slots())),
      n_(Z.rows),
      backend_(ctx, keys.eval),
      enc_(ctx, keys.public_key(), seed),
      dec_(ctx, keys.secret_key) {
  auto packed_chunks =
      procedure == Procedure::baseline ? packed::pack_chunks(Z, plan_) : packed::pack_chunks_transposed(Z, plan_);
  for (const auto& v : packed_chunks) chunks_.push_back(enc_.encrypt(v));
}

const MatrixLayout& EncryptedStepper::layout() const {
  return procedure_ == Procedure::baseline ? plan_.chunk_layout : plan_.transposed_chunk_layout;
}

ckks::Ciphertext EncryptedStepper::encrypt_beta(std::span<const double> beta) {
  require(beta.size() == plan_.cols, ErrorCode::invalid_argument, "beta/feature mismatch");
  return enc_.encrypt(procedure_ == Procedure::baseline ? pack_beta_rows(beta, layout())
                                                        : pack_beta_columns(beta, layout()));
}

BetaReadout EncryptedStepper::decrypt_beta(const ckks::Ciphertext& ct) const {
  auto slots = dec_.decrypt_values(ct);
  return procedure_ == Procedure::baseline ? read_beta_rows(slots, layout(), plan_.cols)
                                           : read_beta_columns(slots, layout(), plan_.cols);
}

ckks::Ciphertext EncryptedStepper::step_encrypted(const ckks::Ciphertext& beta, const SigmoidPoly& g, double alpha) {
  backend_.counter().start(beta.level);
  std::span<const ckks::Ciphertext> chunks(chunks_);
  auto out = procedure_ == Procedure::baseline ? grad_step_baseline(backend_, chunks, beta, layout(), n_, g, alpha)
                                               : grad_step_improved(backend_, chunks, beta, layout(), n_, g, alpha);
  last_level_ = out.level;
  return out;
}

BetaReadout EncryptedStepper::step(std::span<const double> beta, const SigmoidPoly& g, double alpha) {
  return decrypt_beta(step_encrypted(encrypt_beta(beta), g, alpha));
}

}  // namespace fedfhe::logreg
