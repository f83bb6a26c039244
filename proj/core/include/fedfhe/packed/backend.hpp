#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <memory>
#include <vector>

#include "fedfhe/ckks/encoder.hpp"
#include "fedfhe/ckks/evaluator.hpp"

namespace fedfhe::packed {

// Section labels let the logistic-regression counter separate the
// step-level multiplications from those inside the sigmoid polynomial.
enum class OpSection { step, poly };

struct OpCounts {
  int mul = 0;       // ciphertext-ciphertext or ciphertext-constant multiplications at step level
  int poly_mul = 0;  // multiplications inside the polynomial evaluation
  int add = 0;
  int rot = 0;
  int rescale = 0;
  int depth = 0;  // levels consumed
};

class OpCounter {
 public:
  void start(int level) {
    counts_ = {};
    start_level_ = level;
    min_level_ = level;
  }
  void section(OpSection s) { section_ = s; }
  void on_mul() { (section_ == OpSection::step ? counts_.mul : counts_.poly_mul)++; }
  void on_add() { ++counts_.add; }
  void on_rot() { ++counts_.rot; }
  void on_rescale(int new_level) {
    ++counts_.rescale;
    min_level_ = std::min(min_level_, new_level);
  }
  OpCounts counts() const {
    OpCounts c = counts_;
    c.depth = start_level_ - min_level_;
    return c;
  }

 private:
  OpCounts counts_;
  OpSection section_ = OpSection::step;
  int start_level_ = 0;
  int min_level_ = 0;
};

template <class B>
concept Backend = requires(B& b, const typename B::Ct& x, const std::vector<double>& v) {
  { b.add(x, x) } -> std::same_as<typename B::Ct>;
  { b.sub(x, x) } -> std::same_as<typename B::Ct>;
  { b.rotate(x, 1) } -> std::same_as<typename B::Ct>;
  { b.mult(x, x) } -> std::same_as<typename B::Ct>;
  { b.rescale(x, 40) } -> std::same_as<typename B::Ct>;
  { b.cmult_vec(x, v, 20) } -> std::same_as<typename B::Ct>;
  { b.cmult_const(x, 0.5, 20) } -> std::same_as<typename B::Ct>;
  { b.drop_to_level(x, 0) } -> std::same_as<typename B::Ct>;
  { b.level(x) } -> std::convertible_to<int>;
  { b.scale_bits(x) } -> std::convertible_to<int>;
  { b.p() } -> std::convertible_to<int>;
  { b.pc() } -> std::convertible_to<int>;
  { b.counter() } -> std::same_as<OpCounter&>;
};

// Runs kernels on real ciphertexts.
class CkksBackend {
 public:
  using Ct = ckks::Ciphertext;

  CkksBackend(ckks::ContextPtr ctx, std::shared_ptr<const ckks::EvaluationKeys> keys)
      : ev_(ctx, std::move(keys)), enc_(ctx) {}

  Ct add(const Ct& a, const Ct& b) {
    counter_.on_add();
    return ev_.add(a, b);
  }
  Ct sub(const Ct& a, const Ct& b) {
    counter_.on_add();
    return ev_.sub(a, b);
  }
  Ct rotate(const Ct& a, int k) {
    counter_.on_rot();
    return ev_.rotate(a, k);
  }
  Ct mult(const Ct& a, const Ct& b) {
    counter_.on_mul();
    return ev_.mult(a, b);
  }
  Ct rescale(const Ct& a, int bits) {
    auto out = ev_.rescale(a, bits);
    counter_.on_rescale(out.level);
    return out;
  }
  Ct cmult_vec(const Ct& a, const std::vector<double>& v, int bits) {
    counter_.on_mul();
    return ev_.cmult(a, enc_.encode(v, bits, a.level));
  }
  Ct cmult_const(const Ct& a, double c, int bits) {
    counter_.on_mul();
    return ev_.cmult_const(a, c, bits);
  }
  Ct drop_to_level(const Ct& a, int level) { return ev_.drop_to_level(a, level); }
  int level(const Ct& a) const { return a.level; }
  int scale_bits(const Ct& a) const { return a.scale_bits; }
  int p() const { return ev_.context()->params().scale_bits; }
  int pc() const { return ev_.context()->params().aux_scale_bits; }

  OpCounter& counter() { return counter_; }
  const ckks::Evaluator& evaluator() const { return ev_; }
  const ckks::Encoder& encoder() const { return enc_; }

 private:
  ckks::Evaluator ev_;
  ckks::Encoder enc_;
  OpCounter counter_;
};

// Tracks only level and scale, enforcing the same rules as the engine.
// Used for dry runs that count operations without any ring arithmetic.
class SymbolicBackend {
 public:
  struct Ct {
    int level = 0;
    int scale_bits = 0;
  };

  SymbolicBackend(int top_level, int p, int pc, double q0_bits = 60.0)
      : top_(top_level), p_(p), pc_(pc), q0_bits_(q0_bits) {}

  Ct fresh(int scale_bits = -1) const { return {top_, scale_bits < 0 ? p_ : scale_bits}; }

  Ct add(const Ct& a, const Ct& b);
  Ct sub(const Ct& a, const Ct& b) { return add(a, b); }
  Ct rotate(const Ct& a, int k);
  Ct mult(const Ct& a, const Ct& b);
  Ct rescale(const Ct& a, int bits);
  Ct cmult_vec(const Ct& a, const std::vector<double>& v, int bits);
  Ct cmult_const(const Ct& a, double c, int bits);
  Ct drop_to_level(const Ct& a, int level);
  int level(const Ct& a) const { return a.level; }
  int scale_bits(const Ct& a) const { return a.scale_bits; }
  int p() const { return p_; }
  int pc() const { return pc_; }

  OpCounter& counter() { return counter_; }

 private:
  void check_room(int scale_bits, int level) const;

  int top_, p_, pc_;
  double q0_bits_;
  OpCounter counter_;
};

static_assert(Backend<CkksBackend>);
static_assert(Backend<SymbolicBackend>);

}  // namespace fedfhe::packed
