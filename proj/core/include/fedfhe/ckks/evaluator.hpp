#pragma once

#include <memory>
#include <utility>

#include "fedfhe/ckks/context.hpp"
#include "fedfhe/ckks/encoder.hpp"
#include "fedfhe/ckks/types.hpp"

namespace fedfhe::ckks {

// Homomorphic operations. Every method is const and leaves its inputs untouched.
class Evaluator {
 public:
  // `keys` may be null when only linear operations are needed.
  Evaluator(ContextPtr ctx, std::shared_ptr<const EvaluationKeys> keys);

  Ciphertext add(const Ciphertext& a, const Ciphertext& b) const;
  Ciphertext sub(const Ciphertext& a, const Ciphertext& b) const;
  Ciphertext negate(const Ciphertext& a) const;
  void add_inplace(Ciphertext& a, const Ciphertext& b) const;
  void sub_inplace(Ciphertext& a, const Ciphertext& b) const;

  Ciphertext add_plain(const Ciphertext& a, const Plaintext& p) const;
  // Adds a constant to every slot at the ciphertext's scale.
  Ciphertext add_const(const Ciphertext& a, double c) const;

  // Relinearized product at scale a.scale * b.scale; not rescaled.
  Ciphertext mult(const Ciphertext& a, const Ciphertext& b) const;
  Ciphertext square(const Ciphertext& a) const { return mult(a, a); }
  // Plaintext product at scale a.scale * 2^p.scale_bits.
  Ciphertext cmult(const Ciphertext& a, const Plaintext& p) const;
  // Product with round(c * 2^bits) applied to every slot; scale grows by `bits`.
  Ciphertext cmult_const(const Ciphertext& a, double c, int bits) const;
  // Product with an exact integer; scale unchanged.
  Ciphertext mult_integer(const Ciphertext& a, std::int64_t k) const;

  // Divides the nominal scale by 2^bits and drops one level.
  Ciphertext rescale(const Ciphertext& a, int bits) const;
  Ciphertext drop_to_level(const Ciphertext& a, int level) const;

  // rotate(+k) moves slot i to slot i - k.
  Ciphertext rotate(const Ciphertext& a, int k) const;

  const ContextPtr& context() const { return ctx_; }
  const EvaluationKeys* keys() const { return keys_.get(); }

 private:
  void check_context(const Ciphertext& a) const;
  void check_scale_room(int scale_bits, int level) const;
  Ciphertext rotate_pow2(const Ciphertext& a, int step) const;
  std::pair<RnsPoly, RnsPoly> key_switch(const RnsPoly& d, const SwitchKey& key) const;
  // Removes the last limb, dividing by its prime with rounding.
  void divide_round_by_last(RnsPoly& p) const;

  ContextPtr ctx_;
  std::shared_ptr<const EvaluationKeys> keys_;
};

}  // namespace fedfhe::ckks
