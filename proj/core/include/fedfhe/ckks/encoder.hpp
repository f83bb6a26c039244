#pragma once

#include <complex>
#include <span>
#include <vector>

#include "fedfhe/ckks/context.hpp"
#include "fedfhe/ckks/types.hpp"

namespace fedfhe::ckks {

// Canonical-embedding encoder over the N/2 complex slots; only real parts are used.
class Encoder {
 public:
  explicit Encoder(ContextPtr ctx) : ctx_(std::move(ctx)) {}

  // Shorter inputs are zero padded. Level defaults to the top of the chain.
  Plaintext encode(std::span<const double> values, int scale_bits, int level = -1) const;
  // Constant slot vector; this encodes to a constant polynomial.
  Plaintext encode_constant(double value, int scale_bits, int level = -1) const;
  std::vector<double> decode(const Plaintext& pt) const;

  // Coefficient-domain helpers, exposed for tests.
  std::vector<std::int64_t> encode_coefficients(std::span<const double> values, int scale_bits) const;
  std::vector<double> decode_coefficients(std::span<const double> coeffs, int scale_bits) const;

  // Centered coefficients of a coefficient-form plaintext poly, as doubles.
  std::vector<double> centered_coefficients(RnsPoly poly) const;

  const ContextPtr& context() const { return ctx_; }

 private:
  void fft_special(std::vector<std::complex<double>>& vals) const;
  void fft_special_inv(std::vector<std::complex<double>>& vals) const;

  ContextPtr ctx_;
};

}  // namespace fedfhe::ckks
