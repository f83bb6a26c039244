#include "fedfhe/ckks/encoder.hpp"

#include <bit>
#include <cmath>

#include "fedfhe/ckks/poly.hpp"
#include "fedfhe/common/error.hpp"

namespace fedfhe::ckks {

namespace {

void bit_reverse_array(std::vector<std::complex<double>>& vals) {
  const std::size_t n = vals.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j >= bit; bit >>= 1) j -= bit;
    j += bit;
    if (i < j) std::swap(vals[i], vals[j]);
  }
}

}  // namespace

void Encoder::fft_special(std::vector<std::complex<double>>& vals) const {
  const std::size_t size = vals.size();
  const std::size_t m = 2 * ctx_->n();
  const auto& ksi = ctx_->ksi_pows();
  const auto& rot = ctx_->rot_group();
  bit_reverse_array(vals);
  for (std::size_t len = 2; len <= size; len <<= 1) {
    const std::size_t lenh = len >> 1, lenq = len << 2, gap = m / lenq;
    for (std::size_t i = 0; i < size; i += len) {
      for (std::size_t j = 0; j < lenh; ++j) {
        std::size_t idx = (rot[j] % lenq) * gap;
        auto u = vals[i + j];
        auto v = vals[i + j + lenh] * ksi[idx];
        vals[i + j] = u + v;
        vals[i + j + lenh] = u - v;
      }
    }
  }
}

void Encoder::fft_special_inv(std::vector<std::complex<double>>& vals) const {
  const std::size_t size = vals.size();
  const std::size_t m = 2 * ctx_->n();
  const auto& ksi = ctx_->ksi_pows();
  const auto& rot = ctx_->rot_group();
  for (std::size_t len = size; len >= 2; len >>= 1) {
    const std::size_t lenh = len >> 1, lenq = len << 2, gap = m / lenq;
    for (std::size_t i = 0; i < size; i += len) {
      for (std::size_t j = 0; j < lenh; ++j) {
        std::size_t idx = (lenq - (rot[j] % lenq)) * gap;
        auto u = vals[i + j] + vals[i + j + lenh];
        auto v = (vals[i + j] - vals[i + j + lenh]) * ksi[idx];
        vals[i + j] = u;
        vals[i + j + lenh] = v;
      }
    }
  }
  bit_reverse_array(vals);
  const double inv = 1.0 / static_cast<double>(size);
  for (auto& v : vals) v *= inv;
}

std::vector<std::int64_t> Encoder::encode_coefficients(std::span<const double> values, int scale_bits) const {
  const std::size_t slots = ctx_->slots();
  if (values.size() > slots) fail(ErrorCode::slot_budget, "vector longer than slot count");
  if (scale_bits < 0 || scale_bits > 60) fail(ErrorCode::scale_overflow, "scale bits out of range");
  const double limit = std::ldexp(1.0, 60 - scale_bits);
  std::vector<std::complex<double>> u(slots);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || std::abs(values[i]) > limit) {
      fail(ErrorCode::scale_overflow, "value exceeds 2^(60 - scale_bits)");
    }
    u[i] = values[i];
  }
  fft_special_inv(u);
  std::vector<std::int64_t> coeffs(ctx_->n());
  const double scale = std::ldexp(1.0, scale_bits);
  for (std::size_t i = 0; i < slots; ++i) {
    coeffs[i] = std::llround(u[i].real() * scale);
    coeffs[i + slots] = std::llround(u[i].imag() * scale);
  }
  return coeffs;
}

std::vector<double> Encoder::decode_coefficients(std::span<const double> coeffs, int scale_bits) const {
  const std::size_t slots = ctx_->slots();
  const double inv = std::ldexp(1.0, -scale_bits);
  std::vector<std::complex<double>> u(slots);
  for (std::size_t i = 0; i < slots; ++i) u[i] = {coeffs[i] * inv, coeffs[i + slots] * inv};
  fft_special(u);
  std::vector<double> out(slots);
  for (std::size_t i = 0; i < slots; ++i) out[i] = u[i].real();
  return out;
}

Plaintext Encoder::encode(std::span<const double> values, int scale_bits, int level) const {
  if (level < 0) level = ctx_->max_level();
  if (level > ctx_->max_level()) fail(ErrorCode::level_mismatch, "level above chain top");
  auto coeffs = encode_coefficients(values, scale_bits);
  Plaintext pt;
  pt.poly = poly::from_signed(*ctx_, coeffs, chain_indices(level));
  poly::to_ntt(*ctx_, pt.poly);
  pt.level = level;
  pt.scale_bits = scale_bits;
  return pt;
}

Plaintext Encoder::encode_constant(double value, int scale_bits, int level) const {
  if (level < 0) level = ctx_->max_level();
  if (std::abs(value) > std::ldexp(1.0, 60 - scale_bits)) fail(ErrorCode::scale_overflow, "constant too large");
  std::vector<std::int64_t> coeffs(ctx_->n(), 0);
  coeffs[0] = std::llround(value * std::ldexp(1.0, scale_bits));
  Plaintext pt;
  pt.poly = poly::from_signed(*ctx_, coeffs, chain_indices(level));
  poly::to_ntt(*ctx_, pt.poly);
  pt.level = level;
  pt.scale_bits = scale_bits;
  return pt;
}

std::vector<double> Encoder::centered_coefficients(RnsPoly p) const {
  poly::from_ntt(*ctx_, p);
  const std::size_t k = p.limbs();
  const std::size_t n = p.n;
  std::vector<Modulus> mods;
  for (auto idx : p.moduli) mods.push_back(ctx_->modulus(idx));

  // Garner constants: inv_prefix[i] = (q_0 ... q_{i-1})^{-1} mod q_i.
  std::vector<u64> inv_prefix(k, 1);
  for (std::size_t i = 1; i < k; ++i) {
    u64 prod = 1;
    for (std::size_t j = 0; j < i; ++j) prod = mul_mod(prod, reduce(mods[j].value, mods[i]), mods[i]);
    inv_prefix[i] = inv_mod(prod, mods[i]);
  }
  // Mixed-radix digits of (Q - 1) / 2 to decide the sign exactly.
  std::vector<u64> half(k);
  {
    std::vector<u64> residues(k);
    // (Q - 1)/2 mod q_i = (q_i - 1)/2 * ... computed as (Q-1) * 2^{-1}; Q = 0 mod q_i.
    for (std::size_t i = 0; i < k; ++i) {
      u64 two_inv = inv_mod(2, mods[i]);
      residues[i] = mul_mod(mods[i].value - 1, two_inv, mods[i]);
    }
    for (std::size_t i = 0; i < k; ++i) {
      u64 acc = 0;
      for (std::size_t j = i; j-- > 0;) acc = add_mod(mul_mod(acc, reduce(mods[j].value, mods[i]), mods[i]),
                                                       reduce(half[j], mods[i]), mods[i].value);
      half[i] = mul_mod(sub_mod(residues[i], acc, mods[i].value), inv_prefix[i], mods[i]);
    }
  }

  auto garner = [&](const std::vector<u64>& x, std::vector<u64>& v) {
    for (std::size_t i = 0; i < k; ++i) {
      u64 acc = 0;
      for (std::size_t j = i; j-- > 0;) acc = add_mod(mul_mod(acc, reduce(mods[j].value, mods[i]), mods[i]),
                                                       reduce(v[j], mods[i]), mods[i].value);
      v[i] = mul_mod(sub_mod(x[i], acc, mods[i].value), inv_prefix[i], mods[i]);
    }
  };
  auto to_double = [&](const std::vector<u64>& v) {
    double val = 0;
    for (std::size_t i = k; i-- > 0;) val = val * static_cast<double>(mods[i].value) + static_cast<double>(v[i]);
    return val;
  };

  std::vector<double> out(n);
  std::vector<u64> x(k), v(k);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < k; ++i) x[i] = p.limb(i)[c];
    garner(x, v);
    bool negative = false;
    for (std::size_t i = k; i-- > 0;) {
      if (v[i] != half[i]) {
        negative = v[i] > half[i];
        break;
      }
    }
    if (!negative) {
      out[c] = to_double(v);
    } else {
      for (std::size_t i = 0; i < k; ++i) x[i] = neg_mod(x[i], mods[i].value);
      garner(x, v);
      out[c] = -to_double(v);
    }
  }
  return out;
}

std::vector<double> Encoder::decode(const Plaintext& pt) const {
  auto coeffs = centered_coefficients(pt.poly);
  return decode_coefficients(coeffs, pt.scale_bits);
}

}  // namespace fedfhe::ckks
