#include "fedfhe/preprocess/smote.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>

#include "fedfhe/common/prng.hpp"
#include "fedfhe/packed/backend.hpp"
#include "fedfhe/packed/layout.hpp"

namespace fedfhe::preprocess {

using simnet::PartyContext;
using simnet::PartyId;
using simnet::Task;
namespace tags = simnet::tags;

void SmoteConfig::validate() const {
  require(k >= 1, ErrorCode::invalid_argument, "k must be >= 1");
  require(amount >= 0 && std::isfinite(amount), ErrorCode::invalid_argument, "amount must be >= 0");
  require(mask_bound > 0, ErrorCode::invalid_argument, "mask bound must be > 0");
}

std::size_t smote_count(std::size_t n, std::size_t minority, const SmoteConfig& config) {
  if (config.target_rows > 0) {
    require(config.target_rows >= n, ErrorCode::invalid_argument, "target row count below the dataset size");
    return config.target_rows - n;
  }
  return static_cast<std::size_t>(std::llround(config.amount * static_cast<double>(minority)));
}

std::vector<std::vector<std::size_t>> minority_neighbors(const Matrix& F, std::span<const std::size_t> minority,
                                                         std::size_t k) {
  require(k < minority.size(), ErrorCode::invalid_argument,
          "k = " + std::to_string(k) + " needs more than " + std::to_string(minority.size()) + " minority rows");
  std::vector<std::vector<std::size_t>> out(minority.size());
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t a = 0; a < minority.size(); ++a) {
    dist.clear();
    for (std::size_t b = 0; b < minority.size(); ++b) {
      if (a == b) continue;
      double d = 0;
      for (std::size_t j = 0; j < F.cols; ++j) {
        const double t = F(minority[a], j) - F(minority[b], j);
        d += t * t;
      }
      dist.emplace_back(d, minority[b]);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    for (std::size_t r = 0; r < k; ++r) out[a].push_back(dist[r].second);
  }
  return out;
}

SmotePlan make_smote_plan(const Matrix& knn_features, std::span<const int> y01, const SmoteConfig& config) {
  config.validate();
  require(y01.size() == knn_features.rows, ErrorCode::invalid_argument, "row/label mismatch");
  std::vector<std::size_t> minority;
  for (std::size_t i = 0; i < y01.size(); ++i)
    if (y01[i] == config.minority_label) minority.push_back(i);
  require(!minority.empty(), ErrorCode::empty_input, "no minority samples");
  const auto nn = minority_neighbors(knn_features, minority, config.k);
  const std::size_t count = smote_count(y01.size(), minority.size(), config);
  Prng prng(config.seed, 0x534d4f5445);
  SmotePlan plan;
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t a = t % minority.size();
    const std::size_t r = (t / minority.size()) % config.k;
    plan.pairs.push_back({minority[a], nn[a][r], prng.uniform_open01()});
  }
  return plan;
}

Matrix apply_smote_plan(const Matrix& X, const SmotePlan& plan) {
  Matrix out(plan.size(), X.cols);
  for (std::size_t t = 0; t < plan.size(); ++t) {
    const auto& p = plan.pairs[t];
    require(p.orig < X.rows && p.neig < X.rows, ErrorCode::invalid_argument, "plan refers to a missing row");
    for (std::size_t j = 0; j < X.cols; ++j) out(t, j) = X(p.orig, j) + p.lambda * (X(p.neig, j) - X(p.orig, j));
  }
  return out;
}

Matrix smote_plain(const Matrix& X, std::span<const int> y01, const SmoteConfig& config, std::size_t knn_cols) {
  knn_cols = std::min(knn_cols, X.cols);
  Matrix F(X.rows, knn_cols);
  for (std::size_t i = 0; i < X.rows; ++i)
    for (std::size_t j = 0; j < knn_cols; ++j) F(i, j) = X(i, j);
  return apply_smote_plan(X, make_smote_plan(F, y01, config));
}

Matrix smote_correction(std::size_t original_rows, const Matrix& r_b) {
  Matrix out(original_rows + r_b.rows, r_b.cols);
  for (std::size_t i = 0; i < r_b.rows; ++i)
    for (std::size_t j = 0; j < r_b.cols; ++j) out(original_rows + i, j) = -r_b(i, j);
  return out;
}

// ---------------------------------------------------------------- encrypted

namespace {

// Samples as rows of width W = next_pow2(fa + fb), A's columns first.
struct SmoteShape {
  std::size_t n = 0, fa = 0, fb = 0, chunks = 0;
  packed::MatrixLayout layout;

  std::size_t rows_per_chunk() const { return layout.rows; }
};

SmoteShape smote_shape(std::size_t n, std::size_t fa, std::size_t fb, std::size_t slots) {
  require(n > 0, ErrorCode::empty_input, "no samples");
  const std::size_t W = packed::next_pow2(fa + fb);
  require(W <= slots, ErrorCode::slot_budget, "feature row wider than a ciphertext");
  SmoteShape s{n, fa, fb, 0, packed::plan_layout(slots / W, W, slots)};
  s.chunks = (n + s.layout.rows - 1) / s.layout.rows;
  return s;
}

std::vector<int> all_pow2_steps(std::size_t slots) {
  std::vector<int> steps;
  for (std::size_t k = 1; k < slots; k <<= 1) {
    steps.push_back(static_cast<int>(k));
    steps.push_back(-static_cast<int>(k));
  }
  return steps;
}

template <class Fill>
std::vector<std::vector<double>> pack_rows(const SmoteShape& s, std::size_t rows, Fill&& fill) {
  std::vector<std::vector<double>> out;
  const std::size_t R = s.rows_per_chunk();
  for (std::size_t c = 0; c * R < rows; ++c) {
    Matrix m(s.layout.rows, s.layout.cols);
    for (std::size_t r = 0; r < R && c * R + r < rows; ++r) fill(m, r, c * R + r);
    out.push_back(packed::pack(m, s.layout));
  }
  return out;
}

}  // namespace

Task<> smote_fhe_active(PartyContext& net, const SmoteActiveInput& in, SmoteActiveOutput& out) {
  in.config.validate();
  const auto& ctx = *in.ctx;
  const Matrix& X = *in.X;
  require(in.y01.size() == X.rows, ErrorCode::invalid_argument, "row/label mismatch");
  const auto s = smote_shape(X.rows, X.cols, in.b_features, ctx.slots());
  const PartyId B = PartyId::passive(1);
  auto setup = co_await net.recv(B, tags::PP_PUBLIC_KEY);
  ByteReader hdr(setup);
  require(hdr.u32() == X.rows && hdr.u32() == in.b_features, ErrorCode::protocol,
          "passive rows or features do not match");
  auto keys = ckks::deserialize_evaluation_keys(ctx, hdr.raw(hdr.remaining()));
  auto xb = ckks::deserialize_ciphertexts(ctx, co_await net.recv(B, tags::PP_FEATURES));
  require(xb.size() == s.chunks, ErrorCode::protocol, "feature chunk count");

  packed::CkksBackend b(in.ctx, keys);
  ckks::Encryptor enc(in.ctx, keys->public_key, net.rng().next_u64());
  auto xa = pack_rows(s, X.rows, [&](Matrix& m, std::size_t r, std::size_t i) {
    for (std::size_t j = 0; j < s.fa; ++j) m(r, j) = X(i, j);
  });
  std::vector<ckks::Ciphertext> x;
  for (std::size_t c = 0; c < s.chunks; ++c) x.push_back(b.add(enc.encrypt(xa[c]), xb[c]));

  // Neighbors come from A's own columns only.
  out.plan = make_smote_plan(X, in.y01, in.config);
  const std::size_t m = out.plan.size();
  const std::size_t R = s.rows_per_chunk(), W = s.layout.padded_cols, f = s.fa + s.fb;
  const std::size_t out_chunks = (m + R - 1) / R;
  out.r_a = Matrix(m, s.fa);
  out.r_b = Matrix(m, s.fb);
  const double bound = in.config.mask_bound;
  for (std::size_t t = 0; t < m; ++t) {
    for (std::size_t j = 0; j < s.fa; ++j) out.r_a(t, j) = bound * (2.0 * net.rng().uniform_open01() - 1.0);
    for (std::size_t j = 0; j < s.fb; ++j) out.r_b(t, j) = bound * (2.0 * net.rng().uniform_open01() - 1.0);
  }

  std::vector<ckks::Ciphertext> masked;
  for (std::size_t oc = 0; oc < out_chunks; ++oc) {
    // (source chunk, rotation) -> coefficient mask over the source chunk.
    std::map<std::pair<std::size_t, int>, std::vector<double>> groups;
    auto place = [&](std::size_t src, std::size_t out_row, double coeff) {
      const std::size_t c = src / R, r = src % R;
      const auto shift = static_cast<std::ptrdiff_t>(r) - static_cast<std::ptrdiff_t>(out_row);
      const int k = static_cast<int>(shift * static_cast<std::ptrdiff_t>(W));
      auto& mask = groups[{c, k}];
      if (mask.empty()) mask.assign(s.layout.slots, 0.0);
      for (std::size_t j = 0; j < f; ++j) mask[s.layout.index(r, j)] += coeff;
    };
    for (std::size_t r = 0; r < R && oc * R + r < m; ++r) {
      const auto& p = out.plan.pairs[oc * R + r];
      place(p.orig, r, 1.0 - p.lambda);
      place(p.neig, r, p.lambda);
    }
    std::optional<ckks::Ciphertext> acc;
    for (const auto& [key, mask] : groups) {
      auto term = b.rescale(b.cmult_vec(x[key.first], mask, b.p()), b.p());
      if (key.second != 0) term = b.rotate(term, key.second);
      acc = acc ? b.add(*acc, term) : term;
    }
    Matrix rm(s.layout.rows, s.layout.cols);
    for (std::size_t r = 0; r < R && oc * R + r < m; ++r) {
      for (std::size_t j = 0; j < s.fa; ++j) rm(r, j) = out.r_a(oc * R + r, j);
      for (std::size_t j = 0; j < s.fb; ++j) rm(r, s.fa + j) = out.r_b(oc * R + r, j);
    }
    masked.push_back(
        b.evaluator().add_plain(*acc, b.encoder().encode(packed::pack(rm, s.layout), acc->scale_bits, acc->level)));
  }
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(m));
  w.raw(ckks::serialize(ctx, masked));
  net.send(B, tags::PP_SYNTH_MASKED, w.take());

  auto reply = co_await net.recv(B, tags::PP_SYNTH_A);
  ByteReader r(reply);
  require(r.u32() == m, ErrorCode::protocol, "synthetic row count");
  out.rows = Matrix(m, s.fa);
  for (auto& v : out.rows.data) v = r.f64();
  require(r.done(), ErrorCode::decode_failure, "trailing bytes after synthetic rows");
  for (std::size_t i = 0; i < out.rows.data.size(); ++i) out.rows.data[i] -= out.r_a.data[i];
}

Task<> smote_fhe_passive(PartyContext& net, const SmotePassiveInput& in, SmotePassiveOutput& out) {
  const auto& ctx = *in.ctx;
  const Matrix& X = *in.X;
  const auto s = smote_shape(X.rows, in.a_features, X.cols, ctx.slots());
  const PartyId A = PartyId::active();
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(X.rows));
  w.u32(static_cast<std::uint32_t>(X.cols));
  w.raw(ckks::serialize(ctx, ckks::restrict_keys(*in.keys->eval, all_pow2_steps(ctx.slots()), false)));
  net.send(A, tags::PP_PUBLIC_KEY, w.take());

  ckks::Encryptor enc(in.ctx, in.keys->public_key(), net.rng().next_u64());
  std::vector<ckks::Ciphertext> cts;
  for (const auto& v : pack_rows(s, X.rows, [&](Matrix& m, std::size_t r, std::size_t i) {
         for (std::size_t j = 0; j < s.fb; ++j) m(r, s.fa + j) = X(i, j);
       }))
    cts.push_back(enc.encrypt(v));
  net.send(A, tags::PP_FEATURES, ckks::serialize(ctx, cts));

  auto payload = co_await net.recv(A, tags::PP_SYNTH_MASKED);
  ByteReader r(payload);
  const std::size_t m = r.u32();
  const auto masked = ckks::deserialize_ciphertexts(ctx, r.raw(r.remaining()));
  const std::size_t R = s.rows_per_chunk();
  require(masked.size() == (m + R - 1) / R, ErrorCode::protocol, "synthetic chunk count");
  ckks::Decryptor dec(in.ctx, in.keys->secret_key);
  out.rows_masked = Matrix(m, s.fb);
  ByteWriter reply;
  reply.u32(static_cast<std::uint32_t>(m));
  Matrix a_part(m, s.fa);
  for (std::size_t c = 0; c < masked.size(); ++c) {
    const auto v = dec.decrypt_values(masked[c]);
    for (std::size_t row = 0; row < R && c * R + row < m; ++row) {
      for (std::size_t j = 0; j < s.fa; ++j) a_part(c * R + row, j) = v[s.layout.index(row, j)];
      for (std::size_t j = 0; j < s.fb; ++j) out.rows_masked(c * R + row, j) = v[s.layout.index(row, s.fa + j)];
    }
  }
  for (double v : a_part.data) reply.f64(v);
  net.send(A, tags::PP_SYNTH_A, reply.take());
}

SmoteFheResult smote_fhe(const Matrix& XA, std::span<const int> y01, const Matrix& XB, const SmoteConfig& config,
                         const ckks::ContextPtr& ctx, const ckks::KeySet& keys, std::uint64_t seed) {
  require(XA.rows == XB.rows, ErrorCode::invalid_argument, "parties are not sample aligned");
  SmoteFheResult out;
  SmoteActiveInput ain{ctx, &XA, y01, XB.cols, config};
  SmotePassiveInput pin{ctx, &keys, &XB, XA.cols};
  simnet::Network net(seed);
  net.add_party(PartyId::active(), [&](PartyContext& p) { return smote_fhe_active(p, ain, out.active); });
  net.add_party(PartyId::passive(1), [&](PartyContext& p) { return smote_fhe_passive(p, pin, out.passive); });
  out.transcript = net.run();
  return out;
}

}  // namespace fedfhe::preprocess
