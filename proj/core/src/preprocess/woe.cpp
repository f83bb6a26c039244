#include "fedfhe/preprocess/woe.hpp"

#include <cmath>
#include <numeric>
#include <optional>

#include "fedfhe/packed/kernels.hpp"

namespace fedfhe::preprocess {

using simnet::PartyContext;
using simnet::PartyId;
using simnet::Task;
namespace tags = simnet::tags;

WoeTable woe_from_counts(const BinSpec& spec, std::vector<std::uint64_t> good,
                         std::span<const std::size_t> populations) {
  require(good.size() == spec.bins() && populations.size() == spec.bins(), ErrorCode::invalid_argument,
          "count/bin mismatch");
  WoeTable t{spec, std::move(good), std::vector<std::uint64_t>(spec.bins()), 0, 0, {}};
  for (std::size_t i = 0; i < spec.bins(); ++i) {
    require(t.good[i] <= populations[i], ErrorCode::invalid_argument, "more positives than samples in a bin");
    t.bad[i] = populations[i] - t.good[i];
    t.good_total += t.good[i];
    t.bad_total += t.bad[i];
  }
  require(t.good_total > 0, ErrorCode::empty_input, "no positive samples");
  require(t.bad_total > 0, ErrorCode::empty_input, "no negative samples");
  const auto smooth = [](std::uint64_t c) { return c == 0 ? 0.5 : static_cast<double>(c); };
  for (std::size_t i = 0; i < spec.bins(); ++i) {
    const double pg = smooth(t.good[i]) / static_cast<double>(t.good_total);
    const double pb = smooth(t.bad[i]) / static_cast<double>(t.bad_total);
    t.woe.push_back(std::log(pg / pb));
  }
  return t;
}

WoeTable woe_plain(const BinSpec& spec, const BinMatrix& bins, std::span<const int> y01) {
  require(y01.size() == bins.index.size(), ErrorCode::invalid_argument, "row/label mismatch");
  require(bins.onehot.cols == spec.bins(), ErrorCode::invalid_argument, "bin matrix/spec mismatch");
  std::vector<std::uint64_t> good(spec.bins(), 0);
  for (std::size_t i = 0; i < y01.size(); ++i) {
    require(y01[i] == 0 || y01[i] == 1, ErrorCode::invalid_argument, "labels must be 0 or 1");
    good[bins.index[i]] += static_cast<std::uint64_t>(y01[i]);
  }
  return woe_from_counts(spec, std::move(good), bins.populations());
}

Matrix woe_encode(const Matrix& X, const std::vector<WoeTable>& tables) {
  require(tables.size() == X.cols, ErrorCode::invalid_argument, "one WOE table per column expected");
  Matrix out(X.rows, X.cols);
  for (std::size_t i = 0; i < X.rows; ++i)
    for (std::size_t j = 0; j < X.cols; ++j) out(i, j) = tables[j].encode(X(i, j));
  return out;
}

nlohmann::json to_json(const WoeTable& t) {
  return {{"bins", to_json(t.spec)}, {"good", t.good},           {"bad", t.bad},
          {"good_total", t.good_total}, {"bad_total", t.bad_total}, {"woe", t.woe}};
}

WoeTable woe_table_from_json(const nlohmann::json& j) {
  WoeTable t;
  t.spec = bin_spec_from_json(j.at("bins"));
  j.at("good").get_to(t.good);
  j.at("bad").get_to(t.bad);
  j.at("good_total").get_to(t.good_total);
  j.at("bad_total").get_to(t.bad_total);
  j.at("woe").get_to(t.woe);
  const std::size_t b = t.spec.bins();
  require(t.good.size() == b && t.bad.size() == b && t.woe.size() == b, ErrorCode::decode_failure,
          "WOE table size does not match its bins");
  require(std::accumulate(t.good.begin(), t.good.end(), std::uint64_t{0}) == t.good_total &&
              std::accumulate(t.bad.begin(), t.bad.end(), std::uint64_t{0}) == t.bad_total,
          ErrorCode::decode_failure, "WOE totals do not match the bin counts");
  return t;
}

// ---------------------------------------------------------------- encrypted

namespace {

// Bin columns as rows, samples as columns: group g of ciphertexts holds bin
// columns [g R, (g+1) R) and chunk c holds samples [c W, (c+1) W).
struct WoeShape {
  std::size_t n = 0, columns = 0, groups = 0, chunks = 0;
  packed::MatrixLayout layout;
};

WoeShape woe_shape(std::size_t n, std::size_t columns, std::size_t slots) {
  require(n > 0, ErrorCode::empty_input, "no samples");
  require(columns > 0, ErrorCode::empty_input, "no bin columns");
  // Width W trades groups against chunks: every group costs one product per
  // chunk plus log2 W rotations, and the passive party encrypts every pair.
  WoeShape best;
  std::size_t best_cost = static_cast<std::size_t>(-1);
  for (std::size_t W = 2; W <= std::min(packed::next_pow2(n), slots); W <<= 1) {
    WoeShape s{n, columns, 0, 0, packed::plan_layout(slots / W, W, slots)};
    s.groups = (columns + s.layout.rows - 1) / s.layout.rows;
    s.chunks = (n + W - 1) / W;
    const std::size_t cost = s.groups * (2 * s.chunks + static_cast<std::size_t>(packed::log2_exact(W)));
    if (cost < best_cost) {
      best_cost = cost;
      best = s;
    }
  }
  return best;
}

std::vector<int> row_steps(const packed::MatrixLayout& layout) {
  std::vector<int> steps;
  for (std::size_t k = 1; k < layout.padded_cols; k <<= 1) steps.push_back(static_cast<int>(k));
  return steps;
}

}  // namespace

Task<> woe_fhe_active(PartyContext& net, const WoeActiveInput& in) {
  const auto& ctx = *in.ctx;
  const PartyId B = PartyId::passive(1);
  auto setup = co_await net.recv(B, tags::PP_PUBLIC_KEY);
  ByteReader r(setup);
  const std::size_t n = r.u32(), columns = r.u32();
  auto keys = ckks::deserialize_evaluation_keys(ctx, r.raw(r.remaining()));
  require(n == in.y01.size(), ErrorCode::protocol, "bin chunks are not aligned with the labels");
  for (int v : in.y01) require(v == 0 || v == 1, ErrorCode::invalid_argument, "labels must be 0 or 1");
  const auto s = woe_shape(n, columns, ctx.slots());
  auto bins = ckks::deserialize_ciphertexts(ctx, co_await net.recv(B, tags::PP_BINS));
  require(bins.size() == s.groups * s.chunks, ErrorCode::protocol, "bin chunk count");

  packed::CkksBackend b(in.ctx, keys);
  ckks::Encryptor enc(in.ctx, keys->public_key, net.rng().next_u64());
  std::vector<ckks::Ciphertext> ys;
  for (std::size_t c = 0; c < s.chunks; ++c) {
    Matrix m(s.layout.rows, s.layout.cols);
    for (std::size_t k = 0; k < s.layout.cols && c * s.layout.cols + k < n; ++k)
      for (std::size_t row = 0; row < s.layout.rows; ++row) m(row, k) = in.y01[c * s.layout.cols + k];
    ys.push_back(enc.encrypt(packed::pack(m, s.layout)));
  }
  std::vector<ckks::Ciphertext> good;
  for (std::size_t g = 0; g < s.groups; ++g) {
    std::optional<ckks::Ciphertext> acc;
    for (std::size_t c = 0; c < s.chunks; ++c) {
      auto prod = b.rescale(b.mult(bins[g * s.chunks + c], ys[c]), b.p());
      acc = acc ? b.add(*acc, prod) : prod;
    }
    good.push_back(packed::mask_first_column(b, packed::row_sum_rotate(b, *acc, s.layout), s.layout));
  }
  net.send(B, tags::PP_GOOD, ckks::serialize(ctx, good));
}

Task<> woe_fhe_passive(PartyContext& net, const WoePassiveInput& in, WoeFheResult& out) {
  const auto& ctx = *in.ctx;
  const Matrix& X = *in.X;
  std::vector<BinSpec> specs = equal_width_bins(X, in.bins);
  std::vector<BinMatrix> mats;
  std::size_t columns = 0;
  for (std::size_t j = 0; j < X.cols; ++j) {
    mats.push_back(one_hot(column(X, j), specs[j]));
    columns += specs[j].bins();
  }
  const auto s = woe_shape(X.rows, columns, ctx.slots());
  const auto steps = row_steps(s.layout);
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(X.rows));
  w.u32(static_cast<std::uint32_t>(columns));
  w.raw(ckks::serialize(ctx, ckks::restrict_keys(*in.keys->eval, steps, true)));
  const PartyId A = PartyId::active();
  net.send(A, tags::PP_PUBLIC_KEY, w.take());

  // Global bin column -> (feature, bin).
  std::vector<std::pair<std::size_t, std::size_t>> where;
  for (std::size_t j = 0; j < specs.size(); ++j)
    for (std::size_t b = 0; b < specs[j].bins(); ++b) where.emplace_back(j, b);

  ckks::Encryptor enc(in.ctx, in.keys->public_key(), net.rng().next_u64());
  std::vector<ckks::Ciphertext> cts;
  for (std::size_t g = 0; g < s.groups; ++g) {
    for (std::size_t c = 0; c < s.chunks; ++c) {
      Matrix m(s.layout.rows, s.layout.cols);
      for (std::size_t row = 0; row < s.layout.rows && g * s.layout.rows + row < columns; ++row) {
        auto [j, b] = where[g * s.layout.rows + row];
        for (std::size_t k = 0; k < s.layout.cols && c * s.layout.cols + k < X.rows; ++k)
          m(row, k) = mats[j].onehot(c * s.layout.cols + k, b);
      }
      cts.push_back(enc.encrypt(packed::pack(m, s.layout)));
    }
  }
  net.send(A, tags::PP_BINS, ckks::serialize(ctx, cts));

  auto good = ckks::deserialize_ciphertexts(ctx, co_await net.recv(A, tags::PP_GOOD));
  require(good.size() == s.groups, ErrorCode::protocol, "count group mismatch");
  ckks::Decryptor dec(in.ctx, in.keys->secret_key);
  out.good_counts.assign(columns, 0);
  out.rounding_error = 0.0;
  for (std::size_t g = 0; g < s.groups; ++g) {
    const auto v = dec.decrypt_values(good[g]);
    for (std::size_t row = 0; row < s.layout.rows && g * s.layout.rows + row < columns; ++row) {
      const double x = v[s.layout.index(row, 0)];
      const double rounded = std::max(0.0, std::round(x));
      out.rounding_error = std::max(out.rounding_error, std::abs(x - rounded));
      out.good_counts[g * s.layout.rows + row] = static_cast<std::uint64_t>(rounded);
    }
  }
  out.tables.clear();
  std::size_t offset = 0;
  for (std::size_t j = 0; j < specs.size(); ++j) {
    std::vector<std::uint64_t> gj(out.good_counts.begin() + offset,
                                  out.good_counts.begin() + offset + specs[j].bins());
    out.tables.push_back(woe_from_counts(specs[j], std::move(gj), mats[j].populations()));
    offset += specs[j].bins();
  }
}

WoeFheResult woe_fhe(std::span<const int> y01, const Matrix& XB, std::size_t bins, const ckks::ContextPtr& ctx,
                     const ckks::KeySet& keys, std::uint64_t seed) {
  WoeFheResult out;
  WoeActiveInput ain{ctx, y01};
  WoePassiveInput pin{ctx, &keys, &XB, bins};
  simnet::Network net(seed);
  net.add_party(PartyId::active(), [&](PartyContext& p) { return woe_fhe_active(p, ain); });
  net.add_party(PartyId::passive(1), [&](PartyContext& p) { return woe_fhe_passive(p, pin, out); });
  out.transcript = net.run();
  return out;
}

}  // namespace fedfhe::preprocess
