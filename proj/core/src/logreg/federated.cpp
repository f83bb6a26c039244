#include "fedfhe/logreg/federated.hpp"

#include <numeric>
#include <optional>

#include "fedfhe/common/hash.hpp"

namespace fedfhe::logreg {

using simnet::PartyContext;
using simnet::PartyId;
using simnet::Task;
namespace tags = simnet::tags;

namespace {

std::vector<int> pow2_steps(std::size_t slots) {
  std::vector<int> steps;
  for (std::size_t k = 1; k < slots; k <<= 1) steps.push_back(static_cast<int>(k));
  return steps;
}

Bytes encode_setup(const ckks::Context& ctx, std::size_t f1, const ckks::EvaluationKeys& keys) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(f1));
  w.raw(ckks::serialize(ctx, keys));
  return w.take();
}

std::shared_ptr<const ckks::EvaluationKeys> decode_setup(const ckks::Context& ctx, std::span<const std::uint8_t> data,
                                                         std::size_t f1) {
  ByteReader r(data);
  require(r.u32() == f1, ErrorCode::protocol, "feature schema mismatch between parties");
  return ckks::deserialize_evaluation_keys(ctx, r.raw(r.remaining()));
}

std::size_t chunk_count(std::size_t rows, const MatrixLayout& layout) {
  return (rows + layout.cols - 1) / layout.cols;
}

// f1 x W matrix whose column k is fill(rows[c * W + k]) for the rows in chunk c.
template <class Fill>
std::vector<double> pack_chunk(const MatrixLayout& layout, std::span<const std::size_t> rows, std::size_t c,
                               Fill&& fill) {
  Matrix m(layout.rows, layout.cols);
  for (std::size_t k = 0; k < layout.cols; ++k) {
    const std::size_t idx = c * layout.cols + k;
    if (idx >= rows.size()) break;
    fill(m, k, rows[idx]);
  }
  return packed::pack(m, layout);
}

void check_labels(std::span<const int> y, std::size_t n) {
  require(y.size() == n, ErrorCode::invalid_argument, "row/label mismatch");
  for (int v : y) require(v == 1 || v == -1, ErrorCode::invalid_argument, "labels must be -1 or +1");
}

std::vector<double> read_gradient(const ckks::Decryptor& dec, const ckks::Ciphertext& ct, const MatrixLayout& layout) {
  return read_beta_columns(dec.decrypt_values(ct), layout, layout.rows).beta;
}

}  // namespace

MatrixLayout federated_layout(std::size_t f1, std::size_t slots) {
  const std::size_t F = packed::next_pow2(f1);
  require(F <= slots / 2, ErrorCode::slot_budget, "too many features for one ciphertext row block");
  return packed::plan_layout(f1, slots / F, slots);
}

std::vector<std::size_t> draw_batch(std::size_t n, std::size_t batch, std::uint64_t seed, std::uint64_t stream,
                                    int round) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  if (batch == 0 || batch >= n) return rows;
  Prng prng(seed, (stream << 32) | static_cast<std::uint32_t>(round));
  prng.shuffle(rows.begin(), rows.end());
  rows.resize(batch);
  std::sort(rows.begin(), rows.end());
  return rows;
}

Digest batch_digest(std::span<const std::size_t> rows) {
  Sha256 h;
  h.update("fedfhe.lr.batch");
  for (auto r : rows) h.update_u64(r);
  return h.finish();
}

std::vector<double> surrogate_gradient(const Matrix& Xb, std::span<const int> y, std::span<const double> theta,
                                       std::span<const std::size_t> rows) {
  require(!rows.empty(), ErrorCode::empty_input, "empty batch");
  require(theta.size() == Xb.cols, ErrorCode::invalid_argument, "theta/feature mismatch");
  std::vector<double> g(Xb.cols, 0.0);
  for (auto i : rows) {
    double t = 0;
    for (std::size_t j = 0; j < Xb.cols; ++j) t += theta[j] * Xb(i, j);
    const double s = 0.25 * t - 0.5 * y[i];
    for (std::size_t j = 0; j < Xb.cols; ++j) g[j] += s * Xb(i, j);
  }
  for (auto& v : g) v /= static_cast<double>(rows.size());
  return g;
}

double accuracy(const Matrix& X, std::span<const int> y_pm, std::span<const double> theta) {
  require(X.rows > 0, ErrorCode::empty_input, "empty test set");
  require(theta.size() == X.cols + 1, ErrorCode::invalid_argument, "theta/feature mismatch");
  check_labels(y_pm, X.rows);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < X.rows; ++i) {
    double t = theta[0];
    for (std::size_t j = 0; j < X.cols; ++j) t += theta[j + 1] * X(i, j);
    const double p = sigmoid(t);
    if ((p > 0.5 && y_pm[i] == 1) || (p < 0.5 && y_pm[i] == -1)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(X.rows);
}

std::vector<double> train_plain_lr(const Matrix& X, std::span<const int> y_pm, const LrConfig& config) {
  config.validate();
  check_labels(y_pm, X.rows);
  require(X.rows > 0, ErrorCode::empty_input, "no training rows");
  const Matrix Xb = with_bias(X);
  std::vector<double> theta(Xb.cols, 0.0);
  for (int t = 0; t < config.iterations; ++t) {
    std::vector<double> g(Xb.cols, 0.0);
    for (std::size_t i = 0; i < Xb.rows; ++i) {
      double m = 0;
      for (std::size_t j = 0; j < Xb.cols; ++j) m += theta[j] * Xb(i, j);
      const double s = -sigmoid(-y_pm[i] * m) * y_pm[i];
      for (std::size_t j = 0; j < Xb.cols; ++j) g[j] += s * Xb(i, j);
    }
    const double a = config.alpha(t) / static_cast<double>(Xb.rows);
    for (std::size_t j = 0; j < Xb.cols; ++j) theta[j] -= a * g[j];
  }
  return theta;
}

// ---------------------------------------------------------------- horizontal

Task<> hfl_server(PartyContext& net, const HflServerInput& in, FedLrResult& out) {
  in.config.validate();
  require(in.clients > 0, ErrorCode::invalid_argument, "no clients");
  const auto& ctx = *in.ctx;
  const std::size_t f1 = in.features + 1;
  const auto layout = federated_layout(f1, ctx.slots());
  auto steps = pow2_steps(ctx.slots());
  const auto setup = encode_setup(ctx, f1, ckks::restrict_keys(*in.keys->eval, steps, false));
  std::vector<PartyId> clients;
  for (std::size_t k = 0; k < in.clients; ++k) clients.push_back(PartyId::passive(static_cast<int>(k + 1)));
  for (auto c : clients) net.send(c, tags::LR_PUBLIC_KEY, setup);

  ckks::Encryptor enc(in.ctx, in.keys->public_key(), net.rng().next_u64());
  ckks::Decryptor dec(in.ctx, in.keys->secret_key);
  std::vector<double> theta(f1, 0.0);
  out.history.clear();
  for (int t = 0; t < in.config.iterations; ++t) {
    const auto model = ckks::serialize(ctx, enc.encrypt(pack_beta_columns(theta, layout)));
    for (auto c : clients) net.send(c, tags::LR_MODEL, model);
    std::vector<double> sum(f1, 0.0);
    for (auto c : clients) {
      auto payload = co_await net.recv(c, tags::LR_GRADIENT);
      auto g = read_gradient(dec, ckks::deserialize_ciphertext(ctx, payload), layout);
      for (std::size_t j = 0; j < f1; ++j) sum[j] += g[j];
    }
    const double a = in.config.alpha(t) / static_cast<double>(clients.size());
    for (std::size_t j = 0; j < f1; ++j) theta[j] -= a * sum[j];
    out.history.push_back(theta);
  }
  out.theta = theta;
}

Task<> hfl_client(PartyContext& net, const HflClientInput& in) {
  const auto& ctx = *in.ctx;
  const ClientShard& shard = *in.shard;
  const std::size_t n = shard.X.rows;
  require(n > 0, ErrorCode::empty_input, "client holds no rows");
  check_labels(shard.y, n);
  const std::size_t f1 = shard.X.cols + 1;
  const PartyId server = PartyId::active();
  auto setup = co_await net.recv(server, tags::LR_PUBLIC_KEY);
  packed::CkksBackend b(in.ctx, decode_setup(ctx, setup, f1));
  const auto layout = federated_layout(f1, ctx.slots());
  const Matrix Xb = with_bias(shard.X);
  const int p = b.p();

  for (int t = 0; t < in.config.iterations; ++t) {
    auto model = co_await net.recv(server, tags::LR_MODEL);
    const auto theta = ckks::deserialize_ciphertext(ctx, model);
    const auto rows = draw_batch(n, in.config.batch_size, in.config.seed, in.stream, t);
    const double inv = 1.0 / static_cast<double>(rows.size());
    std::optional<ckks::Ciphertext> acc;
    for (std::size_t c = 0; c < chunk_count(rows.size(), layout); ++c) {
      auto xt = pack_chunk(layout, rows, c, [&](Matrix& m, std::size_t k, std::size_t i) {
        for (std::size_t j = 0; j < f1; ++j) m(j, k) = Xb(i, j);
      });
      auto xq = pack_chunk(layout, rows, c, [&](Matrix& m, std::size_t k, std::size_t i) {
        for (std::size_t j = 0; j < f1; ++j) m(j, k) = 0.25 * inv * Xb(i, j);
      });
      auto yx = pack_chunk(layout, rows, c, [&](Matrix& m, std::size_t k, std::size_t i) {
        for (std::size_t j = 0; j < f1; ++j) m(j, k) = -0.5 * inv * shard.y[i] * Xb(i, j);
      });
      auto ct1 = b.rescale(b.cmult_vec(theta, xt, p), p);
      auto ct2 = packed::col_sum_rotate(b, ct1, layout);
      auto ct4 = b.rescale(b.cmult_vec(ct2, xq, p), p);
      ct4 = b.evaluator().add_plain(ct4, b.encoder().encode(yx, ct4.scale_bits, ct4.level));
      acc = acc ? b.add(*acc, ct4) : ct4;
    }
    auto ct5 = packed::row_sum_rotate(b, *acc, layout);
    auto ct6 = packed::mask_first_column(b, ct5, layout);
    net.send(server, tags::LR_GRADIENT, ckks::serialize(ctx, ct6));
  }
}

FedLrResult hfl_train(const std::vector<ClientShard>& clients, const LrConfig& config, const ckks::ContextPtr& ctx,
                      const ckks::KeySet& keys, std::uint64_t seed) {
  require(!clients.empty(), ErrorCode::invalid_argument, "no clients");
  for (const auto& c : clients)
    require(c.X.cols == clients[0].X.cols, ErrorCode::invalid_argument, "client feature schemas differ");
  FedLrResult out;
  HflServerInput sin{ctx, &keys, clients[0].X.cols, clients.size(), config};
  std::vector<HflClientInput> cin;
  for (std::size_t k = 0; k < clients.size(); ++k) cin.push_back({ctx, &clients[k], config, k});
  simnet::Network net(seed);
  net.add_party(PartyId::active(), [&](PartyContext& p) { return hfl_server(p, sin, out); });
  for (std::size_t k = 0; k < clients.size(); ++k)
    net.add_party(PartyId::passive(static_cast<int>(k + 1)),
                  [&, k](PartyContext& p) { return hfl_client(p, cin[k]); });
  out.transcript = net.run();
  return out;
}

std::vector<std::vector<double>> hfl_shadow(const std::vector<ClientShard>& clients, const LrConfig& config) {
  require(!clients.empty(), ErrorCode::invalid_argument, "no clients");
  std::vector<Matrix> xb;
  for (const auto& c : clients) xb.push_back(with_bias(c.X));
  std::vector<double> theta(xb[0].cols, 0.0);
  std::vector<std::vector<double>> history;
  for (int t = 0; t < config.iterations; ++t) {
    std::vector<double> sum(theta.size(), 0.0);
    for (std::size_t k = 0; k < clients.size(); ++k) {
      auto rows = draw_batch(xb[k].rows, config.batch_size, config.seed, k, t);
      auto g = surrogate_gradient(xb[k], clients[k].y, theta, rows);
      for (std::size_t j = 0; j < g.size(); ++j) sum[j] += g[j];
    }
    const double a = config.alpha(t) / static_cast<double>(clients.size());
    for (std::size_t j = 0; j < theta.size(); ++j) theta[j] -= a * sum[j];
    history.push_back(theta);
  }
  return history;
}

double hfl_evaluate(std::span<const double> theta, const ClientShard& test) { return accuracy(test.X, test.y, theta); }

// ---------------------------------------------------------------- vertical

namespace {

struct VflShape {
  std::size_t fa = 0, fb = 0, f1 = 0;
  MatrixLayout layout;
};

VflShape vfl_shape(std::size_t fa, std::size_t fb, std::size_t slots) {
  VflShape s{fa, fb, 1 + fa + fb, {}};
  s.layout = federated_layout(s.f1, slots);
  return s;
}

// A's plaintext share: bias, its own features, and any correction at B's rows.
std::vector<double> pack_a_chunk(const VflShape& s, const Matrix& X, const Matrix* corr,
                                 std::span<const std::size_t> rows, std::size_t c) {
  return pack_chunk(s.layout, rows, c, [&](Matrix& m, std::size_t k, std::size_t i) {
    m(0, k) = 1.0;
    for (std::size_t j = 0; j < s.fa; ++j) m(1 + j, k) = X(i, j);
    if (corr)
      for (std::size_t j = 0; j < s.fb; ++j) m(1 + s.fa + j, k) = (*corr)(i, j);
  });
}

std::vector<ckks::Ciphertext> encrypt_b_rows(const VflShape& s, const Matrix& X, std::span<const std::size_t> rows,
                                             ckks::Encryptor& enc) {
  std::vector<ckks::Ciphertext> cts;
  for (std::size_t c = 0; c < chunk_count(rows.size(), s.layout); ++c) {
    cts.push_back(enc.encrypt(pack_chunk(s.layout, rows, c, [&](Matrix& m, std::size_t k, std::size_t i) {
      for (std::size_t j = 0; j < s.fb; ++j) m(1 + s.fa + j, k) = X(i, j);
    })));
  }
  return cts;
}

std::shared_ptr<const ckks::EvaluationKeys> vfl_keys(const ckks::Context& ctx, const ckks::KeySet& keys) {
  auto steps = pow2_steps(ctx.slots());
  return std::make_shared<const ckks::EvaluationKeys>(ckks::restrict_keys(*keys.eval, steps, true));
}

}  // namespace

Task<> vfl_active(PartyContext& net, const VflActiveInput& in) {
  in.config.validate();
  const auto& ctx = *in.ctx;
  const Matrix& X = *in.X;
  const std::size_t n = X.rows;
  check_labels(in.y, n);
  if (in.b_correction)
    require(in.b_correction->rows == n && in.b_correction->cols == in.b_features, ErrorCode::invalid_argument,
            "correction shape");
  const auto s = vfl_shape(X.cols, in.b_features, ctx.slots());
  const PartyId B = PartyId::passive(1);
  auto setup = co_await net.recv(B, tags::LR_PUBLIC_KEY);
  packed::CkksBackend b(in.ctx, decode_setup(ctx, setup, s.f1));
  ckks::Encryptor enc(in.ctx, b.evaluator().keys()->public_key, net.rng().next_u64());
  const int p = b.p();

  for (int t = 0; t < in.config.iterations; ++t) {
    const auto rows = draw_batch(n, in.config.batch_size, in.config.seed, 0, t);
    auto digest = co_await net.recv(B, tags::LR_BATCH_DIGEST);
    const auto mine = batch_digest(rows);
    require(digest.size() == mine.size() && std::equal(mine.begin(), mine.end(), digest.begin()), ErrorCode::protocol,
            "batch sequences diverged between parties");
    auto model = co_await net.recv(B, tags::LR_MODEL);
    const auto theta = ckks::deserialize_ciphertext(ctx, model);
    auto feats = co_await net.recv(B, tags::LR_FEATURES);
    const auto xb = ckks::deserialize_ciphertexts(ctx, feats);
    require(xb.size() == chunk_count(rows.size(), s.layout), ErrorCode::protocol, "feature chunk count");
    const double inv = 1.0 / static_cast<double>(rows.size());

    std::optional<ckks::Ciphertext> acc;
    for (std::size_t c = 0; c < xb.size(); ++c) {
      auto x = b.add(enc.encrypt(pack_a_chunk(s, X, in.b_correction, rows, c)), xb[c]);
      auto ct1 = b.rescale(b.mult(x, theta), p);
      auto ct2 = packed::col_sum_rotate(b, ct1, s.layout);
      auto xq = b.rescale(b.cmult_const(x, 0.25 * inv, p), p);
      auto quad = b.rescale(b.mult(ct2, xq), p);
      auto yv = pack_chunk(s.layout, rows, c, [&](Matrix& m, std::size_t k, std::size_t i) {
        for (std::size_t j = 0; j < s.f1; ++j) m(j, k) = -0.5 * inv * in.y[i];
      });
      auto lin = b.drop_to_level(b.rescale(b.cmult_vec(x, yv, p), p), quad.level);
      auto part = b.add(quad, lin);
      acc = acc ? b.add(*acc, part) : part;
    }
    auto ct5 = packed::row_sum_rotate(b, *acc, s.layout);
    auto ct6 = packed::mask_first_column(b, ct5, s.layout);
    net.send(B, tags::LR_GRADIENT, ckks::serialize(ctx, ct6));
  }
}

Task<> vfl_passive(PartyContext& net, const VflPassiveInput& in, FedLrResult& out) {
  in.config.validate();
  const auto& ctx = *in.ctx;
  const Matrix& X = *in.X;
  const auto s = vfl_shape(in.a_features, X.cols, ctx.slots());
  const PartyId A = PartyId::active();
  net.send(A, tags::LR_PUBLIC_KEY, encode_setup(ctx, s.f1, *vfl_keys(ctx, *in.keys)));
  ckks::Encryptor enc(in.ctx, in.keys->public_key(), net.rng().next_u64());
  ckks::Decryptor dec(in.ctx, in.keys->secret_key);
  std::vector<double> theta(s.f1, 0.0);
  out.history.clear();
  for (int t = 0; t < in.config.iterations; ++t) {
    const auto rows = draw_batch(X.rows, in.config.batch_size, in.config.seed, 0, t);
    const auto d = batch_digest(rows);
    net.send(A, tags::LR_BATCH_DIGEST, Bytes(d.begin(), d.end()));
    net.send(A, tags::LR_MODEL, ckks::serialize(ctx, enc.encrypt(pack_beta_columns(theta, s.layout))));
    net.send(A, tags::LR_FEATURES, ckks::serialize(ctx, encrypt_b_rows(s, X, rows, enc)));
    auto payload = co_await net.recv(A, tags::LR_GRADIENT);
    auto g = read_gradient(dec, ckks::deserialize_ciphertext(ctx, payload), s.layout);
    const double a = in.config.alpha(t);
    for (std::size_t j = 0; j < s.f1; ++j) theta[j] -= a * g[j];
    out.history.push_back(theta);
  }
  out.theta = theta;
}

FedLrResult vfl_train(const Matrix& XA, std::span<const int> y_pm, const Matrix& XB, const LrConfig& config,
                      const ckks::ContextPtr& ctx, const ckks::KeySet& keys, std::uint64_t seed,
                      const Matrix* b_correction) {
  require(XA.rows == XB.rows, ErrorCode::invalid_argument, "parties are not sample aligned");
  FedLrResult out;
  VflActiveInput ain{ctx, &XA, y_pm, XB.cols, b_correction, config};
  VflPassiveInput pin{ctx, &keys, &XB, XA.cols, config};
  simnet::Network net(seed);
  net.add_party(PartyId::active(), [&](PartyContext& p) { return vfl_active(p, ain); });
  net.add_party(PartyId::passive(1), [&](PartyContext& p) { return vfl_passive(p, pin, out); });
  out.transcript = net.run();
  return out;
}

std::vector<std::vector<double>> vfl_shadow(const Matrix& XA, std::span<const int> y_pm, const Matrix& XB,
                                            const LrConfig& config, const Matrix* b_correction) {
  require(XA.rows == XB.rows, ErrorCode::invalid_argument, "parties are not sample aligned");
  Matrix Xb(XA.rows, 1 + XA.cols + XB.cols);
  for (std::size_t i = 0; i < XA.rows; ++i) {
    Xb(i, 0) = 1.0;
    for (std::size_t j = 0; j < XA.cols; ++j) Xb(i, 1 + j) = XA(i, j);
    for (std::size_t j = 0; j < XB.cols; ++j)
      Xb(i, 1 + XA.cols + j) = XB(i, j) + (b_correction ? (*b_correction)(i, j) : 0.0);
  }
  std::vector<double> theta(Xb.cols, 0.0);
  std::vector<std::vector<double>> history;
  for (int t = 0; t < config.iterations; ++t) {
    auto rows = draw_batch(Xb.rows, config.batch_size, config.seed, 0, t);
    auto g = surrogate_gradient(Xb, y_pm, theta, rows);
    for (std::size_t j = 0; j < theta.size(); ++j) theta[j] -= config.alpha(t) * g[j];
    history.push_back(theta);
  }
  return history;
}

Task<> vfl_eval_active(PartyContext& net, const VflActiveInput& in, double& accuracy_out) {
  const auto& ctx = *in.ctx;
  const Matrix& X = *in.X;
  const std::size_t n = X.rows;
  require(n > 0, ErrorCode::empty_input, "empty test set");
  check_labels(in.y, n);
  const auto s = vfl_shape(X.cols, in.b_features, ctx.slots());
  const PartyId B = PartyId::passive(1);
  auto setup = co_await net.recv(B, tags::LR_PUBLIC_KEY);
  packed::CkksBackend b(in.ctx, decode_setup(ctx, setup, s.f1));
  ckks::Encryptor enc(in.ctx, b.evaluator().keys()->public_key, net.rng().next_u64());
  const int p = b.p();
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});

  auto model = co_await net.recv(B, tags::LR_MODEL);
  const auto theta = ckks::deserialize_ciphertext(ctx, model);
  auto feats = co_await net.recv(B, tags::LR_FEATURES);
  const auto xb = ckks::deserialize_ciphertexts(ctx, feats);
  require(xb.size() == chunk_count(n, s.layout), ErrorCode::protocol, "feature chunk count");

  std::vector<ckks::Ciphertext> masked;
  for (std::size_t c = 0; c < xb.size(); ++c) {
    auto x = b.add(enc.encrypt(pack_a_chunk(s, X, nullptr, rows, c)), xb[c]);
    auto wx = packed::col_sum_rotate(b, b.rescale(b.mult(x, theta), p), s.layout);
    auto mask = pack_chunk(s.layout, rows, c, [&](Matrix& m, std::size_t k, std::size_t i) {
      double r = 0;
      while (r <= 0.0) r = net.rng().uniform_open01();
      m(0, k) = 0.25 * in.y[i] * r;
    });
    masked.push_back(b.rescale(b.cmult_vec(wx, mask, p), p));
  }
  net.send(B, tags::LR_EVAL, ckks::serialize(ctx, masked));
  auto acc = co_await net.recv(B, tags::LR_ACCURACY);
  ByteReader r(acc);
  accuracy_out = r.f64();
}

Task<> vfl_eval_passive(PartyContext& net, const VflPassiveInput& in, std::span<const double> theta,
                        VflEvalResult& out) {
  const auto& ctx = *in.ctx;
  const Matrix& X = *in.X;
  const std::size_t n = X.rows;
  const auto s = vfl_shape(in.a_features, X.cols, ctx.slots());
  require(theta.size() == s.f1, ErrorCode::invalid_argument, "theta/feature mismatch");
  const PartyId A = PartyId::active();
  net.send(A, tags::LR_PUBLIC_KEY, encode_setup(ctx, s.f1, *vfl_keys(ctx, *in.keys)));
  ckks::Encryptor enc(in.ctx, in.keys->public_key(), net.rng().next_u64());
  ckks::Decryptor dec(in.ctx, in.keys->secret_key);
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  net.send(A, tags::LR_MODEL, ckks::serialize(ctx, enc.encrypt(pack_beta_columns(theta, s.layout))));
  net.send(A, tags::LR_FEATURES, ckks::serialize(ctx, encrypt_b_rows(s, X, rows, enc)));

  auto payload = co_await net.recv(A, tags::LR_EVAL);
  const auto cts = ckks::deserialize_ciphertexts(ctx, payload);
  require(cts.size() == chunk_count(n, s.layout), ErrorCode::protocol, "evaluation chunk count");
  std::size_t correct = 0;
  for (std::size_t c = 0; c < cts.size(); ++c) {
    const auto v = dec.decrypt_values(cts[c]);
    const std::size_t valid = std::min(s.layout.cols, n - c * s.layout.cols);
    for (std::size_t k = 0; k < valid; ++k)
      if (v[k] > kTieEpsilon) ++correct;
  }
  out.correct = correct;
  out.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  ByteWriter w;
  w.f64(out.accuracy);
  net.send(A, tags::LR_ACCURACY, w.take());
}

VflEvalResult vfl_evaluate(const Matrix& XA, std::span<const int> y_pm, const Matrix& XB,
                           std::span<const double> theta, const ckks::ContextPtr& ctx, const ckks::KeySet& keys,
                           std::uint64_t seed) {
  require(XA.rows == XB.rows, ErrorCode::invalid_argument, "parties are not sample aligned");
  VflEvalResult out;
  double reported = 0;
  VflActiveInput ain{ctx, &XA, y_pm, XB.cols, nullptr, {}};
  VflPassiveInput pin{ctx, &keys, &XB, XA.cols, {}};
  simnet::Network net(seed);
  net.add_party(PartyId::active(), [&](PartyContext& p) { return vfl_eval_active(p, ain, reported); });
  net.add_party(PartyId::passive(1), [&](PartyContext& p) { return vfl_eval_passive(p, pin, theta, out); });
  out.transcript = net.run();
  require(reported == out.accuracy, ErrorCode::protocol, "parties disagree on accuracy");
  return out;
}

std::size_t masked_correct_count(std::span<const double> wx, std::span<const int> y_pm, std::span<const double> r,
                                 double eps) {
  require(wx.size() == y_pm.size() && wx.size() == r.size(), ErrorCode::invalid_argument, "length mismatch");
  std::size_t c = 0;
  for (std::size_t i = 0; i < wx.size(); ++i)
    if (r[i] * 0.25 * wx[i] * y_pm[i] > eps) ++c;
  return c;
}

}  // namespace fedfhe::logreg
