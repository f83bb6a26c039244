#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedfhe/ckks/ckks.hpp"
#include "fedfhe/common/matrix.hpp"
#include "fedfhe/logreg/gradient.hpp"
#include "fedfhe/simnet/network.hpp"

namespace fedfhe::logreg {

// Masked evaluation values at or below this count as ties (incorrect).
inline constexpr double kTieEpsilon = 0x1.0p-20;

// F = next_pow2(f1) feature rows by slots/F sample columns, shared by every
// party so an encrypted model fits every participant's data chunks.
MatrixLayout federated_layout(std::size_t f1, std::size_t slots);

// Rows used in round `round`. Every row when batch is 0 or covers n; otherwise
// a seeded sample without replacement, sorted.
std::vector<std::size_t> draw_batch(std::size_t n, std::size_t batch, std::uint64_t seed, std::uint64_t stream,
                                    int round);
Digest batch_digest(std::span<const std::size_t> rows);

// (1/n) sum_i (1/4 theta . x_i - 1/2 y_i) x_i over `rows` of Xb (bias included), y in {-1, +1}.
std::vector<double> surrogate_gradient(const Matrix& Xb, std::span<const int> y, std::span<const double> theta,
                                       std::span<const std::size_t> rows);

// Exact-sigmoid scoring; a prediction of exactly 1/2 counts as wrong.
double accuracy(const Matrix& X, std::span<const int> y_pm, std::span<const double> theta);

// Full-batch plaintext gradient descent on the exact logistic loss.
std::vector<double> train_plain_lr(const Matrix& X, std::span<const int> y_pm, const LrConfig& config);

struct ClientShard {
  Matrix X;
  std::vector<int> y;  // -1 / +1
};

struct FedLrResult {
  std::vector<double> theta;
  std::vector<std::vector<double>> history;  // theta after each round
  simnet::Transcript transcript;
};

struct HflServerInput {
  ckks::ContextPtr ctx;
  const ckks::KeySet* keys = nullptr;
  std::size_t features = 0;
  std::size_t clients = 0;
  LrConfig config;
};

struct HflClientInput {
  ckks::ContextPtr ctx;
  const ClientShard* shard = nullptr;
  LrConfig config;
  std::uint64_t stream = 0;  // batch stream, one per client
};

simnet::Task<> hfl_server(simnet::PartyContext& net, const HflServerInput& in, FedLrResult& out);
simnet::Task<> hfl_client(simnet::PartyContext& net, const HflClientInput& in);

// Server is the active party; client k is passive k+1 and draws batches on stream k.
FedLrResult hfl_train(const std::vector<ClientShard>& clients, const LrConfig& config, const ckks::ContextPtr& ctx,
                      const ckks::KeySet& keys, std::uint64_t seed);
// Same rounds and batches in plaintext.
std::vector<std::vector<double>> hfl_shadow(const std::vector<ClientShard>& clients, const LrConfig& config);
// Server-side plaintext scoring of the trained model.
double hfl_evaluate(std::span<const double> theta, const ClientShard& test);

// Vertical split: columns are [bias | A features | B features].
struct VflActiveInput {
  ckks::ContextPtr ctx;
  const Matrix* X = nullptr;
  std::span<const int> y;
  std::size_t b_features = 0;
  // Values A adds at B's columns row by row, e.g. -R_B for SMOTE rows; may be null.
  const Matrix* b_correction = nullptr;
  LrConfig config;
};

struct VflPassiveInput {
  ckks::ContextPtr ctx;
  const ckks::KeySet* keys = nullptr;
  const Matrix* X = nullptr;
  std::size_t a_features = 0;
  LrConfig config;
};

simnet::Task<> vfl_active(simnet::PartyContext& net, const VflActiveInput& in);
simnet::Task<> vfl_passive(simnet::PartyContext& net, const VflPassiveInput& in, FedLrResult& out);

// A (labels) is the active party, B (keys, model) is passive 1.
FedLrResult vfl_train(const Matrix& XA, std::span<const int> y_pm, const Matrix& XB, const LrConfig& config,
                      const ckks::ContextPtr& ctx, const ckks::KeySet& keys, std::uint64_t seed,
                      const Matrix* b_correction = nullptr);
std::vector<std::vector<double>> vfl_shadow(const Matrix& XA, std::span<const int> y_pm, const Matrix& XB,
                                            const LrConfig& config, const Matrix* b_correction = nullptr);

struct VflEvalResult {
  double accuracy = 0.0;  // as reported to A
  std::size_t correct = 0;
  simnet::Transcript transcript;
};

simnet::Task<> vfl_eval_active(simnet::PartyContext& net, const VflActiveInput& in, double& accuracy_out);
simnet::Task<> vfl_eval_passive(simnet::PartyContext& net, const VflPassiveInput& in, std::span<const double> theta,
                                VflEvalResult& out);

// First-order Taylor evaluation: A forms 1/4 (w.x_i) y_i R_i under encryption,
// B counts positive entries.
VflEvalResult vfl_evaluate(const Matrix& XA, std::span<const int> y_pm, const Matrix& XB,
                           std::span<const double> theta, const ckks::ContextPtr& ctx, const ckks::KeySet& keys,
                           std::uint64_t seed);

// Count of r_i * w_i * y_i / 4 > eps; the plaintext model of what B sees.
std::size_t masked_correct_count(std::span<const double> wx, std::span<const int> y_pm, std::span<const double> r,
                                 double eps = kTieEpsilon);

}  // namespace fedfhe::logreg
