#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "fedfhe/ckks/ckks.hpp"
#include "fedfhe/common/prng.hpp"
#include "fedfhe/logreg/logreg.hpp"
#include "fedfhe/psi/psi.hpp"
#include "fedfhe/secureboost/secureboost.hpp"

using namespace fedfhe;

namespace {

struct Keys {
  ckks::ContextPtr ctx;
  ckks::KeySet keys;
};

const Keys& keys() {
  static const Keys k = [] {
    Keys x;
    x.ctx = ckks::Context::create(ckks::FheParams::desk());
    x.keys = ckks::keygen(x.ctx, 11);
    return x;
  }();
  return k;
}

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Prng prng(seed);
  Matrix m(r, c);
  for (auto& v : m.data) v = prng.uniform_real(-1, 1);
  return m;
}

// args: rows, features, procedure (0 baseline, 1 improved)
void BM_GradStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0)), f = static_cast<std::size_t>(state.range(1));
  const auto proc = state.range(2) ? logreg::Procedure::improved : logreg::Procedure::baseline;
  const auto X = random_matrix(n, f, 21);
  Prng prng(22);
  std::vector<int> y(n);
  for (auto& v : y) v = prng.uniform(2) ? 1 : -1;
  logreg::EncryptedStepper st(keys().ctx, keys().keys, logreg::encode_samples(X, y), proc, 23);
  const auto g = logreg::fit_sigmoid_poly(3);
  const auto beta = st.encrypt_beta(std::vector<double>(f + 1, 0.05));
  for (auto _ : state) benchmark::DoNotOptimize(st.step_encrypted(beta, g, 0.1));
  state.SetLabel(logreg::to_string(proc));
}
BENCHMARK(BM_GradStep)
    ->Args({256, 15, 0})
    ->Args({256, 15, 1})
    ->Args({1024, 31, 0})
    ->Args({1024, 31, 1})
    ->Unit(benchmark::kMillisecond);

// args: samples, features
void BM_HistogramAggregate(benchmark::State& state) {
  using namespace secureboost;
  const auto n = static_cast<std::size_t>(state.range(0)), f = static_cast<std::size_t>(state.range(1));
  const auto& k = keys();
  const auto X = random_matrix(n, f, 31);
  const auto index = make_buckets(X, 0.125);
  Prng prng(32);
  std::vector<GhPair> gh(n);
  for (auto& p : gh) p = {prng.uniform_real(-1, 1), prng.uniform_real(0, 0.25)};
  const auto packing = plan_gh_packing(n, k.ctx->slots(), index.total_buckets());
  ckks::Encryptor enc(k.ctx, k.keys.public_key(), 33);
  std::vector<ckks::Ciphertext> cts;
  for (const auto& s : pack_gh_blocks(gh, packing)) cts.push_back(enc.encrypt(s, 40, packing.level));
  EncryptedAggregator agg(k.ctx, k.keys.eval, index, packing);
  std::vector<std::uint32_t> inst;
  for (std::uint32_t s = 0; s < n; s += 2) inst.push_back(s);
  for (auto _ : state) benchmark::DoNotOptimize(agg.aggregate(cts, inst));
}
BENCHMARK(BM_HistogramAggregate)->Args({455, 15})->Args({2000, 8})->Unit(benchmark::kMillisecond);

void BM_PsiRun(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  psi::PsiSet a, b;
  a.role = psi::PsiRole::receiver;
  b.role = psi::PsiRole::sender;
  for (std::size_t i = 0; i < n; ++i) {
    a.elements.push_back("id" + std::to_string(i));
    b.elements.push_back("id" + std::to_string(i + n / 2));
  }
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(psi::psi_run(a, b, ++seed));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 2 * n));
}
BENCHMARK(BM_PsiRun)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
