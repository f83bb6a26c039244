#include <benchmark/benchmark.h>

#include <vector>

#include "fedfhe/ckks/ckks.hpp"
#include "fedfhe/common/prng.hpp"

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
    x.keys = ckks::keygen(x.ctx, 7);
    return x;
  }();
  return k;
}

std::vector<double> values(std::size_t n, std::uint64_t seed) {
  Prng prng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = prng.uniform_real(-1, 1);
  return v;
}

void BM_NttForward(benchmark::State& state) {
  const auto& ntt = keys().ctx->ntt(0);
  Prng prng(1);
  std::vector<ckks::u64> a(ntt.size());
  for (auto& x : a) x = prng.uniform(ntt.modulus().value);
  for (auto _ : state) {
    ntt.forward(a.data());
    benchmark::DoNotOptimize(a.data());
  }
}
BENCHMARK(BM_NttForward);

void BM_NttInverse(benchmark::State& state) {
  const auto& ntt = keys().ctx->ntt(0);
  Prng prng(2);
  std::vector<ckks::u64> a(ntt.size());
  for (auto& x : a) x = prng.uniform(ntt.modulus().value);
  for (auto _ : state) {
    ntt.inverse(a.data());
    benchmark::DoNotOptimize(a.data());
  }
}
BENCHMARK(BM_NttInverse);

void BM_Encrypt(benchmark::State& state) {
  const auto& k = keys();
  ckks::Encryptor enc(k.ctx, k.keys.public_key(), 3);
  const auto v = values(k.ctx->slots(), 3);
  for (auto _ : state) benchmark::DoNotOptimize(enc.encrypt(v));
}
BENCHMARK(BM_Encrypt)->Unit(benchmark::kMillisecond);

void BM_Decrypt(benchmark::State& state) {
  const auto& k = keys();
  ckks::Encryptor enc(k.ctx, k.keys.public_key(), 4);
  ckks::Decryptor dec(k.ctx, k.keys.secret_key);
  const auto ct = enc.encrypt(values(k.ctx->slots(), 4));
  for (auto _ : state) benchmark::DoNotOptimize(dec.decrypt_values(ct));
}
BENCHMARK(BM_Decrypt)->Unit(benchmark::kMillisecond);

void BM_MultRelinRescale(benchmark::State& state) {
  const auto& k = keys();
  ckks::Encryptor enc(k.ctx, k.keys.public_key(), 5);
  ckks::Evaluator ev(k.ctx, k.keys.eval);
  const auto a = enc.encrypt(values(k.ctx->slots(), 5));
  const auto b = enc.encrypt(values(k.ctx->slots(), 6));
  for (auto _ : state) benchmark::DoNotOptimize(ev.rescale(ev.mult(a, b), 40));
}
BENCHMARK(BM_MultRelinRescale)->Unit(benchmark::kMillisecond);

void BM_Rotate(benchmark::State& state) {
  const auto& k = keys();
  ckks::Encryptor enc(k.ctx, k.keys.public_key(), 7);
  ckks::Evaluator ev(k.ctx, k.keys.eval);
  const auto a = enc.encrypt(values(k.ctx->slots(), 7));
  const int step = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ev.rotate(a, step));
}
BENCHMARK(BM_Rotate)->Arg(1)->Arg(64)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
