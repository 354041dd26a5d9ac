#include <benchmark/benchmark.h>

#include "xchain/crypto/bn254.hpp"
#include "xchain/crypto/threshold.hpp"

namespace {

using namespace xchain;
using namespace xchain::crypto;

void BM_Pairing(benchmark::State& state) {
  auto p = bn254::hash_to_g1(to_bytes("bench"));
  auto q = bn254::g2_generator();
  for (auto _ : state) benchmark::DoNotOptimize(bn254::pairing(p, q));
}
BENCHMARK(BM_Pairing)->Unit(benchmark::kMillisecond);

void BM_HashToG1(benchmark::State& state) {
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(bn254::hash_to_g1(to_bytes("msg" + std::to_string(i++))));
}
BENCHMARK(BM_HashToG1)->Unit(benchmark::kMicrosecond);

threshold::SchemeKind kind_of(const benchmark::State& state) {
  return state.range(0) == 0 ? threshold::SchemeKind::Bn254 : threshold::SchemeKind::Simulated;
}

void BM_SignShare(benchmark::State& state) {
  auto scheme = threshold::make_scheme(kind_of(state));
  auto keys = scheme->keygen(threshold::ThresholdConfig::from_fault_tolerance(4, 1), 1);
  Bytes msg = to_bytes("sign me");
  for (auto _ : state) benchmark::DoNotOptimize(scheme->sign_share(keys.shares[0], msg));
  state.SetLabel(threshold::scheme_name(kind_of(state)));
}
BENCHMARK(BM_SignShare)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_CombineAndVerify(benchmark::State& state) {
  auto scheme = threshold::make_scheme(kind_of(state));
  auto n = static_cast<std::uint32_t>(state.range(1));
  auto cfg = threshold::ThresholdConfig::from_fault_tolerance(n, (n - 1) / 3);
  auto keys = scheme->keygen(cfg, 2);
  Bytes msg = to_bytes("combine me");
  std::vector<std::pair<std::uint32_t, Bytes>> shares;
  for (std::uint32_t i = 0; i < cfg.m; ++i) shares.emplace_back(keys.shares[i].index, scheme->sign_share(keys.shares[i], msg));
  for (auto _ : state) {
    auto sig = scheme->combine(shares, cfg);
    benchmark::DoNotOptimize(scheme->verify(keys.public_key, msg, *sig));
  }
  state.SetLabel(threshold::scheme_name(kind_of(state)));
}
BENCHMARK(BM_CombineAndVerify)->ArgsProduct({{0, 1}, {4, 7, 13}})->Unit(benchmark::kMicrosecond);

}  // namespace
