// SPDX-License-Identifier: Apache-2.0
//
// Microbenchmarks of the rate model, channel generation and the two convex
// subproblems at desk scale.

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "starsec/active.hpp"
#include "starsec/channel.hpp"
#include "starsec/optimizer.hpp"
#include "starsec/passive.hpp"

using namespace starsec;

namespace {

SystemConfig desk(int K) {
  SystemConfig cfg;
  cfg.K = K;
  cfg.N = 2;
  cfg.pmax_w = dbm_to_watts(20.0);
  return cfg;
}

StarRisState random_state(int K, Rng& rng) {
  StarRisState s = StarRisState::zeros(K);
  for (int k = 0; k < K; ++k) {
    const Mode m = static_cast<Mode>(k % 3);
    s.beta(m)[k] = 1.0;
    s.phi(m)[k] = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
  }
  return s;
}

EffectiveChannels normalized(const ChannelRealization& ch, const SystemConfig& cfg) {
  EffectiveChannels e = build_effective_channels(ch);
  const double g = std::sqrt(cfg.pmax() / cfg.sigma2);
  e.H1 *= g;
  e.H2 *= g;
  e.He *= g;
  return e;
}

SubproblemParams params(const SystemConfig& cfg) {
  SubproblemParams p;
  p.tau = cfg.tau;
  p.algo = cfg.algo;
  return p;
}

void BM_GenerateChannels(benchmark::State& st) {
  const SystemConfig cfg = desk(static_cast<int>(st.range(0)));
  std::uint64_t seed = 1;
  for (auto _ : st) benchmark::DoNotOptimize(generate_channels(cfg, seed++));
}
BENCHMARK(BM_GenerateChannels)->Arg(8)->Arg(30);

void BM_ComputeRates(benchmark::State& st) {
  const int K = static_cast<int>(st.range(0));
  const SystemConfig cfg = desk(K);
  const ChannelRealization ch = generate_channels(cfg, 1);
  Rng rng(1);
  const StarRisState state = random_state(K, rng);
  const BeamformerSolution beams =
      BeamformerSolution::from_vectors(CVector::Constant(2, 0.005), CVector::Constant(2, 0.005));
  for (auto _ : st) benchmark::DoNotOptimize(compute_rates(ch, beams, state, cfg.sigma2, cfg.tau));
}
BENCHMARK(BM_ComputeRates)->Arg(8)->Arg(30);

void BM_SolveP2(benchmark::State& st) {
  const int K = static_cast<int>(st.range(0));
  const SystemConfig cfg = desk(K);
  const EffectiveChannels ech = normalized(generate_channels(cfg, 2), cfg);
  Rng rng(2);
  const PassiveLifted lifted = PassiveLifted::from_state(random_state(K, rng));
  const SubproblemParams p = params(cfg);
  const CMatrix W2 = CMatrix::Identity(2, 2) / 4.0;
  const Linearization lin = linearize(evaluate_lifted(ech, 1e-6 * W2, W2, lifted, 1.0));
  for (auto _ : st) benchmark::DoNotOptimize(solve_p2(ech, lifted, p, lin));
}
BENCHMARK(BM_SolveP2)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_SolveP3(benchmark::State& st) {
  const int K = static_cast<int>(st.range(0));
  const SystemConfig cfg = desk(K);
  const EffectiveChannels ech = normalized(generate_channels(cfg, 3), cfg);
  Rng rng(3);
  const PassiveLifted lifted = PassiveLifted::from_state(random_state(K, rng));
  const SubproblemParams p = params(cfg);
  BeamformerSolution beams;
  beams.W2 = CMatrix::Identity(2, 2) / 4.0;
  beams.W1 = 1e-6 * beams.W2;
  const Linearization lin = linearize(evaluate_lifted(ech, beams.W1, beams.W2, lifted, 1.0));
  const PenaltyState pen{1e-4, 1e-4, lifted};
  for (auto _ : st) {
    benchmark::DoNotOptimize(solve_p3(ech, beams, pen, p, lin, ModeMask::all(K)));
  }
}
BENCHMARK(BM_SolveP3)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Optimize(benchmark::State& st) {
  const SystemConfig cfg = desk(static_cast<int>(st.range(0)));
  const ChannelRealization ch = generate_channels(cfg, 4);
  for (auto _ : st) benchmark::DoNotOptimize(optimize(ch, cfg));
}
BENCHMARK(BM_Optimize)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
