// SPDX-License-Identifier: Apache-2.0
//
// Desk-scale instances for subproblem tests, normalized the way the optimizer
// normalizes them (noise power 1, power budget 1).

#pragma once

#include <cmath>
#include <numbers>

#include "starsec/channel.hpp"
#include "starsec/config.hpp"
#include "starsec/rates.hpp"
#include "starsec/subproblem.hpp"

namespace desk {

inline starsec::SystemConfig config(int K, int N, double dbm, std::uint64_t seed) {
  starsec::SystemConfig cfg;
  cfg.K = K;
  cfg.N = N;
  cfg.pmax_w = starsec::dbm_to_watts(dbm);
  cfg.seed = seed;
  return cfg;
}

inline starsec::EffectiveChannels normalized(const starsec::ChannelRealization& ch,
                                             const starsec::SystemConfig& cfg) {
  starsec::EffectiveChannels e = starsec::build_effective_channels(ch);
  const double g = std::sqrt(cfg.pmax() / cfg.sigma2);
  e.H1 *= g;
  e.H2 *= g;
  e.He *= g;
  return e;
}

inline starsec::SubproblemParams params(const starsec::SystemConfig& cfg) {
  starsec::SubproblemParams p;
  p.pmax = 1.0;
  p.sigma2 = 1.0;
  p.tau = cfg.tau;
  p.algo = cfg.algo;
  return p;
}

/// Binary state: element k reflects when k is even, transmits otherwise,
/// with phases drawn from `rng`.
inline starsec::StarRisState alternating_state(int K, starsec::Rng& rng) {
  starsec::StarRisState s = starsec::StarRisState::zeros(K);
  for (int k = 0; k < K; ++k) {
    const starsec::Mode m = k % 2 == 0 ? starsec::Mode::reflect : starsec::Mode::transmit;
    s.beta(m)[k] = 1.0;
    s.phi(m)[k] = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
  }
  return s;
}

}  // namespace desk
