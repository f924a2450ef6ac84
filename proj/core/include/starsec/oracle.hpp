// SPDX-License-Identifier: Apache-2.0
//
// Exhaustive reference for tiny instances: every one-hot mode assignment,
// every grid phase per element, and beamformers built from matched-filter
// directions toward the two effective user channels.

#pragma once

#include <cstdint>

#include "starsec/config.hpp"
#include "starsec/rates.hpp"

namespace starsec {

struct GridSpec {
  int phase_grid = 16;        ///< equispaced phases 2 pi m / phase_grid per element
  int power_split_grid = 17;  ///< fractions i / (n - 1) of Pmax and of the direction mix
};

struct OracleResult {
  double sum_rate = 0.0;
  StarRisState state;
  BeamformerSolution beams;
  RateReport report;
  std::int64_t evaluated = 0;  ///< configurations scored
  std::int64_t feasible = 0;   ///< configurations passing every check
};

/// True when (beams, state) satisfies the power budget, the SIC rate order,
/// the leakage bound and, if enabled in cfg, the received-power order
/// |g1 w1|^2 <= |g2 w2|^2.
bool oracle_feasible(const ChannelRealization& ch, const BeamformerSolution& beams,
                     const StarRisState& state, const SystemConfig& cfg, const RateReport& r);

/// Powers p1 = Pmax i/(n-1), p2 = Pmax j/(n-1) with i + j <= n-1. For N = 2
/// each beam direction is normalize((1-a) u1 + a u2), a on the same grid,
/// where u1, u2 are the matched filters of the User1 and User2 cascades.
/// Throws ValidationError unless K <= 3, N <= 2, phase_grid >= 2 and
/// power_split_grid >= 2.
OracleResult brute_force_best(const ChannelRealization& ch, const SystemConfig& cfg,
                              const GridSpec& grid = {});

}  // namespace starsec
