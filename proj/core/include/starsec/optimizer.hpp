// SPDX-License-Identifier: Apache-2.0
//
// Alternating optimization: active inner loop (covariances), passive inner
// loop (lifted STAR-RIS state with penalty escalation), one-hot projection
// and a polish loop on the binary modes, repeated until the rate bound of the
// passive stage agrees with that of the active stage.
//
// Channels are normalized internally by sqrt(Pmax) / sigma so the noise power
// and the power budget are both 1. After every outer iteration the lifted
// solution is mapped to physical beamformers and unit-modulus responses,
// repaired to satisfy power, SIC and leakage exactly, and evaluated; the
// best feasible physical point seen is reported.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "starsec/active.hpp"
#include "starsec/passive.hpp"
#include "starsec/subproblem.hpp"

namespace starsec {

enum class RecordStatus { converged, iteration_cap, infeasible };
enum class Stage { active, passive, outer };

const char* record_status_name(RecordStatus s);
const char* stage_name(Stage s);

struct TraceRow {
  Stage stage = Stage::outer;
  int outer = 0;   ///< 1-based outer iteration
  int index = 0;   ///< 1-based inner iteration (outer rows repeat the outer index)
  double s = 0.0;
  double rate = 0.0;      ///< log2(s^2)
  double physical = 0.0;  ///< sum-rate of the repaired physical point (outer rows)
};

struct SolutionRecord {
  BeamformerSolution beams;
  StarRisState state;
  PassiveLifted lifted;
  RateReport report;
  std::vector<TraceRow> trace;
  RecordStatus status = RecordStatus::iteration_cap;
  std::string failed_stage;
  int outer_iterations = 0;
  /// Subproblems after the first that failed numerically; the stage kept its
  /// last feasible iterate.
  int numerical_stops = 0;

  /// `starsec-record 1`, `status <status> <failed stage or -> <outer>
  /// <numerical stops>`, `trace <rows>` then rows `stage outer index s rate
  /// physical`, then the RateReport header and row.
  std::string to_text() const;
  /// Outer rows of the trace.
  std::vector<TraceRow> outer_trace() const;
};

struct OptimizeOptions {
  std::optional<ModeMask> mask;  ///< allowed modes per element; default all
  bool user2 = true;             ///< false: User2 unserved, SIC constraints dropped
};

SolutionRecord optimize(const ChannelRealization& ch, const SystemConfig& cfg,
                        const OptimizeOptions& options = {});

/// compute_rates with cfg.sigma2, cfg.tau and cfg.algo.jamming_full_leakage.
RateReport evaluate_solution(const ChannelRealization& ch, const BeamformerSolution& beams,
                             const StarRisState& state, const SystemConfig& cfg);

/// Scales w1 (and, failing that, drops w2) until power, SIC and leakage hold.
/// Returns the repaired report.
RateReport repair_beams(const ChannelRealization& ch, const StarRisState& state,
                        const SystemConfig& cfg, CVector& w1, CVector& w2);

}  // namespace starsec
