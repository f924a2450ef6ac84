// SPDX-License-Identifier: Apache-2.0
//
// Monte-Carlo sweeps over transmit power and element count, mode histograms
// and convergence traces, written as whitespace-separated tables with a
// header row `x1 y1 y2 ...`.
//
// Trial t of a run with seed base b uses seed b + t both for the channel draw
// and for the optimizer, so every scheme at the same (axis value, trial)
// sees the same realization.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "starsec/config.hpp"
#include "starsec/optimizer.hpp"

namespace starsec {

enum class Scheme { star_jam, star, conv_ris, conv_ris_jam, no_ris };

const char* scheme_name(Scheme s);
/// Throws ValidationError for an unknown name.
Scheme parse_scheme(const std::string& name);
std::vector<Scheme> all_schemes();

/// Mode mask and service options of a scheme for K elements. Conventional
/// RIS: the first ceil(K/2) elements reflect only, the rest transmit only.
OptimizeOptions scheme_options(Scheme s, int K);

struct SweepResult {
  std::string axis;            ///< "power_dbm" or "K"
  std::vector<double> x;       ///< axis values
  std::vector<Scheme> schemes;
  /// [scheme][axis] mean sum-rate over feasible trials (NaN if none).
  std::vector<std::vector<double>> mean;
  /// [scheme][axis] standard error of the mean (0 for fewer than 2 trials).
  std::vector<std::vector<double>> se;
  /// [scheme][axis] trials excluded as infeasible.
  std::vector<std::vector<int>> infeasible;
  /// [scheme][axis][trial] sum-rate, NaN for an infeasible trial.
  std::vector<std::vector<std::vector<double>>> trial_rates;
  int trials = 0;
  std::uint64_t seed_base = 0;
};

/// Runs every (power, scheme, trial) at cfg.K. Throws ValidationError when
/// trials < 1.
SweepResult run_power_sweep(const SystemConfig& cfg, const std::vector<double>& powers_dbm,
                            const std::vector<Scheme>& schemes, int trials);

/// star-jam over element counts at the configured power.
SweepResult run_k_sweep(const SystemConfig& cfg, const std::vector<int>& k_values, int trials);

struct ModeHistogram {
  std::vector<double> powers_dbm;
  std::vector<double> reflect, transmit, jam;  ///< mean element counts
  std::vector<int> converged;                  ///< trials contributing
  int trials = 0;
  std::uint64_t seed_base = 0;
};

/// Mean (reflect, transmit, jam) counts over converged star-jam trials.
ModeHistogram mode_histogram(const SystemConfig& cfg, const std::vector<double>& powers_dbm,
                             int trials);

struct ConvergenceTrace {
  std::vector<double> active;   ///< rate bound per active iteration, in order
  std::vector<double> passive;  ///< rate bound per passive iteration, in order
  std::vector<double> overall;  ///< physical sum-rate per outer iteration
  RecordStatus status = RecordStatus::iteration_cap;
};

/// One star-jam run at the given power and seed.
ConvergenceTrace convergence_trace(const SystemConfig& cfg, double power_dbm, std::uint64_t seed);

/// Column-major numeric table; every column has the same length.
struct Table {
  std::vector<std::vector<double>> columns;  ///< x1, y1, y2, ...

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

/// x1 = axis, y_s = mean of scheme s.
Table sweep_table(const SweepResult& r);
/// Same layout with infeasible counts as the y columns.
Table infeasible_table(const SweepResult& r);
/// Same layout with standard errors as the y columns.
Table se_table(const SweepResult& r);
/// x1 = power, y1..y3 = reflect, transmit, jam.
Table histogram_table(const ModeHistogram& h);
/// x1 = iteration, y1..y3 = active, passive, overall. Shorter columns repeat
/// their final value.
Table convergence_table(const ConvergenceTrace& t);

/// Header `x1 y1 ... y{n-1}`, rows in %.17g separated by single spaces, LF
/// line endings. A table without columns yields the line `x1`.
std::string format_table(const Table& t);
Table parse_table(const std::string& text);
/// Throws IoError naming the path on failure.
void emit_table(const Table& t, const std::filesystem::path& path);
Table read_table(const std::filesystem::path& path);

/// Writes `<stem>.txt`, `<stem>.se.txt` and `<stem>.infeasible.txt`.
void emit_sweep(const SweepResult& r, const std::filesystem::path& stem);

/// JSON manifest: command, subcommand arguments, trial count, seed base and
/// seeds, config snapshot and library version. Contains nothing time- or
/// host-dependent.
std::string run_manifest(const std::string& command, const SystemConfig& cfg, int trials,
                         const std::vector<std::string>& outputs,
                         const std::vector<std::pair<std::string, std::string>>& arguments = {});

}  // namespace starsec
