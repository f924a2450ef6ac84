// SPDX-License-Identifier: Apache-2.0
//
// System configuration: geometry, link budget, channel model and algorithm
// parameters. Documents are JSON; every dB/dBm quantity is converted to
// linear units while parsing so the numeric code only sees watts and ratios.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace starsec {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

double distance(const Point2& a, const Point2& b);

/// Node positions in meters. The STAR-RIS lies on the line x = ris.x; the
/// half-plane x < ris.x (the BS side) is the reflection side.
struct Geometry {
  Point2 bs{0.0, 0.0};
  Point2 ris{50.0, 0.0};
  Point2 user1{45.0, 5.0};
  Point2 user2{55.0, 5.0};
  Point2 eve{48.0, 8.0};

  friend bool operator==(const Geometry&, const Geometry&) = default;
};

struct ChannelParams {
  double lambda0 = 1e-3;  ///< path gain at 1 m (linear)
  double alpha_los = 2.0;     ///< BS -> RIS
  double alpha_nlos_r = 2.8;  ///< RIS -> reflection-side nodes
  double alpha_nlos_t = 3.0;  ///< RIS -> transmission-side nodes
  double alpha_direct = 3.0;  ///< BS -> User1 / Eve
  double rician_k = 1.0;      ///< linear Rician factor

  friend bool operator==(const ChannelParams&, const ChannelParams&) = default;
};

enum class RankSurrogate {
  difference_of_convex,  ///< Tr(Z) - v^H Z v, linearized at the previous iterate
  as_printed,            ///< Tr(Z) + ||Z_i||_2 + v^H (Z - Z_i) v
};

enum class MuUpdate {
  agm_tight,  ///< sqrt(r / Gamma)
  literal,    ///< sqrt(r / tau)
};

struct AlgorithmParams {
  double epsilon = 0.01;
  double zeta0 = 1e-4;
  double xi0 = 1e-4;
  double omega = 1.5;
  int max_inner = 30;
  int max_outer = 20;
  double solver_tol = 1e-7;

  MuUpdate mu_update = MuUpdate::agm_tight;
  RankSurrogate rank_surrogate = RankSurrogate::difference_of_convex;
  bool subtract_binary_penalty = true;
  bool penalty_per_inner = true;
  bool sic_trace_order = true;
  bool sic_rate_bound = true;
  bool jamming_full_leakage = false;
  bool agm_literal_soc = false;

  int max_polish = 12;
  double rank_tol = 1e-3;
  double xi_polish = 1.0;
  int randomization_samples = 100;

  friend bool operator==(const AlgorithmParams&, const AlgorithmParams&) = default;
};

struct SystemConfig {
  int N = 2;
  int K = 30;
  std::optional<double> pmax_w;  ///< transmit budget in watts; sweeps set it
  double sigma2 = 1e-12;         ///< noise power, watts
  double tau = 1.0;              ///< leakage tolerance, bits/s/Hz
  Geometry geometry;
  ChannelParams channel;
  AlgorithmParams algo;
  std::uint64_t seed = 1;

  /// Power budget; throws ValidationError when no power was configured.
  double pmax() const;

  friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

struct Violation {
  std::string field;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

double dbm_to_watts(double dbm);
double db_to_linear(double db);
double watts_to_dbm(double watts);

struct ParseOptions {
  bool require_power = false;
};

/// Parses a JSON document. `overrides` are `dotted.key=value` strings applied
/// on top of the document before conversion (e.g. `algorithm.omega=2`).
SystemConfig parse_config(std::string_view text,
                          const std::vector<std::string>& overrides = {},
                          ParseOptions options = {});

SystemConfig load_config(const std::filesystem::path& path,
                         const std::vector<std::string>& overrides = {},
                         ParseOptions options = {});

/// Writes every field in linear units; parse(serialize(c)) == c.
std::string serialize_config(const SystemConfig& cfg);

/// All violated invariants, sorted by field name. Empty when valid.
std::vector<Violation> validate(const SystemConfig& cfg);

/// Throws ValidationError listing every violation.
void require_valid(const SystemConfig& cfg);

}  // namespace starsec
