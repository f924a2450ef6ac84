// SPDX-License-Identifier: Apache-2.0
//
// Pieces shared by the active and passive subproblems: the lifted STAR-RIS
// state, per-element mode masks, and the linearization point of the convex
// restrictions (AGM multipliers and the SIC center).
//
// Both subproblems bound three SINR products r * Gamma <= S, where S is a
// signal term and Gamma an interference-plus-noise term, each linear in the
// optimized matrices:
//   r11: S = Tr(H1 W1 H1^H R),  Gamma = Tr(H1 W2 H1^H R) + jam_1 + sigma^2
//   r22: S = Tr(H2 W2 H2^H T),  Gamma = Tr(H2 W1 H2^H T) + sigma^2
//   r12: S = Tr(H1 W2 H1^H R),  Gamma = Tr(H1 W1 H1^H R) + jam_1 + sigma^2
// with jam_1 = Tr(H1 W1 H1^H J) (+ Tr(H1 W2 H1^H J) under full leakage).
// Each product is restricted by the AGM pattern
//   b >= (mu Gamma)^2,  a >= (r / mu)^2,  2 S >= a + b,
// which is tight at mu = sqrt(r / Gamma).

#pragma once

#include <array>
#include <vector>

#include "starsec/config.hpp"
#include "starsec/conic.hpp"
#include "starsec/rates.hpp"

namespace starsec {

/// Lifted STAR-RIS state. J is stored padded to order K+1 (its last row and
/// column are zero).
struct PassiveLifted {
  CMatrix R;  ///< (K+1) x (K+1)
  CMatrix T;  ///< K x K
  CMatrix J;  ///< (K+1) x (K+1)
  RVector beta_r, beta_t, beta_j;

  int K() const { return static_cast<int>(T.rows()); }
  const RVector& beta(Mode m) const;

  /// Rank-one lifts of a (possibly relaxed) state: v = conj([sqrt(beta) .* phi; t])
  /// with t = 1 for R, no trailing entry for T and t = 0 for J.
  static PassiveLifted from_state(const StarRisState& state);
  /// 3 x K matrix with rows beta_r, beta_t, beta_j.
  RMatrix beta_matrix() const;
};

/// Which modes each element may use.
struct ModeMask {
  std::vector<std::array<bool, 3>> allowed;

  static ModeMask all(int K);
  /// One allowed mode per element, taken from a binary 3 x K matrix.
  static ModeMask from_binary(const RMatrix& modes);
  int K() const { return static_cast<int>(allowed.size()); }
  bool allows(int k, Mode m) const { return allowed[k][static_cast<int>(m)]; }
  int count(int k) const;
  bool any(Mode m) const;
};

/// Linearization point of the convex restrictions.
struct Linearization {
  double mu11 = 1.0;
  double mu22 = 1.0;
  double mu12 = 1.0;
  double sic_center = 1.0;  ///< r12 * Gamma22 at the point, where sqrt(S22) is linearized
  /// Row scales of the product bounds: max(S, 1) at the point. They change
  /// the conditioning of the conic problem, not its feasible set.
  double scale11 = 1.0;
  double scale22 = 1.0;
  double scale12 = 1.0;
};

struct SubproblemParams {
  double pmax = 1.0;
  double sigma2 = 1.0;
  double tau = 1.0;
  AlgorithmParams algo;
  bool user2 = true;              ///< false drops r22, r12 and the SIC constraints
  double objective_scale = 1.0;   ///< passive stage objective is s * objective_scale - penalties
};

/// Signal and interference terms at a lifted point (see file comment).
struct LiftedTerms {
  double S11 = 0.0, G11 = 0.0;
  double S22 = 0.0, G22 = 0.0;
  double S12 = 0.0, G12 = 0.0;
  double eve_signal = 0.0;
  double eve_interference = 0.0;  ///< includes sigma^2

  double sinr11() const { return S11 / G11; }
  double sinr22() const { return S22 / G22; }
  double sinr12() const { return S12 / G12; }
};

LiftedTerms evaluate_lifted(const EffectiveChannels& ch, const CMatrix& W1, const CMatrix& W2,
                            const PassiveLifted& lifted, double sigma2,
                            bool jamming_full_leakage = false);

/// sqrt(r / Gamma), floored at 1e-8. Throws DomainError for Gamma <= 0.
double update_mu12(double r12, double Gamma);

/// Linearization that is tight at the given point. The r12 slack is taken at
/// min(SINR12, SINR22), the smallest value the rate order admits.
/// MuUpdate::literal divides by the leakage tolerance tau instead of the
/// interference terms.
Linearization linearize(const LiftedTerms& t, MuUpdate form = MuUpdate::agm_tight,
                        double tau = 1.0);

/// Smallest eigenvalue of the Hermitian part of X.
double min_eigenvalue(const CMatrix& X);

/// (||Z||_* - ||Z||_2) / max(||Z||_2, 1e-12) for PSD Z (trace form).
double rank_ratio(const CMatrix& Z);

namespace detail {

/// Linear forms of one subproblem, in the optimized variables.
struct RateForms {
  conic::Expr S11, G11, S22, G22, S12, G12;
  conic::Expr eve_signal, eve_interference;
  bool zero11 = false, zero22 = false, zero12 = false;
};

struct RateVars {
  conic::Scalar s, r11, r22, r12;
};

/// Adds s, r11, r22, r12, their AGM auxiliaries and every rate-side
/// constraint (objective hypograph, AGM restrictions, SIC order and its rate
/// bound, trace order, Eve leakage).
RateVars add_rate_block(conic::Problem& p, const RateForms& f, const SubproblemParams& params,
                        const Linearization& lin);

/// Hermitian part of Q with entries below `floor` in magnitude removed.
CMatrix clean(const CMatrix& Q, double floor);

}  // namespace detail

}  // namespace starsec
