// SPDX-License-Identifier: Apache-2.0
//
// Passive stage: lifted STAR-RIS matrices R, T, J with the covariances fixed.
//
//   maximize  s * scale - zeta * P_bin - xi * P_rank
//   s.t.      the rate-side constraints of the active stage (linear in R, T, J)
//             Diag(R)_k + Diag(T)_k + Diag(J)_k = 1,  R_{K+1,K+1} = 1
//             R, T, J >= 0,  disallowed modes pinned to zero.
//
// beta_z,k is read from Diag(Z)_k. P_bin linearizes sum(beta - beta^2) at the
// previous iterate, and P_rank linearizes the rank gap of each Z at the
// previous iterate (difference-of-convex form Tr(Z) - u1^H Z u1 by default).

#pragma once

#include "starsec/active.hpp"
#include "starsec/conic.hpp"
#include "starsec/subproblem.hpp"

namespace starsec {

struct PenaltyState {
  double zeta = 1e-4;
  double xi = 1e-4;
  PassiveLifted iterate;
};

struct PassiveResult {
  conic::Status status = conic::Status::numerical_limit;
  PassiveLifted lifted;
  double s = 0.0;
  double binary_penalty = 0.0;  ///< linearized P_bin at the solution
  double rank_penalty = 0.0;    ///< linearized P_rank at the solution
  double max_violation = 0.0;
  int iterations = 0;
};

/// Linearized binary penalty sum_z sum_k beta - b0^2 - 2 b0 (beta - b0).
double binary_surrogate(const RMatrix& beta, const RMatrix& beta0);
/// Linearized rank penalty of one matrix under the chosen surrogate.
double rank_surrogate(const CMatrix& Z, const CMatrix& Z0, RankSurrogate form);

/// Throws DimensionError when W1, W2, the iterate or the mask do not match
/// the channels, and DomainError when the iterate is not PSD.
conic::Problem build_p3(const EffectiveChannels& ch, const BeamformerSolution& beams,
                        const PenaltyState& pen, const SubproblemParams& params,
                        const Linearization& lin, const ModeMask& mask);

PassiveResult solve_p3(const EffectiveChannels& ch, const BeamformerSolution& beams,
                       const PenaltyState& pen, const SubproblemParams& params,
                       const Linearization& lin, const ModeMask& mask, double tol = 1e-7);

/// Per column: largest entry -> 1, others -> 0, ties resolved
/// reflect > transmit > jam. Throws DomainError when a column sum differs
/// from 1 by more than 1e-3.
RMatrix one_hot_project(const RMatrix& beta);

/// Dominant eigenvectors of R, T, J mapped to unit-modulus responses on the
/// elements active in `modes` (binary 3 x K); inactive entries are zero.
/// Throws DomainError when a mode with active elements has a dominant
/// eigenvalue <= 1e-10.
StarRisState extract_phases(const CMatrix& R, const CMatrix& T, const CMatrix& J,
                            const RMatrix& modes);

/// zeta, xi scaled by omega; iterate replaced by `current`.
PenaltyState update_penalties(const PenaltyState& pen, double omega, const PassiveLifted& current);

/// Largest min(beta, 1 - beta) over all entries.
double binary_residual(const RMatrix& beta);

}  // namespace starsec
