// SPDX-License-Identifier: Apache-2.0
//
// Active stage: transmit covariances W1, W2 with the STAR-RIS state fixed.
//
//   maximize s
//   s.t.  s^2 <= (1 + r11)(1 + r22)
//         AGM restrictions of r11, r22, r12 (see subproblem.hpp)
//         r12 >= r22,  Tr(H2 W2 H2^H T) <= r12 * Gamma22 (linearized)
//         Tr(H1 W1 H1^H R) <= Tr(H2 W2 H2^H T)
//         Tr(He W1 He^H R) <= (2^tau - 1)(sigma^2 + Tr(He (W1 + W2) He^H J))
//         Tr(W1) + Tr(W2) <= Pmax,  W1, W2 >= 0.
//
// The implied sum-rate of a solution is log2(s^2).

#pragma once

#include <functional>

#include "starsec/channel.hpp"
#include "starsec/conic.hpp"
#include "starsec/subproblem.hpp"

namespace starsec {

struct ActiveSlack {
  double s = 0.0;
  double r11 = 0.0, r22 = 0.0, r12 = 0.0;
  double a = 0.0;  ///< stability auxiliary of the r12 product
  double mu12 = 1.0;
  double Gamma = 0.0;  ///< interference-plus-noise of the r12 product
};

struct ActiveResult {
  conic::Status status = conic::Status::numerical_limit;
  CMatrix W1, W2;
  ActiveSlack slack;
  double max_violation = 0.0;
  int iterations = 0;
};

/// True when the trace order is enforced and User2 receives nothing through T,
/// which forces W1 = 0; build_p2 then leaves W1 out of every form.
bool user1_silenced(const EffectiveChannels& ch, const PassiveLifted& lifted,
                    const SubproblemParams& params);

/// Throws DimensionError on mismatched orders and DomainError when R, T or J
/// has an eigenvalue below -1e-7 (relative to its scale) or mu <= 0.
conic::Problem build_p2(const EffectiveChannels& ch, const PassiveLifted& lifted,
                        const SubproblemParams& params, const Linearization& lin);

ActiveResult solve_p2(const EffectiveChannels& ch, const PassiveLifted& lifted,
                      const SubproblemParams& params, const Linearization& lin,
                      double tol = 1e-7);

/// Scores a candidate pair after repairing it in place; -infinity when the
/// candidate cannot be made feasible.
using BeamScorer = std::function<double(CVector& w1, CVector& w2)>;

struct ExtractionOptions {
  double rank_tol = 1e-3;
  int samples = 100;
  const BeamScorer* scorer = nullptr;
  Rng* rng = nullptr;
};

/// Principal eigenvector w = sqrt(lambda1) u1 of each covariance. A covariance
/// with lambda2 / lambda1 > rank_tol takes the randomized path: `samples`
/// draws w ~ CN(0, W) rescaled to power Tr(W) compete with the principal
/// vector under `scorer`, and the best repaired pair is returned. Without a
/// scorer the principal vectors are returned.
BeamformerSolution extract_beamformers(const CMatrix& W1, const CMatrix& W2,
                                       const ExtractionOptions& options = {});

}  // namespace starsec
