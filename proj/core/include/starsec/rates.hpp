// SPDX-License-Identifier: Apache-2.0
//
// SINR and rate evaluation, effective (cascaded) channels and lifted trace
// forms.
//
// Lifting convention: for a response vector phi (the diagonal of Theta) the
// lifted matrix is M = v v^H with v = conj([phi; t]), t = 1 for reflection
// and t = 0 for jamming. With that choice
//   Tr(H1 W H1^H M) = |(h_r1^H Theta H_br + t h_b1^H) w|^2   for W = w w^H,
// because the cascade row equals v^T H1 (see build_effective_channels).

#pragma once

#include <string>

#include "starsec/channel.hpp"
#include "starsec/types.hpp"

namespace starsec {

enum class Mode { reflect = 0, transmit = 1, jam = 2 };

inline constexpr Mode kModes[] = {Mode::reflect, Mode::transmit, Mode::jam};

const char* mode_name(Mode m);

struct StarRisState {
  RVector beta_r, beta_t, beta_j;
  CVector phi_r, phi_t, phi_j;
  /// max_k ||entry_k| - 1| before unit-modulus projection (extraction only).
  double modulus_deviation = 0.0;

  static StarRisState zeros(int K);
  int K() const { return static_cast<int>(beta_r.size()); }

  RVector& beta(Mode m);
  const RVector& beta(Mode m) const;
  CVector& phi(Mode m);
  const CVector& phi(Mode m) const;
};

/// diag(beta_z .* phi_z).
CMatrix assemble_theta(const StarRisState& state, Mode mode);

enum class BeamPath { principal, randomized };

struct BeamformerSolution {
  CVector w1, w2;
  CMatrix W1, W2;
  double rank_residual_1 = 0.0;
  double rank_residual_2 = 0.0;
  BeamPath path_1 = BeamPath::principal;
  BeamPath path_2 = BeamPath::principal;

  /// Rank-one solution W_m = w_m w_m^H.
  static BeamformerSolution from_vectors(const CVector& w1, const CVector& w2);
};

struct RateReport {
  double sinr_11 = 0.0, sinr_22 = 0.0, sinr_12 = 0.0, sinr_e1 = 0.0;
  double r_11 = 0.0, r_22 = 0.0, r_12 = 0.0, r_e1 = 0.0;
  double sum_rate = 0.0;
  bool leakage_ok = true;
  bool sic_ok = true;
  double power_used = 0.0;

  static std::string header();
  /// Whitespace-separated fields in header() order, %.17g.
  std::string row() const;
};

/// Row vector h^H Theta H_br (+ d^H when `direct` is non-empty).
Eigen::RowVectorXcd cascade(const CVector& h, const CMatrix& theta, const CMatrix& H_br,
                            const CVector& direct = CVector());

/// SINRs of the four receivers evaluated from the physical vectors w1, w2.
/// With `jamming_full_leakage` the User1 denominators also include the w2
/// jamming term.
RateReport compute_rates(const ChannelRealization& ch, const BeamformerSolution& beams,
                         const StarRisState& state, double sigma2, double tau,
                         bool jamming_full_leakage = false);

struct EffectiveChannels {
  CMatrix H1;  ///< (K+1) x N: [diag(conj h_r1) H_br; h_b1^H]
  CMatrix H2;  ///< K x N: diag(conj h_t2) H_br
  CMatrix He;  ///< (K+1) x N: [diag(conj h_re) H_br; h_be^H]

  int K() const { return static_cast<int>(H2.rows()); }
  int N() const { return static_cast<int>(H2.cols()); }
};

EffectiveChannels build_effective_channels(const ChannelRealization& ch);

/// Re Tr(H W H^H M). Throws DimensionError on shape mismatch and DomainError
/// if the imaginary part exceeds 1e-10 relative to the magnitude.
double lifted_trace(const CMatrix& H, const CMatrix& W, const CMatrix& M);

/// conj([phi; trailing]).
CVector lift_vector(const CVector& phi, cplx trailing);
/// conj(phi), for the non-augmented transmission lift.
CVector lift_vector(const CVector& phi);
/// v v^H.
CMatrix outer(const CVector& v);

}  // namespace starsec
