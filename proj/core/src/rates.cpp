// SPDX-License-Identifier: Apache-2.0

#include "starsec/rates.hpp"

#include <cmath>
#include <cstdio>

namespace starsec {

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::reflect:
      return "reflect";
    case Mode::transmit:
      return "transmit";
    case Mode::jam:
      return "jam";
  }
  return "?";
}

StarRisState StarRisState::zeros(int K) {
  StarRisState s;
  s.beta_r = s.beta_t = s.beta_j = RVector::Zero(K);
  s.phi_r = s.phi_t = s.phi_j = CVector::Zero(K);
  return s;
}

RVector& StarRisState::beta(Mode m) {
  return m == Mode::reflect ? beta_r : (m == Mode::transmit ? beta_t : beta_j);
}
const RVector& StarRisState::beta(Mode m) const {
  return m == Mode::reflect ? beta_r : (m == Mode::transmit ? beta_t : beta_j);
}
CVector& StarRisState::phi(Mode m) {
  return m == Mode::reflect ? phi_r : (m == Mode::transmit ? phi_t : phi_j);
}
const CVector& StarRisState::phi(Mode m) const {
  return m == Mode::reflect ? phi_r : (m == Mode::transmit ? phi_t : phi_j);
}

CMatrix assemble_theta(const StarRisState& state, Mode mode) {
  const RVector& b = state.beta(mode);
  const CVector& p = state.phi(mode);
  if (b.size() != p.size()) {
    throw DimensionError("assemble_theta: beta and phi lengths differ");
  }
  CVector d(b.size());
  for (Eigen::Index k = 0; k < b.size(); ++k) {
    d[k] = b[k] * p[k];
  }
  return d.asDiagonal();
}

BeamformerSolution BeamformerSolution::from_vectors(const CVector& w1, const CVector& w2) {
  BeamformerSolution b;
  b.w1 = w1;
  b.w2 = w2;
  b.W1 = w1 * w1.adjoint();
  b.W2 = w2 * w2.adjoint();
  return b;
}

std::string RateReport::header() {
  return "sinr_11 sinr_22 sinr_12 sinr_e1 r_11 r_22 r_12 r_e1 sum_rate leakage_ok sic_ok "
         "power_used";
}

std::string RateReport::row() const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g %d %d %.17g", sinr_11,
                sinr_22, sinr_12, sinr_e1, r_11, r_22, r_12, r_e1, sum_rate, leakage_ok ? 1 : 0,
                sic_ok ? 1 : 0, power_used);
  return buf;
}

Eigen::RowVectorXcd cascade(const CVector& h, const CMatrix& theta, const CMatrix& H_br,
                            const CVector& direct) {
  Eigen::RowVectorXcd g = h.adjoint() * theta * H_br;
  if (direct.size() > 0) {
    g += direct.adjoint();
  }
  return g;
}

namespace {

void check_dims(const ChannelRealization& ch, const BeamformerSolution& beams,
                const StarRisState& state) {
  const auto K = ch.H_br.rows();
  const auto N = ch.H_br.cols();
  if (ch.h_r1.size() != K || ch.h_t2.size() != K || ch.h_re.size() != K ||
      ch.h_b1.size() != N || ch.h_be.size() != N) {
    throw DimensionError("compute_rates: inconsistent channel dimensions");
  }
  if (beams.w1.size() != N || beams.w2.size() != N) {
    throw DimensionError("compute_rates: beamformer length differs from antenna count");
  }
  for (Mode m : kModes) {
    if (state.beta(m).size() != K || state.phi(m).size() != K) {
      throw DimensionError("compute_rates: STAR-RIS state length differs from K");
    }
  }
}

double gain(const Eigen::RowVectorXcd& g, const CVector& w) {
  return std::norm((g * w).value());
}

}  // namespace

RateReport compute_rates(const ChannelRealization& ch, const BeamformerSolution& beams,
                         const StarRisState& state, double sigma2, double tau,
                         bool jamming_full_leakage) {
  check_dims(ch, beams, state);
  const CMatrix theta_r = assemble_theta(state, Mode::reflect);
  const CMatrix theta_t = assemble_theta(state, Mode::transmit);
  const CMatrix theta_j = assemble_theta(state, Mode::jam);

  const auto g1 = cascade(ch.h_r1, theta_r, ch.H_br, ch.h_b1);
  const auto j1 = cascade(ch.h_r1, theta_j, ch.H_br);
  const auto g2 = cascade(ch.h_t2, theta_t, ch.H_br);
  const auto ge = cascade(ch.h_re, theta_r, ch.H_br, ch.h_be);
  const auto je = cascade(ch.h_re, theta_j, ch.H_br);
  const CVector& w1 = beams.w1;
  const CVector& w2 = beams.w2;

  const double jam1 = gain(j1, w1) + (jamming_full_leakage ? gain(j1, w2) : 0.0);

  RateReport r;
  r.sinr_11 = gain(g1, w1) / (gain(g1, w2) + jam1 + sigma2);
  r.sinr_22 = gain(g2, w2) / (gain(g2, w1) + sigma2);
  r.sinr_12 = gain(g1, w2) / (gain(g1, w1) + jam1 + sigma2);
  r.sinr_e1 = gain(ge, w1) / (gain(je, w1) + gain(je, w2) + sigma2);
  r.r_11 = std::log2(1.0 + r.sinr_11);
  r.r_22 = std::log2(1.0 + r.sinr_22);
  r.r_12 = std::log2(1.0 + r.sinr_12);
  r.r_e1 = std::log2(1.0 + r.sinr_e1);
  r.sum_rate = r.r_11 + r.r_22;
  r.leakage_ok = r.r_e1 <= tau + 1e-6;
  r.sic_ok = r.r_12 >= r.r_22 - 1e-6;
  r.power_used = w1.squaredNorm() + w2.squaredNorm();
  return r;
}

EffectiveChannels build_effective_channels(const ChannelRealization& ch) {
  const auto K = ch.H_br.rows();
  const auto N = ch.H_br.cols();
  if (ch.h_r1.size() != K || ch.h_t2.size() != K || ch.h_re.size() != K ||
      ch.h_b1.size() != N || ch.h_be.size() != N) {
    throw DimensionError("build_effective_channels: inconsistent channel dimensions");
  }
  EffectiveChannels e;
  e.H1.resize(K + 1, N);
  e.He.resize(K + 1, N);
  e.H1.topRows(K) = ch.h_r1.conjugate().asDiagonal() * ch.H_br;
  e.H1.row(K) = ch.h_b1.adjoint();
  e.H2 = ch.h_t2.conjugate().asDiagonal() * ch.H_br;
  e.He.topRows(K) = ch.h_re.conjugate().asDiagonal() * ch.H_br;
  e.He.row(K) = ch.h_be.adjoint();
  return e;
}

double lifted_trace(const CMatrix& H, const CMatrix& W, const CMatrix& M) {
  if (W.rows() != W.cols() || M.rows() != M.cols() || H.cols() != W.rows() ||
      H.rows() != M.rows()) {
    throw DimensionError("lifted_trace: non-conformable H, W, M");
  }
  const CMatrix HW = H * W;
  const cplx t = ((HW * H.adjoint()).cwiseProduct(M.transpose())).sum();
  if (std::abs(t.imag()) > 1e-10 * std::max(std::abs(t), 1.0)) {
    throw DomainError("lifted_trace: non-Hermitian input (imaginary part too large)");
  }
  return t.real();
}

CVector lift_vector(const CVector& phi, cplx trailing) {
  CVector v(phi.size() + 1);
  v.head(phi.size()) = phi.conjugate();
  v[phi.size()] = std::conj(trailing);
  return v;
}

CVector lift_vector(const CVector& phi) { return phi.conjugate(); }

CMatrix outer(const CVector& v) { return v * v.adjoint(); }

}  // namespace starsec
