// SPDX-License-Identifier: Apache-2.0

#include "starsec/subproblem.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace starsec {

using conic::Expr;

const RVector& PassiveLifted::beta(Mode m) const {
  return m == Mode::reflect ? beta_r : (m == Mode::transmit ? beta_t : beta_j);
}

PassiveLifted PassiveLifted::from_state(const StarRisState& state) {
  const int K = state.K();
  auto amp = [&](Mode m) {
    CVector v(K);
    for (int k = 0; k < K; ++k) v[k] = std::sqrt(std::max(state.beta(m)[k], 0.0)) * state.phi(m)[k];
    return v;
  };
  PassiveLifted l;
  l.R = outer(lift_vector(amp(Mode::reflect), 1.0));
  l.T = outer(lift_vector(amp(Mode::transmit)));
  l.J = outer(lift_vector(amp(Mode::jam), 0.0));
  l.beta_r = state.beta_r;
  l.beta_t = state.beta_t;
  l.beta_j = state.beta_j;
  return l;
}

RMatrix PassiveLifted::beta_matrix() const {
  RMatrix b(3, K());
  b.row(0) = beta_r.transpose();
  b.row(1) = beta_t.transpose();
  b.row(2) = beta_j.transpose();
  return b;
}

ModeMask ModeMask::all(int K) {
  ModeMask m;
  m.allowed.assign(K, {true, true, true});
  return m;
}

ModeMask ModeMask::from_binary(const RMatrix& modes) {
  ModeMask m;
  m.allowed.assign(modes.cols(), {false, false, false});
  for (Eigen::Index k = 0; k < modes.cols(); ++k) {
    for (int z = 0; z < 3; ++z) m.allowed[k][z] = modes(z, k) > 0.5;
  }
  return m;
}

int ModeMask::count(int k) const {
  return static_cast<int>(allowed[k][0]) + static_cast<int>(allowed[k][1]) +
         static_cast<int>(allowed[k][2]);
}

bool ModeMask::any(Mode m) const {
  return std::any_of(allowed.begin(), allowed.end(),
                     [&](const auto& a) { return a[static_cast<int>(m)]; });
}

LiftedTerms evaluate_lifted(const EffectiveChannels& ch, const CMatrix& W1, const CMatrix& W2,
                            const PassiveLifted& lifted, double sigma2,
                            bool jamming_full_leakage) {
  const double jam1 = lifted_trace(ch.H1, W1, lifted.J) +
                      (jamming_full_leakage ? lifted_trace(ch.H1, W2, lifted.J) : 0.0);
  const double u1_own = lifted_trace(ch.H1, W1, lifted.R);
  const double u1_other = lifted_trace(ch.H1, W2, lifted.R);
  LiftedTerms t;
  t.S11 = u1_own;
  t.G11 = u1_other + jam1 + sigma2;
  t.S22 = lifted_trace(ch.H2, W2, lifted.T);
  t.G22 = lifted_trace(ch.H2, W1, lifted.T) + sigma2;
  t.S12 = u1_other;
  t.G12 = u1_own + jam1 + sigma2;
  t.eve_signal = lifted_trace(ch.He, W1, lifted.R);
  t.eve_interference =
      lifted_trace(ch.He, W1, lifted.J) + lifted_trace(ch.He, W2, lifted.J) + sigma2;
  return t;
}

double update_mu12(double r12, double Gamma) {
  if (!(Gamma > 0.0)) throw DomainError("update_mu12: Gamma must be positive");
  return std::max(std::sqrt(std::max(r12, 0.0) / Gamma), 1e-8);
}

Linearization linearize(const LiftedTerms& t, MuUpdate form, double tau) {
  const bool literal = form == MuUpdate::literal;
  Linearization l;
  const double r12 = std::max(std::min(t.sinr12(), t.sinr22()), 0.0);
  l.mu11 = update_mu12(std::max(t.sinr11(), 0.0), literal ? tau : t.G11);
  l.mu22 = update_mu12(std::max(t.sinr22(), 0.0), literal ? tau : t.G22);
  l.mu12 = update_mu12(r12, literal ? tau : t.G12);
  l.sic_center = r12 * t.G22;
  l.scale11 = std::max(t.S11, 1.0);
  l.scale22 = std::max(t.S22, 1.0);
  l.scale12 = std::max(t.S12, 1.0);
  return l;
}

double min_eigenvalue(const CMatrix& X) {
  if (X.size() == 0) return 0.0;
  const CMatrix H = 0.5 * (X + X.adjoint());
  return Eigen::SelfAdjointEigenSolver<CMatrix>(H, Eigen::EigenvaluesOnly).eigenvalues()[0];
}

double rank_ratio(const CMatrix& Z) {
  if (Z.size() == 0) return 0.0;
  const CMatrix H = 0.5 * (Z + Z.adjoint());
  const RVector ev = Eigen::SelfAdjointEigenSolver<CMatrix>(H, Eigen::EigenvaluesOnly).eigenvalues();
  const double top = ev[ev.size() - 1];
  return (H.trace().real() - top) / std::max(top, 1e-12);
}

namespace detail {

CMatrix clean(const CMatrix& Q, double floor) {
  CMatrix H = 0.5 * (Q + Q.adjoint());
  for (Eigen::Index i = 0; i < H.size(); ++i) {
    if (std::abs(H(i)) <= floor) H(i) = 0.0;
  }
  return H;
}

namespace {

/// r * Gamma <= S through the AGM pattern, or r = 0 when S vanishes. The
/// auxiliaries a, b are expressed in units of `scale`.
void add_product_bound(conic::Problem& p, const conic::Scalar& r, const Expr& S, const Expr& G,
                       bool zero, double mu, double scale, bool literal, const std::string& tag) {
  if (zero) {
    p.add_eq(Expr(r), tag + ".zero");
    return;
  }
  const double unit = 1.0 / std::sqrt(scale);
  const auto a = p.add_scalar(tag + ".a", conic::Domain::nonneg);
  const auto b = p.add_scalar(tag + ".b", conic::Domain::nonneg);
  p.add_rotated_soc({(mu * unit) * G}, b, 1.0, tag + ".interference");
  if (literal) {
    p.add_rotated_soc({unit * Expr(r)}, mu, a, tag + ".stability");
  } else {
    p.add_rotated_soc({(unit / mu) * Expr(r)}, a, 1.0, tag + ".stability");
  }
  p.add_le(Expr(a) + Expr(b), (2.0 / scale) * S, tag + ".agm");
}

}  // namespace

RateVars add_rate_block(conic::Problem& p, const RateForms& f, const SubproblemParams& params,
                        const Linearization& lin) {
  RateVars v;
  v.s = p.add_scalar("s", conic::Domain::nonneg);
  v.r11 = p.add_scalar("r11", conic::Domain::nonneg);
  v.r22 = p.add_scalar("r22", conic::Domain::nonneg);
  v.r12 = p.add_scalar("r12", conic::Domain::nonneg);
  const bool literal = params.algo.agm_literal_soc;

  p.add_rotated_soc({Expr(v.s)}, 1.0 + Expr(v.r11), 1.0 + Expr(v.r22), "objective");
  add_product_bound(p, v.r11, f.S11, f.G11, f.zero11, lin.mu11, lin.scale11, literal, "sinr11");

  if (!params.user2) {
    p.add_eq(Expr(v.r22), "sinr22.zero");
    p.add_eq(Expr(v.r12), "sinr12.zero");
  } else {
    add_product_bound(p, v.r22, f.S22, f.G22, f.zero22, lin.mu22, lin.scale22, literal, "sinr22");
    add_product_bound(p, v.r12, f.S12, f.G12, f.zero12, lin.mu12, lin.scale12, literal, "sinr12");
    p.add_le(Expr(v.r22), Expr(v.r12), "sic.order");
    if (params.algo.sic_rate_bound && !f.zero22) {
      // S22 <= r12 * G22: q^2 <= r12 * G22 with q above the tangent of sqrt(S22) at c.
      const double c = std::max(lin.sic_center, 1e-12);
      const double root = std::sqrt(c);
      const auto q = p.add_scalar("sic.q", conic::Domain::nonneg);
      p.add_rotated_soc({Expr(q)}, Expr(v.r12), f.G22, "sic.mean");
      p.add_le(0.5 * root + (0.5 / root) * f.S22, Expr(q), "sic.rate");
    }
    if (params.algo.sic_trace_order) {
      p.add_le(f.S11, f.S22, "sic.trace");
    }
  }

  const double leak = std::exp2(params.tau) - 1.0;
  p.add_le(f.eve_signal, leak * f.eve_interference, "eve");
  return v;
}

}  // namespace detail

}  // namespace starsec
