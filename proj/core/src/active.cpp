// SPDX-License-Identifier: Apache-2.0

#include "starsec/active.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace starsec {

using conic::Expr;

namespace {

void check_psd(const CMatrix& X, const char* name) {
  const double scale = std::max(1.0, X.cwiseAbs().maxCoeff());
  if (min_eigenvalue(X) < -1e-7 * scale) {
    throw DomainError(std::string("build_p2: lifted ") + name + " is not PSD");
  }
}

}  // namespace

bool user1_silenced(const EffectiveChannels& ch, const PassiveLifted& lifted,
                    const SubproblemParams& params) {
  if (!params.user2 || !params.algo.sic_trace_order) return false;
  const CMatrix A = ch.H2.adjoint() * lifted.T * ch.H2;
  return params.pmax <= 0.0 || A.cwiseAbs().maxCoeff() * params.pmax <= 1e-12 * params.sigma2;
}

conic::Problem build_p2(const EffectiveChannels& ch, const PassiveLifted& lifted,
                        const SubproblemParams& params, const Linearization& lin) {
  const int K = ch.K();
  const int N = ch.N();
  if (ch.H1.rows() != K + 1 || ch.He.rows() != K + 1 || ch.H1.cols() != N || ch.He.cols() != N) {
    throw DimensionError("build_p2: inconsistent effective channels");
  }
  if (lifted.R.rows() != K + 1 || lifted.R.cols() != K + 1 || lifted.T.rows() != K ||
      lifted.T.cols() != K || lifted.J.rows() != K + 1 || lifted.J.cols() != K + 1) {
    throw DimensionError("build_p2: lifted state orders do not match K");
  }
  if (!(lin.mu11 > 0.0 && lin.mu22 > 0.0 && lin.mu12 > 0.0)) {
    throw DomainError("build_p2: AGM multipliers must be positive");
  }
  check_psd(lifted.R, "R");
  check_psd(lifted.T, "T");
  check_psd(lifted.J, "J");

  conic::Problem p;
  const auto W1 = p.add_hermitian("W1", N);
  const auto W2 = p.add_hermitian("W2", N);

  auto gram = [](const CMatrix& H, const CMatrix& M) -> CMatrix { return H.adjoint() * M * H; };
  const CMatrix A_r1 = gram(ch.H1, lifted.R);
  const CMatrix A_j1 = gram(ch.H1, lifted.J);
  const CMatrix A_t2 = gram(ch.H2, lifted.T);
  const CMatrix A_re = gram(ch.He, lifted.R);
  const CMatrix A_je = gram(ch.He, lifted.J);

  const double floor = 1e-13 * params.sigma2 / std::max(params.pmax, 1e-300);
  auto form = [&](const CMatrix& A, const conic::Hermitian& W) {
    return Expr::trace_inner(detail::clean(A, floor), W);
  };
  auto vanishes = [&](const CMatrix& A) {
    return params.pmax <= 0.0 || A.cwiseAbs().maxCoeff() * params.pmax <= 1e-12 * params.sigma2;
  };

  const bool w1_off = user1_silenced(ch, lifted, params);
  auto form1 = [&](const CMatrix& A) { return w1_off ? Expr() : form(A, W1); };

  Expr jam1 = form1(A_j1);
  if (params.algo.jamming_full_leakage) jam1 += form(A_j1, W2);

  detail::RateForms f;
  f.S11 = form1(A_r1);
  f.G11 = form(A_r1, W2) + jam1 + params.sigma2;
  f.S22 = form(A_t2, W2);
  f.G22 = form1(A_t2) + params.sigma2;
  f.S12 = form(A_r1, W2);
  f.G12 = form1(A_r1) + jam1 + params.sigma2;
  f.eve_signal = form1(A_re);
  f.eve_interference = form1(A_je) + form(A_je, W2) + params.sigma2;
  f.zero11 = w1_off || vanishes(A_r1);
  f.zero22 = vanishes(A_t2);
  f.zero12 = f.zero11;

  const auto v = detail::add_rate_block(p, f, params, lin);
  p.add_le(Expr::trace(W1) + Expr::trace(W2), params.pmax, "power");
  p.maximize(v.s);
  return p;
}

ActiveResult solve_p2(const EffectiveChannels& ch, const PassiveLifted& lifted,
                      const SubproblemParams& params, const Linearization& lin, double tol) {
  const conic::Problem p = build_p2(ch, lifted, params, lin);
  const conic::Solution sol = conic::solve(p, tol);
  ActiveResult r;
  r.status = sol.status;
  r.max_violation = sol.max_constraint_violation;
  r.iterations = sol.iterations;
  if (sol.status != conic::Status::optimal && sol.status != conic::Status::numerical_limit) {
    return r;
  }
  r.W1 = user1_silenced(ch, lifted, params) ? CMatrix::Zero(ch.N(), ch.N()) : sol.matrix("W1");
  r.W2 = sol.matrix("W2");
  r.slack.s = sol.value("s");
  r.slack.r11 = sol.value("r11");
  r.slack.r22 = sol.value("r22");
  r.slack.r12 = sol.value("r12");
  const auto it = sol.scalars.find("sinr12.a");
  r.slack.a = it == sol.scalars.end() ? 0.0 : it->second;
  r.slack.mu12 = lin.mu12;
  r.slack.Gamma = evaluate_lifted(ch, r.W1, r.W2, lifted, params.sigma2,
                                  params.algo.jamming_full_leakage)
                      .G12;
  return r;
}

namespace {

struct Principal {
  CVector w;
  double residual = 0.0;
  RVector values;
  CMatrix vectors;
};

Principal principal(const CMatrix& W) {
  Principal p;
  const auto n = W.rows();
  if (n == 0) return p;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (W + W.adjoint()));
  p.values = es.eigenvalues().cwiseMax(0.0);
  p.vectors = es.eigenvectors();
  const double l1 = p.values[n - 1];
  const double l2 = n > 1 ? p.values[n - 2] : 0.0;
  p.residual = l1 > 0.0 ? l2 / l1 : 0.0;
  p.w = std::sqrt(l1) * p.vectors.col(n - 1);
  return p;
}

CVector sample(const Principal& p, Rng& rng) {
  const auto n = p.values.size();
  CVector g(n);
  for (Eigen::Index i = 0; i < n; ++i) g[i] = std::sqrt(p.values[i]) * rng.complex_normal();
  CVector w = p.vectors * g;
  const double norm = w.norm();
  const double power = p.values.sum();
  if (norm > 0.0) w *= std::sqrt(power) / norm;
  return w;
}

}  // namespace

BeamformerSolution extract_beamformers(const CMatrix& W1, const CMatrix& W2,
                                       const ExtractionOptions& options) {
  const Principal p1 = principal(W1);
  const Principal p2 = principal(W2);
  BeamformerSolution b;
  b.w1 = p1.w;
  b.w2 = p2.w;
  b.rank_residual_1 = p1.residual;
  b.rank_residual_2 = p2.residual;
  const bool rand1 = p1.residual > options.rank_tol;
  const bool rand2 = p2.residual > options.rank_tol;
  b.path_1 = rand1 ? BeamPath::randomized : BeamPath::principal;
  b.path_2 = rand2 ? BeamPath::randomized : BeamPath::principal;

  if ((rand1 || rand2) && options.scorer != nullptr && options.rng != nullptr) {
    const BeamScorer& score = *options.scorer;
    CVector best1 = b.w1;
    CVector best2 = b.w2;
    double best = score(best1, best2);
    for (int t = 0; t < options.samples; ++t) {
      CVector c1 = rand1 ? sample(p1, *options.rng) : p1.w;
      CVector c2 = rand2 ? sample(p2, *options.rng) : p2.w;
      const double v = score(c1, c2);
      if (v > best) {
        best = v;
        best1 = c1;
        best2 = c2;
      }
    }
    b.w1 = best1;
    b.w2 = best2;
  }
  b.W1 = W1;
  b.W2 = W2;
  return b;
}

}  // namespace starsec
