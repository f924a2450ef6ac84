// SPDX-License-Identifier: Apache-2.0

#include "starsec/passive.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace starsec {

using conic::Expr;

namespace {

constexpr int kR = 0;
constexpr int kT = 1;
constexpr int kJ = 2;

/// Elements that may use each mode; R and J blocks refer to these rows of H1/He.
struct Blocks {
  std::vector<int> idx[3];
  int order(int z) const {
    return static_cast<int>(idx[z].size()) + (z == kR ? 1 : 0);
  }
};

Blocks blocks_of(const ModeMask& mask) {
  Blocks b;
  for (int k = 0; k < mask.K(); ++k) {
    for (int z = 0; z < 3; ++z) {
      if (mask.allowed[k][z]) b.idx[z].push_back(k);
    }
  }
  return b;
}

/// Rows of a (K+1)-indexed matrix picked by `idx`, plus the trailing row when `trailing`.
std::vector<int> rows_of(const std::vector<int>& idx, int K, bool trailing) {
  std::vector<int> r = idx;
  if (trailing) r.push_back(K);
  return r;
}

CMatrix sub(const CMatrix& M, const std::vector<int>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  CMatrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = M(rows[i], rows[j]);
  return out;
}

CMatrix pad(const CMatrix& X, const std::vector<int>& rows, int size) {
  CMatrix out = CMatrix::Zero(size, size);
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows.size(); ++j) out(rows[i], rows[j]) = X(i, j);
  return out;
}

CVector dominant(const CMatrix& Z, double* value = nullptr) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (Z + Z.adjoint()));
  const auto n = Z.rows();
  if (value != nullptr) *value = es.eigenvalues()[n - 1];
  return es.eigenvectors().col(n - 1);
}

CMatrix rank_weight(const CMatrix& Z0, RankSurrogate form) {
  const CVector u = dominant(Z0);
  const CMatrix uu = u * u.adjoint();
  const CMatrix I = CMatrix::Identity(Z0.rows(), Z0.cols());
  return form == RankSurrogate::difference_of_convex ? CMatrix(I - uu) : CMatrix(I + uu);
}

void check_dims(const EffectiveChannels& ch, const BeamformerSolution& beams,
                const PenaltyState& pen, const ModeMask& mask) {
  const int K = ch.K();
  const int N = ch.N();
  if (ch.H1.rows() != K + 1 || ch.He.rows() != K + 1) {
    throw DimensionError("build_p3: inconsistent effective channels");
  }
  if (beams.W1.rows() != N || beams.W1.cols() != N || beams.W2.rows() != N ||
      beams.W2.cols() != N) {
    throw DimensionError("build_p3: covariance order differs from the antenna count");
  }
  const auto& it = pen.iterate;
  if (it.R.rows() != K + 1 || it.T.rows() != K || it.J.rows() != K + 1 ||
      it.beta_r.size() != K || it.beta_t.size() != K || it.beta_j.size() != K) {
    throw DimensionError("build_p3: penalty iterate does not match K");
  }
  if (mask.K() != K) throw DimensionError("build_p3: mode mask does not match K");
  for (const CMatrix* Z : {&it.R, &it.T, &it.J}) {
    const double scale = std::max(1.0, Z->cwiseAbs().maxCoeff());
    if (min_eigenvalue(*Z) < -1e-7 * scale) {
      throw DomainError("build_p3: penalty iterate is not PSD");
    }
  }
}

}  // namespace

double binary_surrogate(const RMatrix& beta, const RMatrix& beta0) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    const double b0 = beta0(i);
    v += beta(i) - b0 * b0 - 2.0 * b0 * (beta(i) - b0);
  }
  return v;
}

double rank_surrogate(const CMatrix& Z, const CMatrix& Z0, RankSurrogate form) {
  if (Z.size() == 0) return 0.0;
  double l0 = 0.0;
  const CVector u = dominant(Z0, &l0);
  const double tr = Z.trace().real();
  const double uz = (u.adjoint() * (0.5 * (Z + Z.adjoint())) * u).value().real();
  if (form == RankSurrogate::difference_of_convex) return tr - uz;
  return tr + l0 + (uz - l0);
}

conic::Problem build_p3(const EffectiveChannels& ch, const BeamformerSolution& beams,
                        const PenaltyState& pen, const SubproblemParams& params,
                        const Linearization& lin, const ModeMask& mask) {
  check_dims(ch, beams, pen, mask);
  if (!(lin.mu11 > 0.0 && lin.mu22 > 0.0 && lin.mu12 > 0.0)) {
    throw DomainError("build_p3: AGM multipliers must be positive");
  }
  const int K = ch.K();
  const Blocks bl = blocks_of(mask);
  const std::vector<int> rows[3] = {rows_of(bl.idx[kR], K, true), rows_of(bl.idx[kT], K, false),
                                    rows_of(bl.idx[kJ], K, false)};

  conic::Problem p;
  conic::Hermitian Z[3];
  bool present[3];
  const char* names[3] = {"R", "T", "J"};
  for (int z = 0; z < 3; ++z) {
    present[z] = bl.order(z) > 0;
    if (present[z]) Z[z] = p.add_hermitian(names[z], bl.order(z));
  }

  const CMatrix& W1 = beams.W1;
  const CMatrix& W2 = beams.W2;
  const double floor = 1e-13 * params.sigma2;
  auto vanishes = [&](const CMatrix& Q) {
    return Q.size() == 0 || Q.cwiseAbs().maxCoeff() <= 1e-12 * params.sigma2;
  };
  // Re Tr(Q_sub Z_sub) for the (K+1)- or K-indexed Gram matrix Q = H W H^H.
  auto form = [&](const CMatrix& Q, int z) -> Expr {
    if (!present[z]) return Expr(0.0);
    return Expr::trace_inner(detail::clean(sub(Q, rows[z]), floor), Z[z]);
  };

  const CMatrix Q1_own = ch.H1 * W1 * ch.H1.adjoint();
  const CMatrix Q1_other = ch.H1 * W2 * ch.H1.adjoint();
  const CMatrix Q2_own = ch.H2 * W2 * ch.H2.adjoint();
  const CMatrix Q2_other = ch.H2 * W1 * ch.H2.adjoint();
  const CMatrix Qe1 = ch.He * W1 * ch.He.adjoint();
  const CMatrix Qe2 = ch.He * W2 * ch.He.adjoint();

  Expr jam1 = form(Q1_own, kJ);
  if (params.algo.jamming_full_leakage) jam1 += form(Q1_other, kJ);

  detail::RateForms f;
  f.S11 = form(Q1_own, kR);
  f.G11 = form(Q1_other, kR) + jam1 + params.sigma2;
  f.S22 = form(Q2_own, kT);
  f.G22 = form(Q2_other, kT) + params.sigma2;
  f.S12 = form(Q1_other, kR);
  f.G12 = form(Q1_own, kR) + jam1 + params.sigma2;
  f.eve_signal = form(Qe1, kR);
  f.eve_interference = form(Qe1, kJ) + form(Qe2, kJ) + params.sigma2;
  f.zero11 = vanishes(sub(Q1_own, rows[kR]));
  f.zero22 = !present[kT] || vanishes(sub(Q2_own, rows[kT]));
  f.zero12 = vanishes(sub(Q1_other, rows[kR]));

  const auto v = detail::add_rate_block(p, f, params, lin);

  // Diagonal links, exclusivity and the trailing reflection slot.
  p.add_eq(Expr::real_entry(Z[kR], bl.order(kR) - 1, bl.order(kR) - 1) - 1.0, "R.trailing");
  std::vector<int> pos[3];
  for (int z = 0; z < 3; ++z) {
    pos[z].assign(K, -1);
    for (size_t i = 0; i < bl.idx[z].size(); ++i) pos[z][bl.idx[z][i]] = static_cast<int>(i);
  }
  Expr penalty_bin(0.0);
  const RMatrix beta0 = pen.iterate.beta_matrix();
  for (int k = 0; k < K; ++k) {
    if (mask.count(k) == 0) continue;
    Expr sum(0.0);
    for (int z = 0; z < 3; ++z) {
      if (pos[z][k] < 0) continue;
      const Expr b = Expr::real_entry(Z[z], pos[z][k], pos[z][k]);
      sum += b;
      const double b0 = beta0(z, k);
      penalty_bin += (1.0 - 2.0 * b0) * b + b0 * b0;
    }
    p.add_eq(sum - 1.0, "exclusive." + std::to_string(k));
  }

  Expr penalty_rank(0.0);
  const CMatrix* iter[3] = {&pen.iterate.R, &pen.iterate.T, &pen.iterate.J};
  for (int z = 0; z < 3; ++z) {
    if (!present[z]) continue;
    const CMatrix Z0 = sub(*iter[z], rows[z]);
    penalty_rank += Expr::trace_inner(rank_weight(Z0, params.algo.rank_surrogate), Z[z]);
  }

  const double bin_sign = params.algo.subtract_binary_penalty ? -1.0 : 1.0;
  p.maximize(params.objective_scale * Expr(v.s) + bin_sign * pen.zeta * penalty_bin -
             pen.xi * penalty_rank);
  return p;
}

PassiveResult solve_p3(const EffectiveChannels& ch, const BeamformerSolution& beams,
                       const PenaltyState& pen, const SubproblemParams& params,
                       const Linearization& lin, const ModeMask& mask, double tol) {
  const conic::Problem p = build_p3(ch, beams, pen, params, lin, mask);
  const conic::Solution sol = conic::solve(p, tol);
  PassiveResult r;
  r.status = sol.status;
  r.max_violation = sol.max_constraint_violation;
  r.iterations = sol.iterations;
  if (sol.status != conic::Status::optimal && sol.status != conic::Status::numerical_limit) {
    return r;
  }
  const int K = ch.K();
  const Blocks bl = blocks_of(mask);
  const std::vector<int> rows[3] = {rows_of(bl.idx[kR], K, true), rows_of(bl.idx[kT], K, false),
                                    rows_of(bl.idx[kJ], K, false)};
  const char* names[3] = {"R", "T", "J"};
  const int sizes[3] = {K + 1, K, K + 1};
  CMatrix full[3];
  for (int z = 0; z < 3; ++z) {
    full[z] = bl.order(z) > 0 ? pad(sol.matrix(names[z]), rows[z], sizes[z])
                              : CMatrix::Zero(sizes[z], sizes[z]);
  }
  r.lifted.R = full[kR];
  r.lifted.T = full[kT];
  r.lifted.J = full[kJ];
  r.lifted.beta_r = r.lifted.R.diagonal().real().head(K);
  r.lifted.beta_t = r.lifted.T.diagonal().real();
  r.lifted.beta_j = r.lifted.J.diagonal().real().head(K);
  r.s = sol.value("s");
  r.binary_penalty = binary_surrogate(r.lifted.beta_matrix(), pen.iterate.beta_matrix());
  r.rank_penalty = 0.0;
  const CMatrix* iter[3] = {&pen.iterate.R, &pen.iterate.T, &pen.iterate.J};
  for (int z = 0; z < 3; ++z) {
    if (bl.order(z) == 0) continue;
    r.rank_penalty += rank_surrogate(sub(full[z], rows[z]), sub(*iter[z], rows[z]),
                                     params.algo.rank_surrogate);
  }
  return r;
}

RMatrix one_hot_project(const RMatrix& beta) {
  if (beta.rows() != 3) throw DimensionError("one_hot_project: expected a 3 x K matrix");
  RMatrix out = RMatrix::Zero(3, beta.cols());
  for (Eigen::Index k = 0; k < beta.cols(); ++k) {
    if (std::abs(beta.col(k).sum() - 1.0) > 1e-3) {
      throw DomainError("one_hot_project: column " + std::to_string(k) + " does not sum to 1");
    }
    int best = 0;
    for (int z = 1; z < 3; ++z) {
      if (beta(z, k) > beta(best, k)) best = z;
    }
    out(best, k) = 1.0;
  }
  return out;
}

StarRisState extract_phases(const CMatrix& R, const CMatrix& T, const CMatrix& J,
                            const RMatrix& modes) {
  const int K = static_cast<int>(T.rows());
  if (R.rows() != K + 1 || R.cols() != K + 1 || T.cols() != K ||
      (J.rows() != K + 1 && J.rows() != K) || J.rows() != J.cols() || modes.rows() != 3 ||
      modes.cols() != K) {
    throw DimensionError("extract_phases: inconsistent matrix orders");
  }
  StarRisState s = StarRisState::zeros(K);
  const CMatrix* mats[3] = {&R, &T, &J};
  for (int z = 0; z < 3; ++z) {
    const Mode m = kModes[z];
    for (int k = 0; k < K; ++k) s.beta(m)[k] = modes(z, k) > 0.5 ? 1.0 : 0.0;
    if (s.beta(m).sum() == 0.0) continue;
    double l = 0.0;
    CVector v = dominant(*mats[z], &l);
    if (l <= 1e-10) {
      throw DomainError(std::string("extract_phases: degenerate ") + mode_name(m) + " matrix");
    }
    v *= std::sqrt(l);
    if (z == kR && std::abs(v[K]) >= 1e-6) v /= v[K];
    for (int k = 0; k < K; ++k) {
      if (modes(z, k) <= 0.5) continue;
      const double a = std::abs(v[k]);
      s.modulus_deviation = std::max(s.modulus_deviation, std::abs(a - 1.0));
      s.phi(m)[k] = a > 0.0 ? std::conj(v[k]) / a : cplx(1.0, 0.0);
    }
  }
  return s;
}

PenaltyState update_penalties(const PenaltyState& pen, double omega, const PassiveLifted& current) {
  PenaltyState out;
  out.zeta = pen.zeta * omega;
  out.xi = pen.xi * omega;
  out.iterate = current;
  return out;
}

double binary_residual(const RMatrix& beta) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    worst = std::max(worst, std::min(beta(i), 1.0 - beta(i)));
  }
  return worst;
}

}  // namespace starsec
