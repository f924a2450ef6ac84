// SPDX-License-Identifier: Apache-2.0

#include "starsec/interior_point.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>

namespace starsec::ipm {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Layout {
  int n_lp = 0;
  std::vector<int> soc_off, soc_size;
  std::vector<int> sdp_off, sdp_order;
  int n_soc_end = 0;
  int n = 0;

  explicit Layout(const Cones& k) : n_lp(k.lp) {
    int off = n_lp;
    for (int s : k.soc) {
      soc_off.push_back(off);
      soc_size.push_back(s);
      off += s;
    }
    n_soc_end = off;
    for (int order : k.sdp) {
      sdp_off.push_back(off);
      sdp_order.push_back(order);
      off += svec_dim(order);
    }
    n = off;
  }
};

struct Entry {
  int a;
  int b;
  double v;
};

/// Rows of A restricted to one PSD block, as symmetric matrices given by
/// their full entry lists (both (a,b) and (b,a) for off-diagonal entries).
struct SdpRows {
  std::vector<int> rows;
  std::vector<std::vector<Entry>> entries;
  std::vector<char> dense;
};

struct Scaling {
  RVector d;  // orthant: sqrt(z / x)
  std::vector<SocScaling> soc;
  std::vector<SdpScaling> sdp;
  std::vector<RMatrix> G;  // R R^T per PSD block
  RVector lambda;          // stacked in the variable layout
};

double soc_jnorm2(const Eigen::Ref<const RVector>& u) {
  const double t = u.tail(u.size() - 1).norm();
  return (u[0] - t) * (u[0] + t);
}

bool in_interior(const RVector& x, const Layout& L) {
  for (int i = 0; i < L.n_lp; ++i) {
    if (!(x[i] > 0.0)) return false;
  }
  for (std::size_t k = 0; k < L.soc_off.size(); ++k) {
    const auto u = x.segment(L.soc_off[k], L.soc_size[k]);
    if (!(u[0] > 0.0) || !(soc_jnorm2(u) > 0.0)) return false;
  }
  for (std::size_t k = 0; k < L.sdp_off.size(); ++k) {
    const int n = L.sdp_order[k];
    Eigen::LLT<RMatrix> llt(smat(x.segment(L.sdp_off[k], svec_dim(n)), n));
    if (llt.info() != Eigen::Success) return false;
  }
  return true;
}

RVector identity(const Layout& L) {
  RVector e = RVector::Zero(L.n);
  e.head(L.n_lp).setOnes();
  for (int off : L.soc_off) e[off] = 1.0;
  for (std::size_t k = 0; k < L.sdp_off.size(); ++k) {
    e.segment(L.sdp_off[k], svec_dim(L.sdp_order[k])) =
        svec(RMatrix::Identity(L.sdp_order[k], L.sdp_order[k]));
  }
  return e;
}

Scaling compute_scaling(const RVector& x, const RVector& z, const Layout& L) {
  Scaling s;
  s.lambda.resize(L.n);
  const auto xl = x.head(L.n_lp).array();
  const auto zl = z.head(L.n_lp).array();
  s.d = (zl / xl).sqrt().matrix();
  s.lambda.head(L.n_lp) = (xl * zl).sqrt().matrix();
  for (std::size_t k = 0; k < L.soc_off.size(); ++k) {
    const int off = L.soc_off[k];
    const int m = L.soc_size[k];
    s.soc.push_back(soc_scaling(x.segment(off, m), z.segment(off, m)));
    s.lambda.segment(off, m) = s.soc.back().lambda;
  }
  for (std::size_t k = 0; k < L.sdp_off.size(); ++k) {
    const int n = L.sdp_order[k];
    const int off = L.sdp_off[k];
    s.sdp.push_back(sdp_scaling(smat(x.segment(off, svec_dim(n)), n),
                                smat(z.segment(off, svec_dim(n)), n)));
    s.G.push_back(s.sdp.back().R * s.sdp.back().R.transpose());
    s.lambda.segment(off, svec_dim(n)) = svec(RMatrix(s.sdp.back().lambda.asDiagonal()));
  }
  return s;
}

enum class Op { W, WinvT, WT, Hinv };

/// Applies one of the scaling maps blockwise.
RVector apply(Op op, const Scaling& s, const RVector& u, const Layout& L) {
  RVector out(L.n);
  const auto ul = u.head(L.n_lp).array();
  switch (op) {
    case Op::W:
    case Op::WT:
      out.head(L.n_lp) = (s.d.array() * ul).matrix();
      break;
    case Op::WinvT:
      out.head(L.n_lp) = (ul / s.d.array()).matrix();
      break;
    case Op::Hinv:
      out.head(L.n_lp) = (ul / s.d.array().square()).matrix();
      break;
  }
  for (std::size_t k = 0; k < L.soc_off.size(); ++k) {
    const int off = L.soc_off[k];
    const int m = L.soc_size[k];
    const auto& sc = s.soc[k];
    const auto seg = u.segment(off, m);
    switch (op) {
      case Op::W:
      case Op::WT:
        out.segment(off, m) = sc.W * seg;
        break;
      case Op::WinvT:
        out.segment(off, m) = sc.Winv * seg;
        break;
      case Op::Hinv:
        out.segment(off, m) = sc.Winv * (sc.Winv * seg);
        break;
    }
  }
  for (std::size_t k = 0; k < L.sdp_off.size(); ++k) {
    const int n = L.sdp_order[k];
    const int off = L.sdp_off[k];
    const int dim = svec_dim(n);
    const RMatrix U = smat(u.segment(off, dim), n);
    const auto& sc = s.sdp[k];
    RMatrix V;
    switch (op) {
      case Op::W:
        V = sc.Rinv * U * sc.Rinv.transpose();
        break;
      case Op::WT:
        V = sc.Rinv.transpose() * U * sc.Rinv;
        break;
      case Op::WinvT:
        V = sc.R.transpose() * U * sc.R;
        break;
      case Op::Hinv:
        V = s.G[k] * U * s.G[k];
        break;
    }
    out.segment(off, dim) = svec(0.5 * (V + V.transpose()));
  }
  return out;
}

RVector jordan_product(const RVector& u, const RVector& v, const Layout& L) {
  RVector out(L.n);
  out.head(L.n_lp) = u.head(L.n_lp).cwiseProduct(v.head(L.n_lp));
  for (std::size_t k = 0; k < L.soc_off.size(); ++k) {
    const int off = L.soc_off[k];
    const int m = L.soc_size[k];
    const auto a = u.segment(off, m);
    const auto b = v.segment(off, m);
    out[off] = a.dot(b);
    out.segment(off + 1, m - 1) = a[0] * b.tail(m - 1) + b[0] * a.tail(m - 1);
  }
  for (std::size_t k = 0; k < L.sdp_off.size(); ++k) {
    const int n = L.sdp_order[k];
    const int off = L.sdp_off[k];
    const int dim = svec_dim(n);
    const RMatrix A = smat(u.segment(off, dim), n);
    const RMatrix B = smat(v.segment(off, dim), n);
    const RMatrix AB = A * B;
    out.segment(off, dim) = svec(0.5 * (AB + AB.transpose()));
  }
  return out;
}

/// Solves lambda o u = r for u.
RVector jordan_divide(const Scaling& s, const RVector& r, const Layout& L) {
  RVector out(L.n);
  out.head(L.n_lp) = r.head(L.n_lp).cwiseQuotient(s.lambda.head(L.n_lp));
  for (std::size_t k = 0; k < L.soc_off.size(); ++k) {
    const int off = L.soc_off[k];
    const int m = L.soc_size[k];
    const auto lam = s.lambda.segment(off, m);
    const auto rr = r.segment(off, m);
    const double l0 = lam[0];
    const double u0 = (l0 * rr[0] - lam.tail(m - 1).dot(rr.tail(m - 1))) / soc_jnorm2(lam);
    out[off] = u0;
    out.segment(off + 1, m - 1) = (rr.tail(m - 1) - u0 * lam.tail(m - 1)) / l0;
  }
  for (std::size_t k = 0; k < L.sdp_off.size(); ++k) {
    const int n = L.sdp_order[k];
    const int off = L.sdp_off[k];
    const int dim = svec_dim(n);
    const RVector& lam = s.sdp[k].lambda;
    RMatrix R = smat(r.segment(off, dim), n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        R(i, j) *= 2.0 / (lam[i] + lam[j]);
      }
    }
    out.segment(off, dim) = svec(R);
  }
  return out;
}

/// Largest alpha with lambda + alpha * delta in the cone (may be +inf).
double max_step(const Scaling& s, const RVector& delta, const Layout& L) {
  double alpha = kInf;
  for (int i = 0; i < L.n_lp; ++i) {
    if (delta[i] < 0.0) alpha = std::min(alpha, -s.lambda[i] / delta[i]);
  }
  for (std::size_t k = 0; k < L.soc_off.size(); ++k) {
    const int off = L.soc_off[k];
    const int m = L.soc_size[k];
    const auto lam = s.lambda.segment(off, m);
    const auto d = delta.segment(off, m);
    const double a = soc_jnorm2(d);
    const double b = lam[0] * d[0] - lam.tail(m - 1).dot(d.tail(m - 1));
    const double c = soc_jnorm2(lam);
    const double disc = b * b - a * c;
    if ((a > 0.0 && (b >= 0.0 || disc < 0.0)) || (a == 0.0 && b >= 0.0)) {
      continue;
    }
    alpha = std::min(alpha, c / (-b + std::sqrt(std::max(disc, 0.0))));
  }
  for (std::size_t k = 0; k < L.sdp_off.size(); ++k) {
    const int n = L.sdp_order[k];
    const int off = L.sdp_off[k];
    const RVector inv_sqrt = s.sdp[k].lambda.cwiseSqrt().cwiseInverse();
    const RMatrix D = inv_sqrt.asDiagonal() * smat(delta.segment(off, svec_dim(n)), n) *
                      inv_sqrt.asDiagonal();
    Eigen::SelfAdjointEigenSolver<RMatrix> es(D, Eigen::EigenvaluesOnly);
    const double emin = es.eigenvalues()[0];
    if (emin < 0.0) alpha = std::min(alpha, -1.0 / emin);
  }
  return alpha;
}

SdpRows collect_sdp_rows(const Eigen::SparseMatrix<double>& A, int off, int order) {
  // Map svec index -> (row, col) of the lower triangle.
  std::vector<std::pair<int, int>> pos;
  pos.reserve(svec_dim(order));
  for (int j = 0; j < order; ++j) {
    for (int i = j; i < order; ++i) pos.emplace_back(i, j);
  }
  std::vector<int> slot(A.rows(), -1);
  SdpRows out;
  for (int idx = 0; idx < svec_dim(order); ++idx) {
    const auto [p, q] = pos[idx];
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, off + idx); it; ++it) {
      const int r = static_cast<int>(it.row());
      if (slot[r] < 0) {
        slot[r] = static_cast<int>(out.rows.size());
        out.rows.push_back(r);
        out.entries.emplace_back();
      }
      auto& list = out.entries[slot[r]];
      if (p == q) {
        list.push_back({p, p, it.value()});
      } else {
        const double v = it.value() / kSqrt2;
        list.push_back({p, q, v});
        list.push_back({q, p, v});
      }
    }
  }
  out.dense.resize(out.rows.size());
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    out.dense[i] = out.entries[i].size() > static_cast<std::size_t>(2 * order);
  }
  return out;
}

/// Schur complement A H^-1 A^T.
RMatrix form_schur(const Eigen::SparseMatrix<double>& A, const std::vector<SdpRows>& sdp_rows,
                   const Scaling& s, const Layout& L) {
  // Orthant and SOC blocks through a sparse block-diagonal H^-1.
  const Eigen::SparseMatrix<double> A_ns = A.leftCols(L.n_soc_end);
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < L.n_lp; ++i) trip.emplace_back(i, i, 1.0 / (s.d[i] * s.d[i]));
  for (std::size_t k = 0; k < L.soc_off.size(); ++k) {
    const int off = L.soc_off[k];
    const int sz = L.soc_size[k];
    const RMatrix Hinv = s.soc[k].Winv * s.soc[k].Winv;
    for (int j = 0; j < sz; ++j) {
      for (int i = 0; i < sz; ++i) trip.emplace_back(off + i, off + j, Hinv(i, j));
    }
  }
  Eigen::SparseMatrix<double> Hinv(L.n_soc_end, L.n_soc_end);
  Hinv.setFromTriplets(trip.begin(), trip.end());
  const Eigen::SparseMatrix<double> AH = A_ns * Hinv;
  RMatrix M = RMatrix(AH * A_ns.transpose());

  for (std::size_t k = 0; k < L.sdp_off.size(); ++k) {
    const SdpRows& rows = sdp_rows[k];
    const RMatrix& G = s.G[k];
    const int n = L.sdp_order[k];
    const std::size_t t = rows.rows.size();
    std::vector<RMatrix> D(t);
    for (std::size_t i = 0; i < t; ++i) {
      if (!rows.dense[i]) continue;
      RMatrix S = RMatrix::Zero(n, n);
      for (const auto& e : rows.entries[i]) S(e.a, e.b) += e.v;
      D[i] = G * S * G;
    }
    for (std::size_t i = 0; i < t; ++i) {
      for (std::size_t j = i; j < t; ++j) {
        double val = 0.0;
        if (rows.dense[i] || rows.dense[j]) {
          const std::size_t di = rows.dense[i] ? i : j;
          const std::size_t sj = rows.dense[i] ? j : i;
          for (const auto& e : rows.entries[sj]) val += e.v * D[di](e.a, e.b);
        } else {
          for (const auto& e : rows.entries[i]) {
            for (const auto& f : rows.entries[j]) {
              val += e.v * f.v * G(e.b, f.a) * G(f.b, e.a);
            }
          }
        }
        const int ri = rows.rows[i];
        const int rj = rows.rows[j];
        M(ri, rj) += val;
        if (ri != rj) M(rj, ri) += val;
      }
    }
  }
  return M;
}

/// Normal equations A H^-1 A^T dy = r2 + A H^-1 r1 by Cholesky, refined
/// against the unreduced operator.
class SchurSolver {
 public:
  SchurSolver(const Eigen::SparseMatrix<double>& A, const std::vector<SdpRows>& sdp_rows,
              const Scaling& s, const Layout& L)
      : A_(A), s_(s), L_(L), M_(form_schur(A, sdp_rows, s, L)) {
    const double scale = std::max(1.0, M_.diagonal().cwiseAbs().maxCoeff());
    double reg = 1e-14 * scale;
    for (int attempt = 0; attempt < 8; ++attempt) {
      RMatrix Mr = M_;
      Mr.diagonal().array() += reg;
      llt_.compute(Mr);
      if (llt_.info() == Eigen::Success) {
        ok_ = true;
        return;
      }
      reg *= 100.0;
    }
  }

  bool ok() const { return ok_; }

  void solve(const RVector& r1, const RVector& r2, RVector& dx, RVector& dy) const {
    dy = llt_.solve(r2 + A_ * apply(Op::Hinv, s_, r1, L_));
    dx = apply(Op::Hinv, s_, A_.transpose() * dy - r1, L_);
    double prev = kInf;
    for (int it = 0; it < 5; ++it) {
      const RVector res = r2 - A_ * dx;
      const double rn = res.lpNorm<Eigen::Infinity>();
      if (rn <= 1e-15 * (1.0 + r2.lpNorm<Eigen::Infinity>()) || rn >= prev) break;
      prev = rn;
      const RVector ddy = llt_.solve(res);
      dy += ddy;
      dx += apply(Op::Hinv, s_, A_.transpose() * ddy, L_);
    }
  }

 private:
  const Eigen::SparseMatrix<double>& A_;
  const Scaling& s_;
  const Layout& L_;
  RMatrix M_;
  Eigen::LLT<RMatrix> llt_;
  bool ok_ = false;
};

/// Ruiz equilibration A <- diag(er) A diag(dc), with dc constant on each
/// cone block so that the scaled variables stay in the same cones.
void equilibrate(Eigen::SparseMatrix<double>& A, const Layout& L, RVector& er, RVector& dc) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  er = RVector::Ones(m);
  dc = RVector::Ones(n);
  std::vector<std::pair<int, int>> blocks;
  for (int i = 0; i < L.n_lp; ++i) blocks.emplace_back(i, 1);
  for (std::size_t k = 0; k < L.soc_off.size(); ++k) blocks.emplace_back(L.soc_off[k], L.soc_size[k]);
  for (std::size_t k = 0; k < L.sdp_off.size(); ++k) {
    blocks.emplace_back(L.sdp_off[k], svec_dim(L.sdp_order[k]));
  }
  auto clamp = [](double v) { return std::clamp(v, 1e-4, 1e4); };
  for (int pass = 0; pass < 15; ++pass) {
    RVector rmax = RVector::Zero(m);
    RVector cmax = RVector::Zero(n);
    for (int j = 0; j < n; ++j) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, j); it; ++it) {
        const double v = std::abs(it.value());
        rmax[it.row()] = std::max(rmax[it.row()], v);
        cmax[j] = std::max(cmax[j], v);
      }
    }
    RVector rs(m);
    RVector cs(n);
    for (int i = 0; i < m; ++i) rs[i] = rmax[i] > 0.0 ? 1.0 / std::sqrt(clamp(rmax[i])) : 1.0;
    for (const auto& [off, len] : blocks) {
      const double bmax = cmax.segment(off, len).maxCoeff();
      cs.segment(off, len).setConstant(bmax > 0.0 ? 1.0 / std::sqrt(clamp(bmax)) : 1.0);
    }
    if ((rs.array() - 1.0).abs().maxCoeff() < 1e-3 && (cs.array() - 1.0).abs().maxCoeff() < 1e-3) {
      break;
    }
    A = rs.asDiagonal() * A * cs.asDiagonal();
    er = er.cwiseProduct(rs);
    dc = dc.cwiseProduct(cs);
  }
}

/// Regularized quasi-definite system [[H + d I, A^T], [A, -d I]] with
/// H = W^T W, solved by sparse LDL^T and refined against the unregularized
/// operator.
class KktSolver {
 public:
  KktSolver(const Eigen::SparseMatrix<double>& A, const Scaling& s, const Layout& L)
      : A_(A), s_(s), L_(L) {
    const int n = L.n;
    const int m = static_cast<int>(A.rows());
    std::vector<Eigen::Triplet<double>> trip;
    double hmax = 0.0;
    auto push_h = [&](int i, int j, double v) {
      if (i == j) hmax = std::max(hmax, std::abs(v));
      if (i >= j) trip.emplace_back(i, j, v);
    };
    for (int i = 0; i < L.n_lp; ++i) push_h(i, i, s.d[i] * s.d[i]);
    for (std::size_t k = 0; k < L.soc_off.size(); ++k) {
      const int off = L.soc_off[k];
      const int sz = L.soc_size[k];
      const RMatrix H = s.soc[k].W * s.soc[k].W;
      for (int j = 0; j < sz; ++j) {
        for (int i = j; i < sz; ++i) push_h(off + i, off + j, H(i, j));
      }
    }
    for (std::size_t k = 0; k < L.sdp_off.size(); ++k) {
      const int off = L.sdp_off[k];
      const int order = L.sdp_order[k];
      const RMatrix& Ri = s.sdp[k].Rinv;
      const RMatrix G = Ri.transpose() * Ri;
      std::vector<std::pair<int, int>> pos;
      for (int j = 0; j < order; ++j) {
        for (int i = j; i < order; ++i) pos.emplace_back(i, j);
      }
      const int dim = static_cast<int>(pos.size());
      for (int q = 0; q < dim; ++q) {
        const auto [k1, l1] = pos[q];
        const double cq = k1 == l1 ? 1.0 / kSqrt2 : 1.0;
        for (int p = q; p < dim; ++p) {
          const auto [i1, j1] = pos[p];
          const double cp = i1 == j1 ? 1.0 / kSqrt2 : 1.0;
          push_h(off + p, off + q,
                 cp * cq * (G(i1, k1) * G(j1, l1) + G(i1, l1) * G(j1, k1)));
        }
      }
    }
    delta_ = 1e-8 + 4.9e-32 * hmax;
    for (int i = 0; i < n; ++i) trip.emplace_back(i, i, delta_);
    for (int j = 0; j < A.outerSize(); ++j) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, j); it; ++it) {
        trip.emplace_back(n + static_cast<int>(it.row()), j, it.value());
      }
    }
    for (int i = 0; i < m; ++i) trip.emplace_back(n + i, n + i, -delta_);
    Eigen::SparseMatrix<double> K(n + m, n + m);
    K.setFromTriplets(trip.begin(), trip.end());
    ldlt_.compute(K);
    ok_ = ldlt_.info() == Eigen::Success;
  }

  bool ok() const { return ok_; }

  /// Solves H dx - A^T dy = -r1, A dx = r2.
  void solve(const RVector& r1, const RVector& r2, RVector& dx, RVector& dy) const {
    const int n = L_.n;
    const int m = static_cast<int>(r2.size());
    RVector rhs(n + m);
    rhs.head(n) = -r1;
    rhs.tail(m) = r2;
    RVector u = ldlt_.solve(rhs);
    double prev = kInf;
    for (int it = 0; it < 10; ++it) {
      const RVector res = rhs - apply_kkt(u);
      const double rn = res.lpNorm<Eigen::Infinity>();
      if (rn <= 1e-14 * (1.0 + rhs.lpNorm<Eigen::Infinity>()) || rn >= prev) break;
      prev = rn;
      u += ldlt_.solve(res);
    }
    dx = u.head(n);
    dy = -u.tail(m);
  }

 private:
  RVector apply_kkt(const RVector& u) const {
    const int n = L_.n;
    const int m = static_cast<int>(A_.rows());
    RVector out(n + m);
    const RVector ux = u.head(n);
    const RVector uy = u.tail(m);
    out.head(n) = apply(Op::WT, s_, apply(Op::W, s_, ux, L_), L_) + A_.transpose() * uy;
    out.tail(m) = A_ * ux;
    return out;
  }

  const Eigen::SparseMatrix<double>& A_;
  const Scaling& s_;
  const Layout& L_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt_;
  double delta_ = 0.0;
  bool ok_ = false;
};

struct Direction {
  RVector dx, dy, dz;
  double dtau = 0.0;
  double dkappa = 0.0;
};

}  // namespace

const char* status_name(Status s) {
  switch (s) {
    case Status::optimal:
      return "optimal";
    case Status::primal_infeasible:
      return "infeasible";
    case Status::dual_infeasible:
      return "unbounded";
    case Status::numerical_limit:
      return "numerical-limit";
  }
  return "?";
}

int Cones::dim() const {
  int n = lp;
  for (int s : soc) n += s;
  for (int o : sdp) n += svec_dim(o);
  return n;
}

int Cones::degree() const {
  int d = lp + static_cast<int>(soc.size());
  for (int o : sdp) d += o;
  return d;
}

int svec_dim(int order) { return order * (order + 1) / 2; }

RVector svec(const RMatrix& S) {
  const int n = static_cast<int>(S.rows());
  RVector v(svec_dim(n));
  int idx = 0;
  for (int j = 0; j < n; ++j) {
    v[idx++] = S(j, j);
    for (int i = j + 1; i < n; ++i) v[idx++] = kSqrt2 * 0.5 * (S(i, j) + S(j, i));
  }
  return v;
}

RMatrix smat(const Eigen::Ref<const RVector>& v, int order) {
  RMatrix S(order, order);
  int idx = 0;
  for (int j = 0; j < order; ++j) {
    S(j, j) = v[idx++];
    for (int i = j + 1; i < order; ++i) {
      S(i, j) = S(j, i) = v[idx++] / kSqrt2;
    }
  }
  return S;
}

SocScaling soc_scaling(const RVector& x, const RVector& z) {
  const Eigen::Index m = x.size();
  const double xn = std::sqrt(soc_jnorm2(x));
  const double zn = std::sqrt(soc_jnorm2(z));
  const RVector xb = x / xn;
  const RVector zb = z / zn;
  const double gamma = std::sqrt(0.5 * (1.0 + xb.dot(zb)));
  RVector Jxb = xb;
  Jxb.tail(m - 1) *= -1.0;
  const RVector wb = (zb + Jxb) / (2.0 * gamma);
  const double beta = std::sqrt(zn / xn);
  RVector v = wb;
  v[0] += 1.0;
  v /= std::sqrt(2.0 * (wb[0] + 1.0));
  RMatrix J = RMatrix::Identity(m, m);
  J.bottomRightCorner(m - 1, m - 1) *= -1.0;
  SocScaling s;
  s.W = beta * (2.0 * v * v.transpose() - J);
  const RVector Jv = J * v;
  s.Winv = (2.0 * Jv * Jv.transpose() - J) / beta;
  s.lambda = s.W * x;
  return s;
}

SdpScaling sdp_scaling(const RMatrix& X, const RMatrix& Z) {
  const RMatrix Lx = Eigen::LLT<RMatrix>(X).matrixL();
  const RMatrix Lz = Eigen::LLT<RMatrix>(Z).matrixL();
  Eigen::JacobiSVD<RMatrix> svd(Lz.transpose() * Lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVector sv = svd.singularValues();
  const RVector inv_sqrt = sv.cwiseSqrt().cwiseInverse();
  SdpScaling s;
  s.R = Lx * svd.matrixV() * inv_sqrt.asDiagonal();
  s.Rinv = inv_sqrt.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
  s.lambda = sv;
  return s;
}

Result solve(const Problem& problem, const Settings& settings) {
  const Layout L(problem.cones);
  const int n = L.n;
  const int m0 = static_cast<int>(problem.A.rows());
  if (problem.A.cols() != n || problem.c.size() != n || problem.b.size() != m0) {
    throw DimensionError("ipm::solve: A, b, c dimensions disagree with the cone layout");
  }
  for (int s : problem.cones.soc) {
    if (s < 1) throw DimensionError("ipm::solve: SOC block of size < 1");
  }

  Result result;

  // Row normalization; empty rows are dropped or prove infeasibility.
  Eigen::SparseMatrix<double, Eigen::RowMajor> Arow = problem.A;
  std::vector<int> keep;
  RVector row_scale(m0);
  for (int i = 0; i < m0; ++i) {
    const double nrm = Arow.row(i).norm();
    if (nrm == 0.0) {
      if (problem.b[i] != 0.0) {
        result.status = Status::primal_infeasible;
        result.x = RVector::Zero(n);
        result.y = RVector::Zero(m0);
        result.z = RVector::Zero(n);
        return result;
      }
      row_scale[i] = 0.0;
      continue;
    }
    row_scale[i] = 1.0 / nrm;
    keep.push_back(i);
  }
  const int m = static_cast<int>(keep.size());
  std::vector<Eigen::Triplet<double>> trip;
  RVector b(m);
  for (int r = 0; r < m; ++r) {
    const int i = keep[r];
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Arow, i); it; ++it) {
      trip.emplace_back(r, static_cast<int>(it.col()), it.value() * row_scale[i]);
    }
    b[r] = problem.b[i] * row_scale[i];
  }
  Eigen::SparseMatrix<double> A(m, n);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  RVector er, dc;
  equilibrate(A, L, er, dc);
  b = b.cwiseProduct(er);
  RVector c = problem.c.cwiseProduct(dc);
  const double sb = std::max(1.0, b.cwiseAbs().maxCoeff());
  const double sc = std::max(1.0, c.cwiseAbs().maxCoeff());
  b /= sb;
  c /= sc;
  const Eigen::SparseMatrix<double> At = A.transpose();
  const RVector er_inv = er.cwiseInverse();
  const RVector dc_inv = dc.cwiseInverse();

  // Factor the full system unless its dense PSD blocks cost more than the
  // dense normal equations.
  double kkt_cost = 0.0;
  for (int order : L.sdp_order) kkt_cost += std::pow(svec_dim(order), 3);
  const bool use_kkt = kkt_cost <= std::pow(static_cast<double>(m), 3);
  std::vector<SdpRows> sdp_rows;
  if (!use_kkt) {
    for (std::size_t k = 0; k < L.sdp_off.size(); ++k) {
      sdp_rows.push_back(collect_sdp_rows(A, L.sdp_off[k], L.sdp_order[k]));
    }
  }

  const double nu = problem.cones.degree();
  const RVector e = identity(L);
  RVector x = e;
  RVector z = e;
  RVector y = RVector::Zero(m);
  double tau = 1.0;
  double kappa = 1.0;
  const double bnorm = b.cwiseProduct(er_inv).norm();
  const double cnorm = c.cwiseProduct(dc_inv).norm();

  auto finish = [&](Status st) {
    result.status = st;
    const double denom = (st == Status::optimal || st == Status::numerical_limit) ? tau : 1.0;
    result.x = x.cwiseProduct(dc) * (sb / denom);
    RVector yfull = RVector::Zero(m0);
    for (int r = 0; r < m; ++r) yfull[keep[r]] = y[r] * er[r] * row_scale[keep[r]];
    result.y = yfull * (sc / denom);
    result.z = z.cwiseProduct(dc_inv) * (sc / denom);
    result.primal_objective = problem.c.dot(result.x);
    result.dual_objective = problem.b.dot(result.y);
    return result;
  };

  struct Iterate {
    RVector x, y, z;
    double tau, kappa, merit;
    double pres, dres, gap;
  };
  Iterate best{x, y, z, tau, kappa, kInf, kInf, kInf, kInf};

  int stalls = 0;
  for (int iter = 0; iter <= settings.max_iter; ++iter) {
    result.iterations = iter;
    const RVector Ax = A * x;
    const RVector Aty = At * y;
    const RVector rp = b * tau - Ax;
    const RVector rd = c * tau - Aty - z;
    const double cx = c.dot(x);
    const double by = b.dot(y);
    const double rg = kappa + cx - by;

    const double pres = rp.cwiseProduct(er_inv).norm() / (tau * (1.0 + bnorm));
    const double dres = rd.cwiseProduct(dc_inv).norm() / (tau * (1.0 + cnorm));
    const double pobj = cx / tau;
    const double dobj = by / tau;
    const double gap_abs = x.dot(z) / (tau * tau);
    const double gap_rel = std::abs(pobj - dobj) / std::max(1.0, std::min(std::abs(pobj), std::abs(dobj)));
    result.primal_residual = pres;
    result.dual_residual = dres;
    result.gap = std::min(gap_abs, gap_rel);
    const double merit = std::max({pres, dres, result.gap});
    if (merit < best.merit) {
      best = {x, y, z, tau, kappa, merit, pres, dres, result.gap};
    }
    if (settings.verbose) {
      std::fprintf(stderr, "%3d pobj %+.6e dobj %+.6e pres %.2e dres %.2e gap %.2e tau %.2e kap %.2e\n",
                   iter, pobj * sb * sc, dobj * sb * sc, pres, dres, result.gap, tau, kappa);
    }
    if (pres <= settings.tol && dres <= settings.tol &&
        (gap_abs <= settings.tol || gap_rel <= settings.tol)) {
      return finish(Status::optimal);
    }
    if (by > 0.0 && (Aty + z).cwiseProduct(dc_inv).norm() <= settings.tol * by) {
      return finish(Status::primal_infeasible);
    }
    if (cx < 0.0 && Ax.cwiseProduct(er_inv).norm() <= settings.tol * -cx) {
      return finish(Status::dual_infeasible);
    }
    if (iter == settings.max_iter || stalls >= 5) break;

    const Scaling S = compute_scaling(x, z, L);
    std::optional<KktSolver> kkt;
    std::optional<SchurSolver> schur;
    if (use_kkt) {
      kkt.emplace(A, S, L);
      if (!kkt->ok()) break;
    } else {
      schur.emplace(A, sdp_rows, S, L);
      if (!schur->ok()) break;
    }
    auto solve_reduced = [&](const RVector& r1, const RVector& r2, RVector& dx, RVector& dy) {
      if (kkt) {
        kkt->solve(r1, r2, dx, dy);
      } else {
        schur->solve(r1, r2, dx, dy);
      }
    };
    RVector dx2, dy2;
    solve_reduced(c, b, dx2, dy2);
    const double denom_tau = -c.dot(dx2) + b.dot(dy2) + kappa / tau;

    auto direction = [&](const RVector& rc, double rtau, double eta) {
      Direction d;
      const RVector q = jordan_divide(S, rc, L);
      RVector dx1, dy1;
      solve_reduced(eta * rd - apply(Op::WT, S, q, L), eta * rp, dx1, dy1);
      d.dtau = (eta * rg + rtau / tau + c.dot(dx1) - b.dot(dy1)) / denom_tau;
      d.dx = dx1 + d.dtau * dx2;
      d.dy = dy1 + d.dtau * dy2;
      d.dz = eta * rd + d.dtau * c - At * d.dy;
      d.dkappa = (rtau - kappa * d.dtau) / tau;
      return d;
    };
    auto step_length = [&](const Direction& d, RVector& wdx, RVector& wdz) {
      wdx = apply(Op::W, S, d.dx, L);
      wdz = apply(Op::WinvT, S, d.dz, L);
      double a = std::min(max_step(S, wdx, L), max_step(S, wdz, L));
      if (d.dtau < 0.0) a = std::min(a, -tau / d.dtau);
      if (d.dkappa < 0.0) a = std::min(a, -kappa / d.dkappa);
      return a;
    };

    const RVector lam_sq = jordan_product(S.lambda, S.lambda, L);
    const Direction aff = direction(-lam_sq, -tau * kappa, 1.0);
    RVector wdx_a, wdz_a;
    const double alpha_aff = std::min(1.0, step_length(aff, wdx_a, wdz_a));
    const double mu = (S.lambda.squaredNorm() + tau * kappa) / (nu + 1.0);
    const double sigma = std::pow(1.0 - alpha_aff, 3);

    const RVector rc = -lam_sq - jordan_product(wdz_a, wdx_a, L) + sigma * mu * e;
    const double rtau = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
    const Direction d = direction(rc, rtau, 1.0 - sigma);
    RVector wdx, wdz;
    const double alpha = std::min(1.0, 0.99 * step_length(d, wdx, wdz));
    if (!(alpha > 1e-10)) {
      ++stalls;
      continue;
    }
    stalls = alpha < 1e-6 ? stalls + 1 : 0;

    const RVector x_new = x + alpha * d.dx;
    const RVector z_new = z + alpha * d.dz;
    if (!in_interior(x_new, L) || !in_interior(z_new, L)) {
      break;
    }
    x = x_new;
    z = z_new;
    y += alpha * d.dy;
    tau += alpha * d.dtau;
    kappa += alpha * d.dkappa;
  }
  x = best.x;
  y = best.y;
  z = best.z;
  tau = best.tau;
  kappa = best.kappa;
  result.primal_residual = best.pres;
  result.dual_residual = best.dres;
  result.gap = best.gap;
  return finish(Status::numerical_limit);
}

}  // namespace starsec::ipm
