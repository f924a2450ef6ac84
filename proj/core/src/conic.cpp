// SPDX-License-Identifier: Apache-2.0

#include "starsec/conic.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace starsec::conic {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

std::atomic<int> next_tag{0};

bool same_var(const VarRef& a, const VarRef& b) { return a.tag == b.tag && a.index == b.index; }

}  // namespace

const char* status_name(Status s) {
  switch (s) {
    case Status::optimal:
      return "optimal";
    case Status::infeasible:
      return "infeasible";
    case Status::unbounded:
      return "unbounded";
    case Status::numerical_limit:
      return "numerical-limit";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Expressions

Expr::Expr(const Scalar& v) { scalars_.emplace_back(v.ref, 1.0); }

Expr& Expr::operator+=(const Expr& o) {
  constant_ += o.constant_;
  for (const auto& [ref, coef] : o.scalars_) {
    bool merged = false;
    for (auto& [r, c] : scalars_) {
      if (same_var(r, ref)) {
        c += coef;
        merged = true;
        break;
      }
    }
    if (!merged) scalars_.emplace_back(ref, coef);
  }
  herms_.insert(herms_.end(), o.herms_.begin(), o.herms_.end());
  return *this;
}

Expr& Expr::operator-=(const Expr& o) { return *this += -1.0 * o; }

Expr& Expr::operator*=(double k) {
  constant_ *= k;
  for (auto& s : scalars_) s.second *= k;
  for (auto& h : herms_) {
    for (auto& e : h.entries) e.c *= k;
  }
  return *this;
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant()) return b * a.constant();
  if (b.is_constant()) return a * b.constant();
  throw BuilderError("non-affine expression: product of two variable expressions");
}

Expr Expr::trace_inner(const CMatrix& C, const Hermitian& X) {
  if (C.rows() != X.order || C.cols() != X.order) {
    throw DimensionError("trace_inner: coefficient order differs from the variable order");
  }
  Expr e;
  HermTerm t{X.ref, X.order, {}};
  for (int j = 0; j < X.order; ++j) {
    for (int i = 0; i < X.order; ++i) {
      if (C(i, j) != cplx(0.0, 0.0)) t.entries.push_back({i, j, C(i, j)});
    }
  }
  e.herms_.push_back(std::move(t));
  return e;
}

Expr Expr::trace(const Hermitian& X) {
  Expr e;
  HermTerm t{X.ref, X.order, {}};
  for (int k = 0; k < X.order; ++k) t.entries.push_back({k, k, 1.0});
  e.herms_.push_back(std::move(t));
  return e;
}

Expr Expr::real_entry(const Hermitian& X, int i, int j) {
  if (i < 0 || j < 0 || i >= X.order || j >= X.order) {
    throw DimensionError("real_entry: index out of range");
  }
  Expr e;
  e.herms_.push_back({X.ref, X.order, {{j, i, cplx(1.0, 0.0)}}});
  return e;
}

Expr Expr::imag_entry(const Hermitian& X, int i, int j) {
  if (i < 0 || j < 0 || i >= X.order || j >= X.order) {
    throw DimensionError("imag_entry: index out of range");
  }
  Expr e;
  e.herms_.push_back({X.ref, X.order, {{j, i, cplx(0.0, -1.0)}}});
  return e;
}

// ---------------------------------------------------------------------------
// Problem builder

Problem::Problem() : tag_(next_tag++) {}

void Problem::check_name(const std::string& name) {
  if (name.empty()) throw BuilderError("variable name must not be empty");
  if (names_.contains(name)) throw BuilderError("duplicate variable name '" + name + "'");
  names_[name] = 0;
}

Scalar Problem::add_scalar(const std::string& name, Domain domain) {
  check_name(name);
  scalars_.push_back({name, domain});
  return Scalar{{tag_, static_cast<int>(scalars_.size()) - 1}};
}

Hermitian Problem::add_hermitian(const std::string& name, int order, bool psd) {
  if (order < 1) throw BuilderError("Hermitian variable '" + name + "' must have order >= 1");
  check_name(name);
  herms_.push_back({name, order, psd});
  return Hermitian{{tag_, static_cast<int>(herms_.size()) - 1}, order};
}

void Problem::check(const Expr& e) const {
  for (const auto& [ref, coef] : e.scalars()) {
    if (ref.tag != tag_ || ref.index < 0 || ref.index >= scalar_count()) {
      throw BuilderError("expression references an undeclared scalar variable");
    }
  }
  for (const auto& h : e.herms()) {
    if (h.var.tag != tag_ || h.var.index < 0 || h.var.index >= hermitian_count()) {
      throw BuilderError("expression references an undeclared Hermitian variable");
    }
    if (h.order != herms_[h.var.index].order) {
      throw DimensionError("Hermitian term order differs from its variable");
    }
  }
}

void Problem::add_eq(const Expr& e, std::string label) {
  check(e);
  constraints_.push_back({ConstraintKind::eq, std::move(label), {e}, {}});
}

void Problem::add_ge(const Expr& e, std::string label) {
  check(e);
  constraints_.push_back({ConstraintKind::ineq, std::move(label), {e}, {}});
}

void Problem::add_le(const Expr& lhs, const Expr& rhs, std::string label) {
  add_ge(rhs - lhs, std::move(label));
}

void Problem::add_soc(const std::vector<Expr>& x, const Expr& t, std::string label) {
  std::vector<Expr> exprs{t};
  exprs.insert(exprs.end(), x.begin(), x.end());
  for (const auto& e : exprs) check(e);
  constraints_.push_back({ConstraintKind::soc, std::move(label), std::move(exprs), {}});
}

void Problem::add_rotated_soc(const std::vector<Expr>& p, const Expr& y, const Expr& z,
                              std::string label) {
  std::vector<Expr> x;
  for (const auto& e : p) x.push_back(2.0 * e);
  x.push_back(y - z);
  add_soc(x, y + z, std::move(label));
}

void Problem::add_psd(const MatrixExpr& m, std::string label) {
  if (m.terms.empty()) throw BuilderError("PSD constraint without variables");
  const int n = m.terms.front().first.order;
  if (m.constant.size() != 0 && (m.constant.rows() != n || m.constant.cols() != n)) {
    throw DimensionError("PSD constraint: constant order differs from the variables");
  }
  for (const auto& [X, a] : m.terms) {
    if (X.ref.tag != tag_ || X.ref.index < 0 || X.ref.index >= hermitian_count()) {
      throw BuilderError("PSD constraint references an undeclared Hermitian variable");
    }
    if (X.order != n) throw DimensionError("PSD constraint mixes matrix orders");
  }
  MatrixExpr copy = m;
  if (copy.constant.size() == 0) copy.constant = CMatrix::Zero(n, n);
  constraints_.push_back({ConstraintKind::psd, std::move(label), {}, std::move(copy)});
}

void Problem::maximize(const Expr& e) {
  check(e);
  objective_ = e;
  sense_ = Sense::maximize;
}

void Problem::minimize(const Expr& e) {
  check(e);
  objective_ = e;
  sense_ = Sense::minimize;
}

namespace {

void dump_expr(std::ostringstream& out, const Expr& e, const Problem& p) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "  const %.17g\n", e.constant());
  out << buf;
  for (const auto& [ref, coef] : e.scalars()) {
    std::snprintf(buf, sizeof buf, "  s %s %.17g\n", p.scalar_info()[ref.index].name.c_str(), coef);
    out << buf;
  }
  for (const auto& h : e.herms()) {
    for (const auto& en : h.entries) {
      std::snprintf(buf, sizeof buf, "  h %s %d %d %.17g %.17g\n",
                    p.hermitian_info()[h.var.index].name.c_str(), en.i, en.j, en.c.real(),
                    en.c.imag());
      out << buf;
    }
  }
}

const char* kind_name(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::eq:
      return "eq";
    case ConstraintKind::ineq:
      return "ineq";
    case ConstraintKind::soc:
      return "soc";
    case ConstraintKind::psd:
      return "psd";
  }
  return "?";
}

}  // namespace

std::string Problem::dump() const {
  std::ostringstream out;
  out << "starsec-conic 1\n";
  for (const auto& s : scalars_) {
    out << "var " << s.name << " scalar " << (s.domain == Domain::nonneg ? "nonneg" : "free")
        << '\n';
  }
  for (const auto& h : herms_) {
    out << "var " << h.name << " hermitian " << h.order << ' ' << (h.psd ? "psd" : "free")
        << '\n';
  }
  out << "objective " << (sense_ == Sense::maximize ? "maximize" : "minimize") << '\n';
  dump_expr(out, objective_, *this);
  for (const auto& c : constraints_) {
    out << "constraint " << kind_name(c.kind) << ' ' << (c.label.empty() ? "-" : c.label) << ' '
        << (c.kind == ConstraintKind::psd ? c.matrix.terms.size() : c.exprs.size()) << '\n';
    if (c.kind == ConstraintKind::psd) {
      char buf[160];
      for (int j = 0; j < c.matrix.constant.cols(); ++j) {
        for (int i = 0; i < c.matrix.constant.rows(); ++i) {
          const cplx v = c.matrix.constant(i, j);
          if (v == cplx(0.0, 0.0)) continue;
          std::snprintf(buf, sizeof buf, "  const %d %d %.17g %.17g\n", i, j, v.real(), v.imag());
          out << buf;
        }
      }
      for (const auto& [X, a] : c.matrix.terms) {
        std::snprintf(buf, sizeof buf, "  m %s %.17g\n", herms_[X.ref.index].name.c_str(), a);
        out << buf;
      }
    } else {
      for (const auto& e : c.exprs) {
        out << " expr\n";
        dump_expr(out, e, *this);
      }
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Embedding

RMatrix embed(const CMatrix& X) {
  const auto n = X.rows();
  RMatrix Y(2 * n, 2 * n);
  Y.topLeftCorner(n, n) = X.real();
  Y.bottomRightCorner(n, n) = X.real();
  Y.topRightCorner(n, n) = -X.imag();
  Y.bottomLeftCorner(n, n) = X.imag();
  return Y;
}

CMatrix unembed(const RMatrix& Y) {
  const auto n = Y.rows() / 2;
  CMatrix X(n, n);
  X.real() = 0.5 * (Y.topLeftCorner(n, n) + Y.bottomRightCorner(n, n));
  X.imag() = 0.5 * (Y.bottomLeftCorner(n, n) - Y.topRightCorner(n, n));
  return X;
}

// ---------------------------------------------------------------------------
// Compilation and solve

namespace {

struct Compiled {
  ipm::Problem std;
  std::vector<int> scalar_pos, scalar_neg;  // LP columns (-1 if none)
  std::vector<int> herm_pos, herm_neg;      // SDP block offsets (-1 if none)
  double objective_sign = 1.0;              // +1 minimize, -1 maximize
};

class RowWriter {
 public:
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> rhs;

  int new_row(double b) {
    rhs.push_back(b);
    return static_cast<int>(rhs.size()) - 1;
  }

  void add(int row, int col, double v) {
    if (v != 0.0) trip.emplace_back(row, col, v);
  }

  /// Adds sign * Re(c * X_ji) with X the matrix recovered from the PSD block
  /// of order 2n starting at `off`.
  void herm_entry(int row, int off, int n, int i, int j, cplx c, double sign) {
    const double a = 0.5 * sign * c.real();
    const double b = 0.5 * sign * c.imag();
    y_entry(row, off, n, j, i, a);
    y_entry(row, off, n, j + n, i + n, a);
    y_entry(row, off, n, j + n, i, -b);
    y_entry(row, off, n, j, i + n, b);
  }

 private:
  void y_entry(int row, int off, int n, int p, int q, double w) {
    if (w == 0.0) return;
    const int N = 2 * n;
    const int hi = std::max(p, q);
    const int lo = std::min(p, q);
    const int idx = lo * N - lo * (lo - 1) / 2 + (hi - lo);
    add(row, off + idx, p == q ? w : w / kSqrt2);
  }
};

void write_expr(RowWriter& w, int row, const Expr& e, double sign, const Compiled& c) {
  for (const auto& [ref, coef] : e.scalars()) {
    w.add(row, c.scalar_pos[ref.index], sign * coef);
    if (c.scalar_neg[ref.index] >= 0) w.add(row, c.scalar_neg[ref.index], -sign * coef);
  }
  for (const auto& h : e.herms()) {
    const int idx = h.var.index;
    for (const auto& en : h.entries) {
      w.herm_entry(row, c.herm_pos[idx], h.order, en.i, en.j, en.c, sign);
      if (c.herm_neg[idx] >= 0) w.herm_entry(row, c.herm_neg[idx], h.order, en.i, en.j, en.c, -sign);
    }
  }
}

Compiled compile(const Problem& p) {
  Compiled c;
  auto& cones = c.std.cones;
  int col = 0;
  for (const auto& s : p.scalar_info()) {
    c.scalar_pos.push_back(col++);
    c.scalar_neg.push_back(s.domain == Domain::free ? col++ : -1);
  }
  std::vector<int> slack_col(p.constraints().size(), -1);
  for (std::size_t k = 0; k < p.constraints().size(); ++k) {
    if (p.constraints()[k].kind == ConstraintKind::ineq) slack_col[k] = col++;
  }
  cones.lp = col;
  std::vector<int> soc_off(p.constraints().size(), -1);
  for (std::size_t k = 0; k < p.constraints().size(); ++k) {
    const auto& con = p.constraints()[k];
    if (con.kind != ConstraintKind::soc) continue;
    soc_off[k] = col;
    cones.soc.push_back(static_cast<int>(con.exprs.size()));
    col += static_cast<int>(con.exprs.size());
  }
  for (const auto& h : p.hermitian_info()) {
    c.herm_pos.push_back(col);
    cones.sdp.push_back(2 * h.order);
    col += ipm::svec_dim(2 * h.order);
    if (h.psd) {
      c.herm_neg.push_back(-1);
    } else {
      c.herm_neg.push_back(col);
      cones.sdp.push_back(2 * h.order);
      col += ipm::svec_dim(2 * h.order);
    }
  }
  std::vector<int> psd_off(p.constraints().size(), -1);
  for (std::size_t k = 0; k < p.constraints().size(); ++k) {
    const auto& con = p.constraints()[k];
    if (con.kind != ConstraintKind::psd) continue;
    const int n = static_cast<int>(con.matrix.constant.rows());
    psd_off[k] = col;
    cones.sdp.push_back(2 * n);
    col += ipm::svec_dim(2 * n);
  }
  const int n_cols = col;

  RowWriter w;
  for (std::size_t k = 0; k < p.constraints().size(); ++k) {
    const auto& con = p.constraints()[k];
    switch (con.kind) {
      case ConstraintKind::eq: {
        const int row = w.new_row(-con.exprs[0].constant());
        write_expr(w, row, con.exprs[0], 1.0, c);
        break;
      }
      case ConstraintKind::ineq: {
        const int row = w.new_row(-con.exprs[0].constant());
        write_expr(w, row, con.exprs[0], 1.0, c);
        w.add(row, slack_col[k], -1.0);
        break;
      }
      case ConstraintKind::soc: {
        for (std::size_t i = 0; i < con.exprs.size(); ++i) {
          const int row = w.new_row(con.exprs[i].constant());
          w.add(row, soc_off[k] + static_cast<int>(i), 1.0);
          write_expr(w, row, con.exprs[i], -1.0, c);
        }
        break;
      }
      case ConstraintKind::psd: {
        const auto& M = con.matrix;
        const int n = static_cast<int>(M.constant.rows());
        for (int j = 0; j < n; ++j) {
          for (int i = 0; i <= j; ++i) {
            for (int part = 0; part < (i == j ? 1 : 2); ++part) {
              // part 0: Re S_ij = Re M_ij ; part 1: Im S_ij = Im M_ij
              const cplx coef = part == 0 ? cplx(1.0, 0.0) : cplx(0.0, -1.0);
              const double b = part == 0 ? M.constant(i, j).real() : M.constant(i, j).imag();
              const int row = w.new_row(b);
              w.herm_entry(row, psd_off[k], n, j, i, coef, 1.0);
              for (const auto& [X, a] : M.terms) {
                const int idx = X.ref.index;
                w.herm_entry(row, c.herm_pos[idx], n, j, i, coef, -a);
                if (c.herm_neg[idx] >= 0) w.herm_entry(row, c.herm_neg[idx], n, j, i, coef, a);
              }
            }
          }
        }
        break;
      }
    }
  }

  c.std.A.resize(static_cast<int>(w.rhs.size()), n_cols);
  c.std.A.setFromTriplets(w.trip.begin(), w.trip.end());
  c.std.b = Eigen::Map<const RVector>(w.rhs.data(), static_cast<Eigen::Index>(w.rhs.size()));

  c.objective_sign = p.sense() == Sense::maximize ? -1.0 : 1.0;
  RowWriter obj;
  obj.new_row(0.0);
  write_expr(obj, 0, p.objective(), c.objective_sign, c);
  c.std.c = RVector::Zero(n_cols);
  for (const auto& t : obj.trip) c.std.c[t.col()] += t.value();
  return c;
}

struct Values {
  std::vector<double> scalars;
  std::vector<CMatrix> herms;
};

double term_value(const HermTerm& h, const Values& v) {
  const CMatrix& X = v.herms[h.var.index];
  double s = 0.0;
  for (const auto& e : h.entries) s += (e.c * X(e.j, e.i)).real();
  return s;
}

/// Value and magnitude scale |const| + sum |term|.
std::pair<double, double> evaluate(const Expr& e, const Values& v) {
  double val = e.constant();
  double scale = std::abs(e.constant());
  for (const auto& [ref, coef] : e.scalars()) {
    const double t = coef * v.scalars[ref.index];
    val += t;
    scale += std::abs(t);
  }
  for (const auto& h : e.herms()) {
    const double t = term_value(h, v);
    val += t;
    scale += std::abs(t);
  }
  return {val, scale};
}

}  // namespace

double Solution::value(const std::string& name) const {
  const auto it = scalars.find(name);
  if (it == scalars.end()) throw std::out_of_range("no scalar named '" + name + "'");
  return it->second;
}

const CMatrix& Solution::matrix(const std::string& name) const {
  const auto it = matrices.find(name);
  if (it == matrices.end()) throw std::out_of_range("no matrix named '" + name + "'");
  return it->second;
}

Solution solve(const Problem& p, double tol, int max_iter, bool verbose) {
  const Compiled c = compile(p);
  ipm::Settings settings;
  settings.tol = std::max(1e-2 * tol, 1e-12);
  settings.max_iter = max_iter;
  settings.verbose = verbose;
  const ipm::Result r = ipm::solve(c.std, settings);

  Solution sol;
  sol.iterations = r.iterations;
  switch (r.status) {
    case ipm::Status::optimal:
      sol.status = Status::optimal;
      break;
    case ipm::Status::primal_infeasible:
      sol.status = Status::infeasible;
      break;
    case ipm::Status::dual_infeasible:
      sol.status = Status::unbounded;
      break;
    case ipm::Status::numerical_limit:
      sol.status = Status::numerical_limit;
      break;
  }

  Values v;
  for (int i = 0; i < p.scalar_count(); ++i) {
    double x = r.x[c.scalar_pos[i]];
    if (c.scalar_neg[i] >= 0) x -= r.x[c.scalar_neg[i]];
    v.scalars.push_back(x);
    sol.scalars[p.scalar_info()[i].name] = x;
  }
  for (int i = 0; i < p.hermitian_count(); ++i) {
    const int n = p.hermitian_info()[i].order;
    const int dim = ipm::svec_dim(2 * n);
    CMatrix X = unembed(ipm::smat(r.x.segment(c.herm_pos[i], dim), 2 * n));
    if (c.herm_neg[i] >= 0) X -= unembed(ipm::smat(r.x.segment(c.herm_neg[i], dim), 2 * n));
    v.herms.push_back(X);
    sol.matrices[p.hermitian_info()[i].name] = X;
  }
  sol.objective_value = evaluate(p.objective(), v).first;

  if (sol.status == Status::infeasible || sol.status == Status::unbounded) {
    return sol;
  }

  double worst = 0.0;
  for (int i = 0; i < p.scalar_count(); ++i) {
    if (p.scalar_info()[i].domain == Domain::nonneg) {
      worst = std::max(worst, std::max(0.0, -v.scalars[i]) / (1.0 + std::abs(v.scalars[i])));
    }
  }
  for (int i = 0; i < p.hermitian_count(); ++i) {
    if (!p.hermitian_info()[i].psd) continue;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(v.herms[i], Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()[0];
    worst = std::max(worst, std::max(0.0, -lo) / (1.0 + es.eigenvalues().cwiseAbs().maxCoeff()));
  }
  for (const auto& con : p.constraints()) {
    double viol = 0.0;
    switch (con.kind) {
      case ConstraintKind::eq: {
        const auto [val, scale] = evaluate(con.exprs[0], v);
        viol = std::abs(val) / (1.0 + scale);
        break;
      }
      case ConstraintKind::ineq: {
        const auto [val, scale] = evaluate(con.exprs[0], v);
        viol = std::max(0.0, -val) / (1.0 + scale);
        break;
      }
      case ConstraintKind::soc: {
        const auto [t, t_scale] = evaluate(con.exprs[0], v);
        double sq = 0.0;
        double scale = t_scale;
        for (std::size_t i = 1; i < con.exprs.size(); ++i) {
          const auto [x, x_scale] = evaluate(con.exprs[i], v);
          sq += x * x;
          scale += x_scale;
        }
        viol = std::max(0.0, std::sqrt(sq) - t) / (1.0 + scale);
        break;
      }
      case ConstraintKind::psd: {
        CMatrix M = con.matrix.constant;
        for (const auto& [X, a] : con.matrix.terms) M += a * v.herms[X.ref.index];
        Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (M + M.adjoint()), Eigen::EigenvaluesOnly);
        viol = std::max(0.0, -es.eigenvalues()[0]) /
               (1.0 + es.eigenvalues().cwiseAbs().maxCoeff());
        break;
      }
    }
    worst = std::max(worst, viol);
  }
  sol.max_constraint_violation = worst;
  const bool converged = std::max({r.primal_residual, r.dual_residual, r.gap}) <= tol;
  if (sol.status == Status::numerical_limit && converged && worst <= tol) {
    sol.status = Status::optimal;
  }
  if (sol.status == Status::optimal && worst > tol) {
    sol.status = Status::numerical_limit;
  }
  return sol;
}

}  // namespace starsec::conic
