// SPDX-License-Identifier: Apache-2.0
//
// Small conic modeling layer over Hermitian matrix and real scalar variables.
//
// Affine expressions combine a constant, real scalar variables and terms
// Re Tr(C X) for Hermitian variables X. Constraints are linear equalities and
// inequalities, second-order cones, rotated cones and PSD constraints. A
// problem compiles to the real standard form of ipm::solve: every Hermitian
// X of order n becomes a real PSD block Y of order 2n, read back as
// X = (Y11 + Y22)/2 + i (Y21 - Y12)/2, and Re Tr(C X) = Tr(C_hat Y)/2 with
// C_hat = [[Re C, -Im C], [Im C, Re C]] for Hermitian C.

#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "starsec/interior_point.hpp"
#include "starsec/types.hpp"

namespace starsec::conic {

/// Malformed model: duplicate name, undeclared variable, non-affine term.
class BuilderError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct VarRef {
  int tag = -1;  ///< owning problem
  int index = -1;
};

struct Scalar {
  VarRef ref;
};

struct Hermitian {
  VarRef ref;
  int order = 0;
};

struct HermEntry {
  int i;
  int j;
  cplx c;
};

/// Re Tr(C X) with C given by its nonzero entries.
struct HermTerm {
  VarRef var;
  int order = 0;
  std::vector<HermEntry> entries;
};

class Expr {
 public:
  Expr(double constant = 0.0) : constant_(constant) {}  // NOLINT(google-explicit-constructor)
  Expr(const Scalar& v);                                 // NOLINT(google-explicit-constructor)

  double constant() const { return constant_; }
  const std::vector<std::pair<VarRef, double>>& scalars() const { return scalars_; }
  const std::vector<HermTerm>& herms() const { return herms_; }
  bool is_constant() const { return scalars_.empty() && herms_.empty(); }

  Expr& operator+=(const Expr& o);
  Expr& operator-=(const Expr& o);
  Expr& operator*=(double k);

  friend Expr operator+(Expr a, const Expr& b) { return a += b; }
  friend Expr operator-(Expr a, const Expr& b) { return a -= b; }
  friend Expr operator-(Expr a) { return a *= -1.0; }
  friend Expr operator*(Expr a, double k) { return a *= k; }
  friend Expr operator*(double k, Expr a) { return a *= k; }
  /// Throws BuilderError unless one side is constant.
  friend Expr operator*(const Expr& a, const Expr& b);

  /// Re Tr(C X); C need not be Hermitian (only its Hermitian part matters).
  static Expr trace_inner(const CMatrix& C, const Hermitian& X);
  static Expr trace(const Hermitian& X);
  /// Re X(i, j) and Im X(i, j).
  static Expr real_entry(const Hermitian& X, int i, int j);
  static Expr imag_entry(const Hermitian& X, int i, int j);

 private:
  double constant_ = 0.0;
  std::vector<std::pair<VarRef, double>> scalars_;
  std::vector<HermTerm> herms_;
};

/// Constant Hermitian matrix plus real multiples of Hermitian variables.
struct MatrixExpr {
  CMatrix constant;
  std::vector<std::pair<Hermitian, double>> terms;
};

enum class Domain { free, nonneg };
enum class Sense { maximize, minimize };
enum class ConstraintKind { eq, ineq, soc, psd };

struct Constraint {
  ConstraintKind kind;
  std::string label;
  std::vector<Expr> exprs;  ///< eq/ineq: one; soc: {t, x1, ..., xm} for ||x|| <= t
  MatrixExpr matrix;        ///< psd only
};

enum class Status { optimal, infeasible, unbounded, numerical_limit };

const char* status_name(Status s);

struct Solution {
  Status status = Status::numerical_limit;
  double objective_value = 0.0;
  std::map<std::string, double> scalars;
  std::map<std::string, CMatrix> matrices;
  double max_constraint_violation = 0.0;
  int iterations = 0;

  double value(const std::string& name) const;
  const CMatrix& matrix(const std::string& name) const;
};

class Problem {
 public:
  Problem();

  Scalar add_scalar(const std::string& name, Domain domain = Domain::free);
  /// A Hermitian variable; `psd` makes X >= 0 part of its domain.
  Hermitian add_hermitian(const std::string& name, int order, bool psd = true);

  void add_eq(const Expr& e, std::string label = {});  ///< e == 0
  void add_ge(const Expr& e, std::string label = {});  ///< e >= 0
  void add_le(const Expr& lhs, const Expr& rhs, std::string label = {});
  /// ||x|| <= t.
  void add_soc(const std::vector<Expr>& x, const Expr& t, std::string label = {});
  /// ||p||^2 <= y z with y, z >= 0, as ||(2p, y - z)|| <= y + z.
  void add_rotated_soc(const std::vector<Expr>& p, const Expr& y, const Expr& z,
                       std::string label = {});
  void add_psd(const MatrixExpr& m, std::string label = {});

  void maximize(const Expr& e);
  void minimize(const Expr& e);

  int scalar_count() const { return static_cast<int>(scalars_.size()); }
  int hermitian_count() const { return static_cast<int>(herms_.size()); }
  const std::vector<Constraint>& constraints() const { return constraints_; }

  /// Sparse text listing of variables, objective and constraints.
  std::string dump() const;

  struct ScalarInfo {
    std::string name;
    Domain domain;
  };
  struct HermInfo {
    std::string name;
    int order;
    bool psd;
  };
  const std::vector<ScalarInfo>& scalar_info() const { return scalars_; }
  const std::vector<HermInfo>& hermitian_info() const { return herms_; }
  const Expr& objective() const { return objective_; }
  Sense sense() const { return sense_; }
  int tag() const { return tag_; }

 private:
  void check(const Expr& e) const;
  void check_name(const std::string& name);

  int tag_;
  std::vector<ScalarInfo> scalars_;
  std::vector<HermInfo> herms_;
  std::map<std::string, int> names_;
  std::vector<Constraint> constraints_;
  Expr objective_;
  Sense sense_ = Sense::maximize;
};

/// Compiles, solves and checks the recovered point. An `optimal` status is
/// only reported when max_constraint_violation <= tol.
Solution solve(const Problem& problem, double tol = 1e-7, int max_iter = 120,
               bool verbose = false);

/// Hermitian X -> [[Re X, -Im X], [Im X, Re X]].
RMatrix embed(const CMatrix& X);
/// Inverse of embed for matrices of that structure; general real Y is
/// projected to (Y11 + Y22)/2 + i (Y21 - Y12)/2.
CMatrix unembed(const RMatrix& Y);

}  // namespace starsec::conic
