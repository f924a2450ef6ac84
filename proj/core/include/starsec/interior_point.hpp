// SPDX-License-Identifier: Apache-2.0
//
// Primal-dual interior-point solver for
//
//   minimize c^T x  subject to  A x = b,  x in K,
//
// where K is a product of a nonnegative orthant, second-order cones and real
// positive semidefinite cones. Uses the homogeneous self-dual embedding with
// Nesterov-Todd scaling and a Mehrotra predictor-corrector step; each step
// solves one Cholesky-factored Schur complement system A H^-1 A^T.
//
// Variable layout: [orthant | SOC blocks | svec(PSD blocks)]. svec stacks the
// lower triangle column by column and multiplies off-diagonal entries by
// sqrt(2), so svec(X)^T svec(Y) = Tr(XY).

#pragma once

#include <vector>

#include <Eigen/Sparse>

#include "starsec/types.hpp"

namespace starsec::ipm {

struct Cones {
  int lp = 0;
  std::vector<int> soc;  ///< block sizes (>= 1); first entry is the cone axis
  std::vector<int> sdp;  ///< matrix orders

  int dim() const;
  int degree() const;
};

struct Problem {
  Cones cones;
  Eigen::SparseMatrix<double> A;
  RVector b;
  RVector c;
};

enum class Status { optimal, primal_infeasible, dual_infeasible, numerical_limit };

const char* status_name(Status s);

struct Settings {
  double tol = 1e-8;
  int max_iter = 120;
  bool verbose = false;
};

struct Result {
  Status status = Status::numerical_limit;
  RVector x, y, z;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
};

Result solve(const Problem& problem, const Settings& settings = {});

int svec_dim(int order);
RVector svec(const RMatrix& S);
RMatrix smat(const Eigen::Ref<const RVector>& v, int order);

/// Nesterov-Todd scaling of one second-order cone pair (x, z), both interior:
/// W x = W^-1 z = lambda, W = beta (2 v v^T - J).
struct SocScaling {
  RMatrix W;
  RMatrix Winv;
  RVector lambda;
};
SocScaling soc_scaling(const RVector& x, const RVector& z);

/// Nesterov-Todd scaling of one PSD pair (X, Z), both positive definite:
/// R^-1 X R^-T = R^T Z R = diag(lambda).
struct SdpScaling {
  RMatrix R;
  RMatrix Rinv;
  RVector lambda;
};
SdpScaling sdp_scaling(const RMatrix& X, const RMatrix& Z);

}  // namespace starsec::ipm
