// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "satrs/types.hpp"

namespace satrs {

/// Named contiguous slice of the real variable vector.
struct VariableBlock {
  std::string name;
  int offset = 0;
  int length = 0;
};

enum class ConstraintTag { mmf_link, private_wmse, common_wmse, nonneg_portion, feed_power, generic };
std::string_view to_string(ConstraintTag t);

/// a^T x <= b.
struct LinearConstraint {
  ConstraintTag tag = ConstraintTag::generic;
  int index = 0;  ///< user, group or feed the constraint belongs to
  VectorXd a;
  double b = 0.0;
};

/// |F x|^2 + b^T x + c <= 0 with F stored as its factor rows.
struct QuadraticConstraint {
  ConstraintTag tag = ConstraintTag::generic;
  int index = 0;
  MatrixXd factor;  ///< r x n
  VectorXd b;
  double c = 0.0;

  double value(const VectorXd& x) const;
};

/// maximize objective^T x over the linear and convex quadratic constraints.
struct ConicProgram {
  int num_vars = 0;
  std::vector<VariableBlock> layout;
  VectorXd objective;
  std::vector<LinearConstraint> linear;
  std::vector<QuadraticConstraint> quadratic;

  const VariableBlock& block(std::string_view name) const;
  int count(ConstraintTag t) const;
};

enum class SolveStatus { optimal, max_iter, infeasible };
std::string_view to_string(SolveStatus s);

struct SolverOptions {
  int max_iter = 100;
  double feastol = 1e-8;       ///< primal residual
  double dual_feastol = 1e-6;  ///< dual residual; the reduced solve floors it near 1e-8
  double abstol = 1e-10;
  double reltol = 1e-9;
};

struct ConicSolution {
  SolveStatus status = SolveStatus::max_iter;
  VectorXd x;
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;  ///< |G x + s - h| / max(1, |h|)
  double dual_residual = 0.0;    ///< |G^T z + c| / max(1, |c|)
  double gap = 0.0;              ///< s^T z
  double relative_gap = 0.0;
};

/// Primal-dual interior-point method (Nesterov-Todd scaling, Mehrotra
/// predictor-corrector) on the orthant/second-order-cone form of the program.
/// Deterministic for fixed inputs.
ConicSolution solve(const ConicProgram& prog, const SolverOptions& opt = {});

/// Real embedding [[Re A, -Im A], [Im A, Re A]] of a complex matrix.
MatrixXd lift_matrix(const MatrixXcd& a);
/// [Re x; Im x].
VectorXd lift_vector(const VectorXcd& x);
VectorXcd unlift_vector(const VectorXd& x);

/// F with F^T F = Q for a symmetric PSD Q, one row per eigenvalue above
/// 1e-14 * max(1, lambda_max). Throws Error(non_psd) for an eigenvalue below
/// -1e-8 * max(1, lambda_max).
MatrixXd symmetric_factor(const MatrixXd& q);

/// Text dump: layout lines, objective, then every constraint with its
/// coefficients at full precision.
void write_program(std::ostream& os, const ConicProgram& prog);

namespace soc {
/// Largest alpha with x + alpha d in the second-order cone, for x strictly
/// inside; +inf when the ray never leaves the cone.
double max_step(const VectorXd& x, const VectorXd& d);

/// Nesterov-Todd scaling of one second-order cone, W = beta (2 v v^T - J).
struct Scaling {
  double beta = 1.0;
  VectorXd v;
  VectorXd apply(const VectorXd& x) const;          ///< W x
  VectorXd apply_inverse(const VectorXd& x) const;  ///< W^-1 x
};
Scaling nt_scaling(const VectorXd& s, const VectorXd& z);

VectorXd jordan_product(const VectorXd& u, const VectorXd& v);
/// x with u o x = v.
VectorXd jordan_divide(const VectorXd& u, const VectorXd& v);
}  // namespace soc

}  // namespace satrs
