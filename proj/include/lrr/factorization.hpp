#pragma once

#include <Eigen/Dense>

#include "lrr/penalty.hpp"

namespace lrr {

/// The bilinear factors of X = B * C^T, with k columns each.
struct FactorPair {
  Eigen::MatrixXd B;  // m x k
  Eigen::MatrixXd C;  // n x k

  int k() const { return static_cast<int>(B.cols()); }
  Eigen::MatrixXd product() const { return B * C.transpose(); }
  void validate() const;
};

struct SvdTriple {
  Eigen::MatrixXd U;      // m x r, column-orthonormal
  Eigen::VectorXd sigma;  // r, descending
  Eigen::MatrixXd V;      // n x r
};

/// Dense thin SVD with descending singular values. Backed by Eigen
/// (JacobiSVD for small matrices, BDCSVD otherwise); the module does not
/// implement its own decomposition.
SvdTriple thin_svd(const Eigen::MatrixXd& X);

/// Number of singular values above rel_tol * sigma_1.
int numerical_rank(const Eigen::MatrixXd& X, double rel_tol = 1e-9);

/// R(X) = sum_i f(sigma_i(X)) over all min(m, n) singular values.
double reg_value(const Penalty& p, const Eigen::MatrixXd& X);

/// R~(B, C) = sum_i f((||B_i||^2 + ||C_i||^2) / 2). Dominates
/// reg_value(B C^T), with equality at balanced factorizations.
double surrogate_value(const Penalty& p, const FactorPair& F);

/// B_i = sqrt(sigma_i) U_i, C_i = sqrt(sigma_i) V_i from the SVD, padded with
/// zero columns up to k. Throws if the numerical rank of X exceeds k
/// (sigma_{k+1} > 1e-9 * sigma_1).
FactorPair balanced_factorize(const Eigen::MatrixXd& X, int k);

/// Refactors B C^T through its SVD; preserves the product and never
/// increases the surrogate.
FactorPair rebalance(const FactorPair& F);

/// argmin_X R(X) + ||X - X0||_F^2: the penalty's scalar prox applied to the
/// singular values of X0, keeping its singular vectors.
Eigen::MatrixXd sv_prox(const Penalty& p, const Eigen::MatrixXd& X0);

}  // namespace lrr
