#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "lrr/factorization.hpp"
#include "lrr/operators.hpp"

namespace lrr {

/// Outcome of the post-hoc global-optimality test for f_mu-regularized
/// recovery: a rank-deficient local minimizer is certified globally optimal
/// when no singular value of Z = (I - A*A) X + A*(b) lands in the forbidden
/// interval [(1-delta) sqrt(mu), sqrt(mu) / (1-delta)].
struct Certificate {
  bool certified = false;
  std::vector<std::string> reasons;  // every violated condition
  std::vector<std::string> caveats;  // non-fatal warnings (delta=0, op norm)
  Eigen::VectorXd sigma_z;
  double interval_lo = 0.0;
  double interval_hi = 0.0;
  int rank_x = 0;
  int k = 0;
  double delta = 0.0;
  double mu = 0.0;

  std::string to_json_string() const;
};

/// Z = X - A*(A(X)) + A*(b). For exact data b = A(X0) and X = X0 this is X0.
Eigen::MatrixXd compute_Z(const MeasurementOp& op, const Eigen::VectorXd& b,
                          const Eigen::MatrixXd& X);

/// The interval test on a precomputed Z. The interval is treated as closed;
/// with delta = 0 it degenerates to the single point sqrt(mu) and only
/// |sigma_i(Z) - sqrt(mu)| <= 1e-12 counts as a violation.
Certificate check_optimality(const Eigen::MatrixXd& Z, double mu, double delta,
                             int k, const Eigen::MatrixXd& X);

/// Full check for a solver output: rebalances the factors (the theorem
/// assumes B = U sqrt(S), C = V sqrt(S)), verifies surrogate equality,
/// computes Z, runs the interval test, and annotates the operator-norm
/// caveat when ||A|| > 1.
Certificate certify(const MeasurementOp& op, const Eigen::VectorXd& b, double mu,
                    double delta, const FactorPair& F);

}  // namespace lrr
