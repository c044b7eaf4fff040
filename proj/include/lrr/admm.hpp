#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "lrr/operators.hpp"
#include "lrr/penalty.hpp"
#include "lrr/varpro.hpp"

namespace lrr {

struct AdmmConfig {
  Penalty penalty;  // FMu or Nuclear
  double rho = 1.0;
  int max_iters = 2000;
  double tol_primal = 1e-10;
  double tol_dual = 1e-10;
  std::uint64_t seed = 0;
  double budget_seconds = -1.0;  // < 0: no wall-clock cap

  explicit AdmmConfig(Penalty p) : penalty(std::move(p)) {}
  void validate() const;
};

/// argmin over x >= 0 of c * f(x) + (x - y)^2, for FMu and Nuclear.
///
/// This is the scalar problem behind the ADMM Y-update, where the quadratic
/// coupling rho ||Y - Z||^2 is rescaled so the penalty carries an effective
/// factor c = 1/rho. At rho = 1 it reduces to Penalty::scalar_prox; for FMu
/// that is hard thresholding at sqrt(mu).
double scalar_prox_scaled(const Penalty& p, double y, double c);

/// sv_prox with the scaled scalar prox applied to each singular value.
Eigen::MatrixXd sv_prox_scaled(const Penalty& p, const Eigen::MatrixXd& X0, double c);

/// ADMM on min R(Y) + ||A(X) - b||^2 s.t. X = Y with scaled dual variable.
/// X-update solves (A*A + rho I) X = A*(b) + rho (Y - U) through a sparse
/// factorization built once; Y-update is sv_prox_scaled; the trace records
/// the true objective at X. Throws NumericalError on divergence (objective
/// exceeding 1e6 x its initial value).
SolveReport admm_solve(const AdmmConfig& cfg, const MeasurementOp& op,
                       const Eigen::VectorXd& b);

}  // namespace lrr
