#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrr/factorization.hpp"
#include "lrr/operators.hpp"
#include "lrr/penalty.hpp"

namespace lrr {

struct SingularSystemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  Penalty penalty;
  int k = 8;
  double lambda0 = 1e-2;
  double lambda_up = 10.0;
  double lambda_down = 0.1;
  int max_iters = 500;
  double tol_rel_obj = 1e-10;  // relative objective change ...
  int obj_stall_iters = 5;     // ... over this many consecutive accepted steps
  double tol_grad = 1e-10;     // norm of the projected gradient
  std::uint64_t seed = 0;

  explicit SolverConfig(Penalty p) : penalty(std::move(p)) {}
  void validate() const;
};

enum class Termination {
  converged_obj,
  converged_grad,
  max_iters,
  converged_primal_dual,  // ADMM only
  budget_exceeded,        // ADMM only, wall-clock budget
};

const char* termination_name(Termination t);

struct TraceEntry {
  double true_objective;       // R(B C^T) + ||A(B C^T) - b||^2 after the iteration
  double surrogate_objective;  // quadratic majorizer value at the iterate
  double lambda;
  bool accepted;
  // ADMM extras; NaN for VarPro entries
  double primal_residual = std::numeric_limits<double>::quiet_NaN();
  double dual_residual = std::numeric_limits<double>::quiet_NaN();
};

struct SolveReport {
  std::string solver;
  FactorPair factors;
  Eigen::MatrixXd X;
  std::vector<TraceEntry> trace;
  Termination termination = Termination::max_iters;
  int iterations = 0;
  double final_objective = 0.0;
  bool non_monotone = false;  // ADMM: objective trace was not monotone

  std::string to_json_string() const;
};

/// Majorization weights w_i = f'((||B_i||^2 + ||C_i||^2) / 2) / 2.
Eigen::VectorXd weights(const Penalty& p, const FactorPair& F);

/// sum_i w_i (||B_i||^2 + ||C_i||^2) + ||A(B C^T) - b||^2 with w from F itself.
double surrogate_objective(const Penalty& p, const MeasurementOp& op,
                           const Eigen::VectorXd& b, const FactorPair& F);

/// Same, but with weights fixed at a separate majorization point.
double surrogate_objective(const MeasurementOp& op, const Eigen::VectorXd& b,
                           const FactorPair& F, const Eigen::VectorXd& w);

/// R(X) + ||A(X) - b||^2.
double true_objective(const Penalty& p, const MeasurementOp& op,
                      const Eigen::VectorXd& b, const Eigen::MatrixXd& X);

/// Gradient of the data term ||A(B C^T) - b||^2 with respect to B and C.
void data_term_gradient(const MeasurementOp& op, const Eigen::VectorXd& b,
                        const FactorPair& F, Eigen::MatrixXd* grad_B,
                        Eigen::MatrixXd* grad_C);

/// Exact minimizer over C of the weighted objective with B fixed.
///
/// Per column group this is a (group_width * k) ridge system; rank-deficient
/// groups (possible when some w_i = 0) get the minimum-norm least-squares
/// solution. With strict = true a deficient system throws SingularSystemError
/// naming the deficient factor column instead.
Eigen::MatrixXd c_solve(const MeasurementOp& op, const Eigen::VectorXd& b,
                        const Eigen::MatrixXd& B, const Eigen::VectorXd& w,
                        bool strict = false);

/// One damped Ruhe-Wedin (RW2) step from F: solves the reduced normal
/// equations (J_B^T (I - J_C J_C^+) J_B + lambda I) db = -J_B^T (I - J_C J_C^+) r
/// for the B update, then re-solves C exactly with B' fixed.
FactorPair rw2_step(const Penalty& p, const MeasurementOp& op,
                    const Eigen::VectorXd& b, const FactorPair& F, double lambda);

/// Norm of the projected gradient J_B^T (I - J_C J_C^+) r at F.
double projected_gradient_norm(const Penalty& p, const MeasurementOp& op,
                               const Eigen::VectorXd& b, const FactorPair& F);

/// Iteratively reweighted VarPro with SVD rebalancing on every accepted step.
SolveReport solve(const SolverConfig& cfg, const MeasurementOp& op,
                  const Eigen::VectorXd& b);
SolveReport solve(const SolverConfig& cfg, const MeasurementOp& op,
                  const Eigen::VectorXd& b, const FactorPair& init);

}  // namespace lrr
