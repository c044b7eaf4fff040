#include "lrr/admm.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <chrono>
#include <cmath>

#include "lrr/factorization.hpp"

namespace lrr {

void AdmmConfig::validate() const {
  if (penalty.kind() != PenaltyKind::FMu && penalty.kind() != PenaltyKind::Nuclear)
    throw std::invalid_argument("admm: penalty must be fmu or nuclear");
  if (!(rho > 0.0)) throw std::invalid_argument("admm: rho must be positive");
  if (max_iters < 1) throw std::invalid_argument("admm: max_iters must be >= 1");
  if (!(tol_primal > 0.0) || !(tol_dual > 0.0))
    throw std::invalid_argument("admm: tolerances must be positive");
}

double scalar_prox_scaled(const Penalty& p, double y, double c) {
  if (y < 0.0) throw std::domain_error("scalar_prox_scaled: y must be >= 0");
  if (!(c > 0.0)) throw std::invalid_argument("scalar_prox_scaled: c must be positive");
  switch (p.kind()) {
    case PenaltyKind::Nuclear:
      return std::max(y - 0.5 * c * p.mu(), 0.0);
    case PenaltyKind::FMu: {
      const double t = std::sqrt(p.mu());
      const auto h = [&](double x) { return c * p.eval(x) + (x - y) * (x - y); };
      // candidates: endpoints of the quadratic piece, the plateau minimizer,
      // and the interior stationary point x* = (y - c t) / (1 - c) when c != 1
      double best = 0.0, best_val = h(0.0);
      const auto consider = [&](double x) {
        const double v = h(x);
        if (v <= best_val) { best = x; best_val = v; }  // ties keep the larger x
      };
      consider(t);
      consider(std::max(y, t));
      if (c != 1.0) {
        const double xs = (y - c * t) / (1.0 - c);
        if (xs > 0.0 && xs < t) consider(xs);
      }
      return best;
    }
    default:
      throw std::invalid_argument("scalar_prox_scaled: only fmu and nuclear supported");
  }
}

Eigen::MatrixXd sv_prox_scaled(const Penalty& p, const Eigen::MatrixXd& X0, double c) {
  SvdTriple svd = thin_svd(X0);
  Eigen::VectorXd s = svd.sigma;
  for (int i = 0; i < s.size(); ++i) s[i] = scalar_prox_scaled(p, std::max(s[i], 0.0), c);
  return svd.U * s.asDiagonal() * svd.V.transpose();
}

namespace {

Eigen::SparseMatrix<double> materialize(const MeasurementOp& op) {
  // A as a p x (m*n) sparse matrix over column-major vec(X)
  std::vector<Eigen::Triplet<double>> trips;
  for (int q = 0; q < op.out_dim(); ++q)
    for (const EntryTerm& t : op.terms_of(q))
      trips.emplace_back(q, t.col * op.rows() + t.row, t.coeff);
  Eigen::SparseMatrix<double> A(op.out_dim(), op.rows() * op.cols());
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

}  // namespace

SolveReport admm_solve(const AdmmConfig& cfg, const MeasurementOp& op,
                       const Eigen::VectorXd& b) {
  cfg.validate();
  if (b.size() != op.out_dim()) throw std::invalid_argument("admm: data vector mismatch");
  const auto t_start = std::chrono::steady_clock::now();
  const int m = op.rows(), n = op.cols();

  const Eigen::SparseMatrix<double> A = materialize(op);
  Eigen::SparseMatrix<double> normal = Eigen::SparseMatrix<double>(A.transpose()) * A;
  Eigen::SparseMatrix<double> ridge(m * n, m * n);
  ridge.setIdentity();
  normal += cfg.rho * ridge;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> x_solver(normal);
  if (x_solver.info() != Eigen::Success)
    throw NumericalError("admm: failed to factor the X-update system");
  const Eigen::VectorXd Atb = A.transpose() * b;

  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(m, n);
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(m, n);
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(m, n);

  SolveReport rep;
  rep.solver = "admm";
  rep.termination = Termination::max_iters;
  double initial_obj = -1.0;

  for (int it = 0; it < cfg.max_iters; ++it) {
    const Eigen::MatrixXd V = Y - U;
    const Eigen::VectorXd xv =
        x_solver.solve(Atb + cfg.rho * Eigen::Map<const Eigen::VectorXd>(V.data(), m * n));
    X = Eigen::Map<const Eigen::MatrixXd>(xv.data(), m, n);

    const Eigen::MatrixXd Y_prev = Y;
    Y = sv_prox_scaled(cfg.penalty, X + U, 1.0 / cfg.rho);
    U += X - Y;

    const double primal = (X - Y).norm();
    const double dual = cfg.rho * (Y - Y_prev).norm();
    const double obj = true_objective(cfg.penalty, op, b, X);
    if (initial_obj < 0.0) initial_obj = obj;
    if (!std::isfinite(obj) || obj > 1e6 * std::max(initial_obj, 1.0))
      throw NumericalError("admm: diverged (objective " + std::to_string(obj) + ")");

    TraceEntry e{obj, true_objective(cfg.penalty, op, b, Y), cfg.rho, true};
    e.primal_residual = primal;
    e.dual_residual = dual;
    rep.trace.push_back(e);

    if (primal <= cfg.tol_primal * std::max(X.norm(), Y.norm()) &&
        dual <= cfg.tol_dual * std::max(1.0, Y.norm())) {
      rep.termination = Termination::converged_primal_dual;
      break;
    }
    if (cfg.budget_seconds >= 0.0) {
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
      if (elapsed > cfg.budget_seconds) {
        rep.termination = Termination::budget_exceeded;
        break;
      }
    }
  }

  for (size_t i = 1; i < rep.trace.size(); ++i)
    if (rep.trace[i].true_objective >
        rep.trace[i - 1].true_objective +
            1e-12 * std::max(1.0, std::abs(rep.trace[i - 1].true_objective)))
      rep.non_monotone = true;

  rep.X = X;
  // factors of the X iterate, padded to the matrix's numerical rank
  rep.factors = balanced_factorize(X, std::max(1, std::min<int>(m, n)));
  rep.iterations = static_cast<int>(rep.trace.size());
  rep.final_objective = rep.trace.empty() ? true_objective(cfg.penalty, op, b, X)
                                          : rep.trace.back().true_objective;
  return rep;
}

}  // namespace lrr
