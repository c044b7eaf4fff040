#include "lrr/varpro.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "lrr/rng.hpp"

namespace lrr {

void SolverConfig::validate() const {
  if (k < 1) throw std::invalid_argument("config: k must be >= 1");
  if (!(lambda0 > 0.0)) throw std::invalid_argument("config: lambda0 must be positive");
  if (!(lambda_up > 1.0)) throw std::invalid_argument("config: lambda_up must be > 1");
  if (!(lambda_down > 0.0 && lambda_down < 1.0))
    throw std::invalid_argument("config: lambda_down must be in (0, 1)");
  if (max_iters < 1) throw std::invalid_argument("config: max_iters must be >= 1");
  if (!(tol_rel_obj > 0.0) || !(tol_grad > 0.0))
    throw std::invalid_argument("config: tolerances must be positive");
  if (obj_stall_iters < 1) throw std::invalid_argument("config: obj_stall_iters must be >= 1");
}

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::converged_obj: return "converged_obj";
    case Termination::converged_grad: return "converged_grad";
    case Termination::max_iters: return "max_iters";
    case Termination::converged_primal_dual: return "converged_primal_dual";
    case Termination::budget_exceeded: return "budget_exceeded";
  }
  return "?";
}

Eigen::VectorXd weights(const Penalty& p, const FactorPair& F) {
  F.validate();
  Eigen::VectorXd w(F.k());
  for (int i = 0; i < F.k(); ++i)
    w[i] = 0.5 * p.deriv(0.5 * (F.B.col(i).squaredNorm() + F.C.col(i).squaredNorm()));
  return w;
}

double surrogate_objective(const MeasurementOp& op, const Eigen::VectorXd& b,
                           const FactorPair& F, const Eigen::VectorXd& w) {
  F.validate();
  if (w.size() != F.k()) throw std::invalid_argument("surrogate: weight count != k");
  double reg = 0.0;
  for (int i = 0; i < F.k(); ++i)
    reg += w[i] * (F.B.col(i).squaredNorm() + F.C.col(i).squaredNorm());
  return reg + residual(op, F.product(), b).squaredNorm();
}

double surrogate_objective(const Penalty& p, const MeasurementOp& op,
                           const Eigen::VectorXd& b, const FactorPair& F) {
  return surrogate_objective(op, b, F, weights(p, F));
}

double true_objective(const Penalty& p, const MeasurementOp& op,
                      const Eigen::VectorXd& b, const Eigen::MatrixXd& X) {
  return reg_value(p, X) + residual(op, X, b).squaredNorm();
}

void data_term_gradient(const MeasurementOp& op, const Eigen::VectorXd& b,
                        const FactorPair& F, Eigen::MatrixXd* grad_B,
                        Eigen::MatrixXd* grad_C) {
  const Eigen::MatrixXd G = op.adjoint(residual(op, F.product(), b));
  if (grad_B) *grad_B = 2.0 * G * F.C;
  if (grad_C) *grad_C = 2.0 * G.transpose() * F.B;
}

namespace {

// Pseudo-inverse solve of a symmetric PSD system through its
// eigendecomposition: directions below the cutoff get the minimum-norm
// treatment. Returns the number of truncated directions.
struct PsdPinv {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  double cutoff = 0.0;
  int deficient = 0;

  explicit PsdPinv(const Eigen::MatrixXd& N) : eig(N) {
    const double lmax = eig.eigenvalues().size() ? eig.eigenvalues().maxCoeff() : 0.0;
    cutoff = std::max(lmax, 0.0) * 1e-12;
    for (int i = 0; i < eig.eigenvalues().size(); ++i)
      if (eig.eigenvalues()[i] <= cutoff) ++deficient;
  }

  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const {
    const Eigen::VectorXd& ev = eig.eigenvalues();
    Eigen::MatrixXd y = eig.eigenvectors().transpose() * rhs;
    for (int i = 0; i < ev.size(); ++i)
      y.row(i) *= (ev[i] > cutoff) ? 1.0 / ev[i] : 0.0;
    return eig.eigenvectors() * y;
  }

  // Factor column most aligned with the worst-conditioned direction, for
  // error reporting. Local variables are indexed (a * k + l).
  int worst_column(int k) const {
    const Eigen::VectorXd v = eig.eigenvectors().col(0);
    int best = 0;
    double best_mass = -1.0;
    for (int l = 0; l < k; ++l) {
      double mass = 0.0;
      for (int idx = l; idx < v.size(); idx += k) mass += v[idx] * v[idx];
      if (mass > best_mass) { best_mass = mass; best = l; }
    }
    return best;
  }
};

struct ReducedSystem {
  Eigen::MatrixXd H;       // mk x mk, J_B^T (I - P_C) J_B without the damping term
  Eigen::VectorXd g;       // mk, J_B^T (I - P_C) r
  double gC_sqnorm = 0.0;  // ||J_C^T r||^2, the C-side gradient at the iterate
};

// Assembles the damped-RW2 reduced system at (B, C) with weights w.
// Residual stack: per-column regularization rows sqrt(w_i) B_i and
// sqrt(w_i) C_i, then the data rows A(B C^T) - b. B variables are indexed
// column-major: (row a, column l) -> l*m + a.
ReducedSystem assemble_reduced(const MeasurementOp& op, const Eigen::VectorXd& b,
                               const Eigen::MatrixXd& B, const Eigen::MatrixXd& C,
                               const Eigen::VectorXd& w) {
  const int m = static_cast<int>(B.rows());
  const int k = static_cast<int>(B.cols());
  const int gw = op.group_width();
  const Eigen::VectorXd r_data = op.apply(B * C.transpose()) - b;

  ReducedSystem sys{Eigen::MatrixXd::Zero(m * k, m * k), Eigen::VectorXd::Zero(m * k)};

  // B-side regularization rows: no C component, so they stay unprojected.
  for (int l = 0; l < k; ++l) {
    sys.H.diagonal().segment(l * m, m).array() += w[l];
    sys.g.segment(l * m, m) += w[l] * B.col(l);
  }

  std::vector<int> brow_local(m, -1);
  for (int gidx = 0; gidx < op.num_groups(); ++gidx) {
    const std::vector<int>& rows = op.residuals_of_group(gidx);

    // dictionary of B rows touched by this group
    std::vector<int> brows;
    for (int q : rows)
      for (const EntryTerm& t : op.terms_of(q))
        if (brow_local[t.row] < 0) {
          brow_local[t.row] = static_cast<int>(brows.size());
          brows.push_back(t.row);
        }
    const int u = static_cast<int>(brows.size());
    const int nloc = gw * k;

    Eigen::MatrixXd NC = Eigen::MatrixXd::Zero(nloc, nloc);
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(nloc, u * k);
    Eigen::VectorXd rho = Eigen::VectorXd::Zero(nloc);
    Eigen::MatrixXd HB = Eigen::MatrixXd::Zero(u * k, u * k);
    Eigen::VectorXd gB = Eigen::VectorXd::Zero(u * k);

    // C-side regularization rows of this group
    for (int a = 0; a < gw; ++a)
      for (int l = 0; l < k; ++l) {
        NC(a * k + l, a * k + l) += w[l];
        rho[a * k + l] += w[l] * C(gidx * gw + a, l);
      }

    Eigen::VectorXd d(nloc);
    std::vector<std::pair<int, Eigen::RowVectorXd>> jb_blocks;
    for (int q : rows) {
      d.setZero();
      jb_blocks.clear();
      for (const EntryTerm& t : op.terms_of(q)) {
        d.segment((t.col - gidx * gw) * k, k) += t.coeff * B.row(t.row);
        const int bi = brow_local[t.row];
        bool merged = false;
        for (auto& [idx, vec] : jb_blocks)
          if (idx == bi) { vec += t.coeff * C.row(t.col); merged = true; break; }
        if (!merged) jb_blocks.emplace_back(bi, t.coeff * C.row(t.col));
      }
      const double rq = r_data[q];
      NC.noalias() += d * d.transpose();
      rho += rq * d;
      for (const auto& [bi, vi] : jb_blocks) {
        E.block(0, bi * k, nloc, k).noalias() += d * vi;
        gB.segment(bi * k, k) += rq * vi.transpose();
        for (const auto& [bj, vj] : jb_blocks)
          HB.block(bi * k, bj * k, k, k).noalias() += vi.transpose() * vj;
      }
    }

    const PsdPinv pinv(NC);
    const Eigen::MatrixXd S = pinv.solve(E);           // NC^+ E
    const Eigen::VectorXd t = pinv.solve(rho);         // NC^+ rho
    sys.gC_sqnorm += rho.squaredNorm();
    HB.noalias() -= E.transpose() * S;
    gB.noalias() -= E.transpose() * t;

    // scatter into the global system
    for (int bi = 0; bi < u; ++bi) {
      for (int li = 0; li < k; ++li) {
        const int gi = li * m + brows[bi];
        sys.g[gi] += gB[bi * k + li];
        for (int bj = 0; bj < u; ++bj)
          for (int lj = 0; lj < k; ++lj)
            sys.H(gi, lj * m + brows[bj]) += HB(bi * k + li, bj * k + lj);
      }
    }
    for (int br : brows) brow_local[br] = -1;
  }
  return sys;
}

}  // namespace

Eigen::MatrixXd c_solve(const MeasurementOp& op, const Eigen::VectorXd& b,
                        const Eigen::MatrixXd& B, const Eigen::VectorXd& w,
                        bool strict) {
  if (B.rows() != op.rows()) throw std::invalid_argument("c_solve: B row count mismatch");
  if (b.size() != op.out_dim()) throw std::invalid_argument("c_solve: data vector mismatch");
  const int k = static_cast<int>(B.cols());
  if (w.size() != k) throw std::invalid_argument("c_solve: weight count != k");
  const int gw = op.group_width();

  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(op.cols(), k);
  const int nloc = gw * k;
  for (int gidx = 0; gidx < op.num_groups(); ++gidx) {
    Eigen::MatrixXd N = Eigen::MatrixXd::Zero(nloc, nloc);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nloc);
    for (int a = 0; a < gw; ++a)
      for (int l = 0; l < k; ++l) N(a * k + l, a * k + l) += w[l];

    Eigen::VectorXd d(nloc);
    for (int q : op.residuals_of_group(gidx)) {
      d.setZero();
      for (const EntryTerm& t : op.terms_of(q))
        d.segment((t.col - gidx * gw) * k, k) += t.coeff * B.row(t.row);
      N.noalias() += d * d.transpose();
      rhs += b[q] * d;
    }

    const PsdPinv pinv(N);
    if (strict && pinv.deficient > 0)
      throw SingularSystemError(
          "c_solve: singular normal equations in column group " + std::to_string(gidx) +
          "; deficient factor column " + std::to_string(pinv.worst_column(k)));
    const Eigen::VectorXd c = pinv.solve(rhs);
    for (int a = 0; a < gw; ++a)
      for (int l = 0; l < k; ++l) C(gidx * gw + a, l) = c[a * k + l];
  }
  return C;
}

double projected_gradient_norm(const Penalty& p, const MeasurementOp& op,
                               const Eigen::VectorXd& b, const FactorPair& F) {
  return assemble_reduced(op, b, F.B, F.C, weights(p, F)).g.norm();
}

namespace {

FactorPair rw2_from_system(const ReducedSystem& sys, const MeasurementOp& op,
                           const Eigen::VectorXd& b, const FactorPair& F,
                           const Eigen::VectorXd& w, double lambda) {
  const int m = static_cast<int>(F.B.rows());
  const int k = F.k();
  Eigen::MatrixXd A = sys.H;
  A.diagonal().array() += lambda;
  const Eigen::VectorXd delta = A.ldlt().solve(-sys.g);
  FactorPair out;
  out.B = F.B + Eigen::Map<const Eigen::MatrixXd>(delta.data(), m, k);
  out.C = c_solve(op, b, out.B, w);
  return out;
}

}  // namespace

FactorPair rw2_step(const Penalty& p, const MeasurementOp& op, const Eigen::VectorXd& b,
                    const FactorPair& F, double lambda) {
  F.validate();
  if (!(lambda > 0.0)) throw std::invalid_argument("rw2_step: lambda must be positive");
  const Eigen::VectorXd w = weights(p, F);
  const ReducedSystem sys = assemble_reduced(op, b, F.B, F.C, w);
  return rw2_from_system(sys, op, b, F, w, lambda);
}

SolveReport solve(const SolverConfig& cfg, const MeasurementOp& op,
                  const Eigen::VectorXd& b) {
  cfg.validate();
  Rng rng(cfg.seed);
  FactorPair init;
  init.B.resize(op.rows(), cfg.k);
  init.C.resize(op.cols(), cfg.k);
  for (int j = 0; j < init.B.cols(); ++j)
    for (int i = 0; i < init.B.rows(); ++i) init.B(i, j) = rng.normal();
  for (int j = 0; j < init.C.cols(); ++j)
    for (int i = 0; i < init.C.rows(); ++i) init.C(i, j) = rng.normal();
  return solve(cfg, op, b, init);
}

SolveReport solve(const SolverConfig& cfg, const MeasurementOp& op,
                  const Eigen::VectorXd& b, const FactorPair& init) {
  cfg.validate();
  init.validate();
  if (init.B.rows() != op.rows() || init.C.rows() != op.cols())
    throw std::invalid_argument("solve: initial factor dimensions do not match the operator");
  if (b.size() != op.out_dim()) throw std::invalid_argument("solve: data vector mismatch");

  SolveReport rep;
  rep.solver = "varpro";
  FactorPair F = init;
  Eigen::MatrixXd X = F.product();
  double obj = true_objective(cfg.penalty, op, b, X);
  if (!std::isfinite(obj)) throw NumericalError("solve: initial objective is not finite");

  double lambda = cfg.lambda0;
  int stall = 0;
  int reject_streak = 0;
  bool cache_valid = false;
  Eigen::VectorXd w;
  ReducedSystem sys;
  rep.termination = Termination::max_iters;

  while (static_cast<int>(rep.trace.size()) < cfg.max_iters) {
    if (!cache_valid) {
      w = weights(cfg.penalty, F);
      sys = assemble_reduced(op, b, F.B, F.C, w);
      cache_valid = true;
    }
    // joint stationarity of the weighted objective: the projected B-gradient
    // alone can vanish at points where C is far from its inner optimum
    if (std::sqrt(sys.g.squaredNorm() + sys.gC_sqnorm) <= cfg.tol_grad) {
      rep.termination = Termination::converged_grad;
      break;
    }

    const double lambda_used = lambda;
    const FactorPair cand = rw2_from_system(sys, op, b, F, w, lambda);
    const double cand_obj = true_objective(cfg.penalty, op, b, cand.product());

    bool accepted = std::isfinite(cand_obj) && cand_obj < obj;  // ties are rejected
    if (accepted) {
      const double rel = (obj - cand_obj) / std::max(1.0, std::abs(obj));
      // escape step: refactor through the SVD, which preserves the product
      // and brings the surrogate down to R(B C^T)
      F = rebalance(cand);
      X = F.product();
      obj = true_objective(cfg.penalty, op, b, X);
      if (!std::isfinite(obj)) throw NumericalError("solve: objective became non-finite");
      lambda = std::max(lambda * cfg.lambda_down, 1e-15);
      cache_valid = false;
      stall = (rel < cfg.tol_rel_obj) ? stall + 1 : 0;
      reject_streak = 0;
    } else {
      lambda = std::min(lambda * cfg.lambda_up, 1e18);
      ++reject_streak;
    }

    rep.trace.push_back(TraceEntry{obj, surrogate_objective(cfg.penalty, op, b, F),
                                   lambda_used, accepted});
    if (stall >= cfg.obj_stall_iters) {
      rep.termination = Termination::converged_obj;
      break;
    }
    // a long rejection streak means the damping has grown past any useful
    // step size; no further objective change is possible
    if (reject_streak >= 30) {
      rep.termination = Termination::converged_obj;
      break;
    }
  }

  rep.factors = F;
  rep.X = X;
  rep.iterations = static_cast<int>(rep.trace.size());
  rep.final_objective = obj;
  return rep;
}

std::string SolveReport::to_json_string() const {
  nlohmann::json j;
  j["solver"] = solver;
  j["termination"] = termination_name(termination);
  j["iterations"] = iterations;
  j["final_objective"] = final_objective;
  j["non_monotone"] = non_monotone;
  j["m"] = X.rows();
  j["n"] = X.cols();
  j["k"] = factors.B.cols();
  nlohmann::json trace_j = nlohmann::json::array();
  for (const TraceEntry& e : trace) {
    nlohmann::json ej;
    ej["true_objective"] = e.true_objective;
    ej["surrogate_objective"] = e.surrogate_objective;
    ej["lambda"] = e.lambda;
    ej["accepted"] = e.accepted;
    if (std::isfinite(e.primal_residual)) ej["primal_residual"] = e.primal_residual;
    if (std::isfinite(e.dual_residual)) ej["dual_residual"] = e.dual_residual;
    trace_j.push_back(ej);
  }
  j["trace"] = trace_j;
  const auto matrix_json = [](const Eigen::MatrixXd& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < M.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int jj = 0; jj < M.cols(); ++jj) row.push_back(M(i, jj));
      rows.push_back(row);
    }
    return rows;
  };
  j["B"] = matrix_json(factors.B);
  j["C"] = matrix_json(factors.C);
  return j.dump(2);
}

}  // namespace lrr
