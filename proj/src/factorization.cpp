#include "lrr/factorization.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace lrr {

void FactorPair::validate() const {
  if (B.cols() != C.cols()) throw std::invalid_argument("FactorPair: column counts differ");
  if (B.cols() < 1) throw std::invalid_argument("FactorPair: need k >= 1 columns");
  if (!B.allFinite() || !C.allFinite())
    throw std::invalid_argument("FactorPair: factors contain non-finite entries");
}

SvdTriple thin_svd(const Eigen::MatrixXd& X) {
  if (!X.allFinite()) throw std::runtime_error("svd: matrix has non-finite entries");
  const unsigned opts = Eigen::ComputeThinU | Eigen::ComputeThinV;
  if (std::min(X.rows(), X.cols()) <= 16) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, opts);
    return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(X, opts);
  if (svd.info() != Eigen::Success)
    throw std::runtime_error("svd failed; ||X||_F = " + std::to_string(X.norm()));
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

int numerical_rank(const Eigen::MatrixXd& X, double rel_tol) {
  const Eigen::VectorXd s = thin_svd(X).sigma;
  if (s.size() == 0 || s[0] <= 0.0) return 0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > rel_tol * s[0]) ++r;
  return r;
}

double reg_value(const Penalty& p, const Eigen::MatrixXd& X) {
  const Eigen::VectorXd s = thin_svd(X).sigma;
  double total = 0.0;
  for (int i = 0; i < s.size(); ++i) total += p.eval(std::max(s[i], 0.0));
  return total;
}

double surrogate_value(const Penalty& p, const FactorPair& F) {
  F.validate();
  double total = 0.0;
  for (int i = 0; i < F.k(); ++i)
    total += p.eval(0.5 * (F.B.col(i).squaredNorm() + F.C.col(i).squaredNorm()));
  return total;
}

FactorPair balanced_factorize(const Eigen::MatrixXd& X, int k) {
  if (k < 1) throw std::invalid_argument("balanced_factorize: k must be >= 1");
  const SvdTriple svd = thin_svd(X);
  const int r = static_cast<int>(svd.sigma.size());
  const double s1 = r > 0 ? svd.sigma[0] : 0.0;
  if (r > k && svd.sigma[k] > 1e-9 * s1)
    throw std::invalid_argument("balanced_factorize: numerical rank of X exceeds k = " +
                                std::to_string(k));
  FactorPair F{Eigen::MatrixXd::Zero(X.rows(), k), Eigen::MatrixXd::Zero(X.cols(), k)};
  const int keep = std::min(r, k);
  for (int i = 0; i < keep; ++i) {
    const double rs = std::sqrt(std::max(svd.sigma[i], 0.0));
    F.B.col(i) = rs * svd.U.col(i);
    F.C.col(i) = rs * svd.V.col(i);
  }
  return F;
}

FactorPair rebalance(const FactorPair& F) {
  F.validate();
  return balanced_factorize(F.product(), F.k());
}

Eigen::MatrixXd sv_prox(const Penalty& p, const Eigen::MatrixXd& X0) {
  SvdTriple svd = thin_svd(X0);
  Eigen::VectorXd s = svd.sigma;
  for (int i = 0; i < s.size(); ++i) s[i] = p.scalar_prox(std::max(s[i], 0.0));
  return svd.U * s.asDiagonal() * svd.V.transpose();
}

}  // namespace lrr
