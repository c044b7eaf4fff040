#include "lrr/operators.hpp"

#include <cmath>
#include <stdexcept>

#include "lrr/rng.hpp"

namespace lrr {

MeasurementOp::MeasurementOp(int m, int n, int group_width)
    : m_(m), n_(n), group_width_(group_width) {
  if (m <= 0 || n <= 0) throw std::invalid_argument("operator: dimensions must be positive");
  if (group_width <= 0 || n % group_width != 0)
    throw std::invalid_argument("operator: group width must divide the column count");
}

void MeasurementOp::add_residual(std::initializer_list<EntryTerm> terms) {
  add_residual(std::vector<EntryTerm>(terms));
}

void MeasurementOp::add_residual(const std::vector<EntryTerm>& terms) {
  int group = -1;
  for (const EntryTerm& t : terms) {
    if (t.row < 0 || t.row >= m_ || t.col < 0 || t.col >= n_)
      throw std::invalid_argument("operator: residual term out of range");
    const int g = t.col / group_width_;
    if (group == -1) group = g;
    else if (g != group)
      throw std::invalid_argument("operator: residual spans multiple column groups");
    terms_.push_back(t);
  }
  row_ptr_.push_back(static_cast<int>(terms_.size()));
}

void MeasurementOp::finalize() {
  group_rows_.assign(num_groups(), {});
  for (int q = 0; q < out_dim(); ++q) {
    const auto ts = terms_of(q);
    if (!ts.empty()) group_rows_[ts.front().col / group_width_].push_back(q);
  }
}

Eigen::VectorXd MeasurementOp::apply(const Eigen::MatrixXd& X) const {
  if (X.rows() != m_ || X.cols() != n_)
    throw std::invalid_argument("apply: matrix is " + std::to_string(X.rows()) + "x" +
                                std::to_string(X.cols()) + ", operator expects " +
                                std::to_string(m_) + "x" + std::to_string(n_));
  Eigen::VectorXd y(out_dim());
  for (int q = 0; q < out_dim(); ++q) {
    double s = 0.0;
    for (const EntryTerm& t : terms_of(q)) s += t.coeff * X(t.row, t.col);
    y[q] = s;
  }
  return y;
}

Eigen::MatrixXd MeasurementOp::adjoint(const Eigen::VectorXd& y) const {
  if (y.size() != out_dim())
    throw std::invalid_argument("adjoint: vector length " + std::to_string(y.size()) +
                                ", operator expects " + std::to_string(out_dim()));
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(m_, n_);
  for (int q = 0; q < out_dim(); ++q)
    for (const EntryTerm& t : terms_of(q)) X(t.row, t.col) += t.coeff * y[q];
  return X;
}

Eigen::VectorXd residual(const MeasurementOp& op, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& b) {
  if (b.size() != op.out_dim())
    throw std::invalid_argument("residual: data vector length mismatch");
  return op.apply(X) - b;
}

OpNormEstimate op_norm_bound(const MeasurementOp& op, int iters) {
  // Deterministic start; the constant seed is part of the contract.
  Rng rng(0x9e3779b97f4a7c15ULL);
  Eigen::MatrixXd V(op.rows(), op.cols());
  for (int j = 0; j < V.cols(); ++j)
    for (int i = 0; i < V.rows(); ++i) V(i, j) = rng.normal();

  double theta = 0.0;
  Eigen::MatrixXd T;
  for (int it = 0; it < iters; ++it) {
    T = op.adjoint(op.apply(V));
    const double norm = T.norm();
    if (norm == 0.0) return {0.0, 0.0};
    theta = (V.array() * T.array()).sum() / V.squaredNorm();
    V = T / norm;
  }
  T = op.adjoint(op.apply(V));
  theta = (V.array() * T.array()).sum() / V.squaredNorm();
  if (theta <= 0.0) return {0.0, 0.0};
  const double res = (T - theta * V).norm() / theta;
  return {std::sqrt(theta), res};
}

MaskedOp::MaskedOp(const Eigen::MatrixXd& mask)
    : MeasurementOp(static_cast<int>(mask.rows()), static_cast<int>(mask.cols()), 1),
      mask_(mask) {
  for (int i = 0; i < mask.rows(); ++i)
    for (int j = 0; j < mask.cols(); ++j)
      if (mask(i, j) != 0.0 && mask(i, j) != 1.0)
        throw std::invalid_argument("MaskedOp: mask entries must be 0 or 1");
  // row-major observation order is a file-format contract
  for (int i = 0; i < mask.rows(); ++i)
    for (int j = 0; j < mask.cols(); ++j)
      if (mask(i, j) == 1.0) add_residual({EntryTerm{i, j, 1.0}});
  finalize();
}

PoseOp::PoseOp(int num_cams, int num_points, std::vector<PoseObservation> observations,
               double eta)
    : MeasurementOp(3 * num_cams, num_points, 1),
      num_cams_(num_cams),
      eta_(eta),
      obs_(std::move(observations)) {
  if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("PoseOp: eta must be in [0, 1]");
  const double s_ose = std::sqrt(1.0 - eta);
  const double s_aff = std::sqrt(eta);
  for (const PoseObservation& o : obs_) {
    if (o.cam < 0 || o.cam >= num_cams || o.point < 0 || o.point >= num_points)
      throw std::invalid_argument("PoseOp: observation index out of range");
    const int r = 3 * o.cam;
    add_residual({EntryTerm{r, o.point, s_ose}, EntryTerm{r + 2, o.point, -s_ose * o.u}});
    add_residual({EntryTerm{r + 1, o.point, s_ose}, EntryTerm{r + 2, o.point, -s_ose * o.v}});
    add_residual({EntryTerm{r, o.point, s_aff}});
    add_residual({EntryTerm{r + 1, o.point, s_aff}});
  }
  finalize();
}

Eigen::VectorXd PoseOp::rhs() const {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(out_dim());
  const double s_aff = std::sqrt(eta_);
  for (size_t t = 0; t < obs_.size(); ++t) {
    b[4 * t + 2] = s_aff * obs_[t].u;
    b[4 * t + 3] = s_aff * obs_[t].v;
  }
  return b;
}

NrsfmOp::NrsfmOp(std::vector<Eigen::Matrix<double, 2, 3>> cameras, int num_points)
    : MeasurementOp(static_cast<int>(cameras.size()), 3 * num_points, 3),
      cameras_(std::move(cameras)),
      num_points_(num_points) {
  for (size_t i = 0; i < cameras_.size(); ++i) {
    const Eigen::Matrix2d g = cameras_[i] * cameras_[i].transpose();
    if ((g - Eigen::Matrix2d::Identity()).norm() > 1e-10)
      throw std::invalid_argument("NrsfmOp: camera " + std::to_string(i) +
                                  " does not satisfy R R^T = I2");
  }
  const int F = num_frames();
  for (int i = 0; i < F; ++i)
    for (int c = 0; c < 2; ++c)
      for (int j = 0; j < num_points_; ++j)
        add_residual({EntryTerm{i, 3 * j + 0, cameras_[i](c, 0)},
                      EntryTerm{i, 3 * j + 1, cameras_[i](c, 1)},
                      EntryTerm{i, 3 * j + 2, cameras_[i](c, 2)}});
  finalize();
}

Eigen::MatrixXd NrsfmOp::stack_shape(const Eigen::MatrixXd& sharp) {
  if (sharp.cols() % 3 != 0)
    throw std::invalid_argument("stack_shape: column count must be a multiple of 3");
  const int F = static_cast<int>(sharp.rows());
  const int n = static_cast<int>(sharp.cols()) / 3;
  Eigen::MatrixXd X(3 * F, n);
  for (int i = 0; i < F; ++i)
    for (int j = 0; j < n; ++j)
      for (int c = 0; c < 3; ++c) X(3 * i + c, j) = sharp(i, 3 * j + c);
  return X;
}

Eigen::MatrixXd NrsfmOp::unstack_shape(const Eigen::MatrixXd& stacked) {
  if (stacked.rows() % 3 != 0)
    throw std::invalid_argument("unstack_shape: row count must be a multiple of 3");
  const int F = static_cast<int>(stacked.rows()) / 3;
  const int n = static_cast<int>(stacked.cols());
  Eigen::MatrixXd sharp(F, 3 * n);
  for (int i = 0; i < F; ++i)
    for (int j = 0; j < n; ++j)
      for (int c = 0; c < 3; ++c) sharp(i, 3 * j + c) = stacked(3 * i + c, j);
  return sharp;
}

}  // namespace lrr
