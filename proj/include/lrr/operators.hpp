#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace lrr {

/// One term of a residual: coeff * X(row, col).
struct EntryTerm {
  int row;
  int col;
  double coeff;
};

/// Linear measurement map A: R^{m x n} -> R^p with adjoint.
///
/// Every concrete operator here is a sparse map on matrix entries: residual q
/// is sum_t coeff_t * X(row_t, col_t). apply/adjoint are derived from that
/// representation, so the adjoint identity <A(X), y> = <X, A*(y)> holds by
/// construction up to rounding.
///
/// For the factorization solvers the matrix columns are partitioned into
/// groups of fixed width (group g covers columns [g*W, (g+1)*W)); each
/// residual only touches columns of a single group. Operators are immutable
/// after construction and safe to share across threads.
class MeasurementOp {
 public:
  virtual ~MeasurementOp() = default;

  int rows() const { return m_; }
  int cols() const { return n_; }
  int out_dim() const { return static_cast<int>(row_ptr_.size()) - 1; }

  Eigen::VectorXd apply(const Eigen::MatrixXd& X) const;
  Eigen::MatrixXd adjoint(const Eigen::VectorXd& y) const;

  int group_width() const { return group_width_; }
  int num_groups() const { return n_ / group_width_; }
  const std::vector<int>& residuals_of_group(int g) const { return group_rows_[g]; }
  std::span<const EntryTerm> terms_of(int q) const {
    return {terms_.data() + row_ptr_[q], terms_.data() + row_ptr_[q + 1]};
  }

 protected:
  MeasurementOp(int m, int n, int group_width);
  void add_residual(std::initializer_list<EntryTerm> terms);
  void add_residual(const std::vector<EntryTerm>& terms);
  void finalize();

 private:
  int m_, n_, group_width_;
  std::vector<int> row_ptr_{0};
  std::vector<EntryTerm> terms_;
  std::vector<std::vector<int>> group_rows_;
};

/// A(X) - b; the squared norm of the result is the data term.
Eigen::VectorXd residual(const MeasurementOp& op, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& b);

struct OpNormEstimate {
  double value = 0.0;     // estimate of ||A|| = sqrt(lambda_max(A*A))
  double residual = 0.0;  // relative power-iteration residual at the estimate
};

/// Operator norm estimate by power iteration on adjoint(apply(.)).
OpNormEstimate op_norm_bound(const MeasurementOp& op, int iters = 50);

/// Sampling of the entries selected by a 0/1 mask, in row-major order over
/// (i, j) with mask(i, j) == 1. adjoint scatters back with zeros elsewhere.
class MaskedOp : public MeasurementOp {
 public:
  explicit MaskedOp(const Eigen::MatrixXd& mask);
  const Eigen::MatrixXd& mask() const { return mask_; }

 private:
  Eigen::MatrixXd mask_;
};

struct PoseObservation {
  int cam;
  int point;
  double u;
  double v;
};

/// pOSE residuals on the stacked 3F x n camera-point product matrix.
///
/// Observation (i, j) contributes four residual rows, in order:
///   sqrt(1-eta) * (X(3i,   j) - u * X(3i+2, j))     object-space, u
///   sqrt(1-eta) * (X(3i+1, j) - v * X(3i+2, j))     object-space, v
///   sqrt(eta)   *  X(3i,   j)                        affine, u
///   sqrt(eta)   *  X(3i+1, j)                        affine, v
/// so that ||A(X) - rhs()||^2 = (1-eta)*l_OSE + eta*l_Affine exactly.
class PoseOp : public MeasurementOp {
 public:
  PoseOp(int num_cams, int num_points, std::vector<PoseObservation> observations,
         double eta);

  /// Data vector consistent with the stored measurements: zeros on the
  /// object-space rows, sqrt(eta) * (u, v) on the affine rows.
  Eigen::VectorXd rhs() const;

  double eta() const { return eta_; }
  int num_cams() const { return num_cams_; }
  int num_points() const { return cols(); }
  const std::vector<PoseObservation>& observations() const { return obs_; }

 private:
  int num_cams_;
  double eta_;
  std::vector<PoseObservation> obs_;
};

/// Orthographic NRSfM: the unknown is the reshuffled shape matrix
/// X# in R^{F x 3n}; apply() permutes it into the stacked 3F x n shape and
/// multiplies by the block-diagonal camera matrix. Output order is row-major
/// over the 2F x n image-point matrix.
class NrsfmOp : public MeasurementOp {
 public:
  NrsfmOp(std::vector<Eigen::Matrix<double, 2, 3>> cameras, int num_points);

  int num_frames() const { return static_cast<int>(cameras_.size()); }
  int num_points() const { return num_points_; }
  const std::vector<Eigen::Matrix<double, 2, 3>>& cameras() const { return cameras_; }

  /// X#(i, 3j + c) = X(3i + c, j); the two calls below are exact inverses.
  static Eigen::MatrixXd stack_shape(const Eigen::MatrixXd& sharp);
  static Eigen::MatrixXd unstack_shape(const Eigen::MatrixXd& stacked);

 private:
  std::vector<Eigen::Matrix<double, 2, 3>> cameras_;
  int num_points_;
};

}  // namespace lrr
