#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "lrr/operators.hpp"
#include "lrr/rng.hpp"

namespace lrr {

/// U V^T with standard-normal factor entries; numerical rank exactly r
/// (retried on the measure-zero degenerate draws).
Eigen::MatrixXd gen_low_rank(int m, int n, int r, std::uint64_t seed);

/// Entrywise i.i.d. mask, entry missing with probability missing_frac.
/// For m*n >= 1e4 the realized fraction must land within +-1% absolute of the
/// target (one resample, then an error). strict mode rejects masks with an
/// empty row or column.
Eigen::MatrixXd uniform_mask(int m, int n, double missing_frac, std::uint64_t seed,
                             bool strict = true);

/// Tracking-failure mask: every column is a prefix of observed frames
/// followed by zeros, the first 3 frames are always observed, and a lost
/// track is never restarted. The per-track failure probability (and, for
/// targets beyond its reach, an early-failure bias) is calibrated by
/// bisection so the expected missing fraction matches the target; draws are
/// repeated until the realized fraction is within +-1%.
Eigen::MatrixXd tracking_mask(int frames, int tracks, double missing_frac,
                              std::uint64_t seed, bool strict = true);

/// M0 + sigma * N with standard-normal N; sigma = 0 returns M0 unchanged.
Eigen::MatrixXd add_noise(const Eigen::MatrixXd& M0, double sigma, std::uint64_t seed);

/// ||X - M0||_F / ||M0||_F.
double normalized_distance(const Eigen::MatrixXd& X, const Eigen::MatrixXd& M0);

/// A complete synthetic missing-data problem. Serializes to a directory of
/// M0.csv, M.csv, W.csv and meta.json.
struct ProblemInstance {
  Eigen::MatrixXd M0;
  Eigen::MatrixXd M;
  Eigen::MatrixXd W;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::string pattern;  // "uniform" | "tracking"
  double missing_frac_target = 0.0;
  double missing_frac_realized = 0.0;
  int rank = 0;
  std::string generator = Rng::kGeneratorId;

  void save(const std::string& dir) const;
  static ProblemInstance load(const std::string& dir);
};

ProblemInstance make_instance(int m, int n, int r, const std::string& pattern,
                              double missing_frac, double sigma, std::uint64_t seed);

/// Synthetic pOSE scene. Cameras have their third row pinned to (0,0,0,1) so
/// every point sits at unit depth: that is the one family where the exact
/// projections zero both the object-space and the affine residuals, making
/// the ground truth an exact solution for every eta.
struct PoseScene {
  PoseOp op;
  Eigen::VectorXd b;
  Eigen::MatrixXd ground_truth;  // 3F x n, rank <= 4
};

PoseScene gen_pose_scene(int num_cams, int num_points, double eta, std::uint64_t seed);

/// Synthetic NRSfM scene with a K-dimensional shape basis and orthographic
/// cameras.
struct NrsfmScene {
  NrsfmOp op;
  Eigen::VectorXd b;
  Eigen::MatrixXd ground_truth;  // X# in R^{F x 3n}, rank <= K
};

NrsfmScene gen_nrsfm_scene(int num_frames, int num_points, int K, std::uint64_t seed);

}  // namespace lrr
