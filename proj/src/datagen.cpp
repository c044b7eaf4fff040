#include "lrr/datagen.hpp"

#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "json.hpp"
#include "lrr/factorization.hpp"
#include "lrr/io.hpp"

namespace lrr {

namespace {

Eigen::MatrixXd normal_matrix(int m, int n, Rng& rng) {
  Eigen::MatrixXd M(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) M(i, j) = rng.normal();
  return M;
}

bool has_empty_line(const Eigen::MatrixXd& W) {
  for (int i = 0; i < W.rows(); ++i)
    if (W.row(i).sum() == 0.0) return true;
  for (int j = 0; j < W.cols(); ++j)
    if (W.col(j).sum() == 0.0) return true;
  return false;
}

}  // namespace

Eigen::MatrixXd gen_low_rank(int m, int n, int r, std::uint64_t seed) {
  if (m < 1 || n < 1) throw std::invalid_argument("gen_low_rank: dimensions must be positive");
  if (r < 0 || r > std::min(m, n))
    throw std::invalid_argument("gen_low_rank: need 0 <= r <= min(m, n)");
  if (r == 0) return Eigen::MatrixXd::Zero(m, n);
  Rng rng(seed);
  for (int attempt = 0; attempt < 16; ++attempt) {
    const Eigen::MatrixXd U = normal_matrix(m, r, rng);
    const Eigen::MatrixXd V = normal_matrix(n, r, rng);
    const Eigen::MatrixXd M = U * V.transpose();
    const Eigen::VectorXd s = thin_svd(M).sigma;
    if (s[r - 1] > 1e-6) return M;
  }
  throw std::runtime_error("gen_low_rank: repeated degenerate draws");
}

Eigen::MatrixXd uniform_mask(int m, int n, double missing_frac, std::uint64_t seed,
                             bool strict) {
  if (!(missing_frac >= 0.0 && missing_frac < 1.0))
    throw std::invalid_argument("uniform_mask: missing_frac must be in [0, 1)");
  Rng rng(seed);
  const auto draw = [&] {
    Eigen::MatrixXd W(m, n);
    for (int i = 0; i < m; ++i)  // row-major draws; part of the determinism contract
      for (int j = 0; j < n; ++j) W(i, j) = rng.uniform() < missing_frac ? 0.0 : 1.0;
    return W;
  };
  Eigen::MatrixXd W = draw();
  if (static_cast<long long>(m) * n >= 10000) {
    const auto realized = [&](const Eigen::MatrixXd& mask) {
      return 1.0 - mask.sum() / static_cast<double>(m) / n;
    };
    if (std::abs(realized(W) - missing_frac) > 0.01) W = draw();
    if (std::abs(realized(W) - missing_frac) > 0.01)
      throw std::runtime_error("uniform_mask: realized fraction off target after resampling");
  }
  if (strict && has_empty_line(W))
    throw std::runtime_error("uniform_mask: mask has an empty row or column (strict mode)");
  return W;
}

namespace {

// Failure-frame distribution for tracking masks: a failed track dies at frame
// f = 3 + floor(x^beta * (frames - 3)) with x ~ U[0,1). beta = 1 is uniform
// over frames 3..frames-1; larger beta biases failures earlier. Expected
// missing fraction, exactly:
double tracking_expected_missing(int frames, double q, double beta) {
  const int span = frames - 3;
  double exp_missing = 0.0;
  for (int t = 0; t < span; ++t) {
    const double p = std::pow((t + 1.0) / span, 1.0 / beta) - std::pow(t / (double)span, 1.0 / beta);
    exp_missing += p * (frames - 3 - t);
  }
  return q * exp_missing / frames;
}

}  // namespace

Eigen::MatrixXd tracking_mask(int frames, int tracks, double missing_frac,
                              std::uint64_t seed, bool strict) {
  if (frames < 4) throw std::invalid_argument("tracking_mask: need frames >= 4");
  if (!(missing_frac >= 0.0 && missing_frac < 1.0))
    throw std::invalid_argument("tracking_mask: missing_frac must be in [0, 1)");
  const double reachable = (frames - 3.0) / frames;
  if (missing_frac > reachable)
    throw std::invalid_argument(
        "tracking_mask: target fraction " + std::to_string(missing_frac) +
        " unreachable; with the first 3 frames always observed the maximum is (frames-3)/frames = " +
        std::to_string(reachable));

  // Failure probability is capped below 1 in strict mode so a few tracks
  // survive the whole sequence; otherwise the final frames are empty rows by
  // construction. Calibrate (q, beta) by bisection on the exact expectation.
  const double q_cap =
      (strict && tracks >= 8) ? std::max(0.5, 1.0 - 3.0 / tracks) : 1.0;
  double q = 0.0, beta = 1.0;
  const double base = tracking_expected_missing(frames, q_cap, 1.0);
  if (missing_frac <= base) {
    double lo = 0.0, hi = q_cap;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (tracking_expected_missing(frames, mid, 1.0) < missing_frac ? lo : hi) = mid;
    }
    q = 0.5 * (lo + hi);
  } else {
    q = q_cap;
    double lo = 0.0, hi = 60.0;  // bisect on log2(beta)
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (tracking_expected_missing(frames, q_cap, std::exp2(mid)) < missing_frac ? lo : hi) = mid;
    }
    beta = std::exp2(0.5 * (lo + hi));
  }

  Rng rng(seed);
  const int span = frames - 3;
  for (int attempt = 0; attempt < 64; ++attempt) {
    Eigen::MatrixXd W = Eigen::MatrixXd::Ones(frames, tracks);
    for (int j = 0; j < tracks; ++j) {
      const bool fails = rng.uniform() < q;
      const double x = rng.uniform();  // always drawn, keeps streams aligned
      if (!fails) continue;
      const int fail_frame =
          3 + std::min(span - 1, static_cast<int>(std::pow(x, beta) * span));
      for (int i = fail_frame; i < frames; ++i) W(i, j) = 0.0;
    }
    const double realized = 1.0 - W.sum() / static_cast<double>(frames) / tracks;
    if (std::abs(realized - missing_frac) > 0.01) continue;
    if (strict && has_empty_line(W)) continue;
    return W;
  }
  throw std::runtime_error("tracking_mask: could not realize the target fraction within 1%");
}

Eigen::MatrixXd add_noise(const Eigen::MatrixXd& M0, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("add_noise: sigma must be >= 0");
  if (sigma == 0.0) return M0;
  Rng rng(seed);
  Eigen::MatrixXd M = M0;
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) M(i, j) += sigma * rng.normal();
  return M;
}

double normalized_distance(const Eigen::MatrixXd& X, const Eigen::MatrixXd& M0) {
  const double denom = M0.norm();
  if (denom == 0.0) throw std::invalid_argument("normalized_distance: ground truth is zero");
  return (X - M0).norm() / denom;
}

void ProblemInstance::save(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  write_matrix_csv(dir + "/M0.csv", M0);
  write_matrix_csv(dir + "/M.csv", M);
  write_matrix_csv(dir + "/W.csv", W);
  nlohmann::json meta;
  meta["pattern"] = pattern;
  meta["missing_frac_target"] = missing_frac_target;
  meta["missing_frac_realized"] = missing_frac_realized;
  meta["sigma"] = sigma;
  meta["seed"] = seed;
  meta["rank"] = rank;
  meta["generator"] = generator;
  write_text_file(dir + "/meta.json", meta.dump(2) + "\n");
}

ProblemInstance ProblemInstance::load(const std::string& dir) {
  ProblemInstance inst;
  inst.M0 = read_matrix_csv(dir + "/M0.csv");
  inst.M = read_matrix_csv(dir + "/M.csv");
  inst.W = read_matrix_csv(dir + "/W.csv");
  const nlohmann::json meta = nlohmann::json::parse(read_text_file(dir + "/meta.json"));
  inst.pattern = meta.at("pattern").get<std::string>();
  inst.missing_frac_target = meta.at("missing_frac_target").get<double>();
  inst.missing_frac_realized = meta.at("missing_frac_realized").get<double>();
  inst.sigma = meta.at("sigma").get<double>();
  inst.seed = meta.at("seed").get<std::uint64_t>();
  inst.rank = meta.at("rank").get<int>();
  inst.generator = meta.at("generator").get<std::string>();
  return inst;
}

ProblemInstance make_instance(int m, int n, int r, const std::string& pattern,
                              double missing_frac, double sigma, std::uint64_t seed) {
  ProblemInstance inst;
  inst.M0 = gen_low_rank(m, n, r, derive_seed(seed, 1));
  inst.M = add_noise(inst.M0, sigma, derive_seed(seed, 2));
  if (pattern == "uniform")
    inst.W = uniform_mask(m, n, missing_frac, derive_seed(seed, 3));
  else if (pattern == "tracking")
    inst.W = tracking_mask(m, n, missing_frac, derive_seed(seed, 3));
  else
    throw std::invalid_argument("make_instance: pattern must be 'uniform' or 'tracking'");
  inst.sigma = sigma;
  inst.seed = seed;
  inst.pattern = pattern;
  inst.rank = r;
  inst.missing_frac_target = missing_frac;
  inst.missing_frac_realized = 1.0 - inst.W.sum() / static_cast<double>(m) / n;
  return inst;
}

PoseScene gen_pose_scene(int num_cams, int num_points, double eta, std::uint64_t seed) {
  if (num_cams < 2) throw std::invalid_argument("gen_pose_scene: need at least 2 cameras");
  if (num_points < 8) throw std::invalid_argument("gen_pose_scene: need at least 8 points");
  Rng rng(seed);
  for (int attempt = 0; attempt < 32; ++attempt) {
    // camera i: top 2x4 block random, third row (0,0,0,1); all depths are 1,
    // so every point is in front of every camera
    std::vector<Eigen::Matrix<double, 2, 4>> cams(num_cams);
    for (auto& P : cams)
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 4; ++c) P(r, c) = rng.normal();
    Eigen::MatrixXd pts(4, num_points);
    for (int j = 0; j < num_points; ++j) {
      for (int c = 0; c < 3; ++c) pts(c, j) = rng.normal();
      pts(3, j) = 1.0;
    }

    Eigen::MatrixXd gt(3 * num_cams, num_points);
    std::vector<PoseObservation> obs;
    obs.reserve(static_cast<size_t>(num_cams) * num_points);
    for (int i = 0; i < num_cams; ++i) {
      const Eigen::MatrixXd proj = cams[i] * pts;  // 2 x n, exact projections
      gt.row(3 * i) = proj.row(0);
      gt.row(3 * i + 1) = proj.row(1);
      gt.row(3 * i + 2).setOnes();
      for (int j = 0; j < num_points; ++j)
        obs.push_back(PoseObservation{i, j, proj(0, j), proj(1, j)});
    }

    const Eigen::VectorXd s = thin_svd(gt).sigma;
    if (s.size() >= 4 && s[3] > 1e-6 * s[0]) {
      PoseOp op(num_cams, num_points, std::move(obs), eta);
      Eigen::VectorXd b = op.rhs();
      return PoseScene{std::move(op), std::move(b), std::move(gt)};
    }
  }
  throw std::runtime_error("gen_pose_scene: repeated degenerate scenes");
}

NrsfmScene gen_nrsfm_scene(int num_frames, int num_points, int K, std::uint64_t seed) {
  if (num_frames < 1 || num_points < 1)
    throw std::invalid_argument("gen_nrsfm_scene: dimensions must be positive");
  if (K < 1 || K > std::min(num_frames, 3 * num_points))
    throw std::invalid_argument("gen_nrsfm_scene: need 1 <= K <= min(F, 3n)");
  Rng rng(seed);

  const Eigen::MatrixXd coeffs = normal_matrix(num_frames, K, rng);
  const Eigen::MatrixXd basis = normal_matrix(K, 3 * num_points, rng);
  Eigen::MatrixXd sharp = coeffs * basis;

  std::vector<Eigen::Matrix<double, 2, 3>> cams(num_frames);
  for (auto& R : cams) {
    const Eigen::Matrix3d Q =
        Eigen::HouseholderQR<Eigen::Matrix3d>(normal_matrix(3, 3, rng)).householderQ();
    R = Q.topRows<2>();
  }

  NrsfmOp op(std::move(cams), num_points);
  Eigen::VectorXd b = op.apply(sharp);
  return NrsfmScene{std::move(op), std::move(b), std::move(sharp)};
}

}  // namespace lrr
