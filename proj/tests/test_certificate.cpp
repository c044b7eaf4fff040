#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "lrr/certificate.hpp"
#include "lrr/datagen.hpp"
#include "lrr/varpro.hpp"
#include "test_support.hpp"

using namespace lrr;
using lrr::test::random_matrix;
using lrr::test::random_vector;

TEST_CASE("compute_Z: exact data and exact solution give Z = X0") {
  const ProblemInstance inst = make_instance(10, 14, 2, "uniform", 0.3, 0.0, 201);
  MaskedOp op(inst.W);
  const Eigen::VectorXd b = op.apply(inst.M0);
  const Eigen::MatrixXd Z = compute_Z(op, b, inst.M0);
  CHECK((Z - inst.M0).norm() <= 1e-12 * inst.M0.norm());
}

TEST_CASE("compute_Z: full mask reduces to the scattered data") {
  Rng rng(202);
  const MaskedOp op(Eigen::MatrixXd::Ones(5, 6));
  const Eigen::VectorXd b = random_vector(30, rng);
  const Eigen::MatrixXd X = random_matrix(5, 6, rng);
  CHECK((compute_Z(op, b, X) - op.adjoint(b)).norm() <= 1e-12);
  CHECK((compute_Z(op, b, Eigen::MatrixXd::Zero(5, 6)) - op.adjoint(b)).norm() == 0.0);
}

TEST_CASE("compute_Z is jointly linear in X and b") {
  Rng rng(203);
  Eigen::MatrixXd W(6, 8);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 8; ++j) W(i, j) = rng.uniform() < 0.6 ? 1.0 : 0.0;
  const MaskedOp op(W);
  const Eigen::MatrixXd X1 = random_matrix(6, 8, rng), X2 = random_matrix(6, 8, rng);
  const Eigen::VectorXd b1 = random_vector(op.out_dim(), rng),
                        b2 = random_vector(op.out_dim(), rng);
  const double a = rng.normal(), c = rng.normal();
  const Eigen::MatrixXd lhs = compute_Z(op, a * b1 + c * b2, a * X1 + c * X2);
  const Eigen::MatrixXd rhs = a * compute_Z(op, b1, X1) + c * compute_Z(op, b2, X2);
  CHECK((lhs - rhs).norm() <= 1e-10 * std::max(1.0, rhs.norm()));
}

TEST_CASE("check_optimality: interval endpoints count as violations") {
  const double mu = 4.0;
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(4, 4);
  Z(0, 0) = 5.0;
  Z(1, 1) = std::sqrt(mu);  // exactly on the boundary
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(4, 4);
  X(0, 0) = 5.0;

  const Certificate with_delta0 = check_optimality(Z, mu, 0.0, 3, X);
  CHECK(!with_delta0.certified);
  REQUIRE(with_delta0.reasons.size() == 1);
  CHECK(with_delta0.reasons[0].find("sigma_in_interval") == 0);
  CHECK(!with_delta0.caveats.empty());  // the delta = 0 degeneracy is loud

  const Certificate with_delta = check_optimality(Z, mu, 0.2, 3, X);
  CHECK(with_delta.interval_lo == doctest::Approx(0.8 * 2.0));
  CHECK(with_delta.interval_hi == doctest::Approx(2.0 / 0.8));
  CHECK(!with_delta.certified);
}

TEST_CASE("check_optimality: rank precondition") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(4, 4);
  X(0, 0) = 3.0;
  X(1, 1) = 2.0;
  const Eigen::MatrixXd Z = X;
  const Certificate cert = check_optimality(Z, 0.25, 0.0, 2, X);  // rank 2 == k
  CHECK(!cert.certified);
  bool has_rank_reason = false;
  for (const auto& r : cert.reasons)
    if (r.find("rank_precondition") == 0) has_rank_reason = true;
  CHECK(has_rank_reason);

  CHECK_THROWS_AS(check_optimality(Z, -1.0, 0.0, 2, X), std::invalid_argument);
  CHECK_THROWS_AS(check_optimality(Z, 1.0, 1.0, 2, X), std::invalid_argument);
}

TEST_CASE("certified noiseless completion with sqrt(mu) below sigma_r") {
  const ProblemInstance inst = make_instance(20, 40, 3, "uniform", 0.2, 0.0, 204);
  MaskedOp op(inst.W);
  const Eigen::VectorXd b = op.apply(inst.M0);
  const Eigen::VectorXd s = thin_svd(inst.M0).sigma;
  const double mu = std::pow(0.5 * s[2], 2);  // sqrt(mu) < sigma_3(M0)

  SolverConfig cfg{Penalty::fmu(mu)};
  cfg.k = 6;
  cfg.seed = 3;
  const SolveReport rep = solve(cfg, op, b);
  REQUIRE(normalized_distance(rep.X, inst.M0) <= 1e-6);

  const Certificate cert = certify(op, b, mu, 0.0, rep.factors);
  CHECK(cert.certified);
  CHECK(cert.rank_x == 3);

  // sigma(Z) tracks sigma(M0) when the solution is this close
  for (int i = 0; i < 3; ++i)
    CHECK(cert.sigma_z[i] == doctest::Approx(s[i]).epsilon(1e-5));
}

TEST_CASE("certificate json carries the full evidence") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(3, 3);
  X(0, 0) = 4.0;
  const Certificate cert = check_optimality(X, 1.0, 0.1, 2, X);
  const std::string json = cert.to_json_string();
  for (const char* key : {"\"certified\"", "\"status\"", "\"reasons\"", "\"caveats\"",
                          "\"sigma_z\"", "\"interval\"", "\"rank_x\"", "\"delta\"",
                          "\"mu\""})
    CHECK(json.find(key) != std::string::npos);
}

TEST_CASE("operator norm caveat appears for expansive operators") {
  Rng rng(205);
  // duplicate observations double-count entries: ||A|| = sqrt(2) > 1
  std::vector<PoseObservation> obs;
  for (int j = 0; j < 8; ++j) {
    obs.push_back(PoseObservation{0, j, 1.0, 1.0});
    obs.push_back(PoseObservation{0, j, 1.0, 1.0});
  }
  const PoseOp op(1, 8, obs, 1.0);
  const FactorPair F{random_matrix(3, 2, rng), random_matrix(8, 2, rng)};
  const Certificate cert = certify(op, op.rhs(), 1.0, 0.0, F);
  bool has_norm_caveat = false;
  for (const auto& c : cert.caveats)
    if (c.find("operator norm") != std::string::npos) has_norm_caveat = true;
  CHECK(has_norm_caveat);
}
