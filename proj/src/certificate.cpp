#include "lrr/certificate.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "lrr/penalty.hpp"

namespace lrr {

Eigen::MatrixXd compute_Z(const MeasurementOp& op, const Eigen::VectorXd& b,
                          const Eigen::MatrixXd& X) {
  if (X.rows() != op.rows() || X.cols() != op.cols())
    throw std::invalid_argument("compute_Z: matrix dimensions do not match the operator");
  if (b.size() != op.out_dim())
    throw std::invalid_argument("compute_Z: data vector length mismatch");
  return X - op.adjoint(op.apply(X)) + op.adjoint(b);
}

Certificate check_optimality(const Eigen::MatrixXd& Z, double mu, double delta,
                             int k, const Eigen::MatrixXd& X) {
  if (!(mu > 0.0)) throw std::invalid_argument("check_optimality: mu must be positive");
  if (!(delta >= 0.0 && delta < 1.0))
    throw std::invalid_argument("check_optimality: delta must be in [0, 1)");
  if (k < 1) throw std::invalid_argument("check_optimality: k must be >= 1");

  Certificate cert;
  cert.k = k;
  cert.delta = delta;
  cert.mu = mu;
  const double sqmu = std::sqrt(mu);
  cert.interval_lo = (1.0 - delta) * sqmu;
  cert.interval_hi = sqmu / (1.0 - delta);
  cert.sigma_z = thin_svd(Z).sigma;
  cert.rank_x = numerical_rank(X, 1e-9);

  if (cert.rank_x >= k)
    cert.reasons.push_back("rank_precondition: rank(X) = " + std::to_string(cert.rank_x) +
                           " is not below k = " + std::to_string(k));

  for (int i = 0; i < cert.sigma_z.size(); ++i) {
    const double s = cert.sigma_z[i];
    const bool inside = (delta == 0.0) ? std::abs(s - sqmu) <= 1e-12
                                       : (s >= cert.interval_lo && s <= cert.interval_hi);
    if (inside) {
      std::ostringstream os;
      os.precision(17);
      os << "sigma_in_interval: sigma_" << (i + 1) << "(Z) = " << s << " lies in ["
         << cert.interval_lo << ", " << cert.interval_hi << "]";
      cert.reasons.push_back(os.str());
    }
  }

  if (delta == 0.0)
    cert.caveats.push_back(
        "delta = 0: the forbidden interval degenerates to the single point sqrt(mu); "
        "the test only excludes sigma_i(Z) within 1e-12 of sqrt(mu). Supply the "
        "problem's RIP constant delta_2k for a meaningful certificate.");

  cert.certified = cert.reasons.empty();
  return cert;
}

Certificate certify(const MeasurementOp& op, const Eigen::VectorXd& b, double mu,
                    double delta, const FactorPair& F) {
  const FactorPair bal = rebalance(F);
  const Eigen::MatrixXd X = bal.product();
  Certificate cert = check_optimality(compute_Z(op, b, X), mu, delta, bal.k(), X);

  const Penalty fmu = Penalty::fmu(mu);
  const double surr = surrogate_value(fmu, bal);
  const double reg = reg_value(fmu, X);
  if (std::abs(surr - reg) > 1e-8 * std::max(1.0, std::abs(reg))) {
    cert.reasons.push_back("surrogate_gap: surrogate " + std::to_string(surr) +
                           " != regularizer " + std::to_string(reg) + " after rebalancing");
    cert.certified = false;
  }

  const OpNormEstimate nrm = op_norm_bound(op);
  if (nrm.value > 1.0 + 1e-9)
    cert.caveats.push_back(
        "operator norm estimate " + std::to_string(nrm.value) +
        " exceeds 1; the RIP normalization (1-delta)||X||^2 <= ||A X||^2 may not hold "
        "as stated.");

  // when no singular value falls in (0, sqrt(mu)], the f_mu regularizer
  // coincides with mu * rank(X) at this point
  const Eigen::VectorXd sx = thin_svd(X).sigma;
  bool in_gap = false;
  for (int i = 0; i < sx.size(); ++i)
    if (sx[i] > 1e-12 * std::max(1.0, sx[0]) && sx[i] <= std::sqrt(mu)) in_gap = true;
  if (!in_gap)
    cert.caveats.push_back("R(X) = mu * rank(X) here: no singular value of X lies in "
                           "(0, sqrt(mu)].");
  return cert;
}

std::string Certificate::to_json_string() const {
  nlohmann::json j;
  j["certified"] = certified;
  j["status"] = certified ? "certified" : "not_certified";
  j["reasons"] = reasons;
  j["caveats"] = caveats;
  j["sigma_z"] = std::vector<double>(sigma_z.data(), sigma_z.data() + sigma_z.size());
  j["interval"] = {{"lo", interval_lo}, {"hi", interval_hi}};
  j["rank_x"] = rank_x;
  j["k"] = k;
  j["delta"] = delta;
  j["mu"] = mu;
  return j.dump(2);
}

}  // namespace lrr
