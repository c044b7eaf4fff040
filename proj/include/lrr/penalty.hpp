#pragma once

#include <functional>
#include <optional>
#include <string>

namespace lrr {

enum class PenaltyKind { FMu, Nuclear, Scad, Log, Mcp, Etp, Geman };

const char* penalty_kind_name(PenaltyKind kind);

/// A concave, non-decreasing scalar penalty f with f(0) = 0, applied to
/// singular values. Immutable after construction; all member functions are
/// pure and safe to call concurrently.
///
/// Formulas (x >= 0 throughout):
///   fmu(mu):            f(x) = mu - max(sqrt(mu) - x, 0)^2
///   nuclear(mu):        f(x) = mu * x
///   scad(lambda,gamma): f(x) = lambda*x                                  x <= lambda
///                              (2*gamma*lambda*x - x^2 - lambda^2)
///                                / (2*(gamma-1))                         lambda < x <= gamma*lambda
///                              lambda^2*(gamma+1)/2                      x > gamma*lambda
///                       (gamma > 2 required)
///   log(lambda,gamma):  f(x) = lambda * log(gamma*x + 1) / log(gamma + 1)
///   mcp(lambda,gamma):  f(x) = gamma*lambda^2 - max(sqrt(gamma)*lambda - x/sqrt(gamma), 0)^2
///                       i.e. 2*lambda*x - x^2/gamma below the plateau; this is the
///                       standard MCP scaled by 2 so that mcp(sqrt(mu), 1) == fmu(mu)
///   etp(lambda,gamma):  f(x) = lambda * (1 - exp(-gamma*x)) / (1 - exp(-gamma))
///   geman(lambda,gamma) f(x) = lambda * x / (x + gamma)
class Penalty {
 public:
  static Penalty fmu(double mu);
  static Penalty nuclear(double mu);
  static Penalty scad(double lambda, double gamma);
  static Penalty log(double lambda, double gamma);
  static Penalty mcp(double lambda, double gamma);
  static Penalty etp(double lambda, double gamma);
  static Penalty geman(double lambda, double gamma);

  /// Parses a CLI/config spec string, e.g. "fmu:mu=4.0" or
  /// "scad:lambda=1.0,gamma=3.7". Errors name the offending key.
  static Penalty parse(const std::string& spec);
  std::string spec_string() const;

  PenaltyKind kind() const { return kind_; }
  double mu() const;      // FMu / Nuclear
  double lambda() const;  // the others
  double gamma() const;

  /// f(x). Negative x is a domain error.
  double eval(double x) const;

  /// f'(x) >= 0, non-increasing. At the (second-order) kinks the right-hand
  /// limit is used, which lies in the subdifferential for every kind here.
  double deriv(double x) const;

  /// argmin over x >= 0 of f(x) + (x - y)^2.
  ///
  /// FMu is hard thresholding at sqrt(mu); the tie at y == sqrt(mu) resolves
  /// to y (the singular value is kept). Nuclear is max(y - mu/2, 0). The
  /// remaining kinds are solved from the stationarity condition
  /// f'(x) + 2(x - y) = 0 on each smooth piece plus the piece endpoints,
  /// never by sampling the objective.
  double scalar_prox(double y) const;

  /// Characteristic scale used for validation grids and prox search ranges.
  double threshold() const;

 private:
  Penalty(PenaltyKind kind, double a, double b);
  PenaltyKind kind_;
  double a_ = 0.0;  // mu or lambda
  double b_ = 0.0;  // gamma
};

struct PenaltyViolation {
  std::string property;  // "f0", "monotone", "concave"
  double at = 0.0;       // grid point where the check failed
  std::string detail;
};

/// Grid check of the hypotheses every penalty must satisfy: f(0) = 0,
/// non-decreasing and midpoint-concave on [0, x_max]. Returns the first
/// violated property, or nullopt if all hold.
std::optional<PenaltyViolation> validate_function(
    const std::function<double(double)>& f, double x_max,
    int grid_points = 512, double tol_f0 = 1e-9, double tol_grid = 1e-8);

/// validate_function applied to a Penalty on [0, 10 * threshold].
std::optional<PenaltyViolation> validate(const Penalty& p);

}  // namespace lrr
