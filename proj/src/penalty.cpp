#include "lrr/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace lrr {

namespace {

double sq(double x) { return x * x; }

void check_positive(double v, const char* key) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string("penalty parameter '") + key +
                                "' must be a positive finite real");
  }
}

}  // namespace

const char* penalty_kind_name(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::FMu: return "fmu";
    case PenaltyKind::Nuclear: return "nuclear";
    case PenaltyKind::Scad: return "scad";
    case PenaltyKind::Log: return "log";
    case PenaltyKind::Mcp: return "mcp";
    case PenaltyKind::Etp: return "etp";
    case PenaltyKind::Geman: return "geman";
  }
  return "?";
}

Penalty::Penalty(PenaltyKind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}

Penalty Penalty::fmu(double mu) {
  check_positive(mu, "mu");
  return Penalty(PenaltyKind::FMu, mu, 0.0);
}

Penalty Penalty::nuclear(double mu) {
  check_positive(mu, "mu");
  return Penalty(PenaltyKind::Nuclear, mu, 0.0);
}

Penalty Penalty::scad(double lambda, double gamma) {
  check_positive(lambda, "lambda");
  check_positive(gamma, "gamma");
  if (!(gamma > 2.0)) throw std::invalid_argument("penalty parameter 'gamma' must be > 2 for scad");
  return Penalty(PenaltyKind::Scad, lambda, gamma);
}

Penalty Penalty::log(double lambda, double gamma) {
  check_positive(lambda, "lambda");
  check_positive(gamma, "gamma");
  return Penalty(PenaltyKind::Log, lambda, gamma);
}

Penalty Penalty::mcp(double lambda, double gamma) {
  check_positive(lambda, "lambda");
  check_positive(gamma, "gamma");
  return Penalty(PenaltyKind::Mcp, lambda, gamma);
}

Penalty Penalty::etp(double lambda, double gamma) {
  check_positive(lambda, "lambda");
  check_positive(gamma, "gamma");
  return Penalty(PenaltyKind::Etp, lambda, gamma);
}

Penalty Penalty::geman(double lambda, double gamma) {
  check_positive(lambda, "lambda");
  check_positive(gamma, "gamma");
  return Penalty(PenaltyKind::Geman, lambda, gamma);
}

double Penalty::mu() const {
  if (kind_ != PenaltyKind::FMu && kind_ != PenaltyKind::Nuclear)
    throw std::logic_error("mu() only defined for fmu/nuclear penalties");
  return a_;
}

double Penalty::lambda() const {
  if (kind_ == PenaltyKind::FMu || kind_ == PenaltyKind::Nuclear)
    throw std::logic_error("lambda() not defined for fmu/nuclear penalties");
  return a_;
}

double Penalty::gamma() const {
  if (kind_ == PenaltyKind::FMu || kind_ == PenaltyKind::Nuclear)
    throw std::logic_error("gamma() not defined for fmu/nuclear penalties");
  return b_;
}

double Penalty::threshold() const {
  switch (kind_) {
    case PenaltyKind::FMu: return std::sqrt(a_);
    case PenaltyKind::Nuclear: return 0.5 * a_;
    case PenaltyKind::Scad:
    case PenaltyKind::Mcp: return a_ * b_;
    case PenaltyKind::Log:
    case PenaltyKind::Etp:
    case PenaltyKind::Geman: return a_ + b_;
  }
  return 1.0;
}

double Penalty::eval(double x) const {
  if (x < 0.0 || !std::isfinite(x)) throw std::domain_error("penalty eval: x must be >= 0");
  switch (kind_) {
    case PenaltyKind::FMu:
      return a_ - sq(std::max(std::sqrt(a_) - x, 0.0));
    case PenaltyKind::Nuclear:
      return a_ * x;
    case PenaltyKind::Scad: {
      const double l = a_, g = b_;
      if (x <= l) return l * x;
      if (x <= g * l) return (2.0 * g * l * x - x * x - l * l) / (2.0 * (g - 1.0));
      return l * l * (g + 1.0) / 2.0;
    }
    case PenaltyKind::Log:
      return a_ * std::log(b_ * x + 1.0) / std::log(b_ + 1.0);
    case PenaltyKind::Mcp: {
      const double rg = std::sqrt(b_);
      return b_ * a_ * a_ - sq(std::max(rg * a_ - x / rg, 0.0));
    }
    case PenaltyKind::Etp:
      return a_ * (1.0 - std::exp(-b_ * x)) / (1.0 - std::exp(-b_));
    case PenaltyKind::Geman:
      return a_ * x / (x + b_);
  }
  return 0.0;
}

double Penalty::deriv(double x) const {
  if (x < 0.0 || !std::isfinite(x)) throw std::domain_error("penalty deriv: x must be >= 0");
  switch (kind_) {
    case PenaltyKind::FMu:
      return 2.0 * std::max(std::sqrt(a_) - x, 0.0);
    case PenaltyKind::Nuclear:
      return a_;
    case PenaltyKind::Scad: {
      const double l = a_, g = b_;
      if (x <= l) return l;
      if (x <= g * l) return (g * l - x) / (g - 1.0);
      return 0.0;
    }
    case PenaltyKind::Log:
      return a_ * b_ / (std::log(b_ + 1.0) * (b_ * x + 1.0));
    case PenaltyKind::Mcp:
      return 2.0 * std::max(a_ - x / b_, 0.0);
    case PenaltyKind::Etp:
      return a_ * b_ * std::exp(-b_ * x) / (1.0 - std::exp(-b_));
    case PenaltyKind::Geman:
      return a_ * b_ / sq(x + b_);
  }
  return 0.0;
}

namespace {

// Stationary-point prox for penalties whose derivative is convex and
// decreasing (log, etp, geman). h(x) = f(x) + (x-y)^2 has h' convex, so h'
// has at most two roots, all in [0, y]. Locate the minimizer of h' by
// ternary search, then bisect each monotone half for sign changes.
double prox_convex_deriv(const Penalty& p, double y) {
  if (y <= 0.0) return 0.0;
  const auto hp = [&](double x) { return p.deriv(x) + 2.0 * (x - y); };
  const auto h = [&](double x) { return p.eval(x) + sq(x - y); };

  double lo = 0.0, hi = y;
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (hp(m1) < hp(m2)) hi = m2; else lo = m1;
  }
  const double xmin = 0.5 * (lo + hi);

  std::vector<double> candidates{0.0};
  const auto bisect = [&](double a, double b) {
    double fa = hp(a), fb = hp(b);
    if (fa == 0.0) { candidates.push_back(a); return; }
    if (fb == 0.0) { candidates.push_back(b); return; }
    if ((fa > 0.0) == (fb > 0.0)) return;
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + b);
      const double fm = hp(m);
      if (fm == 0.0) { a = b = m; break; }
      if ((fm > 0.0) == (fa > 0.0)) { a = m; fa = fm; } else { b = m; }
    }
    candidates.push_back(0.5 * (a + b));
  };
  bisect(0.0, xmin);
  bisect(xmin, y);

  double best = candidates.front(), best_val = h(best);
  for (double c : candidates) {
    const double v = h(c);
    if (v < best_val) { best = c; best_val = v; }
  }
  return best;
}

// argmin over a candidate list; ties resolve to the largest candidate so
// that boundary cases keep the input value rather than dropping rank.
double argmin_keep_largest(const std::function<double(double)>& h,
                           std::vector<double> candidates) {
  std::sort(candidates.begin(), candidates.end());
  double best = candidates.front(), best_val = h(best);
  for (double c : candidates) {
    const double v = h(c);
    if (v <= best_val) { best = c; best_val = v; }
  }
  return best;
}

}  // namespace

double Penalty::scalar_prox(double y) const {
  if (y < 0.0 || !std::isfinite(y)) throw std::domain_error("penalty prox: y must be >= 0");
  switch (kind_) {
    case PenaltyKind::FMu: {
      const double t = std::sqrt(a_);
      return y < t ? 0.0 : y;  // tie at y == t keeps y
    }
    case PenaltyKind::Nuclear:
      return std::max(y - 0.5 * a_, 0.0);
    case PenaltyKind::Scad: {
      const double l = a_, g = b_;
      const auto h = [&](double x) { return eval(x) + sq(x - y); };
      std::vector<double> cand{0.0, l, g * l, std::max(y, g * l)};
      const double x1 = y - 0.5 * l;  // stationary on [0, l]
      if (x1 > 0.0 && x1 < l) cand.push_back(x1);
      const double x2 = (2.0 * y * (g - 1.0) - g * l) / (2.0 * g - 3.0);  // on (l, g*l)
      if (x2 > l && x2 < g * l) cand.push_back(x2);
      return argmin_keep_largest(h, cand);
    }
    case PenaltyKind::Mcp: {
      const double l = a_, g = b_;
      const auto h = [&](double x) { return eval(x) + sq(x - y); };
      std::vector<double> cand{0.0, g * l, std::max(y, g * l)};
      if (g != 1.0) {
        const double xs = g * (y - l) / (g - 1.0);
        if (xs > 0.0 && xs < g * l) cand.push_back(xs);
      }
      return argmin_keep_largest(h, cand);
    }
    case PenaltyKind::Log:
    case PenaltyKind::Etp:
    case PenaltyKind::Geman:
      return prox_convex_deriv(*this, y);
  }
  return y;
}

std::string Penalty::spec_string() const {
  std::ostringstream os;
  os.precision(17);
  os << penalty_kind_name(kind_) << ":";
  if (kind_ == PenaltyKind::FMu || kind_ == PenaltyKind::Nuclear) {
    os << "mu=" << a_;
  } else {
    os << "lambda=" << a_ << ",gamma=" << b_;
  }
  return os.str();
}

Penalty Penalty::parse(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("penalty spec '" + spec + "': expected '<kind>:<key>=<value>,...'");
  const std::string kind = spec.substr(0, colon);

  double mu = std::numeric_limits<double>::quiet_NaN();
  double lambda = std::numeric_limits<double>::quiet_NaN();
  double gamma = std::numeric_limits<double>::quiet_NaN();

  std::string rest = spec.substr(colon + 1);
  std::istringstream items(rest);
  std::string item;
  while (std::getline(items, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("penalty spec: item '" + item + "' is not key=value");
    const std::string key = item.substr(0, eq);
    double value;
    try {
      size_t pos = 0;
      value = std::stod(item.substr(eq + 1), &pos);
      if (pos != item.size() - eq - 1) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw std::invalid_argument("penalty spec: key '" + key + "' has a malformed value '" +
                                  item.substr(eq + 1) + "'");
    }
    if (key == "mu") mu = value;
    else if (key == "lambda") lambda = value;
    else if (key == "gamma") gamma = value;
    else throw std::invalid_argument("penalty spec: unknown key '" + key + "'");
  }

  const auto need = [&](double v, const char* key) {
    if (std::isnan(v))
      throw std::invalid_argument("penalty spec: missing key '" + std::string(key) + "' for kind '" + kind + "'");
    return v;
  };
  if (kind == "fmu") return Penalty::fmu(need(mu, "mu"));
  if (kind == "nuclear") return Penalty::nuclear(need(mu, "mu"));
  if (kind == "scad") return Penalty::scad(need(lambda, "lambda"), need(gamma, "gamma"));
  if (kind == "log") return Penalty::log(need(lambda, "lambda"), need(gamma, "gamma"));
  if (kind == "mcp") return Penalty::mcp(need(lambda, "lambda"), need(gamma, "gamma"));
  if (kind == "etp") return Penalty::etp(need(lambda, "lambda"), need(gamma, "gamma"));
  if (kind == "geman") return Penalty::geman(need(lambda, "lambda"), need(gamma, "gamma"));
  throw std::invalid_argument("penalty spec: unknown kind '" + kind + "'");
}

std::optional<PenaltyViolation> validate_function(
    const std::function<double(double)>& f, double x_max, int grid_points,
    double tol_f0, double tol_grid) {
  if (grid_points < 3) throw std::invalid_argument("validate: need at least 3 grid points");
  const double f0 = f(0.0);
  if (std::abs(f0) > tol_f0)
    return PenaltyViolation{"f0", 0.0, "f(0) = " + std::to_string(f0) + " != 0"};

  std::vector<double> xs(grid_points), fs(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    xs[i] = x_max * static_cast<double>(i) / (grid_points - 1);
    fs[i] = f(xs[i]);
  }
  for (int i = 0; i + 1 < grid_points; ++i) {
    if (fs[i + 1] < fs[i] - tol_grid)
      return PenaltyViolation{"monotone", xs[i + 1],
                              "f decreases between " + std::to_string(xs[i]) + " and " +
                                  std::to_string(xs[i + 1])};
  }
  // midpoint concavity on the uniform grid: f(x_{i+1}) >= (f(x_i)+f(x_{i+2}))/2
  for (int i = 0; i + 2 < grid_points; ++i) {
    if (fs[i + 1] < 0.5 * (fs[i] + fs[i + 2]) - tol_grid)
      return PenaltyViolation{"concave", xs[i + 1],
                              "midpoint test fails at " + std::to_string(xs[i + 1])};
  }
  return std::nullopt;
}

std::optional<PenaltyViolation> validate(const Penalty& p) {
  return validate_function([&](double x) { return p.eval(x); }, 10.0 * p.threshold());
}

}  // namespace lrr
