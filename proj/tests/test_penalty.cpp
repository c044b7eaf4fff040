#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "lrr/penalty.hpp"
#include "test_support.hpp"

using lrr::Penalty;

namespace {

std::vector<Penalty> all_kinds() {
  return {Penalty::fmu(4.0),       Penalty::nuclear(2.0), Penalty::scad(1.0, 3.7),
          Penalty::log(1.5, 2.0),  Penalty::mcp(1.0, 2.5), Penalty::etp(2.0, 1.5),
          Penalty::geman(1.0, 1.0)};
}

}  // namespace

TEST_CASE("fmu evaluates the closed form bit-for-bit") {
  const Penalty p = Penalty::fmu(4.0);
  for (double x : {0.0, 0.3, 1.0, 1.9999, 2.0, 2.5, 5.0, 100.0}) {
    const double direct = 4.0 - std::pow(std::max(std::sqrt(4.0) - x, 0.0), 2);
    CHECK(p.eval(x) == direct);
  }
  CHECK(p.eval(1.0) == 3.0);
  CHECK(p.eval(5.0) == 4.0);  // constant mu above the threshold
}

TEST_CASE("every kind vanishes at zero") {
  for (const Penalty& p : all_kinds()) CHECK(p.eval(0.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("negative arguments are domain errors") {
  const Penalty p = Penalty::fmu(4.0);
  CHECK_THROWS_AS(p.eval(-0.1), std::domain_error);
  CHECK_THROWS_AS(p.deriv(-0.1), std::domain_error);
  CHECK_THROWS_AS(p.scalar_prox(-0.1), std::domain_error);
}

TEST_CASE("fmu derivative values") {
  const Penalty p = Penalty::fmu(4.0);
  CHECK(p.deriv(1.0) == doctest::Approx(2.0));
  CHECK(p.deriv(3.0) == 0.0);
  CHECK(p.deriv(0.0) == doctest::Approx(4.0));
}

TEST_CASE("derivative matches centered finite differences away from kinks") {
  const double h = 1e-6;
  for (const Penalty& p : all_kinds()) {
    const double scale = p.threshold();
    for (int i = 1; i <= 40; ++i) {
      const double x = 0.05 * i * scale;
      bool near_kink = false;
      // piecewise kinds switch pieces at lambda and gamma*lambda
      for (double loc : {scale, scale / 3.7, scale / 2.5}) {
        if (std::abs(x - loc) < 1e-3) near_kink = true;
      }
      if (near_kink || x < h) continue;
      const double fd = (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
      CHECK(p.deriv(x) == doctest::Approx(fd).epsilon(1e-4));
    }
  }
}

TEST_CASE("derivative is nonnegative and non-increasing") {
  for (const Penalty& p : all_kinds()) {
    double prev = p.deriv(0.0);
    CHECK(prev >= 0.0);
    for (int i = 1; i <= 200; ++i) {
      const double d = p.deriv(0.05 * i * p.threshold());
      CHECK(d >= -1e-15);
      CHECK(d <= prev + 1e-10);
      prev = d;
    }
  }
}

TEST_CASE("fmu prox is hard thresholding at sqrt(mu)") {
  const Penalty p = Penalty::fmu(4.0);
  CHECK(p.scalar_prox(1.5) == 0.0);
  CHECK(p.scalar_prox(3.0) == 3.0);
  CHECK(p.scalar_prox(2.0) == 2.0);  // tie keeps the value
  CHECK(p.scalar_prox(0.0) == 0.0);
}

TEST_CASE("nuclear prox shifts by mu/2") {
  const Penalty p = Penalty::nuclear(2.0);
  CHECK(p.scalar_prox(3.0) == doctest::Approx(2.0));
  CHECK(p.scalar_prox(0.5) == 0.0);
}

TEST_CASE("geman prox example matches the grid search") {
  const Penalty p = Penalty::geman(1.0, 1.0);
  const double y = 2.0;
  const double oracle =
      lrr::test::grid_prox_oracle([&](double x) { return p.eval(x); }, y, 2.0 * y);
  CHECK(p.scalar_prox(y) == doctest::Approx(oracle).epsilon(1e-4));
}

TEST_CASE("scalar prox matches the brute-force oracle for every kind") {
  for (const Penalty& p : all_kinds()) {
    for (double y : {0.0, 0.2, 0.7, 1.0, 1.3, 2.0, 3.5, 6.0}) {
      const double x_max = std::max(2.0 * y, 2.0 * p.threshold());
      const double oracle =
          lrr::test::grid_prox_oracle([&](double x) { return p.eval(x); }, y, x_max);
      const double got = p.scalar_prox(y);
      INFO(p.spec_string(), " y=", y);
      CHECK(std::abs(got - oracle) <= 1e-4);
    }
  }
}

TEST_CASE("prox value never exceeds the oracle's") {
  for (const Penalty& p : all_kinds()) {
    for (double y : {0.4, 1.1, 2.7}) {
      const double x_max = std::max(2.0 * y, 2.0 * p.threshold());
      const double oracle =
          lrr::test::grid_prox_oracle([&](double x) { return p.eval(x); }, y, x_max);
      const auto h = [&](double x) { return p.eval(x) + (x - y) * (x - y); };
      CHECK(h(p.scalar_prox(y)) <= h(oracle) + 1e-10);
    }
  }
}

TEST_CASE("fmu equals mcp with lambda=sqrt(mu), gamma=1") {
  const double mu = 4.0;
  const Penalty f = Penalty::fmu(mu);
  const Penalty m = Penalty::mcp(std::sqrt(mu), 1.0);
  for (int i = 0; i <= 100; ++i) {
    const double x = 0.05 * i;
    CHECK(f.eval(x) == doctest::Approx(m.eval(x)).epsilon(1e-12));
    CHECK(f.deriv(x) == doctest::Approx(m.deriv(x)).epsilon(1e-12));
  }
}

TEST_CASE("validate accepts every built-in kind") {
  for (const Penalty& p : all_kinds()) {
    const auto v = lrr::validate(p);
    INFO(p.spec_string());
    CHECK(!v.has_value());
  }
}

TEST_CASE("validate rejects a convex test function") {
  const auto v = lrr::validate_function([](double x) { return x * x; }, 10.0);
  REQUIRE(v.has_value());
  CHECK(v->property == "concave");
}

TEST_CASE("validate rejects f(0) != 0") {
  const auto v = lrr::validate_function([](double x) { return x - 1.0; }, 10.0);
  REQUIRE(v.has_value());
  CHECK(v->property == "f0");
}

TEST_CASE("validate rejects a decreasing function") {
  const auto v =
      lrr::validate_function([](double x) { return x < 1.0 ? x : 2.0 - x; }, 4.0);
  REQUIRE(v.has_value());
  CHECK(v->property == "monotone");
}

TEST_CASE("spec strings round-trip") {
  for (const Penalty& p : all_kinds()) {
    const Penalty q = Penalty::parse(p.spec_string());
    CHECK(q.kind() == p.kind());
    for (double x : {0.0, 0.5, 1.5, 4.0}) CHECK(q.eval(x) == p.eval(x));
  }
}

TEST_CASE("parse errors name the offending key") {
  CHECK_THROWS_WITH_AS(Penalty::parse("fmu:nu=4"), doctest::Contains("'nu'"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(Penalty::parse("scad:lambda=1.0"), doctest::Contains("'gamma'"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(Penalty::parse("fmu:mu=abc"), doctest::Contains("'mu'"),
                       std::invalid_argument);
  CHECK_THROWS_AS(Penalty::parse("frobnicate:mu=1"), std::invalid_argument);
  CHECK_THROWS_AS(Penalty::parse("fmu:mu=-1"), std::invalid_argument);
  CHECK_THROWS_AS(Penalty::parse("scad:lambda=1,gamma=1.5"), std::invalid_argument);
}
