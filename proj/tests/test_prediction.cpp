#include <cmath>

#include "doctest.h"
#include "gsbm/error.hpp"
#include "gsbm/prediction.hpp"
#include "gsbm/qve.hpp"

using namespace gsbm;

namespace {

GsbmSpec limit_spec(double gamma, double a1, double a2, double t1 = 1.0, double t2 = 1.0) {
  GsbmSpec s;
  s.gamma = gamma;
  s.alpha1 = a1;
  s.alpha2 = a2;
  s.theta1 = t1;
  s.theta2 = t2;
  return s;
}

GsbmSpec planted(double gamma, double a1, double a2) {
  return limit_spec(gamma, a1, a2, 1.0 / std::sqrt(gamma), 0.0);
}

// Hidden community spec at finite N with p - q = w / sqrt(N).
GsbmSpec hidden(double w, std::int64_t n = 2500, double q = 0.2, double gamma = 0.25) {
  const auto n1 = static_cast<std::int64_t>(std::llround(gamma * n));
  const double p = q + w / std::sqrt(static_cast<double>(n));
  return from_sbm({n, n1, p, q, q, true, ShiftKind::HiddenCommunity}).spec;
}

}  // namespace

TEST_CASE("semicircle edge by both methods") {
  for (double gamma : {0.2, 0.5}) {
    const auto spec = limit_spec(gamma, 1, 1);
    const auto d = find_upper_edge(spec);
    CHECK(d.method == EdgeMethod::Discriminant);
    CHECK(std::abs(d.l_plus - 2.0) < 1e-8);
    CHECK(d.double_root_m.first.real() == doctest::Approx(-1.0).epsilon(1e-6));
    const auto s = find_upper_edge(spec, EdgeMethod::DensitySupportScan);
    CHECK(s.method == EdgeMethod::DensitySupportScan);
    CHECK(std::abs(s.l_plus - 2.0) < 1e-6);
  }
}

TEST_CASE("edge methods agree on two-block profiles") {
  for (const auto& spec : {limit_spec(0.3, 2, 1), limit_spec(0.7, 0.2, 3), limit_spec(0.5, 0, 0)}) {
    const auto d = find_upper_edge(spec);
    const auto s = find_upper_edge(spec, EdgeMethod::DensitySupportScan);
    CHECK(std::abs(d.l_plus - s.l_plus) < 1e-6);
    CHECK(d.certified_window < 1e-8);
  }
}

TEST_CASE("edge separates support from gap") {
  for (const auto& spec : {limit_spec(0.3, 2, 1), hidden(2.5), limit_spec(0.5, 1, 1)}) {
    const auto e = find_upper_edge(spec);
    const double eta = 1e-4;
    const auto above = density(spec, e.l_plus + 0.05, e.l_plus + 0.06, 2, eta);
    const auto below = density(spec, e.l_plus - 0.06, e.l_plus - 0.05, 2, eta);
    CHECK(above.rho[0] < 10.0 * eta);
    CHECK(below.rho[1] > 1e-3);
  }
}

TEST_CASE("hidden community edge is 2 + O(N^-1/2)") {
  for (std::int64_t n : {2500, 10000, 40000}) {
    const auto e = find_upper_edge(hidden(2.5, n));
    CHECK(std::abs(e.l_plus - 2.0) < 3.0 / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("balanced BBP location") {
  const auto spec = limit_spec(0.5, 1, 1);
  for (double lambda : {1.5, 2.0, 3.0, 10.0}) {
    const auto p = predict_outlier(spec, lambda);
    REQUIRE(p.z);
    CHECK(std::abs(*p.z - (lambda + 1.0 / lambda)) < 1e-9);
    CHECK(*p.gap == doctest::Approx(*p.z - p.l_plus));
  }
  CHECK(std::abs(critical_lambda(spec) - 1.0) < 1e-6);
  const auto sub = predict_outlier(spec, 0.8);
  CHECK_FALSE(sub.z);
  CHECK_FALSE(sub.gap);
  const auto zero = predict_outlier(spec, 0.0);
  CHECK_FALSE(zero.z);
  CHECK_THROWS_AS(predict_outlier(spec, -1.0), ValidationError);
}

TEST_CASE("hidden community outlier matches the closed form") {
  const auto spec = hidden(2.5);
  CHECK(spec.lambda == doctest::Approx(1.5625));
  const auto p = predict_outlier(spec, spec.lambda);
  REQUIRE(p.z);
  CHECK(std::abs(*p.z - 2.2025) < 1e-6 + 3.0 / std::sqrt(2500.0));
  CHECK(*p.z > p.l_plus);
  const auto sub = hidden(0.5);
  CHECK(sub.lambda == doctest::Approx(0.3125));
  CHECK_FALSE(predict_outlier(sub, sub.lambda).z);
}

TEST_CASE("hidden community lambda_c tends to 1") {
  double prev = 1e9;
  for (std::int64_t n : {2500, 40000, 640000}) {
    const double lc = critical_lambda(hidden(1.6, n));
    const double err = std::abs(lc - 1.0);
    CHECK(err < prev);
    CHECK(err < 3.0 / std::sqrt(static_cast<double>(n)));
    prev = err;
  }
}

TEST_CASE("bisection and closed-form lambda_c agree") {
  for (const auto& spec : {planted(0.3, 2, 1), limit_spec(0.6, 0.5, 1.5, 0.8, std::sqrt((1 - 0.6 * 0.64) / 0.4)),
                           hidden(2.0)}) {
    const auto e = find_upper_edge(spec);
    CHECK(critical_lambda(spec, e) == doctest::Approx(critical_lambda_closed_form(spec, e)).epsilon(1e-12));
  }
}

TEST_CASE("outlier location is monotone and continuous at lambda_c") {
  const auto spec = planted(0.3, 2, 1);
  const auto e = find_upper_edge(spec);
  const double lc = critical_lambda(spec, e);
  double prev = e.l_plus;
  for (double lambda = lc * 1.01; lambda < 6.0; lambda += 0.25) {
    const auto p = predict_outlier(spec, lambda, e);
    REQUIRE(p.z);
    CHECK(*p.z >= prev);
    CHECK(*p.z > e.l_plus);
    prev = *p.z;
  }
  double last_gap = 1e9;
  for (double eps : {1e-1, 3e-2, 1e-2}) {
    const auto p = predict_outlier(spec, lc * (1.0 + eps), e);
    REQUIRE(p.z);
    CHECK(*p.gap < last_gap);
    last_gap = *p.gap;
  }
  CHECK(last_gap < 1e-3);
  CHECK_FALSE(predict_outlier(spec, lc * 0.999, e).z);
  // gap > 0 iff lambda > lambda_c
  CHECK_FALSE(predict_outlier(spec, lc, e).z);
}

TEST_CASE("marginal reporting just above lambda_c") {
  const auto spec = limit_spec(0.5, 1, 1);
  const auto p = predict_outlier(spec, 1.0 + 1e-5);
  CHECK_FALSE(p.z);
  CHECK(p.marginal);
}

TEST_CASE("swap symmetry of lambda_c") {
  const double g = 0.3, t1 = 1.2;
  const double t2 = std::sqrt((1.0 - g * t1 * t1) / (1.0 - g));
  const auto a = limit_spec(g, 2.0, 0.6, t1, t2);
  const auto b = limit_spec(1.0 - g, 0.6, 2.0, t2, t1);
  CHECK(critical_lambda(a) == doctest::Approx(critical_lambda(b)).epsilon(1e-8));
}

TEST_CASE("threshold closed forms") {
  CHECK(std::abs(hidden_threshold(0.2, 0.25, 2500) - 0.232) < 1e-12);
  CHECK(std::abs(hidden_threshold(0.2, 0.5, 2500) - 0.216) < 1e-12);
  CHECK(hidden_threshold(0.2, 1.0, 1e16) == doctest::Approx(0.2));
  CHECK(std::abs(unbalanced_threshold(0.2, 2500) - 0.216) < 1e-12);
  CHECK(std::abs(unbalanced_threshold(0.5, 10000) - 0.51) < 1e-12);
  CHECK(unbalanced_threshold(0.2, 1e16) == doctest::Approx(0.2));
  CHECK_THROWS_AS(hidden_threshold(0.0, 0.25, 2500), ValidationError);
  CHECK_THROWS_AS(unbalanced_threshold(1.0, 2500), ValidationError);
}

TEST_CASE("top eigenvalue closed forms") {
  CHECK(hidden_lambda1(2.5, 0.2, 0.25) == doctest::Approx(2.2025).epsilon(1e-14));
  CHECK(hidden_lambda1(1.599, 0.2, 0.25) == 2.0);
  CHECK(hidden_lambda1(1.6, 0.2, 0.25) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(unbalanced_lambda1(2.5, 0.2) == doctest::Approx(3.445).epsilon(1e-14));
  CHECK(unbalanced_lambda1(0.4, 0.2) == 2.0);
  CHECK(unbalanced_lambda1(0.8, 0.2) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(hidden_lambda1(0.0, 0.2, 0.25), ValidationError);
  CHECK_THROWS_AS(unbalanced_lambda1(-1.0, 0.2), ValidationError);
}

TEST_CASE("numeric outlier agrees with the unbalanced closed form") {
  const auto spec = from_sbm({2500, 625, 0.25, 0.25, 0.2, true, ShiftKind::Balanced}).spec;
  const auto p = predict_outlier(spec, spec.lambda);
  REQUIRE(p.z);
  CHECK(std::abs(*p.z - 3.445) < 1e-6 + 3.0 / std::sqrt(2500.0));
}
