#include <cmath>

#include "doctest.h"
#include "pivotality/errors.hpp"
#include "pivotality/perturbation.hpp"
#include "pivotality/pmf.hpp"
#include "pivotality/statistics.hpp"

using namespace pivotality;

namespace {

IntensityMeasure unit_square(double theta = 1.0) {
  return IntensityMeasure(Region::box(Box{{0, 0}, {1, 1}}), Density::uniform(), theta);
}

const Region kCorner = Region::box(Box{{0, 0}, {0.5, 0.5}});

bool within(const McEstimate& e, double target, double slack = 0.0) {
  return std::fabs(e.estimate - target) <= 4.0 * e.std_error + slack;
}

}  // namespace

TEST_CASE("expectation_mc examples") {
  const RngStream rng(1, 0);
  const auto c = expectation_mc(statistics::constant(2.5), unit_square(), 100, rng);
  CHECK(c.estimate == 2.5);
  CHECK(c.std_error == 0.0);
  const auto n = expectation_mc(statistics::count(), unit_square(3.0), 10000, rng);
  CHECK(within(n, 3.0));
  const auto v = expectation_mc(statistics::void_indicator(kCorner), unit_square(3.0), 10000, rng);
  CHECK(within(v, std::exp(-0.75)));
  CHECK_THROWS_AS(expectation_mc(statistics::count(), unit_square(), 1, rng), DomainError);
}

TEST_CASE("expectation_mc does not depend on the worker count") {
  const RngStream rng(2, 0);
  const auto a = expectation_mc(statistics::count(), unit_square(2.0), 500, rng, ExecutionPolicy{1});
  const auto b = expectation_mc(statistics::count(), unit_square(2.0), 500, rng, ExecutionPolicy{3});
  CHECK(a.estimate == b.estimate);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("perturbation series: constant and count") {
  const RngStream rng(3, 0);
  const auto lambda = unit_square(1.0), nu = unit_square(2.0);
  SeriesOptions opts;
  opts.reps_per_term = 2000;
  const auto c = perturbation_series(statistics::constant(4.0), lambda, nu, 0.5, opts, rng);
  CHECK(c.estimate == 4.0);
  CHECK(c.truncation_bound == 0.0);
  for (std::size_t k = 1; k < c.terms.size(); ++k) CHECK(c.terms[k].estimate == 0.0);

  const auto n = perturbation_series(statistics::count(), lambda, nu, 0.5, opts, rng);
  CHECK(n.truncation_bound == 0.0);
  CHECK(n.terms[1].estimate == doctest::Approx(1.0).epsilon(1e-14));  // θ·ν(X)·D = 0.5·2·1
  for (std::size_t k = 2; k < n.terms.size(); ++k) CHECK(n.terms[k].estimate == 0.0);
  CHECK(std::fabs(n.estimate - 2.0) <= 4.0 * n.std_error);
}

TEST_CASE("perturbation series: void probability of the perturbed process") {
  const RngStream rng(4, 0);
  const auto lambda = unit_square(1.0);
  const auto nu = unit_square(1.0);
  SeriesOptions opts;
  opts.reps_per_term = 20000;
  const auto g = statistics::void_indicator(kCorner);
  for (double theta : {0.5, 1.0}) {
    const auto r = perturbation_series(g, lambda, nu, theta, opts, rng);
    const double exact = std::exp(-0.25 - theta * 0.25);
    CHECK(std::fabs(r.estimate - exact) <= r.truncation_bound + 4.0 * r.std_error);
    CHECK(r.truncation_bound > 0.0);
  }
  // θ = 0.5, ν(X) = 1, M = 1: Σ_{k>6} 1/k!
  const auto r = perturbation_series(g, lambda, nu, 0.5, opts, rng);
  double tail = std::exp(1.0);
  double f = 1.0;
  for (int k = 0; k <= 6; ++k) {
    if (k > 0) f *= k;
    tail -= 1.0 / f;
  }
  CHECK(r.truncation_bound == doctest::Approx(tail).epsilon(1e-8));
}

TEST_CASE("perturbation series: negative θ needs a certified density ratio") {
  const RngStream rng(5, 0);
  const auto lambda = unit_square(2.0), nu = unit_square(1.0);
  const auto g = statistics::void_indicator(kCorner);
  SeriesOptions opts;
  opts.reps_per_term = 20000;
  CHECK_THROWS_AS(perturbation_series(g, lambda, nu, -0.5, opts, rng), DomainError);
  opts.nu_over_lambda_bound = 0.5;  // ν = λ/2
  const auto r = perturbation_series(g, lambda, nu, -1.0, opts, rng);
  const double exact = std::exp(-0.5 + 0.25);
  CHECK(std::fabs(r.estimate - exact) <= r.truncation_bound + 4.0 * r.std_error);
  opts.nu_over_lambda_bound = 3.0;
  CHECK_THROWS_AS(perturbation_series(g, lambda, nu, -0.5, opts, rng), DomainError);
  CHECK_THROWS_AS(perturbation_series(g, lambda, nu, 1.5, opts, rng), DomainError);
  CHECK_THROWS_AS(perturbation_series(statistics::count_squared(), lambda, nu, 0.5, SeriesOptions{}, rng), DomainError);
}

TEST_CASE("derivative via pivotal locations") {
  const RngStream rng(6, 0);
  const auto lambda = unit_square(1.0);
  const auto n = derivative_location_estimator(statistics::count(), lambda, 2.0, 1000, rng);
  CHECK(n.total.estimate == 1.0);
  CHECK(n.total.std_error == 0.0);
  const auto g = statistics::void_indicator(kCorner);
  for (double theta : {0.0, 1.0, 3.0}) {
    const auto v = derivative_location_estimator(g, lambda, theta, 40000, rng);
    CHECK(within(v.total, -0.25 * std::exp(-0.25 * theta)));
    CHECK(v.plus.estimate == 0.0);
    CHECK(v.minus.estimate >= 0.0);
  }
  // θ = 0: η is empty, so the estimator is ∫[g(δ_z) - g(0)]λ(dz) = -λ(B)
  const auto zero = derivative_location_estimator(g, lambda, 0.0, 40000, rng);
  CHECK(within(zero.total, -0.25));
}

TEST_CASE("pivotal points agree with pivotal locations") {
  const RngStream rng(7, 0);
  const auto lambda = unit_square(2.0);
  const double theta = 1.5;
  const auto A = statistics::at_least(kCorner, 1);
  const auto points = derivative_point_estimator(A, lambda, theta, 40000, rng);
  const auto locations = derivative_location_estimator(A, lambda, theta, 40000, rng.substream(99));
  const double exact = 0.5 * std::exp(-theta * 0.5);  // λ(B)·P(η(B) = 0)
  CHECK(within(points.pivotal_points, exact));
  CHECK(within(locations.plus, exact));
  CHECK(std::fabs(points.pivotal_points.estimate - locations.plus.estimate) <=
        4.0 * std::hypot(points.pivotal_points.std_error, locations.plus.std_error));
  // adding a point never leaves an increasing event
  CHECK(points.added_point_variant.estimate == 0.0);

  const auto full = derivative_point_estimator(statistics::constant(1.0), lambda, theta, 100, rng);
  CHECK(full.pivotal_points.estimate == 0.0);
  CHECK_THROWS_AS(derivative_point_estimator(A, lambda, 0.0, 100, rng), DomainError);
  CHECK_THROWS_AS(derivative_point_estimator(statistics::count(), lambda, 1.0, 100, rng), DomainError);
}

TEST_CASE("singleton ground space reproduces the Poisson integrand") {
  const RngStream rng(8, 0);
  const IntensityMeasure point(Region::singleton(), Density::uniform(), 1.0);
  const double theta = 2.0;
  for (std::size_t k = 1; k <= 4; ++k) {
    const auto A = statistics::count_at_least(k);
    const double expected = poisson_pmf(theta, static_cast<std::int64_t>(k) - 1);
    const auto loc = derivative_location_estimator(A, point, theta, 20000, rng);
    CHECK(within(loc.total, expected));
    const auto pts = derivative_point_estimator(A, point, theta, 20000, rng);
    CHECK(within(pts.pivotal_points, expected));
  }
}

TEST_CASE("higher derivatives") {
  const RngStream rng(9, 0);
  const auto lambda = unit_square(1.5);
  const auto d2 = higher_derivative_estimator(statistics::count(), lambda, 1.0, 2, 200, rng);
  CHECK(d2.estimate == 0.0);
  const auto sq = higher_derivative_estimator(statistics::count_squared(), lambda, 1.0, 2, 200, rng);
  CHECK(sq.estimate == doctest::Approx(2.0 * 1.5 * 1.5).epsilon(1e-14));
  const auto g = statistics::void_indicator(kCorner);
  const auto one = higher_derivative_estimator(g, lambda, 1.0, 1, 500, rng);
  const auto loc = derivative_location_estimator(g, lambda, 1.0, 500, rng);
  CHECK(one.estimate == loc.total.estimate);
  CHECK(one.std_error == loc.total.std_error);
  // d²/dθ² e^{-θλ(B)} = λ(B)² e^{-θλ(B)}
  const auto v2 = higher_derivative_estimator(g, lambda, 1.0, 2, 40000, rng);
  CHECK(within(v2, 0.375 * 0.375 * std::exp(-0.375)));
  CHECK_THROWS_AS(higher_derivative_estimator(g, lambda, 1.0, 11, 100, rng), DomainError);
  CHECK_THROWS_AS(higher_derivative_estimator(g, lambda, 1.0, 0, 100, rng), DomainError);
}

TEST_CASE("finite differences of the expectation match the derivative estimator") {
  const RngStream rng(10, 0);
  const auto lambda = unit_square(1.0);
  const auto g = statistics::at_least(Region::ball({0.5, 0.5}, 0.4), 2);
  const double theta = 2.0, delta = 0.05;
  const std::size_t reps = 100000;
  const auto up = expectation_mc(g, lambda.scaled(theta + delta), reps, rng.substream(0));
  const auto down = expectation_mc(g, lambda.scaled(theta - delta), reps, rng.substream(1));
  const double fd = (up.estimate - down.estimate) / (2 * delta);
  const double fd_se = std::hypot(up.std_error, down.std_error) / (2 * delta);
  const auto d = derivative_location_estimator(g, lambda, theta, reps, rng.substream(2));
  CHECK(std::fabs(fd - d.total.estimate) <= 4.0 * std::hypot(fd_se, d.total.std_error) + 1e-3);
}

TEST_CASE("Erlang arrival times: derivative of P(T_n <= x)") {
  const RngStream rng(11, 0);
  const double x = 2.0, theta = 1.3;
  const IntensityMeasure lebesgue(Region::interval(0.0, x), Density::uniform(), 1.0);
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto A = statistics::count_at_least(n);
    const auto d = derivative_location_estimator(A, lebesgue, theta, 40000, rng.substream(n));
    const double nn = static_cast<double>(n);
    const double exact = std::pow(x, nn) * std::pow(theta, nn - 1) * std::exp(-theta * x) / std::tgamma(nn);
    CHECK(within(d.total, exact));
    CHECK(d.plus.estimate >= 0.0);
    CHECK(d.minus.estimate == 0.0);
  }
}
