#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "pivotality/crofton.hpp"
#include "pivotality/errors.hpp"
#include "pivotality/statistics.hpp"

using namespace pivotality;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<ConvexBody> planar_bodies() {
  return {ConvexBody::disk({0.3, -0.2}, 1.0), ConvexBody::box({0, 0}, {1, 2}),
          ConvexBody::polygon({{0, 0}, {2, 0}, {2.5, 1}, {1, 2}, {-0.5, 1}}), ConvexBody::segment({0, 0}, {2, 1})};
}

// area of the intersection of disks (0, R) and (d, r)
double lens_area(double R, double r, double d) {
  if (d >= R + r) return 0.0;
  if (d <= std::fabs(R - r)) return kPi * std::min(R, r) * std::min(R, r);
  const double a = r * r * std::acos((d * d + r * r - R * R) / (2 * d * r));
  const double b = R * R * std::acos((d * d + R * R - r * r) / (2 * d * R));
  const double c = 0.5 * std::sqrt((-d + r + R) * (d + r - R) * (d - r + R) * (d + r + R));
  return a + b - c;
}

}  // namespace

TEST_CASE("parallel set membership") {
  const auto disk = ConvexBody::disk({0, 0}, 1.0);
  const double in[2] = {0.2, 0.3}, near[2] = {1.4, 0.0}, far[2] = {0.0, 1.6};
  for (double t : {0.0, 0.5, 3.0}) CHECK(disk.parallel_contains(t, in));
  CHECK(disk.parallel_contains(0.5, near));
  CHECK_FALSE(disk.parallel_contains(0.5, far));

  const auto seg = ConvexBody::segment({0, 0}, {2, 0});
  const double beside[2] = {1.0, 0.49}, beyond[2] = {2.3, 0.3}, outside[2] = {2.4, 0.35};
  CHECK(seg.parallel_contains(0.5, beside));
  CHECK(seg.parallel_contains(0.5, beyond));  // 0.3² + 0.3² < 0.25
  CHECK_FALSE(seg.parallel_contains(0.5, outside));
  CHECK(seg.distance(beyond) == doctest::Approx(std::hypot(0.3, 0.3)));

  const auto box = ConvexBody::box({0, 0, 0}, {1, 1, 1});
  const double corner[3] = {2, 2, 2};
  CHECK(box.distance(corner) == doctest::Approx(std::sqrt(3.0)));
  CHECK_THROWS_AS(disk.parallel_contains(-0.1, in), DomainError);
}

TEST_CASE("shape validation") {
  CHECK_THROWS_AS(ConvexBody::polygon({{0, 0}, {1, 0}}), DomainError);
  CHECK_THROWS_AS(ConvexBody::polygon({{0, 0}, {0, 1}, {1, 0}}), DomainError);          // clockwise
  CHECK_THROWS_AS(ConvexBody::polygon({{0, 0}, {1, 0}, {2, 0}, {1, 1}}), DomainError);  // collinear
  CHECK_THROWS_AS(ConvexBody::polygon({{0, 0}, {1, 0}, {1, 0}, {0, 1}}), DomainError);
  // pentagram: every turn is to the left but it winds twice
  std::vector<Vec2> star;
  for (int k = 0; k < 5; ++k) star.push_back({std::cos(4 * kPi * k / 5), std::sin(4 * kPi * k / 5)});
  CHECK_THROWS_AS(ConvexBody::polygon(star), DomainError);
  CHECK_THROWS_AS(ConvexBody::segment({1, 1}, {1, 1}), DomainError);
  CHECK_THROWS_AS(ConvexBody::disk({0}, 1.0), DomainError);
  CHECK_THROWS_AS(ConvexBody::box({0, 0}, {1, 0}), DomainError);
}

TEST_CASE("distance is 1-Lipschitz and parallel sets are nested") {
  RngStream rng(30, 0);
  auto bodies = planar_bodies();
  bodies.push_back(ConvexBody::disk({0, 0, 0}, 0.7));
  bodies.push_back(ConvexBody::box({0, 0, 0}, {1, 0.5, 2}));
  for (const auto& K : bodies) {
    for (int i = 0; i < 2000; ++i) {
      std::vector<double> x(K.dim()), y(K.dim());
      double gap = 0.0;
      for (std::size_t k = 0; k < K.dim(); ++k) {
        x[k] = rng.uniform(-3, 3);
        y[k] = rng.uniform(-3, 3);
        gap += (x[k] - y[k]) * (x[k] - y[k]);
      }
      CHECK(std::fabs(K.distance(x) - K.distance(y)) <= std::sqrt(gap) + 1e-12);
      const double t = rng.uniform(0, 1), t2 = t + rng.uniform(0, 1);
      if (K.parallel_contains(t, x)) CHECK(K.parallel_contains(t2, x));
    }
  }
}

TEST_CASE("parallel mass") {
  const auto one = Density::uniform();
  CHECK(parallel_mass(ConvexBody::disk({0, 0}, 1), 0.0, one) == doctest::Approx(kPi));
  CHECK(parallel_mass(ConvexBody::box({0, 0}, {1, 1}), 1.0, one) == doctest::Approx(5 + kPi));
  CHECK(parallel_mass(ConvexBody::segment({0, 0}, {2, 0}), 0.5, one) == doctest::Approx(2 + kPi / 4));
  CHECK(ConvexBody::box({0, 0, 0}, {1, 2, 3}).parallel_volume(0.5) ==
        doctest::Approx(6 + 22 * 0.5 + kPi * 6 * 0.25 + 4.0 / 3 * kPi * 0.125));
}

TEST_CASE("Steiner polynomial against planar quadrature") {
  // a non-constant Density that happens to be 1 forces the quadrature path
  const auto flat = Density::custom([](std::span<const double>) { return 1.0; }, 1.0);
  for (const auto& K : planar_bodies()) {
    for (double t : {0.1, 0.5, 1.3}) {
      const double q = parallel_mass(K, t, flat, 1e-11);
      const double steiner = K.volume() + K.surface() * t + kPi * t * t;
      CHECK(q == doctest::Approx(steiner).epsilon(1e-8));
      CHECK(K.parallel_volume(t) == doctest::Approx(steiner).epsilon(1e-14));
    }
  }
  // ∫ over the disk of radius 2 of x² = π·2⁴/4
  const auto sq = Density::custom([](std::span<const double> x) { return x[0] * x[0]; }, 9.0);
  CHECK(parallel_mass(ConvexBody::disk({0, 0}, 1), 1.0, sq) == doctest::Approx(4 * kPi).epsilon(1e-9));
}

TEST_CASE("boundary integrals") {
  auto one = [](std::span<const double>) { return 1.0; };
  CHECK(boundary_integral(ConvexBody::disk({0, 0}, 1), 0.5, one) == doctest::Approx(3 * kPi).epsilon(1e-13));
  CHECK(boundary_integral(ConvexBody::box({0, 0}, {1, 1}), 0.0, one) == doctest::Approx(4.0).epsilon(1e-13));
  for (const auto& K : planar_bodies()) {
    for (double t : {0.05, 0.4, 2.0}) {
      CHECK(std::fabs(boundary_integral(K, t, one) - K.parallel_surface(t)) <= 1e-10);
      CHECK(K.parallel_surface(t) == doctest::Approx(K.surface() + 2 * kPi * t));
    }
  }
  const auto ball = ConvexBody::disk({0, 0, 1}, 0.7);
  const auto cube = ConvexBody::box({0, 0, 0}, {1, 0.5, 2});
  for (double t : {0.0, 0.3}) {
    CHECK(std::fabs(boundary_integral(ball, t, one, 16) - ball.parallel_surface(t)) <= 1e-10);
    CHECK(std::fabs(boundary_integral(cube, t, one, 16) - cube.parallel_surface(t)) <= 1e-10);
  }
  // ∫_{sphere} z² dA = 4πR⁴/3 around the origin
  const auto origin = ConvexBody::disk({0, 0, 0}, 1.0);
  CHECK(boundary_integral(origin, 0.5, [](std::span<const double> x) { return x[2] * x[2]; }, 16) ==
        doctest::Approx(4 * kPi * std::pow(1.5, 4) / 3).epsilon(1e-12));
  CHECK_THROWS_AS(boundary_integral(ConvexBody::segment({0, 0}, {1, 0}), 0.0, one), DomainError);
  CHECK(ConvexBody::segment({0, 0}, {3, 4}).segment_nodes().size() == 32);
}

TEST_CASE("Steiner derivative check") {
  auto one = [](std::span<const double>) { return 1.0; };
  const auto disk = steiner_derivative_check(ConvexBody::disk({0, 0}, 1), one, 0.5, 1e-3);
  CHECK(disk.boundary_value == doctest::Approx(3 * kPi));
  CHECK(disk.gap <= 1e-5);
  const auto square = steiner_derivative_check(
      ConvexBody::box({0, 0}, {1, 1}), [](std::span<const double> x) { return x[0] * x[0]; }, 0.2, 1e-3);
  CHECK(square.gap <= 1e-5);
  const auto zero = steiner_derivative_check(
      ConvexBody::box({0, 0}, {1, 1}), [](std::span<const double>) { return 0.0; }, 0.2, 1e-3);
  CHECK(zero.fd_value == 0.0);
  CHECK(zero.boundary_value == 0.0);
  CHECK(zero.gap == 0.0);
  for (const auto& K : planar_bodies()) {
    const auto c = steiner_derivative_check(
        K, [](std::span<const double> x) { return std::exp(0.3 * x[0] - 0.2 * x[1]); }, 0.3, 1e-3);
    CHECK(c.gap <= 1e-5 * (1 + std::fabs(c.boundary_value)));
  }
  CHECK_THROWS_AS(steiner_derivative_check(ConvexBody::disk({0, 0}, 1), one, 1e-4, 1e-3), DomainError);
}

TEST_CASE("Crofton formula for Poisson processes") {
  const RngStream rng(31, 0);
  CroftonOptions o;
  o.reps = 20000;
  const auto disk = ConvexBody::disk({0, 0}, 1.0);
  const auto count = crofton_poisson_check(statistics::count(), disk, Density::uniform(), 0.5, o, rng.substream(0));
  CHECK(count.rhs == doctest::Approx(3 * kPi).epsilon(1e-13));
  CHECK(count.rhs_stderr <= 1e-12);
  CHECK(std::fabs(count.z) <= 4.0);

  const auto constant =
      crofton_poisson_check(statistics::constant(2.0), disk, Density::uniform(), 0.5, o, rng.substream(1));
  CHECK(constant.lhs_fd == 0.0);
  CHECK(constant.rhs == 0.0);
  CHECK(constant.z == 0.0);

  // segment at t = 0: E count = 2Lt + πt², derivative 2L from the two-sided normals
  const double L = std::hypot(2.0, 1.0);
  const auto seg = ConvexBody::segment({0, 0}, {2, 1});
  const auto s = crofton_poisson_check(statistics::count(), seg, Density::uniform(), 0.0, o, rng.substream(2));
  CHECK(s.rhs == doctest::Approx(2 * L).epsilon(1e-13));
  CHECK(std::fabs(s.z) <= 4.0);
  CHECK(s.nodes == 32);

  // a bounded statistic, a non-constant intensity and a polygon
  const auto poly = ConvexBody::polygon({{0, 0}, {1, 0}, {1.2, 0.8}, {0.2, 1}});
  const auto B = Region::ball({1.1, 0.5}, 0.4);
  const auto h = Density::custom([](std::span<const double> x) { return 2.0 + x[0]; }, 4.0);
  const auto v = crofton_poisson_check(statistics::void_indicator(B), poly, h, 0.2, o, rng.substream(3));
  CHECK(std::fabs(v.z) <= 4.0);
  CHECK(v.rhs < 0.0);

  // full-dimensional body at t = 0 (forward difference)
  const auto zero = crofton_poisson_check(statistics::count(), disk, Density::uniform(), 0.0, o, rng.substream(4));
  CHECK(zero.rhs == doctest::Approx(2 * kPi));
  CHECK(std::fabs(zero.z) <= 4.0);

  CHECK_THROWS_AS(crofton_poisson_check(statistics::count_squared(), disk, Density::uniform(), 0.5, o, rng),
                  DomainError);
}

TEST_CASE("Crofton formula for binomial processes") {
  const RngStream rng(32, 0);
  CroftonOptions o;
  o.reps = 20000;
  o.delta = 0.05;
  const auto disk = ConvexBody::disk({0, 0}, 1.0);
  const auto B = Region::ball({0, 0}, 0.5);
  for (std::size_t m : {1, 5, 20}) {
    for (double t : {0.2, 0.5}) {
      const auto r = crofton_binomial_check(statistics::count_in(B), disk, Density::uniform(), t, m, o,
                                            rng.substream(m * 10 + static_cast<std::uint64_t>(t * 10)));
      const double exact = -static_cast<double>(m) / (2 * std::pow(1 + t, 3));
      CHECK(std::fabs(r.rhs - exact) <= 4 * r.rhs_stderr);
      CHECK(std::fabs(r.lhs_fd - exact) <= 4 * r.lhs_stderr + 0.03);
      CHECK(std::fabs(r.z) <= 4.0);
    }
  }
  // m = 1, B crossing the boundary: E = |B ∩ K_t| / |K_t|
  const auto off = Region::ball({1, 0}, 0.5);
  const double t = 0.3, h = 1e-6;
  auto expect = [&](double s) { return lens_area(1 + s, 0.5, 1.0) / (kPi * (1 + s) * (1 + s)); };
  const double exact = (expect(t + h) - expect(t - h)) / (2 * h);
  const auto r = crofton_binomial_check(statistics::count_in(off), disk, Density::uniform(), t, 1, o, rng.substream(1));
  CHECK(std::fabs(r.rhs - exact) <= 4 * r.rhs_stderr + 1e-3);
  CHECK(std::fabs(r.lhs_fd - exact) <= 4 * r.lhs_stderr + 2e-3);

  const auto c = crofton_binomial_check(statistics::constant(1.0), disk, Density::uniform(), 0.2, 3, o, rng);
  CHECK(c.lhs_fd == 0.0);
  CHECK(c.rhs == 0.0);
  CHECK_THROWS_AS(crofton_binomial_check(statistics::count(), ConvexBody::segment({0, 0}, {1, 0}), Density::uniform(),
                                         0.0, 3, o, rng),
                  DomainError);
  CHECK_THROWS_AS(crofton_binomial_check(statistics::count(), disk, Density::uniform(), 0.2, 0, o, rng), DomainError);
}
