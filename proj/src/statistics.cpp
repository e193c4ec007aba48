#include "pivotality/statistics.hpp"

#include <algorithm>
#include <cmath>

#include "pivotality/errors.hpp"

namespace pivotality::statistics {

namespace {

std::size_t points_in(const PointConfiguration& phi, const Region& set) {
  if (phi.dim() == 0) return phi.size();
  std::size_t n = 0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (set.contains(phi.point(i))) ++n;
  }
  return n;
}

// P(Poisson(m) >= n)
double poisson_at_least(double m, std::size_t n) {
  if (n == 0) return 1.0;
  double term = std::exp(-m), below = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    below += term;
    term *= m / static_cast<double>(j + 1);
  }
  return std::max(0.0, 1.0 - below);
}

bool corners_inside(const Region& outer, const Box& b) {
  const std::size_t n = b.dim();
  std::vector<double> x(n);
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    for (std::size_t i = 0; i < n; ++i) x[i] = (mask >> i & 1) ? b.hi[i] : b.lo[i];
    if (!outer.contains(x)) return false;
  }
  return true;
}

}  // namespace

double measure_of(const IntensityMeasure& mu, const Region& set, double tol) {
  if (set.dim() != mu.dim()) throw DomainError("measure_of: dimension mismatch");
  if (mu.dim() == 0) return mu.mass();
  const auto& density = mu.density();
  if (density.constant && set.volume() && mu.region().convex() && corners_inside(mu.region(), set.bounds())) {
    return mu.scale() * *density.constant * *set.volume();
  }
  Box bounds = set.bounds();
  const Box& rb = mu.region().bounds();
  for (std::size_t i = 0; i < bounds.dim(); ++i) {
    bounds.lo[i] = std::max(bounds.lo[i], rb.lo[i]);
    bounds.hi[i] = std::min(bounds.hi[i], rb.hi[i]);
    if (bounds.lo[i] >= bounds.hi[i]) return 0.0;
  }
  const Region& region = mu.region();
  Region both(bounds,
              [region, set](std::span<const double> x) { return std::max(region.level(x), set.level(x)); },
              region.convex() && set.convex());
  return IntensityMeasure(both, density, mu.scale(), tol).mass();
}

Statistic constant(double c) {
  Statistic g;
  g.name = "constant";
  g.eval = [c](const PointConfiguration&) { return c; };
  g.bound = std::fabs(c);
  g.difference_bound = [](int) { return 0.0; };
  g.poisson_expectation = [c](const IntensityMeasure&) { return c; };
  return g;
}

Statistic count() {
  Statistic g;
  g.name = "count";
  g.eval = [](const PointConfiguration& phi) { return static_cast<double>(phi.size()); };
  g.difference_bound = [](int k) { return k == 1 ? 1.0 : 0.0; };
  g.poisson_expectation = [](const IntensityMeasure& mu) { return mu.mass(); };
  return g;
}

Statistic count_squared() {
  Statistic g;
  g.name = "count_squared";
  g.eval = [](const PointConfiguration& phi) {
    const double n = static_cast<double>(phi.size());
    return n * n;
  };
  g.poisson_expectation = [](const IntensityMeasure& mu) { return mu.mass() + mu.mass() * mu.mass(); };
  return g;
}

Statistic count_in(Region set) {
  Statistic g;
  g.name = "count_in";
  g.eval = [set](const PointConfiguration& phi) { return static_cast<double>(points_in(phi, set)); };
  g.difference_bound = [](int k) { return k == 1 ? 1.0 : 0.0; };
  g.poisson_expectation = [set](const IntensityMeasure& mu) { return measure_of(mu, set); };
  return g;
}

Statistic void_indicator(Region set) {
  Statistic g;
  g.name = "void";
  g.eval = [set](const PointConfiguration& phi) { return points_in(phi, set) == 0 ? 1.0 : 0.0; };
  g.bound = 1.0;
  g.poisson_expectation = [set](const IntensityMeasure& mu) { return std::exp(-measure_of(mu, set)); };
  return g;
}

Statistic at_least(Region set, std::size_t n) {
  Statistic g;
  g.name = "at_least";
  g.eval = [set, n](const PointConfiguration& phi) { return points_in(phi, set) >= n ? 1.0 : 0.0; };
  g.bound = 1.0;
  g.poisson_expectation = [set, n](const IntensityMeasure& mu) {
    return poisson_at_least(measure_of(mu, set), n);
  };
  return g;
}

Statistic count_at_least(std::size_t n) {
  Statistic g;
  g.name = "count_at_least";
  g.eval = [n](const PointConfiguration& phi) { return phi.size() >= n ? 1.0 : 0.0; };
  g.bound = 1.0;
  g.poisson_expectation = [n](const IntensityMeasure& mu) { return poisson_at_least(mu.mass(), n); };
  return g;
}

}  // namespace pivotality::statistics
