#include "pivotality/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "pivotality/errors.hpp"
#include "pivotality/quadrature.hpp"

namespace pivotality {

// ---------------------------------------------------------------------------
// PointConfiguration

PointConfiguration::PointConfiguration(std::size_t dim, std::vector<double> coords)
    : dim_(dim), coords_(std::move(coords)) {
  if (dim_ == 0) {
    if (!coords_.empty()) throw DomainError("PointConfiguration: dim 0 takes no coordinates");
    return;
  }
  if (coords_.size() % dim_ != 0) throw DomainError("PointConfiguration: coordinate count not a multiple of dim");
  count_ = coords_.size() / dim_;
}

PointConfiguration PointConfiguration::counter(std::size_t count) {
  PointConfiguration phi(0);
  phi.count_ = count;
  return phi;
}

void PointConfiguration::add(std::span<const double> z) {
  if (z.size() != dim_) throw DomainError("PointConfiguration::add: point has wrong dimension");
  coords_.insert(coords_.end(), z.begin(), z.end());
  ++count_;
}

PointConfiguration PointConfiguration::plus(std::span<const double> z) const {
  PointConfiguration out = *this;
  out.add(z);
  return out;
}

void PointConfiguration::remove_last() {
  if (count_ == 0) throw DomainError("PointConfiguration::remove_last on empty configuration");
  coords_.resize(coords_.size() - dim_);
  --count_;
}

void PointConfiguration::remove(std::size_t i) {
  if (i >= count_) throw DomainError("PointConfiguration::remove: index out of range");
  const std::size_t last = count_ - 1;
  for (std::size_t d = 0; d < dim_; ++d) coords_[i * dim_ + d] = coords_[last * dim_ + d];
  remove_last();
}

PointConfiguration PointConfiguration::restricted(
    const std::function<bool(std::span<const double>)>& keep) const {
  if (dim_ == 0) return keep({}) ? *this : PointConfiguration(0);
  PointConfiguration out(dim_);
  out.coords_.reserve(coords_.size());
  for (std::size_t i = 0; i < count_; ++i) {
    const auto p = point(i);
    if (keep(p)) out.add(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Regions and densities

double Box::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
  return v;
}

Region::Region(Box bounds, Level level, bool convex, std::optional<double> volume,
               std::vector<double> x_breaks)
    : bounds_(std::move(bounds)),
      level_(std::move(level)),
      convex_(convex),
      volume_(volume),
      x_breaks_(std::move(x_breaks)) {
  if (bounds_.lo.size() != bounds_.hi.size()) throw DomainError("Region: bounding box corners differ in dimension");
  for (std::size_t i = 0; i < bounds_.dim(); ++i) {
    if (!(bounds_.lo[i] <= bounds_.hi[i])) throw DomainError("Region: inverted bounding box");
  }
}

Region Region::box(Box b) {
  const double vol = b.volume();
  Box bounds = b;
  auto level = [b = std::move(b)](std::span<const double> x) {
    // Chebyshev distance outside, negative depth inside; convex.
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i) {
      worst = std::max(worst, std::max(b.lo[i] - x[i], x[i] - b.hi[i]));
    }
    return worst;
  };
  return Region(std::move(bounds), level, true, vol);
}

Region Region::ball(std::vector<double> center, double radius) {
  if (!(radius > 0.0)) throw DomainError("Region::ball: radius must be positive");
  Box bounds;
  for (double c : center) {
    bounds.lo.push_back(c - radius);
    bounds.hi.push_back(c + radius);
  }
  const std::size_t n = center.size();
  double vol = 0.0;
  if (n == 1) vol = 2.0 * radius;
  else if (n == 2) vol = std::numbers::pi * radius * radius;
  else if (n == 3) vol = 4.0 / 3.0 * std::numbers::pi * radius * radius * radius;
  else throw DomainError("Region::ball: dimension must be 1, 2 or 3");
  auto level = [center = std::move(center), radius](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - center[i]) * (x[i] - center[i]);
    return std::sqrt(s) - radius;
  };
  return Region(std::move(bounds), level, true, vol);
}

Region Region::interval(double a, double b) {
  if (!(a < b)) throw DomainError("Region::interval: need a < b");
  return box(Box{{a}, {b}});
}

Region Region::singleton() {
  return Region(Box{}, [](std::span<const double>) { return 0.0; }, true, 1.0);
}

Density Density::uniform(double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("Density::uniform: constant must be finite and >= 0");
  Density d;
  d.constant = c;
  d.sup = c;
  d.fn = [c](std::span<const double>) { return c; };
  return d;
}

Density Density::custom(std::function<double(std::span<const double>)> fn, double sup) {
  if (!(sup >= 0.0) || !std::isfinite(sup)) {
    throw DomainError("Density: a finite supremum is required (unbounded densities are rejected)");
  }
  Density d;
  d.fn = std::move(fn);
  d.sup = sup;
  return d;
}

// ---------------------------------------------------------------------------
// Intensity measures

namespace {

double region_integral(const Region& region, const Density& h, double tol) {
  const std::size_t n = region.dim();
  if (n == 0) return h(std::span<const double>{});
  if (h.constant && region.volume()) return *h.constant * *region.volume();
  const Box& b = region.bounds();
  AdaptiveOptions opts;
  opts.abs_tol = tol;
  opts.max_intervals = 200000;
  if (n == 1) {
    auto f = [&](double x) {
      const double p[1] = {x};
      return region.contains(p) ? h(p) : 0.0;
    };
    if (region.convex()) {
      ConvexDomain2D line;
      line.level = [&](double, double y) {
        const double p[1] = {y};
        return region.level(p);
      };
      line.y_lo = b.lo[0];
      line.y_hi = b.hi[0];
      const auto sec = convex_section(line, 0.0);
      if (!sec) return 0.0;
      auto g = [&](double x) {
        const double p[1] = {x};
        return h(p);
      };
      return integrate_adaptive(g, sec->first, sec->second, region.x_breaks(), opts).value;
    }
    return integrate_adaptive(f, b.lo[0], b.hi[0], region.x_breaks(), opts).value;
  }
  if (n == 2) {
    if (region.convex()) {
      ConvexDomain2D dom;
      dom.level = [&](double x, double y) {
        const double p[2] = {x, y};
        return region.level(p);
      };
      dom.x_lo = b.lo[0];
      dom.x_hi = b.hi[0];
      dom.y_lo = b.lo[1];
      dom.y_hi = b.hi[1];
      dom.x_breaks = region.x_breaks();
      auto f = [&](double x, double y) {
        const double p[2] = {x, y};
        return h(p);
      };
      return integrate_convex_2d(dom, f, opts).value;
    }
    AdaptiveOptions inner = opts;
    inner.abs_tol = 0.1 * tol / std::max(b.hi[0] - b.lo[0], 1e-300);
    auto outer = [&](double x) {
      auto g = [&](double y) {
        const double p[2] = {x, y};
        return region.contains(p) ? h(p) : 0.0;
      };
      return integrate_adaptive(g, b.lo[1], b.hi[1], inner).value;
    };
    return integrate_adaptive(outer, b.lo[0], b.hi[0], region.x_breaks(), opts).value;
  }
  throw DomainError("total_mass: quadrature supports dimensions 1 and 2 (closed forms only in 3-D)");
}

}  // namespace

IntensityMeasure::IntensityMeasure(Region region, Density density, double scale, double mass_tol)
    : region_(std::move(region)), density_(std::move(density)), scale_(scale), mass_(0.0) {
  if (!(scale_ >= 0.0) || !std::isfinite(scale_)) throw DomainError("IntensityMeasure: scale must be finite and >= 0");
  if (!(density_.sup >= 0.0) || !std::isfinite(density_.sup)) {
    throw DomainError("IntensityMeasure: density supremum must be finite");
  }
  mass_ = scale_ == 0.0 ? 0.0 : scale_ * region_integral(region_, density_, mass_tol / scale_);
}

IntensityMeasure::IntensityMeasure(Region region, Density density, double scale, double mass, bool)
    : region_(std::move(region)), density_(std::move(density)), scale_(scale), mass_(mass) {}

double IntensityMeasure::intensity(std::span<const double> x) const {
  return region_.contains(x) ? scale_ * density_(x) : 0.0;
}

IntensityMeasure IntensityMeasure::scaled(double factor) const {
  if (!(factor >= 0.0) || !std::isfinite(factor)) throw DomainError("IntensityMeasure::scaled: bad factor");
  if (scale_ == 0.0 && factor != 0.0) return IntensityMeasure(region_, density_, factor);
  return IntensityMeasure(region_, density_, scale_ * factor, mass_ * factor, true);
}

double total_mass(const IntensityMeasure& mu, double tol) {
  if (!(tol > 0.0)) throw DomainError("total_mass: tol must be positive");
  if (mu.scale() == 0.0) return 0.0;
  return mu.scale() * region_integral(mu.region(), mu.density(), tol / mu.scale());
}

std::vector<double> sample_location(const IntensityMeasure& mu, RngStream& rng) {
  const std::size_t n = mu.dim();
  if (n == 0) return {};
  if (!(mu.mass() > 0.0)) throw DomainError("sample_location: measure has zero mass");
  const Box& b = mu.region().bounds();
  const Density& h = mu.density();
  std::vector<double> x(n);
  for (long attempt = 0; attempt < 100000000L; ++attempt) {
    for (std::size_t i = 0; i < n; ++i) x[i] = rng.uniform(b.lo[i], b.hi[i]);
    if (!mu.region().contains(x)) continue;
    if (h.constant) return x;
    const double hx = h(x);
    if (hx > h.sup * (1.0 + 1e-12) + 1e-300) throw DomainError("sample_location: density exceeds its declared supremum");
    if (rng.uniform() * h.sup < hx) return x;
  }
  throw std::runtime_error("sample_location: rejection sampler made no progress");
}

PointConfiguration sample_poisson(const IntensityMeasure& mu, RngStream& rng) {
  const std::uint64_t count = rng.poisson(mu.mass());
  if (mu.dim() == 0) return PointConfiguration::counter(count);
  PointConfiguration phi(mu.dim());
  for (std::uint64_t i = 0; i < count; ++i) phi.add(sample_location(mu, rng));
  return phi;
}

PointConfiguration sample_binomial(const IntensityMeasure& mu, std::size_t m, RngStream& rng) {
  if (m == 0) return PointConfiguration(mu.dim());
  if (!(mu.mass() > 0.0)) throw DomainError("sample_binomial: measure has zero mass");
  if (mu.dim() == 0) return PointConfiguration::counter(m);
  PointConfiguration phi(mu.dim());
  for (std::size_t i = 0; i < m; ++i) phi.add(sample_location(mu, rng));
  return phi;
}

// ---------------------------------------------------------------------------
// Statistics and difference operators

double Statistic::operator()(const PointConfiguration& phi) const {
  const double v = eval(phi);
  if (bound && std::fabs(v) > *bound * (1.0 + 1e-12)) {
    throw std::logic_error("statistic '" + name + "' exceeded its declared bound");
  }
  return v;
}

std::optional<double> Statistic::kth_difference_bound(int k) const {
  if (difference_bound) return difference_bound(k);
  if (bound) return std::ldexp(*bound, k);
  return std::nullopt;
}

double difference(const Statistic& g, const PointConfiguration& phi, std::span<const double> z) {
  return g(phi.plus(z)) - g(phi);
}

double iterated_difference(const Statistic& g, const PointConfiguration& phi,
                           const std::vector<std::vector<double>>& zs, std::size_t max_k) {
  const std::size_t k = zs.size();
  if (k == 0) throw DomainError("iterated_difference: need k >= 1");
  if (k > max_k || k >= 63) throw DomainError("iterated_difference: k exceeds the configured maximum");
  for (const auto& z : zs) {
    if (z.size() != phi.dim()) throw DomainError("iterated_difference: point has wrong dimension");
  }
  double sum = 0.0;
  const std::uint64_t subsets = std::uint64_t{1} << k;
  for (std::uint64_t mask = 0; mask < subsets; ++mask) {
    PointConfiguration config = phi;
    int size = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if (mask & (std::uint64_t{1} << j)) {
        config.add(zs[j]);
        ++size;
      }
    }
    const double sign = ((static_cast<int>(k) - size) % 2 == 0) ? 1.0 : -1.0;
    sum += sign * g(config);
  }
  return sum;
}

}  // namespace pivotality
