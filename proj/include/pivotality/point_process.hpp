#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pivotality/rng.hpp"

namespace pivotality {

/// Finite counting measure on R^dim, stored as a flat list of points
/// (multiplicity by repetition, order irrelevant). dim = 0 models a
/// one-point ground space: the configuration is just an atom count.
class PointConfiguration {
 public:
  explicit PointConfiguration(std::size_t dim = 0) : dim_(dim) {}
  PointConfiguration(std::size_t dim, std::vector<double> coords);
  /// dim-0 configuration with `count` atoms at the single ground point.
  static PointConfiguration counter(std::size_t count);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }
  std::span<const double> point(std::size_t i) const {
    return std::span<const double>(coords_).subspan(i * dim_, dim_);
  }
  std::span<const double> coords() const noexcept { return coords_; }

  /// φ + δ_z.
  void add(std::span<const double> z);
  PointConfiguration plus(std::span<const double> z) const;
  void remove_last();
  /// φ - δ_{x_i} (swap-remove).
  void remove(std::size_t i);
  /// Restriction to {x : keep(x)}.
  PointConfiguration restricted(const std::function<bool(std::span<const double>)>& keep) const;

 private:
  std::size_t dim_ = 0;
  std::size_t count_ = 0;
  std::vector<double> coords_;
};

/// Axis-aligned box.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
  std::size_t dim() const { return lo.size(); }
  double volume() const;
};

/// Measurable region given as {level <= 0} inside a bounding box. When
/// `convex` is set, `level` must be convex so that sections along lines are
/// intervals (used by the planar quadrature).
class Region {
 public:
  using Level = std::function<double(std::span<const double>)>;

  Region(Box bounds, Level level, bool convex, std::optional<double> volume = std::nullopt,
         std::vector<double> x_breaks = {});

  static Region box(Box b);
  static Region ball(std::vector<double> center, double radius);
  static Region interval(double a, double b);
  /// The one-point ground space (dim 0).
  static Region singleton();

  std::size_t dim() const { return bounds_.dim(); }
  const Box& bounds() const { return bounds_; }
  bool contains(std::span<const double> x) const { return dim() == 0 || level_(x) <= 0.0; }
  double level(std::span<const double> x) const { return level_(x); }
  bool convex() const { return convex_; }
  /// Lebesgue volume when known in closed form (1 for the singleton).
  std::optional<double> volume() const { return volume_; }
  const std::vector<double>& x_breaks() const { return x_breaks_; }

 private:
  Box bounds_;
  Level level_;
  bool convex_;
  std::optional<double> volume_;
  std::vector<double> x_breaks_;
};

/// Continuous density h >= 0 with a declared supremum over the region
/// (required: it is the rejection-sampling envelope).
struct Density {
  std::function<double(std::span<const double>)> fn;
  double sup = 0.0;
  std::optional<double> constant;  ///< set when h is constant

  static Density uniform(double c = 1.0);
  static Density custom(std::function<double(std::span<const double>)> fn, double sup);
  double operator()(std::span<const double> x) const { return constant ? *constant : fn(x); }
};

/// θ·h(x)dx restricted to a region. The total mass is computed once at
/// construction (closed form when h is constant on a region of known volume,
/// adaptive quadrature otherwise).
class IntensityMeasure {
 public:
  IntensityMeasure(Region region, Density density, double scale = 1.0, double mass_tol = 1e-10);

  const Region& region() const { return region_; }
  const Density& density() const { return density_; }
  double scale() const { return scale_; }
  std::size_t dim() const { return region_.dim(); }
  double mass() const { return mass_; }
  /// Value of θ·h at x (0 outside the region).
  double intensity(std::span<const double> x) const;
  IntensityMeasure scaled(double factor) const;

 private:
  IntensityMeasure(Region region, Density density, double scale, double mass, bool);
  Region region_;
  Density density_;
  double scale_;
  double mass_;
};

/// θ·∫_region h, to within tol (exact when closed form applies).
double total_mass(const IntensityMeasure& mu, double tol);

/// One point with law μ/μ(X), by rejection from the bounding box.
std::vector<double> sample_location(const IntensityMeasure& mu, RngStream& rng);
/// Poisson process with intensity μ.
PointConfiguration sample_poisson(const IntensityMeasure& mu, RngStream& rng);
/// Binomial process: m i.i.d. points with law μ/μ(X); m = 0 gives the null measure.
PointConfiguration sample_binomial(const IntensityMeasure& mu, std::size_t m, RngStream& rng);

/// Functional g of configurations with boundedness metadata.
struct Statistic {
  std::string name;
  std::function<double(const PointConfiguration&)> eval;
  /// sup |g| when g is bounded.
  std::optional<double> bound;
  /// Optional c_k with |D^k g| <= c_k; defaults to 2^k·bound for bounded g.
  std::function<double(int)> difference_bound;
  /// Optional closed-form E g(η_μ), used as an oracle.
  std::function<double(const IntensityMeasure&)> poisson_expectation;

  /// Evaluates g and enforces the declared bound.
  double operator()(const PointConfiguration& phi) const;
  bool bounded() const { return bound.has_value(); }
  /// Bound on |D^k g| if one is known.
  std::optional<double> kth_difference_bound(int k) const;
};

/// D_z g(φ) = g(φ + δ_z) − g(φ).
double difference(const Statistic& g, const PointConfiguration& phi, std::span<const double> z);

/// D^k_{z_1..z_k} g(φ) = Σ_{J ⊆ {1..k}} (−1)^{k−|J|} g(φ + Σ_{j∈J} δ_{z_j}).
/// Each entry of `zs` has length phi.dim() (empty vectors when dim = 0).
/// Throws DomainError when k exceeds max_k (2^k evaluations).
double iterated_difference(const Statistic& g, const PointConfiguration& phi,
                           const std::vector<std::vector<double>>& zs, std::size_t max_k = 20);

}  // namespace pivotality
