#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "pivotality/parallel.hpp"
#include "pivotality/point_process.hpp"
#include "pivotality/rng.hpp"

namespace pivotality {

using Vec2 = std::array<double, 2>;

/// Disk (ball in 3-D).
struct DiskShape {
  std::vector<double> center;
  double radius = 1.0;
};
struct BoxShape {
  std::vector<double> lo, hi;
};
/// Strictly convex, counter-clockwise, no repeated vertices.
struct PolygonShape {
  std::vector<Vec2> vertices;
};
struct SegmentShape {
  Vec2 a{}, b{};
};

/// Weighted node of a quadrature rule on a curve or surface.
struct BoundaryNode {
  std::vector<double> x;
  double weight = 0.0;
};

/// Compact convex set K with exactly parameterisable parallel sets
/// K_t = {x : dist(K, x) <= t}. Polygons and segments live in the plane;
/// disks and boxes in dimensions 2 and 3.
class ConvexBody {
 public:
  using Shape = std::variant<DiskShape, BoxShape, PolygonShape, SegmentShape>;

  static ConvexBody disk(std::vector<double> center, double radius);
  static ConvexBody box(std::vector<double> lo, std::vector<double> hi);
  static ConvexBody polygon(std::vector<Vec2> ccw_vertices);
  static ConvexBody segment(Vec2 a, Vec2 b);

  const Shape& shape() const { return shape_; }
  std::size_t dim() const { return dim_; }
  /// False only for the segment (its interior points have two normals).
  bool full_dimensional() const;
  const char* kind_name() const;

  double distance(std::span<const double> x) const;
  bool parallel_contains(double t, std::span<const double> x) const;
  Box bounding_box(double t) const;

  /// Volume (area in 2-D).
  double volume() const;
  /// H^{n-1}(∂K) for full-dimensional K; 2L for a segment.
  double surface() const;
  /// Closed-form |K_t| (Steiner polynomial).
  double parallel_volume(double t) const;
  /// d/dt |K_t| = H^{n-1}(∂K_t) for t > 0.
  double parallel_surface(double t) const;

  /// {dist(K, ·) <= t} as a convex region with Steiner volume and
  /// section breakpoints for planar quadrature.
  Region parallel_region(double t) const;

  /// Quadrature nodes for ∂K_t: offset pieces and vertex/edge arcs, each
  /// with a Gauss-Legendre rule of `order` points per parameter.
  /// t = 0 requires a full-dimensional body.
  std::vector<BoundaryNode> boundary_nodes(double t, int order = 32) const;
  /// Nodes on the segment itself (the points with two unit normals).
  std::vector<BoundaryNode> segment_nodes(int order = 32) const;

 private:
  ConvexBody(Shape shape, std::size_t dim) : shape_(std::move(shape)), dim_(dim) {}
  Shape shape_;
  std::size_t dim_;
};

/// ∫_{K_t} h dx; Steiner closed form for constant h, planar quadrature otherwise.
double parallel_mass(const ConvexBody& K, double t, const Density& h, double tol = 1e-10);

/// ∫_{∂K_t} f dH^{n-1}.
double boundary_integral(const ConvexBody& K, double t, const std::function<double(std::span<const double>)>& f,
                         int order = 32);

struct SteinerCheck {
  double fd_value = 0.0;
  double boundary_value = 0.0;
  double gap = 0.0;
};

/// Central difference of t ↦ ∫_{K_t∖K} f dx (planar quadrature) against
/// ∫_{∂K_t} f. Requires 0 < delta < t.
SteinerCheck steiner_derivative_check(const ConvexBody& K, const std::function<double(std::span<const double>)>& f,
                                      double t, double delta = 1e-3, double tol = 1e-11);

struct CroftonOptions {
  std::size_t reps = 20000;
  /// Replicates for the boundary side; 0 means `reps`.
  std::size_t rhs_reps = 0;
  double delta = 1e-2;
  int order = 32;
  ExecutionPolicy policy;
};

struct CroftonReport {
  double lhs_fd = 0.0;
  double lhs_stderr = 0.0;
  double rhs = 0.0;
  double rhs_stderr = 0.0;
  double z = 0.0;
  /// Boundary nodes used (including ∂² nodes at t = 0).
  std::size_t nodes = 0;
};

/// d/dt E g(η_t), η_t Poisson with intensity h·1{K_t}. The left side is a
/// finite difference under the restriction coupling (central for t >=
/// delta, forward second order below that); the right side integrates
/// E D_x g(η_t) h(x) over ∂K_t, plus twice the integral over the segment
/// when t = 0 and K is a segment. g must be bounded or declare a bound on
/// its first difference.
CroftonReport crofton_poisson_check(const Statistic& g, const ConvexBody& K, const Density& h, double t,
                                    const CroftonOptions& options, const RngStream& rng);

/// Same for the binomial process ξ_t^{(m)} of m i.i.d. points with law
/// h·1{K_t}/λ(K_t). Right side: (m/λ(K_t)) ∫_{∂K_t} E[g(ξ^{(m-1)} + δ_x) - g(ξ^{(m)})] h dH^{n-1},
/// with ξ^{(m-1)} the first m-1 points of ξ^{(m)}. Left side: independent samples at t ± delta
/// (forward second order for t < delta). Requires λ(K_t) > 0.
CroftonReport crofton_binomial_check(const Statistic& g, const ConvexBody& K, const Density& h, double t,
                                     std::size_t m, const CroftonOptions& options, const RngStream& rng);

}  // namespace pivotality
