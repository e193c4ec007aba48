#include "pivotality/crofton.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pivotality/errors.hpp"
#include "pivotality/quadrature.hpp"
#include "pivotality/stats.hpp"

namespace pivotality {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double cross(Vec2 a, Vec2 b) { return a[0] * b[1] - a[1] * b[0]; }
Vec2 sub(Vec2 a, Vec2 b) { return {a[0] - b[0], a[1] - b[1]}; }
double length(Vec2 a) { return std::hypot(a[0], a[1]); }

// outward unit normal of the edge a -> b of a ccw polygon
Vec2 outward(Vec2 a, Vec2 b) {
  const Vec2 e = sub(b, a);
  const double l = length(e);
  return {e[1] / l, -e[0] / l};
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 e = sub(b, a), d = sub(p, a);
  const double s = std::clamp((d[0] * e[0] + d[1] * e[1]) / (e[0] * e[0] + e[1] * e[1]), 0.0, 1.0);
  return std::hypot(d[0] - s * e[0], d[1] - s * e[1]);
}

Vec2 as_vec2(std::span<const double> x) { return {x[0], x[1]}; }

// Gauss-Legendre nodes on [a,b] as (node, weight) pairs.
template <class Emit>
void gl_nodes(double a, double b, int order, Emit&& emit) {
  const auto& rule = gauss_legendre_rule(order);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) emit(mid + half * rule.nodes[i], half * rule.weights[i]);
}

void add_line(std::vector<BoundaryNode>& out, Vec2 p, Vec2 q, int order) {
  const double l = length(sub(q, p));
  gl_nodes(0.0, 1.0, order, [&](double s, double w) {
    out.push_back({{p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])}, w * l});
  });
}

void add_arc(std::vector<BoundaryNode>& out, Vec2 c, double radius, double a0, double a1, int order) {
  // split long arcs so each piece spans at most a quarter turn
  const int pieces = std::max(1, static_cast<int>(std::ceil((a1 - a0) / (kPi / 2) - 1e-12)));
  for (int k = 0; k < pieces; ++k) {
    const double lo = a0 + (a1 - a0) * k / pieces, hi = a0 + (a1 - a0) * (k + 1) / pieces;
    gl_nodes(lo, hi, order, [&](double a, double w) {
      out.push_back({{c[0] + radius * std::cos(a), c[1] + radius * std::sin(a)}, w * radius});
    });
  }
}

double angle_of(Vec2 n) { return std::atan2(n[1], n[0]); }

// polygon area and perimeter
double shoelace(const std::vector<Vec2>& v) {
  double a = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) a += cross(v[i], v[(i + 1) % v.size()]);
  return 0.5 * a;
}

double perimeter(const std::vector<Vec2>& v) {
  double p = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) p += length(sub(v[(i + 1) % v.size()], v[i]));
  return p;
}

std::vector<Vec2> box_vertices(const BoxShape& b) {
  return {{b.lo[0], b.lo[1]}, {b.hi[0], b.lo[1]}, {b.hi[0], b.hi[1]}, {b.lo[0], b.hi[1]}};
}

// 3-D box: Σ edges, Σ face areas
double box_edges3(const BoxShape& b) { return (b.hi[0] - b.lo[0]) + (b.hi[1] - b.lo[1]) + (b.hi[2] - b.lo[2]); }
double box_faces3(const BoxShape& b) {
  const double x = b.hi[0] - b.lo[0], y = b.hi[1] - b.lo[1], z = b.hi[2] - b.lo[2];
  return 2.0 * (x * y + y * z + z * x);
}

void polygon_boundary(std::vector<BoundaryNode>& out, const std::vector<Vec2>& v, double t, int order) {
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = v[i], b = v[(i + 1) % n], c = v[(i + 2) % n];
    const Vec2 ni = outward(a, b), nj = outward(b, c);
    add_line(out, {a[0] + t * ni[0], a[1] + t * ni[1]}, {b[0] + t * ni[0], b[1] + t * ni[1]}, order);
    if (t > 0.0) {
      double a0 = angle_of(ni), a1 = angle_of(nj);
      if (a1 < a0) a1 += 2.0 * kPi;
      add_arc(out, b, t, a0, a1, order);
    }
  }
}

// Polar patch φ ∈ [0, π/2], ψ ∈ [p0, p1] of the sphere |x - c| = R, reflected by `sign`.
void sphere_patch(std::vector<BoundaryNode>& out, const std::vector<double>& c, double radius, double p0, double p1,
                  std::array<double, 3> sign, int order) {
  gl_nodes(0.0, kPi / 2, order, [&](double phi, double wphi) {
    const double sp = std::sin(phi), cp = std::cos(phi);
    gl_nodes(p0, p1, order, [&](double p, double wp) {
      out.push_back({{c[0] + sign[0] * radius * sp * std::cos(p), c[1] + sign[1] * radius * sp * std::sin(p),
                      c[2] + sign[2] * radius * cp},
                     wphi * wp * radius * radius * sp});
    });
  });
}

void box3_boundary(std::vector<BoundaryNode>& out, const BoxShape& b, double t, int order) {
  // faces
  for (int axis = 0; axis < 3; ++axis) {
    const int i = (axis + 1) % 3, j = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      const double level = side == 0 ? b.lo[axis] - t : b.hi[axis] + t;
      gl_nodes(b.lo[i], b.hi[i], order, [&](double s, double ws) {
        gl_nodes(b.lo[j], b.hi[j], order, [&](double r, double wr) {
          std::vector<double> x(3);
          x[axis] = level;
          x[i] = s;
          x[j] = r;
          out.push_back({x, ws * wr});
        });
      });
    }
  }
  if (t == 0.0) return;
  // quarter cylinders along the edges
  for (int axis = 0; axis < 3; ++axis) {
    const int i = (axis + 1) % 3, j = (axis + 2) % 3;
    for (int si = 0; si < 2; ++si) {
      for (int sj = 0; sj < 2; ++sj) {
        const double ci = si ? b.hi[i] : b.lo[i], cj = sj ? b.hi[j] : b.lo[j];
        const double di = si ? 1.0 : -1.0, dj = sj ? 1.0 : -1.0;
        gl_nodes(b.lo[axis], b.hi[axis], order, [&](double s, double ws) {
          gl_nodes(0.0, kPi / 2, order, [&](double a, double wa) {
            std::vector<double> x(3);
            x[axis] = s;
            x[i] = ci + di * t * std::cos(a);
            x[j] = cj + dj * t * std::sin(a);
            out.push_back({x, ws * wa * t});
          });
        });
      }
    }
  }
  // sphere octants at the corners
  for (int corner = 0; corner < 8; ++corner) {
    std::vector<double> c(3);
    std::array<double, 3> sign{};
    for (int k = 0; k < 3; ++k) {
      const bool hi = (corner >> k) & 1;
      c[k] = hi ? b.hi[k] : b.lo[k];
      sign[k] = hi ? 1.0 : -1.0;
    }
    sphere_patch(out, c, t, 0.0, kPi / 2, sign, order);
  }
}

void check_t(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("parallel set: t must be finite and >= 0");
}

}  // namespace

// ---------------------------------------------------------------------------

ConvexBody ConvexBody::disk(std::vector<double> center, double radius) {
  if (center.size() < 2 || center.size() > 3) throw DomainError("ConvexBody::disk: dimension must be 2 or 3");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("ConvexBody::disk: radius must be positive");
  const std::size_t n = center.size();
  return ConvexBody(DiskShape{std::move(center), radius}, n);
}

ConvexBody ConvexBody::box(std::vector<double> lo, std::vector<double> hi) {
  if (lo.size() != hi.size() || lo.size() < 2 || lo.size() > 3) {
    throw DomainError("ConvexBody::box: corners must have equal dimension 2 or 3");
  }
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(lo[i] < hi[i])) throw DomainError("ConvexBody::box: need lo < hi in every coordinate");
  }
  const std::size_t n = lo.size();
  return ConvexBody(BoxShape{std::move(lo), std::move(hi)}, n);
}

ConvexBody ConvexBody::polygon(std::vector<Vec2> v) {
  const std::size_t n = v.size();
  if (n < 3) throw DomainError("ConvexBody::polygon: at least three vertices are required");
  double turning = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = v[i], b = v[(i + 1) % n], c = v[(i + 2) % n];
    if (length(sub(b, a)) == 0.0) throw DomainError("ConvexBody::polygon: repeated vertex");
    const Vec2 e1 = sub(b, a), e2 = sub(c, b);
    if (!(cross(e1, e2) > 0.0)) {
      throw DomainError("ConvexBody::polygon: vertices must be strictly convex and counter-clockwise");
    }
    turning += std::atan2(cross(e1, e2), e1[0] * e2[0] + e1[1] * e2[1]);
  }
  // a self-overlapping star also has left turns only; its turning number exceeds one
  if (std::fabs(turning - 2.0 * kPi) > 1e-9) throw DomainError("ConvexBody::polygon: polygon is not simple");
  return ConvexBody(PolygonShape{std::move(v)}, 2);
}

ConvexBody ConvexBody::segment(Vec2 a, Vec2 b) {
  if (length(sub(b, a)) == 0.0) throw DomainError("ConvexBody::segment: endpoints must differ");
  return ConvexBody(SegmentShape{a, b}, 2);
}

bool ConvexBody::full_dimensional() const { return !std::holds_alternative<SegmentShape>(shape_); }

const char* ConvexBody::kind_name() const {
  return std::visit(overloaded{[](const DiskShape&) { return "disk"; }, [](const BoxShape&) { return "box"; },
                               [](const PolygonShape&) { return "polygon"; },
                               [](const SegmentShape&) { return "segment"; }},
                    shape_);
}

double ConvexBody::distance(std::span<const double> x) const {
  if (x.size() != dim_) throw DomainError("ConvexBody::distance: point has wrong dimension");
  return std::visit(
      overloaded{
          [&](const DiskShape& d) {
            double s = 0.0;
            for (std::size_t i = 0; i < dim_; ++i) s += (x[i] - d.center[i]) * (x[i] - d.center[i]);
            return std::max(0.0, std::sqrt(s) - d.radius);
          },
          [&](const BoxShape& b) {
            double s = 0.0;
            for (std::size_t i = 0; i < dim_; ++i) {
              const double e = std::max({b.lo[i] - x[i], 0.0, x[i] - b.hi[i]});
              s += e * e;
            }
            return std::sqrt(s);
          },
          [&](const PolygonShape& p) {
            const Vec2 q = as_vec2(x);
            const auto& v = p.vertices;
            bool inside = true;
            double best = INFINITY;
            for (std::size_t i = 0; i < v.size(); ++i) {
              const Vec2 a = v[i], b = v[(i + 1) % v.size()];
              if (cross(sub(b, a), sub(q, a)) < 0.0) inside = false;
              best = std::min(best, point_segment_distance(q, a, b));
            }
            return inside ? 0.0 : best;
          },
          [&](const SegmentShape& s) { return point_segment_distance(as_vec2(x), s.a, s.b); }},
      shape_);
}

bool ConvexBody::parallel_contains(double t, std::span<const double> x) const {
  check_t(t);
  return distance(x) <= t;
}

Box ConvexBody::bounding_box(double t) const {
  check_t(t);
  Box out;
  std::visit(overloaded{[&](const DiskShape& d) {
                          for (double c : d.center) {
                            out.lo.push_back(c - d.radius - t);
                            out.hi.push_back(c + d.radius + t);
                          }
                        },
                        [&](const BoxShape& b) {
                          for (std::size_t i = 0; i < dim_; ++i) {
                            out.lo.push_back(b.lo[i] - t);
                            out.hi.push_back(b.hi[i] + t);
                          }
                        },
                        [&](const PolygonShape& p) {
                          out.lo = {INFINITY, INFINITY};
                          out.hi = {-INFINITY, -INFINITY};
                          for (const auto& v : p.vertices) {
                            for (int i = 0; i < 2; ++i) {
                              out.lo[i] = std::min(out.lo[i], v[i] - t);
                              out.hi[i] = std::max(out.hi[i], v[i] + t);
                            }
                          }
                        },
                        [&](const SegmentShape& s) {
                          for (int i = 0; i < 2; ++i) {
                            out.lo.push_back(std::min(s.a[i], s.b[i]) - t);
                            out.hi.push_back(std::max(s.a[i], s.b[i]) + t);
                          }
                        }},
             shape_);
  return out;
}

double ConvexBody::volume() const { return parallel_volume(0.0); }

double ConvexBody::surface() const {
  return std::visit(overloaded{[&](const DiskShape& d) {
                                 return dim_ == 2 ? 2.0 * kPi * d.radius : 4.0 * kPi * d.radius * d.radius;
                               },
                               [&](const BoxShape& b) { return dim_ == 2 ? perimeter(box_vertices(b)) : box_faces3(b); },
                               [](const PolygonShape& p) { return perimeter(p.vertices); },
                               [](const SegmentShape& s) { return 2.0 * length(sub(s.b, s.a)); }},
                    shape_);
}

double ConvexBody::parallel_volume(double t) const {
  check_t(t);
  return std::visit(
      overloaded{[&](const DiskShape& d) {
                   const double r = d.radius + t;
                   return dim_ == 2 ? kPi * r * r : 4.0 / 3.0 * kPi * r * r * r;
                 },
                 [&](const BoxShape& b) {
                   if (dim_ == 2) {
                     const auto v = box_vertices(b);
                     return shoelace(v) + perimeter(v) * t + kPi * t * t;
                   }
                   const double vol = (b.hi[0] - b.lo[0]) * (b.hi[1] - b.lo[1]) * (b.hi[2] - b.lo[2]);
                   return vol + box_faces3(b) * t + kPi * box_edges3(b) * t * t + 4.0 / 3.0 * kPi * t * t * t;
                 },
                 [&](const PolygonShape& p) { return shoelace(p.vertices) + perimeter(p.vertices) * t + kPi * t * t; },
                 [&](const SegmentShape& s) { return 2.0 * length(sub(s.b, s.a)) * t + kPi * t * t; }},
      shape_);
}

double ConvexBody::parallel_surface(double t) const {
  check_t(t);
  if (dim_ == 2) return surface() + 2.0 * kPi * t;
  return std::visit(overloaded{[&](const DiskShape& d) { return 4.0 * kPi * (d.radius + t) * (d.radius + t); },
                               [&](const BoxShape& b) {
                                 return box_faces3(b) + 2.0 * kPi * box_edges3(b) * t + 4.0 * kPi * t * t;
                               },
                               [](const auto&) { return 0.0; }},
                    shape_);
}

Region ConvexBody::parallel_region(double t) const {
  check_t(t);
  std::vector<double> breaks;
  std::visit(overloaded{[&](const DiskShape& d) {
                          breaks = {d.center[0] - d.radius - t, d.center[0], d.center[0] + d.radius + t};
                        },
                        [&](const BoxShape& b) { breaks = {b.lo[0] - t, b.lo[0], b.hi[0], b.hi[0] + t}; },
                        [&](const PolygonShape& p) {
                          const auto& v = p.vertices;
                          for (std::size_t i = 0; i < v.size(); ++i) {
                            const Vec2 a = v[i], b = v[(i + 1) % v.size()];
                            const Vec2 n = outward(a, b);
                            for (double s : {a[0], a[0] - t, a[0] + t, a[0] + t * n[0], b[0] + t * n[0]}) {
                              breaks.push_back(s);
                            }
                          }
                        },
                        [&](const SegmentShape& s) {
                          const Vec2 n = outward(s.a, s.b);
                          for (const Vec2& p : {s.a, s.b}) {
                            for (double x : {p[0], p[0] - t, p[0] + t, p[0] + t * n[0], p[0] - t * n[0]}) {
                              breaks.push_back(x);
                            }
                          }
                        }},
             shape_);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  const ConvexBody self = *this;
  return Region(
      bounding_box(t), [self, t](std::span<const double> x) { return self.distance(x) - t; }, true,
      parallel_volume(t), std::move(breaks));
}

std::vector<BoundaryNode> ConvexBody::boundary_nodes(double t, int order) const {
  check_t(t);
  if (t == 0.0 && !full_dimensional()) {
    throw DomainError("boundary_nodes: the boundary of a segment is H^1-null at t = 0");
  }
  std::vector<BoundaryNode> out;
  std::visit(overloaded{[&](const DiskShape& d) {
                          if (dim_ == 2) {
                            add_arc(out, {d.center[0], d.center[1]}, d.radius + t, 0.0, 2.0 * kPi, order);
                          } else {
                            for (double sz : {1.0, -1.0}) {
                              for (int q = 0; q < 4; ++q) {
                                sphere_patch(out, d.center, d.radius + t, q * kPi / 2, (q + 1) * kPi / 2,
                                             {1.0, 1.0, sz}, order);
                              }
                            }
                          }
                        },
                        [&](const BoxShape& b) {
                          if (dim_ == 2) polygon_boundary(out, box_vertices(b), t, order);
                          else box3_boundary(out, b, t, order);
                        },
                        [&](const PolygonShape& p) { polygon_boundary(out, p.vertices, t, order); },
                        [&](const SegmentShape& s) {
                          polygon_boundary(out, {s.a, s.b}, t, order);
                        }},
             shape_);
  return out;
}

std::vector<BoundaryNode> ConvexBody::segment_nodes(int order) const {
  const auto* s = std::get_if<SegmentShape>(&shape_);
  if (!s) throw DomainError("segment_nodes: body is not a segment");
  std::vector<BoundaryNode> out;
  add_line(out, s->a, s->b, order);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double integrate_parallel(const ConvexBody& K, double t, const std::function<double(std::span<const double>)>& f,
                          double tol) {
  if (K.dim() != 2) throw DomainError("parallel_mass: quadrature for non-constant densities is planar only");
  const Region region = K.parallel_region(t);
  const Box b = region.bounds();
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
  AdaptiveOptions opts;
  opts.abs_tol = tol;
  opts.max_intervals = 200000;
  return integrate_convex_2d(
             dom,
             [&](double x, double y) {
               const double p[2] = {x, y};
               return f(p);
             },
             opts)
      .value;
}

}  // namespace

double parallel_mass(const ConvexBody& K, double t, const Density& h, double tol) {
  check_t(t);
  if (!(tol > 0.0)) throw DomainError("parallel_mass: tol must be positive");
  if (h.constant) return *h.constant * K.parallel_volume(t);
  return integrate_parallel(K, t, h.fn, tol);
}

double boundary_integral(const ConvexBody& K, double t, const std::function<double(std::span<const double>)>& f,
                         int order) {
  double sum = 0.0;
  for (const auto& node : K.boundary_nodes(t, order)) sum += node.weight * f(node.x);
  return sum;
}

SteinerCheck steiner_derivative_check(const ConvexBody& K, const std::function<double(std::span<const double>)>& f,
                                      double t, double delta, double tol) {
  if (!(delta > 0.0) || !(t > delta)) throw DomainError("steiner_derivative_check: need 0 < delta < t");
  SteinerCheck out;
  // ∫_{K_t∖K} f differs from ∫_{K_t} f by a t-independent constant
  const double up = integrate_parallel(K, t + delta, f, tol);
  const double down = integrate_parallel(K, t - delta, f, tol);
  out.fd_value = (up - down) / (2.0 * delta);
  out.boundary_value = boundary_integral(K, t, f);
  out.gap = std::fabs(out.fd_value - out.boundary_value);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void check_crofton_args(const Statistic& g, const ConvexBody& K, const Density& h, double t,
                        const CroftonOptions& o) {
  if (!g.bounded() && !g.kth_difference_bound(1)) {
    throw DomainError("crofton: statistic '" + g.name + "' is unbounded and declares no first-difference bound");
  }
  check_t(t);
  if (!(o.delta > 0.0)) throw DomainError("crofton: delta must be positive");
  if (o.reps < 2) throw DomainError("crofton: need reps >= 2");
  if (o.rhs_reps == 1) throw DomainError("crofton: need rhs_reps >= 2");
  if (K.dim() != 2 && !h.constant) throw DomainError("crofton: non-constant densities are supported in the plane only");
}

IntensityMeasure restricted_intensity(const ConvexBody& K, const Density& h, double t) {
  if (h.constant) {
    // closed-form mass avoids a quadrature per parallel set
    return IntensityMeasure(K.parallel_region(t), h, 1.0);
  }
  return IntensityMeasure(K.parallel_region(t), h, 1.0, 1e-10);
}

struct WeightedNodes {
  std::vector<std::vector<double>> x;
  std::vector<double> w;  // quadrature weight × h(x)
};

WeightedNodes crofton_nodes(const ConvexBody& K, const Density& h, double t, int order) {
  WeightedNodes out;
  auto take = [&](const std::vector<BoundaryNode>& nodes, double factor) {
    for (const auto& n : nodes) {
      out.x.push_back(n.x);
      out.w.push_back(factor * n.weight * h(n.x));
    }
  };
  if (t == 0.0 && !K.full_dimensional()) {
    take(K.segment_nodes(order), 2.0);  // both unit normals at every interior point
  } else {
    take(K.boundary_nodes(t, order), 1.0);
  }
  return out;
}

// Σ_j w_j [g(φ + δ_{x_j}) - base], with φ modified in place and restored.
double node_sum(const Statistic& g, PointConfiguration& phi, const WeightedNodes& nodes, double base) {
  double sum = 0.0;
  for (std::size_t j = 0; j < nodes.x.size(); ++j) {
    if (nodes.w[j] == 0.0) continue;
    phi.add(nodes.x[j]);
    sum += nodes.w[j] * (g(phi) - base);
    phi.remove_last();
  }
  return sum;
}

CroftonReport finish(const McSummary& lhs, const McSummary& rhs, std::size_t nodes) {
  CroftonReport out;
  out.lhs_fd = lhs.mean;
  out.lhs_stderr = lhs.std_error;
  out.rhs = rhs.mean;
  out.rhs_stderr = rhs.std_error;
  out.z = z_score(out.lhs_fd, out.lhs_stderr, out.rhs, out.rhs_stderr);
  out.nodes = nodes;
  return out;
}

}  // namespace

CroftonReport crofton_poisson_check(const Statistic& g, const ConvexBody& K, const Density& h, double t,
                                    const CroftonOptions& options, const RngStream& rng) {
  check_crofton_args(g, K, h, t, options);
  const double d = options.delta;
  const bool central = t >= d;
  const IntensityMeasure outer = restricted_intensity(K, h, central ? t + d : t + 2.0 * d);

  const RngStream lhs_rng = rng.substream(0);
  const auto lhs = run_replicates<double>(options.reps, options.policy, [&](std::size_t r) {
    auto s = lhs_rng.substream(r);
    const auto eta = sample_poisson(outer, s);
    auto within = [&](double radius) {
      return eta.restricted([&](std::span<const double> x) { return K.distance(x) <= radius; });
    };
    if (central) return (g(eta) - g(within(t - d))) / (2.0 * d);
    return (-3.0 * g(within(t)) + 4.0 * g(within(t + d)) - g(eta)) / (2.0 * d);
  });

  const auto nodes = crofton_nodes(K, h, t, options.order);
  const IntensityMeasure at_t = restricted_intensity(K, h, t);
  const RngStream rhs_rng = rng.substream(1);
  const std::size_t rhs_reps = options.rhs_reps ? options.rhs_reps : options.reps;
  const auto rhs = run_replicates<double>(rhs_reps, options.policy, [&](std::size_t r) {
    auto s = rhs_rng.substream(r);
    auto eta = sample_poisson(at_t, s);
    const double base = g(eta);
    return node_sum(g, eta, nodes, base);
  });
  return finish(mc_summary(lhs), mc_summary(rhs), nodes.x.size());
}

CroftonReport crofton_binomial_check(const Statistic& g, const ConvexBody& K, const Density& h, double t,
                                     std::size_t m, const CroftonOptions& options, const RngStream& rng) {
  check_crofton_args(g, K, h, t, options);
  if (m == 0) throw DomainError("crofton_binomial_check: m must be >= 1");
  const double d = options.delta;
  const IntensityMeasure at_t = restricted_intensity(K, h, t);
  if (!(at_t.mass() > 0.0)) throw DomainError("crofton_binomial_check: lambda(K_t) must be positive");

  auto expectation = [&](double radius, std::uint64_t stream) {
    const IntensityMeasure mu = restricted_intensity(K, h, radius);
    const RngStream base = rng.substream(stream);
    const auto values = run_replicates<double>(options.reps, options.policy, [&](std::size_t r) {
      auto s = base.substream(r);
      return g(sample_binomial(mu, m, s));
    });
    return mc_summary(values);
  };
  McSummary lhs;
  if (t >= d) {
    const auto up = expectation(t + d, 0), down = expectation(t - d, 1);
    lhs.mean = (up.mean - down.mean) / (2.0 * d);
    lhs.std_error = std::hypot(up.std_error, down.std_error) / (2.0 * d);
  } else {
    const auto e0 = expectation(t, 0), e1 = expectation(t + d, 1), e2 = expectation(t + 2.0 * d, 2);
    lhs.mean = (-3.0 * e0.mean + 4.0 * e1.mean - e2.mean) / (2.0 * d);
    lhs.std_error =
        std::sqrt(9.0 * e0.std_error * e0.std_error + 16.0 * e1.std_error * e1.std_error + e2.std_error * e2.std_error) /
        (2.0 * d);
  }

  const auto nodes = crofton_nodes(K, h, t, options.order);
  const double factor = static_cast<double>(m) / at_t.mass();
  const RngStream rhs_rng = rng.substream(3);
  const std::size_t rhs_reps = options.rhs_reps ? options.rhs_reps : options.reps;
  const auto rhs = run_replicates<double>(rhs_reps, options.policy, [&](std::size_t r) {
    auto s = rhs_rng.substream(r);
    auto xi = sample_binomial(at_t, m, s);
    const double full = g(xi);
    xi.remove_last();
    return factor * node_sum(g, xi, nodes, full);
  });
  return finish(lhs, mc_summary(rhs), nodes.x.size());
}

}  // namespace pivotality
