#include "pivotality/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

#include "pivotality/errors.hpp"

namespace pivotality {

namespace {

GaussLegendreRule build_rule(int n) {
  GaussLegendreRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    long double x = std::cos(std::numbers::pi_v<long double> * (i + 0.75L) / (n + 0.5L));
    long double dp = 0.0L;
    for (int iter = 0; iter < 100; ++iter) {
      long double p0 = 1.0L, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const long double pk = ((2.0L * k - 1.0L) * x * p1 - (k - 1.0L) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0L);
      const long double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-19L) break;
    }
    // recompute derivative at the converged node
    long double p0 = 1.0L, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const long double pk = ((2.0L * k - 1.0L) * x * p1 - (k - 1.0L) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0L);
    const long double w = 2.0L / ((1.0L - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -static_cast<double>(x);
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = static_cast<double>(x);
    rule.weights[static_cast<std::size_t>(i)] = static_cast<double>(w);
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = static_cast<double>(w);
  }
  return rule;
}

double apply_rule(const GaussLegendreRule& rule, const Integrand& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = mid + half * rule.nodes[i];
    const double fx = f(x);
    if (!std::isfinite(fx)) throw IntegrandFault("non-finite integrand", x);
    sum += rule.weights[i] * fx;
  }
  return half * sum;
}

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel make_panel(const Integrand& f, double a, double b) {
  const double coarse = apply_rule(gauss_legendre_rule(16), f, a, b);
  const double fine = apply_rule(gauss_legendre_rule(32), f, a, b);
  return Panel{a, b, fine, std::fabs(fine - coarse)};
}

double simpson_step(const Integrand& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth, int max_depth, SimpsonResult& out) {
  out.depth = std::max(out.depth, depth);
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  if (!std::isfinite(flm)) throw IntegrandFault("non-finite integrand", lm);
  if (!std::isfinite(frm)) throw IntegrandFault("non-finite integrand", rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::fabs(delta) <= 15.0 * tol) {
    out.error_estimate += std::fabs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  if (depth >= max_depth) {
    throw ConvergenceError("adaptive_simpson: max_depth exceeded", std::fabs(delta) / 15.0);
  }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, max_depth, out) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, max_depth, out);
}

}  // namespace

const GaussLegendreRule& gauss_legendre_rule(int npoints) {
  static const GaussLegendreRule r8 = build_rule(8);
  static const GaussLegendreRule r16 = build_rule(16);
  static const GaussLegendreRule r32 = build_rule(32);
  static const GaussLegendreRule r64 = build_rule(64);
  switch (npoints) {
    case 8: return r8;
    case 16: return r16;
    case 32: return r32;
    case 64: return r64;
    default: throw DomainError("gauss_legendre: npoints must be one of 8, 16, 32, 64");
  }
}

double gauss_legendre(const Integrand& f, double a, double b, int npoints) {
  return apply_rule(gauss_legendre_rule(npoints), f, a, b);
}

SimpsonResult adaptive_simpson(const Integrand& f, double a, double b, double tol, int max_depth) {
  if (!(tol > 0.0)) throw DomainError("adaptive_simpson: tol must be positive");
  SimpsonResult out;
  if (a == b) return out;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  if (!std::isfinite(fa)) throw IntegrandFault("non-finite integrand", a);
  if (!std::isfinite(fb)) throw IntegrandFault("non-finite integrand", b);
  if (!std::isfinite(fm)) throw IntegrandFault("non-finite integrand", 0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  out.value = simpson_step(f, a, b, fa, fm, fb, whole, tol, 0, max_depth, out);
  return out;
}

QuadratureResult integrate_adaptive(const Integrand& f, double a, double b,
                                    const AdaptiveOptions& opts) {
  return integrate_adaptive(f, a, b, std::span<const double>{}, opts);
}

QuadratureResult integrate_adaptive(const Integrand& f, double a, double b,
                                    std::span<const double> breakpoints,
                                    const AdaptiveOptions& opts) {
  QuadratureResult result;
  if (a == b) return result;
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  std::vector<double> cuts{a};
  std::vector<double> sorted(breakpoints.begin(), breakpoints.end());
  std::sort(sorted.begin(), sorted.end());
  for (double x : sorted) {
    if (x > cuts.back() && x < b) cuts.push_back(x);
  }
  cuts.push_back(b);

  std::priority_queue<Panel> queue;
  std::vector<Panel> frozen;
  double total_error = 0.0;
  double total_value = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Panel p = make_panel(f, cuts[i], cuts[i + 1]);
    total_error += p.error;
    total_value += p.value;
    queue.push(p);
  }
  int panels = static_cast<int>(queue.size());
  int since_resum = 0;
  auto tolerance = [&] { return std::max(opts.abs_tol, opts.rel_tol * std::fabs(total_value)); };
  while (!queue.empty() && total_error > tolerance()) {
    if (panels >= opts.max_intervals) {
      throw ConvergenceError("integrate_adaptive: interval budget exhausted", total_error);
    }
    Panel worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      frozen.push_back(worst);
      continue;
    }
    Panel left = make_panel(f, worst.a, mid);
    Panel right = make_panel(f, mid, worst.b);
    total_error += left.error + right.error - worst.error;
    total_value += left.value + right.value - worst.value;
    queue.push(left);
    queue.push(right);
    ++panels;
    if (++since_resum == 64) {
      // refresh running sums to stop drift
      since_resum = 0;
      std::priority_queue<Panel> copy = queue;
      total_error = 0.0;
      total_value = 0.0;
      while (!copy.empty()) {
        total_error += copy.top().error;
        total_value += copy.top().value;
        copy.pop();
      }
      for (const auto& p : frozen) {
        total_error += p.error;
        total_value += p.value;
      }
    }
  }
  if (queue.empty() && total_error > tolerance()) {
    throw ConvergenceError("integrate_adaptive: panels at floating-point resolution", total_error);
  }
  // Deterministic final summation in left-to-right panel order.
  std::vector<Panel> all = std::move(frozen);
  while (!queue.empty()) {
    all.push_back(queue.top());
    queue.pop();
  }
  std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  result.value = 0.0;
  result.error_estimate = 0.0;
  for (const auto& p : all) {
    result.value += p.value;
    result.error_estimate += p.error;
  }
  result.value *= sign;
  result.intervals = static_cast<int>(all.size());
  return result;
}

QuadratureResult integrate_endpoint_smoothed(const Integrand& f, double a, double b,
                                             const AdaptiveOptions& opts) {
  const double width = b - a;
  auto g = [&](double s) {
    const double x = a + width * s * s * (3.0 - 2.0 * s);
    return f(x) * 6.0 * s * (1.0 - s) * width;
  };
  return integrate_adaptive(g, 0.0, 1.0, opts);
}

double power_singular_integral(const Integrand& f, double alpha, double x, double tol,
                               std::optional<double> lipschitz) {
  if (!lipschitz) throw DomainError("power_singular_integral: a Lipschitz bound near 0 is required");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("power_singular_integral: alpha must lie in (0,1)");
  if (!(tol > 0.0)) throw DomainError("power_singular_integral: tol must be positive");
  if (!(x > 0.0)) throw DomainError("power_singular_integral: x must be positive");
  const double lip = *lipschitz;
  if (!(lip >= 0.0) || !std::isfinite(lip)) throw DomainError("power_singular_integral: bad Lipschitz bound");
  if (lip == 0.0) return 0.0;
  const double eps = std::pow(0.5 * tol * (1.0 - alpha) / lip, 1.0 / (1.0 - alpha));
  if (eps >= x) return 0.0;  // whole range certified below tol/2
  auto g = [&](double u) {
    const double z = std::exp(u);
    return f(z) * std::exp(-alpha * u);
  };
  AdaptiveOptions opts;
  opts.abs_tol = 0.5 * tol;
  return integrate_adaptive(g, std::log(eps), std::log(x), opts).value;
}

std::optional<std::pair<double, double>> convex_section(const ConvexDomain2D& domain, double x0) {
  auto level = [&](double y) { return domain.level(x0, y); };
  double lo = domain.y_lo, hi = domain.y_hi;
  const double scale = 1.0 + std::fabs(lo) + std::fabs(hi);
  std::optional<double> inside;
  if (level(lo) <= 0.0) inside = lo;
  else if (level(hi) <= 0.0) inside = hi;
  else {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
    double fc = level(c), fd = level(d);
    for (int iter = 0; iter < 200 && (b - a) > 1e-16 * scale; ++iter) {
      if (fc <= 0.0) { inside = c; break; }
      if (fd <= 0.0) { inside = d; break; }
      if (fc < fd) {
        b = d; d = c; fd = fc;
        c = b - kInvPhi * (b - a);
        fc = level(c);
      } else {
        a = c; c = d; fc = fd;
        d = a + kInvPhi * (b - a);
        fd = level(d);
      }
    }
  }
  if (!inside) return std::nullopt;
  auto boundary = [&](double outside, double in) {
    if (level(outside) <= 0.0) return outside;
    for (int iter = 0; iter < 200; ++iter) {
      const double mid = 0.5 * (outside + in);
      if (mid == outside || mid == in) break;
      if (level(mid) <= 0.0) in = mid;
      else outside = mid;
    }
    return 0.5 * (outside + in);
  };
  return std::make_pair(boundary(lo, *inside), boundary(hi, *inside));
}

QuadratureResult integrate_convex_2d(const ConvexDomain2D& domain, const Integrand2D& f,
                                     const AdaptiveOptions& opts) {
  std::vector<double> cuts{domain.x_lo};
  std::vector<double> breaks = domain.x_breaks;
  std::sort(breaks.begin(), breaks.end());
  for (double x : breaks) {
    if (x > cuts.back() + 1e-14 && x < domain.x_hi - 1e-14) cuts.push_back(x);
  }
  cuts.push_back(domain.x_hi);
  const std::size_t pieces = cuts.size() - 1;
  const double width = domain.x_hi - domain.x_lo;
  AdaptiveOptions inner = opts;
  inner.abs_tol = 0.1 * opts.abs_tol / std::max(width, 1e-300);
  AdaptiveOptions outer = opts;
  outer.abs_tol = 0.5 * opts.abs_tol / static_cast<double>(pieces);

  auto section_integral = [&](double x0) {
    const auto section = convex_section(domain, x0);
    if (!section || section->second <= section->first) return 0.0;
    auto g = [&](double y) { return f(x0, y); };
    return integrate_adaptive(g, section->first, section->second, inner).value;
  };
  QuadratureResult total;
  for (std::size_t i = 0; i < pieces; ++i) {
    const auto piece = integrate_endpoint_smoothed(section_integral, cuts[i], cuts[i + 1], outer);
    total.value += piece.value;
    total.error_estimate += piece.error_estimate;
    total.intervals += piece.intervals;
  }
  return total;
}

}  // namespace pivotality
