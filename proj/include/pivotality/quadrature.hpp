#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace pivotality {

using Integrand = std::function<double(double)>;
using Integrand2D = std::function<double(double, double)>;

/// Gauss-Legendre rule on [-1,1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached rule for npoints in {8, 16, 32, 64}; throws DomainError otherwise.
const GaussLegendreRule& gauss_legendre_rule(int npoints);

/// Fixed-order Gauss-Legendre quadrature of f over [a,b]; exact for
/// polynomials of degree <= 2*npoints-1.
double gauss_legendre(const Integrand& f, double a, double b, int npoints);

struct SimpsonResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int depth = 0;  ///< deepest recursion level reached
};

/// Classical recursive adaptive Simpson with Richardson correction.
/// Throws ConvergenceError if max_depth is exceeded.
SimpsonResult adaptive_simpson(const Integrand& f, double a, double b, double tol, int max_depth = 50);

struct AdaptiveOptions {
  double abs_tol = 1e-12;
  double rel_tol = 0.0;
  int max_intervals = 20000;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int intervals = 0;
};

/// Globally adaptive Gauss-Legendre (16/32-point pair per panel). The panel
/// with the largest error estimate is bisected until the summed estimate is
/// below max(abs_tol, rel_tol*|value|). Non-finite integrand values raise
/// IntegrandFault; exhausting max_intervals raises ConvergenceError.
QuadratureResult integrate_adaptive(const Integrand& f, double a, double b,
                                    const AdaptiveOptions& opts = {});

/// Same, with the panel set seeded by sorted breakpoints (points of known
/// non-smoothness). Breakpoints outside (a,b) are ignored.
QuadratureResult integrate_adaptive(const Integrand& f, double a, double b,
                                    std::span<const double> breakpoints,
                                    const AdaptiveOptions& opts = {});

/// Adaptive integration after the substitution x = a + (b-a)(3s^2 - 2s^3),
/// which removes square-root endpoint behaviour.
QuadratureResult integrate_endpoint_smoothed(const Integrand& f, double a, double b,
                                             const AdaptiveOptions& opts = {});

/// ∫_0^x f(z) z^{-alpha-1} dz for alpha in (0,1) and f(0)=0.
///
/// `lipschitz` bounds |f(z)| <= L z near the origin; it certifies that the
/// piece [0, eps] with eps = (tol/2 * (1-alpha)/L)^{1/(1-alpha)} contributes
/// at most tol/2. The remainder is integrated in log-space.
double power_singular_integral(const Integrand& f, double alpha, double x, double tol,
                               std::optional<double> lipschitz);

/// Planar domain {level <= 0} with `level` convex along vertical lines.
struct ConvexDomain2D {
  Integrand2D level;
  double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
  /// x positions where the section endpoints change formula.
  std::vector<double> x_breaks;
};

/// The interval {y : level(x0, y) <= 0} within [y_lo, y_hi], if non-empty.
std::optional<std::pair<double, double>> convex_section(const ConvexDomain2D& domain, double x0);

/// ∫∫_domain f dx dy by iterated adaptive quadrature over exact sections.
QuadratureResult integrate_convex_2d(const ConvexDomain2D& domain, const Integrand2D& f,
                                     const AdaptiveOptions& opts = {});

}  // namespace pivotality
