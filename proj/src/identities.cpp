#include "pivotality/identities.hpp"

#include <cmath>
#include <numeric>

#include "pivotality/errors.hpp"
#include "pivotality/pmf.hpp"
#include "pivotality/quadrature.hpp"

namespace pivotality {

namespace {

void check_theta(double theta, const char* who) {
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw DomainError(std::string(who) + ": theta must be finite and >= 0");
}

double horner(const std::vector<double>& c, double x) {
  double s = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + *it;
  return s;
}

}  // namespace

LatticeDistribution::LatticeDistribution(std::vector<double> q) : q_(std::move(q)) {
  if (q_.empty()) throw DomainError("LatticeDistribution: empty support");
  for (double v : q_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("LatticeDistribution: probabilities must be finite and >= 0");
  }
  const double total = std::accumulate(q_.begin(), q_.end(), 0.0);
  if (std::fabs(total - 1.0) > 1e-12) throw DomainError("LatticeDistribution: probabilities must sum to 1");
  while (q_.size() > 1 && q_.back() == 0.0) q_.pop_back();
}

LatticeDistribution LatticeDistribution::point_mass(std::size_t j) {
  std::vector<double> q(j + 1, 0.0);
  q[j] = 1.0;
  return LatticeDistribution(std::move(q));
}

LatticeDistribution LatticeDistribution::uniform(std::size_t a, std::size_t b) {
  if (a > b) throw DomainError("LatticeDistribution::uniform: need a <= b");
  std::vector<double> q(b + 1, 0.0);
  for (std::size_t j = a; j <= b; ++j) q[j] = 1.0 / static_cast<double>(b - a + 1);
  return LatticeDistribution(std::move(q));
}

double poisson_tail(double theta, int k) {
  check_theta(theta, "poisson_tail");
  if (k < 1) throw DomainError("poisson_tail: k must be >= 1");
  if (theta == 0.0) return 0.0;
  if (static_cast<double>(k) <= theta) {
    double below = 0.0;
    for (int j = 0; j < k; ++j) below += poisson_pmf(theta, j);
    return std::max(0.0, 1.0 - below);
  }
  // terms decrease geometrically from j = k on (ratio θ/(j+1) < 1)
  double term = poisson_pmf(theta, k), sum = 0.0;
  for (int j = k; term > 0.0; ++j) {
    sum += term;
    if (term < 1e-18 * sum) break;
    term *= theta / (j + 1);
  }
  return sum;
}

double poisson_tail_integral(double theta, int k, double tol) {
  check_theta(theta, "poisson_tail_integral");
  if (k < 1) throw DomainError("poisson_tail_integral: k must be >= 1");
  if (theta == 0.0) return 0.0;
  const double lg = std::lgamma(static_cast<double>(k));
  auto f = [=](double t) {
    if (t == 0.0) return k == 1 ? 1.0 : 0.0;
    return std::exp((k - 1) * std::log(t) - t - lg);
  };
  AdaptiveOptions opts;
  opts.abs_tol = tol;
  // the integrand peaks at t = k-1
  const double mode[] = {static_cast<double>(k - 1)};
  return integrate_adaptive(f, 0.0, theta, mode, opts).value;
}

ErlangCdf erlang_cdf(int n, double theta, double x, double tol) {
  if (n < 1) throw DomainError("erlang_cdf: n must be >= 1");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("erlang_cdf: theta must be positive");
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("erlang_cdf: x must be finite and >= 0");
  ErlangCdf out;
  if (x == 0.0) return out;
  const double lg = std::lgamma(static_cast<double>(n));
  AdaptiveOptions opts;
  opts.abs_tol = tol;

  auto density = [=](double y) {
    if (y == 0.0) return n == 1 ? theta : 0.0;
    return std::exp(n * std::log(theta) - lg + (n - 1) * std::log(y) - theta * y);
  };
  const double mode[] = {(n - 1) / theta};
  out.direct = integrate_adaptive(density, 0.0, x, mode, opts).value;

  auto inner = [=](double t) {
    if (t == 0.0) return n == 1 ? std::pow(x, n) / std::exp(lg) : 0.0;
    return std::exp(n * std::log(x) - lg + (n - 1) * std::log(t) - t * x);
  };
  const double inner_mode[] = {(n - 1) / x};
  out.via_integral = integrate_adaptive(inner, 0.0, theta, inner_mode, opts).value;

  out.via_poisson = poisson_tail(theta * x, n);
  return out;
}

double cpois_pmf_direct(double theta, const LatticeDistribution& Q, int k, double tol) {
  check_theta(theta, "cpois_pmf_direct");
  if (k < 0) return 0.0;
  if (!(tol > 0.0)) throw DomainError("cpois_pmf_direct: tol must be positive");
  const auto ku = static_cast<std::size_t>(k);
  // conv = Q^{*n} restricted to {0..k}
  std::vector<double> conv(ku + 1, 0.0), next(ku + 1);
  conv[0] = 1.0;
  const bool finite_sum = Q[0] == 0.0;
  double sum = 0.0;
  for (int n = 0;; ++n) {
    sum += poisson_pmf(theta, n) * conv[ku];
    if (finite_sum && n >= k) break;
    const double nn = n;
    const double tail = (nn + 2.0 > theta) ? poisson_pmf(theta, n + 1) / (1.0 - theta / (nn + 2.0)) : 1.0;
    if (tail <= tol * sum || tail == 0.0) break;
    if (n > 1000000) throw ConvergenceError("cpois_pmf_direct: series did not reach the tolerance", tail);
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i <= ku; ++i) {
      if (conv[i] == 0.0) continue;
      for (std::size_t j = 0; i + j <= ku && j <= Q.max_support(); ++j) next[i + j] += conv[i] * Q[static_cast<std::ptrdiff_t>(j)];
    }
    conv.swap(next);
  }
  return sum;
}

std::vector<double> cpois_pmf_panjer_table(double theta, const LatticeDistribution& Q, int kmax) {
  check_theta(theta, "cpois_pmf_panjer");
  if (kmax < 0) throw DomainError("cpois_pmf_panjer: k must be >= 0");
  std::vector<double> p(static_cast<std::size_t>(kmax) + 1);
  p[0] = std::exp(-theta * (1.0 - Q[0]));
  for (int k = 1; k <= kmax; ++k) {
    double s = 0.0;
    for (int i = 1; i <= k; ++i) s += i * Q[i] * p[static_cast<std::size_t>(k - i)];
    p[static_cast<std::size_t>(k)] = theta / k * s;
  }
  return p;
}

double cpois_pmf_panjer(double theta, const LatticeDistribution& Q, int k) {
  if (k < 0) return 0.0;
  return cpois_pmf_panjer_table(theta, Q, k).back();
}

std::vector<std::vector<double>> cpois_coefficient_polynomials(const LatticeDistribution& Q, int kmax) {
  if (kmax < 0) throw DomainError("cpois_pmf_polyrec: k must be >= 0");
  std::vector<std::vector<double>> c(static_cast<std::size_t>(kmax) + 1);
  c[0] = {1.0};
  for (int k = 1; k <= kmax; ++k) {
    auto& ck = c[static_cast<std::size_t>(k)];
    ck.assign(static_cast<std::size_t>(k) + 1, 0.0);
    for (int j = 0; j < k; ++j) {
      const double q = Q[k - j];
      if (q == 0.0) continue;
      const auto& cj = c[static_cast<std::size_t>(j)];
      // ∫_0^θ t^i dt = θ^{i+1}/(i+1)
      for (std::size_t i = 0; i < cj.size(); ++i) ck[i + 1] += q * cj[i] / static_cast<double>(i + 1);
    }
  }
  return c;
}

double cpois_pmf_polyrec(double theta, const LatticeDistribution& Q, int k) {
  check_theta(theta, "cpois_pmf_polyrec");
  if (k < 0) return 0.0;
  const auto c = cpois_coefficient_polynomials(Q, k);
  return std::exp(-(1.0 - Q[0]) * theta) * horner(c.back(), theta);
}

double cpois_cdf(double theta, const LatticeDistribution& Q, double x) {
  if (x < 0.0) return 0.0;
  const auto p = cpois_pmf_panjer_table(theta, Q, static_cast<int>(std::floor(x)));
  double s = 0.0;
  for (double v : p) s += v;
  return std::min(1.0, s);
}

OdeResidual cpois_cdf_ode_residual(double theta, const LatticeDistribution& Q, double x, double delta) {
  if (!(delta > 0.0 && delta < theta)) throw DomainError("cpois_cdf_ode_residual: need 0 < delta < theta");
  OdeResidual out;
  out.lhs = (cpois_cdf(theta + delta, Q, x) - cpois_cdf(theta - delta, Q, x)) / (2.0 * delta);
  double convolved = 0.0;
  for (std::size_t z = 0; z <= Q.max_support(); ++z) {
    const double q = Q[static_cast<std::ptrdiff_t>(z)];
    if (q != 0.0) convolved += q * cpois_cdf(theta, Q, x - static_cast<double>(z));
  }
  out.rhs = convolved - cpois_cdf(theta, Q, x);
  return out;
}

LatticeDerivative cpois_pmf_derivative_rhs(double theta, const LatticeDistribution& Q, int k) {
  LatticeDerivative out;
  if (k < 0) return out;
  const auto p = cpois_pmf_panjer_table(theta, Q, k);
  double off = 0.0;
  for (int j = 0; j < k; ++j) off += Q[k - j] * p[static_cast<std::size_t>(j)];
  const double pk = p[static_cast<std::size_t>(k)];
  out.excluding_k = off - (1.0 - Q[0]) * pk;
  out.including_k = (off + Q[0] * pk) - pk;
  return out;
}

}  // namespace pivotality
