#include "pivotality/pmf.hpp"

#include <cmath>

#include "pivotality/errors.hpp"

namespace pivotality {

namespace {

// x^k (1-x)^l with the conventions 0^0 = 1.
double log_power_pair(double x, double k, double l) {
  double s = 0.0;
  if (k > 0) s += k * std::log(x);
  if (l > 0) s += l * std::log1p(-x);
  return s;
}

}  // namespace

double log_multinomial(double n, double a, double b) {
  return std::lgamma(n + 1.0) - std::lgamma(a + 1.0) - std::lgamma(b + 1.0);
}

double binomial_pmf(std::uint64_t n, double p, std::int64_t k) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial_pmf: p must lie in [0,1]");
  if (k < 0 || static_cast<std::uint64_t>(k) > n) return 0.0;
  const double kk = static_cast<double>(k), ll = static_cast<double>(n) - kk;
  if ((p == 0.0 && kk > 0) || (p == 1.0 && ll > 0)) return 0.0;
  return std::exp(log_multinomial(static_cast<double>(n), kk, ll) + log_power_pair(p, kk, ll));
}

double negbin_pmf(std::uint64_t r, double p, std::int64_t j) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("negbin_pmf: p must lie in [0,1]");
  if (r == 0) throw DomainError("negbin_pmf: r must be >= 1");
  if (j < 0) return 0.0;
  const double rr = static_cast<double>(r), jj = static_cast<double>(j);
  if (p == 0.0) return 0.0;
  if (p == 1.0) return j == 0 ? 1.0 : 0.0;
  return std::exp(log_multinomial(rr + jj - 1.0, jj, rr - 1.0) + log_power_pair(p, rr, jj));
}

double poisson_pmf(double theta, std::int64_t j) {
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw DomainError("poisson_pmf: theta must be finite and >= 0");
  if (j < 0) return 0.0;
  if (theta == 0.0) return j == 0 ? 1.0 : 0.0;
  const double jj = static_cast<double>(j);
  return std::exp(jj * std::log(theta) - theta - std::lgamma(jj + 1.0));
}

}  // namespace pivotality
