#include "pivotality/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pivotality/errors.hpp"

namespace pivotality {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 16) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

McSummary mc_summary(std::span<const double> samples) {
  if (samples.size() < 2) throw DomainError("mc_summary: need at least two samples");
  const double n = static_cast<double>(samples.size());
  McSummary out;
  out.n = samples.size();
  out.mean = pairwise_sum(samples) / n;
  std::vector<double> sq(samples.size());
  std::transform(samples.begin(), samples.end(), sq.begin(), [&](double v) {
    const double d = v - out.mean;
    return d * d;
  });
  const double var = pairwise_sum(sq) / (n - 1.0);
  out.std_error = std::sqrt(var / n);
  out.ci95_lo = out.mean - 1.959963984540054 * out.std_error;
  out.ci95_hi = out.mean + 1.959963984540054 * out.std_error;
  return out;
}

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
  if (sorted_.size() < 2) throw DomainError("empirical_cdf: need at least two samples");
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

EmpiricalCdf empirical_cdf(std::span<const double> samples) {
  return EmpiricalCdf(std::vector<double>(samples.begin(), samples.end()));
}

double smoothed_density(const EmpiricalCdf& cdf, double x, double bandwidth) {
  if (!(bandwidth > 0.0)) throw DomainError("smoothed_density: bandwidth must be positive");
  return (cdf(x + bandwidth) - cdf(x - bandwidth)) / (2.0 * bandwidth);
}

double smoothed_density(std::span<const double> samples, double x, double bandwidth) {
  return smoothed_density(empirical_cdf(samples), x, bandwidth);
}

double kolmogorov_survival(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::fabs(term) < 1e-16 * std::fabs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw DomainError("ks_two_sample: need at least two samples per side");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  const double ne = nx * ny / (nx + ny);
  const double root = std::sqrt(ne);
  KsResult out;
  out.statistic = d;
  out.p_value = kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
  return out;
}

double z_score(double a, double sa, double b, double sb) {
  const double gap = a - b;
  const double s = std::sqrt(sa * sa + sb * sb);
  if (s == 0.0) {
    if (gap == 0.0) return 0.0;
    return gap > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  }
  return gap / s;
}

}  // namespace pivotality
