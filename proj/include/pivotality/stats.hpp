#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace pivotality {

/// Sum by recursive halving; the order depends only on the length.
double pairwise_sum(std::span<const double> values);

struct McSummary {
  double mean = 0.0;
  double std_error = 0.0;  ///< standard error of the mean
  double ci95_lo = 0.0;
  double ci95_hi = 0.0;
  std::size_t n = 0;
};

/// Mean, standard error and normal-approximation 95% interval.
/// Throws DomainError for fewer than two samples.
McSummary mc_summary(std::span<const double> samples);

/// Right-continuous empirical distribution function.
class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> samples);
  double operator()(double x) const;
  /// Fraction of samples in (a, b].
  double mass(double a, double b) const { return (*this)(b) - (*this)(a); }
  std::span<const double> sorted() const { return sorted_; }
  std::size_t size() const { return sorted_.size(); }

 private:
  std::vector<double> sorted_;
};

EmpiricalCdf empirical_cdf(std::span<const double> samples);

/// [F(x+h) - F(x-h)] / (2h) for the empirical CDF F.
double smoothed_density(const EmpiricalCdf& cdf, double x, double bandwidth);
double smoothed_density(std::span<const double> samples, double x, double bandwidth);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov
/// distribution (effective size correction of Stephens).
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Survival function of the Kolmogorov distribution, Q(λ) = P(K > λ).
double kolmogorov_survival(double lambda);

/// One-sample sup-distance between an empirical CDF and a model CDF.
template <class Cdf>
double sup_distance(const EmpiricalCdf& ecdf, Cdf&& model) {
  const auto xs = ecdf.sorted();
  const double n = static_cast<double>(xs.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = model(xs[i]);
    const double above = static_cast<double>(i + 1) / n - f;
    const double below = f - static_cast<double>(i) / n;
    worst = above > worst ? above : worst;
    worst = below > worst ? below : worst;
  }
  return worst;
}

/// (a - b) / sqrt(sa^2 + sb^2); 0 when both the gap and the errors vanish.
double z_score(double a, double sa, double b, double sb);

}  // namespace pivotality
