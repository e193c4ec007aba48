#include "pivotality/perturbation.hpp"

#include <cmath>

#include "pivotality/errors.hpp"

namespace pivotality {

namespace {

void check_reps(std::size_t reps) {
  if (reps < 2) throw DomainError("Monte Carlo estimators need reps >= 2");
}

McEstimate summarize(const std::vector<double>& values) { return to_estimate(mc_summary(values)); }

std::vector<std::vector<double>> draw_locations(const IntensityMeasure& mu, int k, RngStream& rng) {
  std::vector<std::vector<double>> zs(static_cast<std::size_t>(k));
  for (auto& z : zs) z = sample_location(mu, rng);
  return zs;
}

// Σ_{k>kmax} x^k c_k / k!, summed until the terms are negligible.
double series_tail(const Statistic& g, double x, int kmax) {
  if (x == 0.0) return 0.0;
  double sum = 0.0;
  const int stop = kmax + 60 + static_cast<int>(4.0 * x);
  for (int k = kmax + 1; k <= stop; ++k) {
    const auto c = g.kth_difference_bound(k);
    if (!c) throw DomainError("perturbation_series: statistic has no bound on its iterated differences");
    if (*c == 0.0) continue;
    const double term = *c * std::exp(k * std::log(x) - std::lgamma(k + 1.0));
    sum += term;
    if (k > 2.0 * x && term <= 1e-17 * sum) break;
  }
  return sum;
}

}  // namespace

McEstimate to_estimate(const McSummary& s) { return {s.mean, s.std_error, s.n}; }

McEstimate expectation_mc(const Statistic& g, const IntensityMeasure& mu, std::size_t reps, const RngStream& rng,
                          const ExecutionPolicy& policy) {
  check_reps(reps);
  const auto values = run_replicates<double>(reps, policy, [&](std::size_t r) {
    auto s = rng.substream(r);
    return g(sample_poisson(mu, s));
  });
  return summarize(values);
}

SeriesResult perturbation_series(const Statistic& g, const IntensityMeasure& lambda, const IntensityMeasure& nu,
                                 double theta, const SeriesOptions& options, const RngStream& rng) {
  if (!(theta <= 1.0) || !std::isfinite(theta)) throw DomainError("perturbation_series: theta must lie in (-inf, 1]");
  if (lambda.dim() != nu.dim()) throw DomainError("perturbation_series: lambda and nu live on different spaces");
  if (options.kmax < 0 || options.kmax > 20) throw DomainError("perturbation_series: kmax must lie in 0..20");
  if (theta < 0.0) {
    if (!options.nu_over_lambda_bound) {
      throw DomainError("perturbation_series: negative theta requires a certified bound nu <= b*lambda");
    }
    if (-theta * *options.nu_over_lambda_bound > 1.0) {
      throw DomainError("perturbation_series: lambda + theta*nu is not a measure for this theta");
    }
  }
  if (!g.kth_difference_bound(1)) {
    throw DomainError("perturbation_series: statistic '" + g.name + "' is unbounded and declares no difference bounds");
  }
  check_reps(options.reps_per_term);

  SeriesResult out;
  const double mass = nu.mass();
  out.truncation_bound = series_tail(g, std::fabs(theta) * mass, options.kmax);

  double variance = 0.0;
  for (int k = 0; k <= options.kmax; ++k) {
    const RngStream term_rng = rng.substream(static_cast<std::uint64_t>(k));
    McEstimate term;
    if (k == 0) {
      term = expectation_mc(g, lambda, options.reps_per_term, term_rng, options.policy);
    } else if (theta == 0.0 || mass == 0.0 || g.kth_difference_bound(k) == 0.0) {
      term = {0.0, 0.0, 0};
    } else {
      const auto values = run_replicates<double>(options.reps_per_term, options.policy, [&](std::size_t r) {
        auto s = term_rng.substream(r);
        const auto zs = draw_locations(nu, k, s);
        const auto eta = sample_poisson(lambda, s);
        return iterated_difference(g, eta, zs);
      });
      term = summarize(values);
      const double scale = std::exp(k * std::log(std::fabs(theta) * mass) - std::lgamma(k + 1.0)) *
                           ((theta < 0.0 && k % 2 == 1) ? -1.0 : 1.0);
      term.estimate *= scale;
      term.std_error *= std::fabs(scale);
    }
    out.estimate += term.estimate;
    variance += term.std_error * term.std_error;
    out.terms.push_back(term);
  }
  out.std_error = std::sqrt(variance);
  return out;
}

DerivativeEstimate derivative_location_estimator(const Statistic& g, const IntensityMeasure& lambda, double theta,
                                                 std::size_t reps, const RngStream& rng,
                                                 const ExecutionPolicy& policy) {
  check_reps(reps);
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw DomainError("derivative_location_estimator: theta must be >= 0");
  const double mass = lambda.mass();
  DerivativeEstimate out;
  if (mass == 0.0) {
    out.total = out.plus = out.minus = {0.0, 0.0, reps};
    return out;
  }
  const IntensityMeasure driving = lambda.scaled(theta);
  struct Sample {
    double total, plus, minus;
  };
  const auto samples = run_replicates<Sample>(reps, policy, [&](std::size_t r) {
    auto s = rng.substream(r);
    const auto z = sample_location(lambda, s);
    auto eta = sample_poisson(driving, s);
    const double before = g(eta);
    eta.add(z);
    const double d = mass * (g(eta) - before);
    return Sample{d, std::max(d, 0.0), std::max(-d, 0.0)};
  });
  std::vector<double> total(reps), plus(reps), minus(reps);
  for (std::size_t i = 0; i < reps; ++i) {
    total[i] = samples[i].total;
    plus[i] = samples[i].plus;
    minus[i] = samples[i].minus;
  }
  out.total = summarize(total);
  out.plus = summarize(plus);
  out.minus = summarize(minus);
  return out;
}

PivotalPointEstimate derivative_point_estimator(const Statistic& A, const IntensityMeasure& lambda, double theta,
                                                std::size_t reps, const RngStream& rng,
                                                const ExecutionPolicy& policy) {
  check_reps(reps);
  if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("derivative_point_estimator: theta must be positive");
  const IntensityMeasure driving = lambda.scaled(theta);
  auto member = [&](const PointConfiguration& phi) {
    const double v = A(phi);
    if (v != 0.0 && v != 1.0) throw DomainError("derivative_point_estimator: statistic is not an indicator");
    return v == 1.0;
  };
  struct Sample {
    double removed, added;
  };
  const auto samples = run_replicates<Sample>(reps, policy, [&](std::size_t r) {
    auto s = rng.substream(r);
    const auto eta = sample_poisson(driving, s);
    Sample out{0.0, 0.0};
    if (!member(eta)) return out;
    for (std::size_t i = 0; i < eta.size(); ++i) {
      PointConfiguration without = eta;
      without.remove(i);
      if (!member(without)) out.removed += 1.0;
      const auto with = eta.plus(eta.point(i));
      if (!member(with)) out.added += 1.0;
    }
    out.removed /= theta;
    out.added /= theta;
    return out;
  });
  std::vector<double> removed(reps), added(reps);
  for (std::size_t i = 0; i < reps; ++i) {
    removed[i] = samples[i].removed;
    added[i] = samples[i].added;
  }
  return {summarize(removed), summarize(added)};
}

McEstimate higher_derivative_estimator(const Statistic& g, const IntensityMeasure& lambda, double theta, int k,
                                       std::size_t reps, const RngStream& rng, const ExecutionPolicy& policy) {
  check_reps(reps);
  if (k < 1 || k > kMaxDerivativeOrder) throw DomainError("higher_derivative_estimator: k must lie in 1..10");
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw DomainError("higher_derivative_estimator: theta must be >= 0");
  const double mass = lambda.mass();
  if (mass == 0.0) return {0.0, 0.0, reps};
  const IntensityMeasure driving = lambda.scaled(theta);
  const double scale = std::pow(mass, k);
  const auto values = run_replicates<double>(reps, policy, [&](std::size_t r) {
    auto s = rng.substream(r);
    const auto zs = draw_locations(lambda, k, s);
    const auto eta = sample_poisson(driving, s);
    if (k == 1) {
      auto with = eta;
      with.add(zs[0]);
      return mass * (g(with) - g(eta));
    }
    return scale * iterated_difference(g, eta, zs);
  });
  return summarize(values);
}

}  // namespace pivotality
