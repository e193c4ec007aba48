#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "pivotality/parallel.hpp"
#include "pivotality/point_process.hpp"
#include "pivotality/rng.hpp"
#include "pivotality/stats.hpp"

namespace pivotality {

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t reps = 0;
};

McEstimate to_estimate(const McSummary& s);

/// Mean of g over `reps` independent Poisson samples with intensity μ.
/// Replicate r draws from rng.substream(r).
McEstimate expectation_mc(const Statistic& g, const IntensityMeasure& mu, std::size_t reps, const RngStream& rng,
                          const ExecutionPolicy& policy = {});

struct SeriesOptions {
  int kmax = 6;
  std::size_t reps_per_term = 20000;
  /// Certified bound b with ν <= b·λ; required for θ < 0 (then |θ|·b <= 1).
  std::optional<double> nu_over_lambda_bound;
  ExecutionPolicy policy;
};

struct SeriesResult {
  double estimate = 0.0;
  double std_error = 0.0;
  /// Bound on the omitted terms Σ_{k>kmax} |θ|^k ν(X)^k c_k / k!.
  double truncation_bound = 0.0;
  /// terms[k] is the k-th summand (θ^k/k!)∫E D^k g(η_λ) dν^k; terms[0] = E g(η_λ).
  std::vector<McEstimate> terms;
};

/// E g(η_{λ+θν}) via the perturbation series around η_λ, truncated at kmax.
/// The k-th term is estimated from i.i.d. z_1..z_k ~ ν/ν(X) and an
/// independent η_λ, scaled by ν(X)^k. g needs a bound on its iterated
/// differences (bounded g, or a declared difference_bound).
SeriesResult perturbation_series(const Statistic& g, const IntensityMeasure& lambda, const IntensityMeasure& nu,
                                 double theta, const SeriesOptions& options, const RngStream& rng);

struct DerivativeEstimate {
  McEstimate total;  ///< ∫ E D_z g(η_{θλ}) λ(dz)
  McEstimate plus;   ///< ∫ E (D_z g)^+ λ(dz); E N^+_A for events
  McEstimate minus;  ///< ∫ E (D_z g)^- λ(dz); E N^-_A for events
};

/// d/dθ E g(η_{θλ}): averages λ(X)·D_z g(η) with z ~ λ/λ(X) and a fresh,
/// independent η ~ Poisson(θλ) per replicate (z is drawn first).
DerivativeEstimate derivative_location_estimator(const Statistic& g, const IntensityMeasure& lambda, double theta,
                                                 std::size_t reps, const RngStream& rng,
                                                 const ExecutionPolicy& policy = {});

struct PivotalPointEstimate {
  /// (1/θ) E Σ_{z∈η} 1{η ∈ A, η − δ_z ∉ A}: equals E N^+_A by the Mecke formula.
  McEstimate pivotal_points;
  /// (1/θ) E Σ_{z∈η} 1{η ∈ A, η + δ_z ∉ A}, reported for comparison only.
  McEstimate added_point_variant;
};

/// A is given by an indicator statistic (values 0 or 1). Throws for θ <= 0.
PivotalPointEstimate derivative_point_estimator(const Statistic& A, const IntensityMeasure& lambda, double theta,
                                                std::size_t reps, const RngStream& rng,
                                                const ExecutionPolicy& policy = {});

inline constexpr int kMaxDerivativeOrder = 10;

/// d^k/dθ^k E g(η_{θλ}) from i.i.d. z_1..z_k ~ λ/λ(X) and the subset-sum
/// iterated difference, scaled by λ(X)^k. For k = 1 this reproduces
/// derivative_location_estimator(...).total exactly.
McEstimate higher_derivative_estimator(const Statistic& g, const IntensityMeasure& lambda, double theta, int k,
                                       std::size_t reps, const RngStream& rng, const ExecutionPolicy& policy = {});

}  // namespace pivotality
