#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "pivotality/parallel.hpp"
#include "pivotality/rng.hpp"
#include "pivotality/stats.hpp"

namespace pivotality {

struct SpectralAtom {
  std::vector<double> direction;  ///< unit vector
  double weight = 0.0;            ///< w_i > 0
};

/// Finite spectral measure σ = Σ w_i δ_{u_i} on the unit sphere; θ = σ(S^{n-1}).
class SpectralMeasure {
 public:
  explicit SpectralMeasure(std::vector<SpectralAtom> atoms);
  /// θ·δ_{+1} on the real line (positive law for α < 1).
  static SpectralMeasure positive(double theta);
  /// (θ/2)(δ_{-1} + δ_{+1}).
  static SpectralMeasure symmetric_line(double theta);
  /// (θ/2n) on each of ±e_1..±e_n.
  static SpectralMeasure symmetric_axes(std::size_t dim, double theta);

  std::size_t dim() const { return dim_; }
  const std::vector<SpectralAtom>& atoms() const { return atoms_; }
  double theta() const { return theta_; }
  /// Σ w_i u_i.
  const std::vector<double>& resultant() const { return resultant_; }
  /// Every atom (u, w) has a partner (-u, w).
  bool symmetric() const { return symmetric_; }
  /// For symmetric measures: partner[i] is the index of the atom at -u_i.
  const std::vector<std::size_t>& partner() const { return partner_; }
  SpectralMeasure scaled(double factor) const;

 private:
  std::vector<SpectralAtom> atoms_;
  std::size_t dim_ = 0;
  double theta_ = 0.0;
  std::vector<double> resultant_;
  bool symmetric_ = false;
  std::vector<std::size_t> partner_;
};

/// α ∈ (0,2) and a spectral measure; α >= 1 requires |Σ w_i u_i| <= 1e-10.
class StableParams {
 public:
  StableParams(double alpha, SpectralMeasure spectral);
  double alpha() const { return alpha_; }
  const SpectralMeasure& spectral() const { return spectral_; }
  std::size_t dim() const { return spectral_.dim(); }
  double theta() const { return spectral_.theta(); }
  StableParams with_theta(double theta) const;

 private:
  double alpha_;
  SpectralMeasure spectral_;
};

struct LePageOptions {
  /// Target size of the neglected part (see LePagePlan).
  double trunc_tol = 1e-2;
  /// Replace the tail Σ_{k>N} by its conditional mean given Γ_N (and, for
  /// centred measures, a Gaussian with the conditional covariance). When
  /// false the tail is discarded and N bounds its expected norm.
  bool compensate = true;
  /// Term count used for centred spectral measures, whose tail is only
  /// controlled in distribution (always the case for α >= 1).
  std::size_t centred_terms = 256;
  std::size_t max_terms = 200000;
};

struct LePagePlan {
  std::size_t terms = 0;
  bool mean_compensation = false;
  bool gaussian_remainder = false;
  /// E Σ_{k>N} Γ_k^{-1/α} = θ^{1/α} Γ(N+1-1/α) / ((1/α-1) Γ(N)) (α < 1, otherwise +inf).
  double tail_mean_bound = 0.0;
  /// Root mean square of the tail minus its conditional mean.
  double tail_rms = 0.0;
  /// True when N was capped and the remaining error is not quantified.
  bool bias_unquantified = false;
};

LePagePlan plan_lepage(const StableParams& params, const LePageOptions& options);

/// ξ_θ = Σ_k Γ_k^{-1/α} ε_k, Γ_k the arrival times of a rate-θ Poisson
/// process and ε_k i.i.d. with law σ/θ.
class StableSampler {
 public:
  StableSampler(StableParams params, LePageOptions options = {});
  const StableParams& params() const { return params_; }
  const LePagePlan& plan() const { return plan_; }
  void sample_into(RngStream& rng, std::span<double> out) const;
  std::vector<double> sample(RngStream& rng) const;
  /// `reps` draws; draw r uses rng.substream(r). Returned row-major (reps × dim).
  std::vector<double> sample_many(std::size_t reps, const RngStream& rng, const ExecutionPolicy& policy = {}) const;

 private:
  StableParams params_;
  LePageOptions options_;
  LePagePlan plan_;
  std::vector<double> cumulative_;  // cumulative normalised weights
  std::vector<double> cov_factor_;  // lower Cholesky factor of Σ w u u^T, row-major
};

std::vector<double> sample_stable(const StableParams& params, RngStream& rng, double trunc_tol = 1e-2);

// ---------------------------------------------------------------------------
// Lévy measure Λ_θ = Σ_i w_i α r^{-α-1} dr along each u_i.

/// Declared growth of |f(r u)| along rays: <= c0 r^beta for r <= 1 and
/// <= c_inf r^gamma for r >= 1, with beta > α > gamma.
struct LevyEnvelope {
  double c0 = 1.0;
  double beta = 1.0;
  double c_inf = 1.0;
  double gamma = 0.0;
  /// Radii where f may be non-smooth along every ray.
  std::vector<double> radial_breaks;
};

/// ∫ f dΛ_θ. For symmetric spectral measures f is replaced by
/// (f(z) + f(-z))/2, which leaves the integral unchanged and gains one order
/// of vanishing at the origin; the envelope refers to that symmetrised f.
/// Throws DomainError if sampling along the rays violates the envelope.
double levy_integral(const StableParams& params, const std::function<double(std::span<const double>)>& f,
                     const LevyEnvelope& envelope, double tol = 1e-9);

// ---------------------------------------------------------------------------
// Closed forms for α = 1/2, positive: Lévy law with scale c = πθ²/2.

double levy_half_cdf(double theta, double x);
double levy_half_pdf(double theta, double x);
double levy_half_pdf_derivative(double theta, double x);

/// Symmetric α = 1 with atoms ±1 of weight θ/2 is Cauchy with this scale.
double cauchy_scale(double theta);

// ---------------------------------------------------------------------------
// One-dimensional identities for positive laws, α ∈ (0,1), x > 0:
//   x f(x)         = θα² ∫_0^x [F(x) - F(x-z)] z^{-α-1} dz + θα F(x) x^{-α}
//   f(x) + x f'(x) = θα² ∫_0^x [f(x) - f(x-z)] z^{-α-1} dz + θα f(x) x^{-α}
// i.e. α ∫ [F(x) - F(x-z)] Λ_θ(dz) over all z > 0. The last terms are the
// contribution of z > x, which the truncated one-dimensional forms omit; the
// reports carry both versions.

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;            ///< full Λ_θ integral
  double rhs_truncated = 0.0;  ///< integral over (0, x] only
  double residual() const { return lhs - rhs; }
  double residual_truncated() const { return lhs - rhs_truncated; }
};

IdentityCheck dimone_closed_form(double theta, double x, double tol = 1e-10);
IdentityCheck alphadens1_closed_form(double theta, double x, double tol = 1e-10);

struct McIdentityCheck {
  McSummary lhs;
  McSummary rhs;
  McSummary residual;  ///< paired per-sample differences
  double bandwidth = 0.0;
  double z() const { return residual.std_error > 0 ? residual.mean / residual.std_error : (residual.mean == 0 ? 0.0 : INFINITY); }
};

/// Default smoothing half-width 2·x·reps^{-1/5}.
double default_bandwidth(double x, std::size_t reps);

/// The identity averaged over x' ∈ (x-h, x+h), estimated without bias from
/// `samples` of a positive α-stable law (α < 1).
McIdentityCheck dimone_monte_carlo(double alpha, double theta, double x, std::span<const double> samples,
                                   double bandwidth);
/// Difference quotient of the window-averaged dimone identity at x ± h.
McIdentityCheck alphadens1_monte_carlo(double alpha, double theta, double x, std::span<const double> samples,
                                       double bandwidth);

enum class DimoneMethod { closed_form_levy, monte_carlo };

/// Dispatcher; closed_form_levy requires α = 1/2 and returns a check whose
/// residual has zero standard error.
McIdentityCheck dimone_residual(double alpha, double theta, double x, DimoneMethod method, std::size_t reps,
                                const RngStream& rng, const ExecutionPolicy& policy = {});

// ---------------------------------------------------------------------------
// Radius-vector identity r f_{|ξ|}(r) = α ∫ [P(|ξ| <= r) - P(|ξ+z| <= r)] Λ_θ(dz).

/// Window-averaged identity (r' ∈ (r-h, r+h)); per sample the Λ-integral of
/// the ramp-smoothed bracket is evaluated by exact piecewise quadrature.
/// `samples` is row-major (count × dim).
McIdentityCheck radvec_monte_carlo(const StableParams& params, double r, std::span<const double> samples,
                                   double bandwidth);
McIdentityCheck radvec_residual(const StableParams& params, double r, std::size_t reps, const RngStream& rng,
                                const LePageOptions& options = {}, const ExecutionPolicy& policy = {});

/// One-dimensional radius-vector identity from a known distribution
/// function F and density f of ξ (deterministic oracle path).
/// The envelope describes the (symmetrised) bracket z ↦ F(r)-F(-r)-F(r-z)+F(-r-z).
IdentityCheck radvec_closed_form_1d(const StableParams& params, double r, const std::function<double(double)>& cdf,
                                    const std::function<double(double)>& pdf, const LevyEnvelope& envelope,
                                    double tol = 1e-9);

// ---------------------------------------------------------------------------
// Distributional property checks (first coordinate for n > 1).

/// t^{1/α} ξ' + (1-t)^{1/α} ξ'' against ξ.
KsResult stability_ks(const StableParams& params, double t, std::size_t samples, const RngStream& rng,
                      const LePageOptions& options = {});
/// ξ_{θ·c} against c^{1/α} ξ_θ.
KsResult scaling_ks(const StableParams& params, double factor, std::size_t samples, const RngStream& rng,
                    const LePageOptions& options = {});

}  // namespace pivotality
