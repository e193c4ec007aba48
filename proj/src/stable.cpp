#include "pivotality/stable.hpp"

#include <algorithm>
#include <cstdio>
#include <string>
#include <limits>
#include <numbers>

#include "pivotality/errors.hpp"
#include "pivotality/quadrature.hpp"

namespace pivotality {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

bool centred(const SpectralMeasure& s) { return norm(s.resultant()) <= 1e-10; }

// E Σ_{k>N} Γ_k^{-1/α} for rate-θ arrivals (exact telescoping sum).
double tail_mean(double alpha, double theta, std::size_t n) {
  const double q = 1.0 / alpha;
  if (alpha >= 1.0) return kInf;
  const double nn = static_cast<double>(n);
  if (nn + 1.0 - q <= 0.0) return kInf;
  return std::exp(q * std::log(theta) + std::lgamma(nn + 1.0 - q) - std::lgamma(nn)) / (q - 1.0);
}

// sqrt(E |R - E[R | Γ_N]|^2) for the tail R = Σ_{k>N} Γ_k^{-1/α} ε_k.
double tail_rms(double alpha, double theta, std::size_t n) {
  const double p = 2.0 / alpha - 1.0;
  const double nn = static_cast<double>(n);
  if (nn - p <= 0.0) return kInf;
  return std::sqrt(std::exp((p + 1.0) * std::log(theta) + std::lgamma(nn - p) - std::lgamma(nn)) / p);
}

// Smallest n in [1, cap] with metric(n) <= tol (metric decreasing in n), or cap + 1.
template <class Metric>
std::size_t smallest_terms(Metric metric, double tol, std::size_t cap) {
  std::size_t hi = 1;
  while (hi <= cap && !(metric(hi) <= tol)) hi *= 2;
  if (hi > cap) {
    if (metric(cap) <= tol) hi = cap;
    else return cap + 1;
  }
  std::size_t lo = hi / 2;  // metric(lo) > tol or lo == 0
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (metric(mid) <= tol) hi = mid;
    else lo = mid;
  }
  return hi;
}

double levy_half_scale(double theta) { return std::numbers::pi * theta * theta / 4.0; }

}  // namespace

// ---------------------------------------------------------------------------
// Spectral measures

SpectralMeasure::SpectralMeasure(std::vector<SpectralAtom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw DomainError("SpectralMeasure: at least one atom is required");
  dim_ = atoms_.front().direction.size();
  if (dim_ == 0) throw DomainError("SpectralMeasure: directions must be non-empty");
  resultant_.assign(dim_, 0.0);
  for (const auto& a : atoms_) {
    if (a.direction.size() != dim_) throw DomainError("SpectralMeasure: atoms differ in dimension");
    if (std::fabs(norm(a.direction) - 1.0) > 1e-12) throw DomainError("SpectralMeasure: directions must be unit vectors");
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) throw DomainError("SpectralMeasure: weights must be positive");
    theta_ += a.weight;
    for (std::size_t i = 0; i < dim_; ++i) resultant_[i] += a.weight * a.direction[i];
  }
  symmetric_ = true;
  partner_.assign(atoms_.size(), 0);
  for (std::size_t i = 0; i < atoms_.size() && symmetric_; ++i) {
    bool found = false;
    for (std::size_t j = 0; j < atoms_.size() && !found; ++j) {
      if (j == i || std::fabs(atoms_[j].weight - atoms_[i].weight) > 1e-12 * atoms_[i].weight) continue;
      double gap = 0.0;
      for (std::size_t d = 0; d < dim_; ++d) gap = std::max(gap, std::fabs(atoms_[i].direction[d] + atoms_[j].direction[d]));
      if (gap <= 1e-12) {
        partner_[i] = j;
        found = true;
      }
    }
    symmetric_ = found;
  }
  if (!symmetric_) partner_.clear();
}

SpectralMeasure SpectralMeasure::positive(double theta) { return SpectralMeasure({{{1.0}, theta}}); }

SpectralMeasure SpectralMeasure::symmetric_line(double theta) {
  return SpectralMeasure({{{1.0}, theta / 2.0}, {{-1.0}, theta / 2.0}});
}

SpectralMeasure SpectralMeasure::symmetric_axes(std::size_t dim, double theta) {
  if (dim == 0) throw DomainError("SpectralMeasure::symmetric_axes: dim must be >= 1");
  std::vector<SpectralAtom> atoms;
  for (std::size_t i = 0; i < dim; ++i) {
    for (double sign : {1.0, -1.0}) {
      std::vector<double> u(dim, 0.0);
      u[i] = sign;
      atoms.push_back({u, theta / (2.0 * static_cast<double>(dim))});
    }
  }
  return SpectralMeasure(std::move(atoms));
}

SpectralMeasure SpectralMeasure::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw DomainError("SpectralMeasure::scaled: factor must be positive");
  auto atoms = atoms_;
  for (auto& a : atoms) a.weight *= factor;
  return SpectralMeasure(std::move(atoms));
}

StableParams::StableParams(double alpha, SpectralMeasure spectral) : alpha_(alpha), spectral_(std::move(spectral)) {
  if (!(alpha_ > 0.0 && alpha_ < 2.0)) throw DomainError("StableParams: alpha must lie in (0,2)");
  if (alpha_ >= 1.0 && !centred(spectral_)) {
    throw DomainError("StableParams: alpha >= 1 requires a centred spectral measure (sum of w_i u_i = 0)");
  }
}

StableParams StableParams::with_theta(double theta) const {
  return StableParams(alpha_, spectral_.scaled(theta / spectral_.theta()));
}

// ---------------------------------------------------------------------------
// LePage sampling

LePagePlan plan_lepage(const StableParams& params, const LePageOptions& options) {
  if (!(options.trunc_tol > 0.0)) throw DomainError("plan_lepage: trunc_tol must be positive");
  const double alpha = params.alpha(), theta = params.theta();
  LePagePlan plan;
  if (options.compensate) {
    auto rms = [&](std::size_t n) { return tail_rms(alpha, theta, n); };
    if (centred(params.spectral())) {
      plan.gaussian_remainder = true;
      const std::size_t cap = std::max<std::size_t>(1, options.centred_terms);
      plan.terms = smallest_terms(rms, options.trunc_tol, cap);
      if (plan.terms > cap) {
        plan.terms = cap;
        plan.bias_unquantified = true;
      }
    } else {
      plan.mean_compensation = true;
      plan.terms = smallest_terms(rms, options.trunc_tol, options.max_terms);
      if (plan.terms > options.max_terms) {
        throw ConvergenceError("plan_lepage: truncation tolerance needs more than max_terms terms",
                               rms(options.max_terms));
      }
    }
  } else {
    if (alpha >= 1.0) throw DomainError("plan_lepage: an uncompensated series needs alpha < 1");
    auto mean = [&](std::size_t n) { return tail_mean(alpha, theta, n); };
    plan.terms = smallest_terms(mean, options.trunc_tol, options.max_terms);
    if (plan.terms > options.max_terms) {
      throw ConvergenceError("plan_lepage: truncation tolerance needs more than max_terms terms",
                             mean(options.max_terms));
    }
  }
  plan.tail_mean_bound = tail_mean(alpha, theta, plan.terms);
  plan.tail_rms = tail_rms(alpha, theta, plan.terms);
  return plan;
}

StableSampler::StableSampler(StableParams params, LePageOptions options)
    : params_(std::move(params)), options_(options), plan_(plan_lepage(params_, options_)) {
  const auto& atoms = params_.spectral().atoms();
  double acc = 0.0;
  for (const auto& a : atoms) {
    acc += a.weight / params_.theta();
    cumulative_.push_back(acc);
  }
  cumulative_.back() = 1.0;
  if (plan_.gaussian_remainder) {
    const std::size_t n = params_.dim();
    std::vector<double> m(n * n, 0.0);
    for (const auto& a : atoms) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) m[i * n + j] += a.weight * a.direction[i] * a.direction[j];
      }
    }
    // Cholesky with zero pivots skipped (the matrix may be singular).
    cov_factor_.assign(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      double d = m[j * n + j];
      for (std::size_t k = 0; k < j; ++k) d -= cov_factor_[j * n + k] * cov_factor_[j * n + k];
      if (d <= 1e-14 * params_.theta()) continue;
      const double ljj = std::sqrt(d);
      cov_factor_[j * n + j] = ljj;
      for (std::size_t i = j + 1; i < n; ++i) {
        double s = m[i * n + j];
        for (std::size_t k = 0; k < j; ++k) s -= cov_factor_[i * n + k] * cov_factor_[j * n + k];
        cov_factor_[i * n + j] = s / ljj;
      }
    }
  }
}

void StableSampler::sample_into(RngStream& rng, std::span<double> out) const {
  const std::size_t n = params_.dim();
  if (out.size() != n) throw DomainError("StableSampler::sample_into: output has wrong dimension");
  std::fill(out.begin(), out.end(), 0.0);
  const double alpha = params_.alpha(), theta = params_.theta(), q = 1.0 / alpha;
  const auto& atoms = params_.spectral().atoms();
  double gamma = 0.0;
  for (std::size_t k = 0; k < plan_.terms; ++k) {
    gamma += rng.exponential() / theta;
    std::size_t j = 0;
    if (atoms.size() > 1) {
      const double u = rng.uniform();
      j = static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), u) - cumulative_.begin());
      j = std::min(j, atoms.size() - 1);
    }
    const double radius = std::pow(gamma, -q);
    const auto& dir = atoms[j].direction;
    for (std::size_t i = 0; i < n; ++i) out[i] += radius * dir[i];
  }
  if (plan_.mean_compensation) {
    const double c = std::pow(gamma, 1.0 - q) / (q - 1.0);
    const auto& res = params_.spectral().resultant();
    for (std::size_t i = 0; i < n; ++i) out[i] += c * res[i];
  }
  if (plan_.gaussian_remainder) {
    const double scale = std::sqrt(std::pow(gamma, 1.0 - 2.0 * q) / (2.0 * q - 1.0));
    std::vector<double> z(n);
    for (auto& v : z) v = rng.normal();
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k <= i; ++k) s += cov_factor_[i * n + k] * z[k];
      out[i] += scale * s;
    }
  }
}

std::vector<double> StableSampler::sample(RngStream& rng) const {
  std::vector<double> out(params_.dim());
  sample_into(rng, out);
  return out;
}

std::vector<double> StableSampler::sample_many(std::size_t reps, const RngStream& rng,
                                               const ExecutionPolicy& policy) const {
  const std::size_t n = params_.dim();
  std::vector<double> out(reps * n);
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (reps + kChunk - 1) / kChunk;
  run_replicates<char>(chunks, policy, [&](std::size_t c) {
    for (std::size_t r = c * kChunk; r < std::min(reps, (c + 1) * kChunk); ++r) {
      auto s = rng.substream(r);
      sample_into(s, std::span<double>(out).subspan(r * n, n));
    }
    return char{0};
  });
  return out;
}

std::vector<double> sample_stable(const StableParams& params, RngStream& rng, double trunc_tol) {
  LePageOptions options;
  options.trunc_tol = trunc_tol;
  return StableSampler(params, options).sample(rng);
}

// ---------------------------------------------------------------------------
// Lévy integrals

double levy_integral(const StableParams& params, const std::function<double(std::span<const double>)>& f,
                     const LevyEnvelope& env, double tol) {
  const double alpha = params.alpha();
  if (!(tol > 0.0)) throw DomainError("levy_integral: tol must be positive");
  if (!(env.beta > alpha)) throw DomainError("levy_integral: envelope exponent at 0 must exceed alpha");
  if (!(env.gamma < alpha)) throw DomainError("levy_integral: envelope exponent at infinity must be below alpha");
  if (!(env.c0 >= 0.0) || !(env.c_inf >= 0.0)) throw DomainError("levy_integral: envelope constants must be >= 0");
  const auto& spectral = params.spectral();
  const bool symmetrize = spectral.symmetric();
  const std::size_t n = params.dim();
  const double theta = params.theta();

  double total = 0.0;
  std::vector<double> z(n), zm(n);
  for (const auto& atom : spectral.atoms()) {
    const double atom_tol = tol * (atom.weight / theta) / alpha;
    auto phi = [&](double r) {
      for (std::size_t i = 0; i < n; ++i) {
        z[i] = r * atom.direction[i];
        zm[i] = -z[i];
      }
      return symmetrize ? 0.5 * (f(z) + f(zm)) : f(z);
    };
    auto check = [&](double r, double bound) {
      const double v = phi(r);
      if (!std::isfinite(v)) throw IntegrandFault("levy_integral: non-finite integrand", r);
      // absolute slack covers cancellation in brackets such as F(x) - F(x - z)
      if (std::fabs(v) > bound * (1.0 + 1e-9) + 1e-13) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6g", r);
        throw DomainError(std::string("levy_integral: integrand violates the declared envelope at r=") + buf);
      }
    };
    AdaptiveOptions opts;
    opts.abs_tol = atom_tol / 4.0;
    opts.max_intervals = 100000;

    // (0,1]: r = e^{-t}
    double inner = 0.0;
    if (env.c0 > 0.0) {
      const double decay = env.beta - alpha;
      const double t_max = std::max(1.0, std::log(env.c0 / (decay * atom_tol / 4.0)) / decay);
      for (int i = 0; i <= 40; ++i) {
        const double t = t_max * i / 40.0;
        check(std::exp(-t), env.c0 * std::exp(-env.beta * t));
      }
      std::vector<double> breaks;
      for (double b : env.radial_breaks) {
        if (b > 0.0 && b < 1.0) breaks.push_back(-std::log(b));
      }
      std::sort(breaks.begin(), breaks.end());
      inner = integrate_adaptive([&](double t) { return phi(std::exp(-t)) * std::exp(alpha * t); }, 0.0, t_max, breaks,
                                 opts)
                  .value;
    }
    // [1,∞): r = e^{t}
    double outer = 0.0;
    if (env.c_inf > 0.0) {
      const double decay = alpha - env.gamma;
      const double t_max = std::max(1.0, std::log(env.c_inf / (decay * atom_tol / 4.0)) / decay);
      for (int i = 0; i <= 40; ++i) {
        const double t = t_max * i / 40.0;
        check(std::exp(t), env.c_inf * std::exp(env.gamma * t));
      }
      std::vector<double> breaks;
      for (double b : env.radial_breaks) {
        if (b > 1.0) breaks.push_back(std::log(b));
      }
      std::sort(breaks.begin(), breaks.end());
      outer = integrate_adaptive([&](double t) { return phi(std::exp(t)) * std::exp(-alpha * t); }, 0.0, t_max, breaks,
                                 opts)
                  .value;
    }
    total += atom.weight * alpha * (inner + outer);
  }
  return total;
}

// ---------------------------------------------------------------------------
// α = 1/2 closed forms

double levy_half_cdf(double theta, double x) {
  if (x <= 0.0) return 0.0;
  return std::erfc(0.5 * theta * std::sqrt(std::numbers::pi / x));
}

double levy_half_pdf(double theta, double x) {
  if (x <= 0.0) return 0.0;
  return 0.5 * theta * std::pow(x, -1.5) * std::exp(-levy_half_scale(theta) / x);
}

double levy_half_pdf_derivative(double theta, double x) {
  if (x <= 0.0) return 0.0;
  const double c = levy_half_scale(theta);
  return levy_half_pdf(theta, x) * (-1.5 / x + c / (x * x));
}

double cauchy_scale(double theta) { return std::numbers::pi * theta / 2.0; }

IdentityCheck dimone_closed_form(double theta, double x, double tol) {
  if (!(theta > 0.0) || !(x > 0.0)) throw DomainError("dimone_closed_form: need theta > 0 and x > 0");
  const double alpha = 0.5;
  const double c = levy_half_scale(theta);
  const double sup_pdf = levy_half_pdf(theta, 2.0 * c / 3.0);
  const double fx = levy_half_cdf(theta, x);
  IdentityCheck out;
  out.lhs = x * levy_half_pdf(theta, x);
  const double integral = power_singular_integral(
      [&](double z) { return fx - levy_half_cdf(theta, x - z); }, alpha, x, tol / (theta * alpha * alpha), sup_pdf);
  out.rhs_truncated = theta * alpha * alpha * integral;
  out.rhs = out.rhs_truncated + theta * alpha * fx * std::pow(x, -alpha);
  return out;
}

IdentityCheck alphadens1_closed_form(double theta, double x, double tol) {
  if (!(theta > 0.0) || !(x > 0.0)) throw DomainError("alphadens1_closed_form: need theta > 0 and x > 0");
  const double alpha = 0.5;
  const double c = levy_half_scale(theta);
  // f'' vanishes where 15y²/4 - 5cy + c² = 0; |f'| is largest at one of these.
  const double y1 = c * (5.0 - std::sqrt(10.0)) / 7.5, y2 = c * (5.0 + std::sqrt(10.0)) / 7.5;
  const double lip = std::max(std::fabs(levy_half_pdf_derivative(theta, y1)), std::fabs(levy_half_pdf_derivative(theta, y2)));
  const double fx = levy_half_pdf(theta, x);
  IdentityCheck out;
  out.lhs = fx + x * levy_half_pdf_derivative(theta, x);
  const double integral = power_singular_integral(
      [&](double z) { return fx - levy_half_pdf(theta, x - z); }, alpha, x, tol / (theta * alpha * alpha), lip);
  out.rhs_truncated = theta * alpha * alpha * integral;
  out.rhs = out.rhs_truncated + theta * alpha * fx * std::pow(x, -alpha);
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo forms of the one-dimensional identities

double default_bandwidth(double x, std::size_t reps) {
  return 2.0 * x * std::pow(static_cast<double>(reps), -0.2);
}

namespace {

McIdentityCheck summarize_pairs(const std::vector<double>& lhs, const std::vector<double>& rhs, double h) {
  std::vector<double> diff(lhs.size());
  for (std::size_t i = 0; i < lhs.size(); ++i) diff[i] = lhs[i] - rhs[i];
  McIdentityCheck out;
  out.lhs = mc_summary(lhs);
  out.rhs = mc_summary(rhs);
  out.residual = mc_summary(diff);
  out.bandwidth = h;
  return out;
}

// Per-sample window averages of x f(x) and of α∫[F(x)-F(x-z)]Λ_θ(dz).
struct DimoneSample {
  double lhs, rhs;
};

DimoneSample dimone_sample(double alpha, double theta, double x, double h, double xi) {
  const double lhs = std::fabs(xi - x) < h ? xi / (2.0 * h) : 0.0;
  const double a = std::max(x + h - xi, 0.0), b = std::max(x - h - xi, 0.0);
  const double rhs = alpha * theta / (2.0 * h * (1.0 - alpha)) * (std::pow(a, 1.0 - alpha) - std::pow(b, 1.0 - alpha));
  return {lhs, rhs};
}

void check_dimone_args(double alpha, double theta, double x, double h, std::size_t count) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("dimone: alpha must lie in (0,1)");
  if (!(theta > 0.0) || !(x > 0.0)) throw DomainError("dimone: need theta > 0 and x > 0");
  if (!(h > 0.0 && h < x)) throw DomainError("dimone: bandwidth must lie in (0, x)");
  if (count < 2) throw DomainError("dimone: need at least two samples");
}

}  // namespace

McIdentityCheck dimone_monte_carlo(double alpha, double theta, double x, std::span<const double> samples,
                                   double h) {
  check_dimone_args(alpha, theta, x, h, samples.size());
  std::vector<double> lhs(samples.size()), rhs(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto s = dimone_sample(alpha, theta, x, h, samples[i]);
    lhs[i] = s.lhs;
    rhs[i] = s.rhs;
  }
  return summarize_pairs(lhs, rhs, h);
}

McIdentityCheck alphadens1_monte_carlo(double alpha, double theta, double x, std::span<const double> samples,
                                       double h) {
  check_dimone_args(alpha, theta, x, 2.0 * h, samples.size());
  std::vector<double> lhs(samples.size()), rhs(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto up = dimone_sample(alpha, theta, x + h, h, samples[i]);
    const auto down = dimone_sample(alpha, theta, x - h, h, samples[i]);
    lhs[i] = (up.lhs - down.lhs) / (2.0 * h);
    rhs[i] = (up.rhs - down.rhs) / (2.0 * h);
  }
  return summarize_pairs(lhs, rhs, h);
}

McIdentityCheck dimone_residual(double alpha, double theta, double x, DimoneMethod method, std::size_t reps,
                                const RngStream& rng, const ExecutionPolicy& policy) {
  if (method == DimoneMethod::closed_form_levy) {
    if (alpha != 0.5) throw DomainError("dimone_residual: the closed form exists for alpha = 1/2 only");
    const auto c = dimone_closed_form(theta, x);
    McIdentityCheck out;
    out.lhs.mean = c.lhs;
    out.rhs.mean = c.rhs;
    out.residual.mean = c.residual();
    return out;
  }
  const StableSampler sampler(StableParams(alpha, SpectralMeasure::positive(theta)));
  const auto samples = sampler.sample_many(reps, rng, policy);
  return dimone_monte_carlo(alpha, theta, x, samples, default_bandwidth(x, reps));
}

// ---------------------------------------------------------------------------
// Radius-vector identity

namespace {

// Ramp-smoothed indicator c(ρ) = (1/2h)∫_{r-h}^{r+h} 1{ρ <= r'} dr'.
struct Ramp {
  double r, h;
  double operator()(double rho) const { return std::clamp((r + h - rho) / (2.0 * h), 0.0, 1.0); }
  // 0: above the ramp (c = 0), 1: below (c = 1), 2: on the ramp
  int region(double rho) const { return rho >= r + h ? 0 : rho <= r - h ? 1 : 2; }
};

// Line s ↦ ξ + s·u (s >= 0), |ξ|² = b, <ξ,u> = a, |u| = 1.
struct Ray {
  double a, b, norm0;
  double rho(double s) const { return std::sqrt(std::max(0.0, s * s + 2.0 * a * s + b)); }
  void crossings(double radius, std::vector<double>& out) const {
    const double disc = a * a - b + radius * radius;
    if (disc < 0.0) return;
    const double root = std::sqrt(disc);
    for (double s : {-a - root, -a + root}) {
      if (s > 0.0) out.push_back(s);
    }
  }
};

const GaussLegendreRule& rule32() { return gauss_legendre_rule(32); }

// ∫_{s0}^{s1} [c0 - c(ρ(s))] s^{-α-1} ds with s0 > 0 and c(ρ) on one branch.
double regular_piece(const Ray& ray, const Ramp& ramp, double c0, double alpha, double s0, double s1) {
  const double mid = std::isfinite(s1) ? 0.5 * (s0 + s1) : 2.0 * s0 + 1.0;
  const int region = ramp.region(ray.rho(mid));
  if (region != 2) {
    const double d = c0 - (region == 1 ? 1.0 : 0.0);
    if (d == 0.0) return 0.0;
    const double upper = std::isfinite(s1) ? std::pow(s1, -alpha) : 0.0;
    return d * (std::pow(s0, -alpha) - upper) / alpha;
  }
  // ramp piece: t = log s
  const double t0 = std::log(s0), t1 = std::log(s1);
  const auto& gl = rule32();
  const double half = 0.5 * (t1 - t0), centre = 0.5 * (t1 + t0);
  double sum = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double t = centre + half * gl.nodes[i];
    const double s = std::exp(t);
    sum += gl.weights[i] * (c0 - ramp(ray.rho(s))) * std::exp(-alpha * t);
  }
  return half * sum;
}

// All positive s where the ray crosses r ± h, sorted.
std::vector<double> ray_breaks(const Ray& ray, const Ramp& ramp) {
  std::vector<double> br;
  ray.crossings(ramp.r - ramp.h, br);
  ray.crossings(ramp.r + ramp.h, br);
  std::sort(br.begin(), br.end());
  return br;
}

// Σ over pieces of ray after s_start (> 0), using the ray's own breakpoints.
double tail_pieces(const Ray& ray, const Ramp& ramp, double c0, double alpha, double s_start) {
  auto br = ray_breaks(ray, ramp);
  double total = 0.0, s0 = s_start;
  for (double b : br) {
    if (b <= s0) continue;
    total += regular_piece(ray, ramp, c0, alpha, s0, b);
    s0 = b;
  }
  total += regular_piece(ray, ramp, c0, alpha, s0, kInf);
  return total;
}

// ∫_0^∞ [c(|ξ|) - c(|ξ + s u|)] s^{-α-1} ds for α < 1.
double single_ray_integral(double a, double b, const Ramp& ramp, double alpha) {
  const Ray ray{a, b, std::sqrt(b)};
  const double c0 = ramp(ray.norm0);
  const auto br = ray_breaks(ray, ramp);
  const double first = br.empty() ? kInf : br.front();
  double head = 0.0;
  if (ramp.region(ray.norm0) == 2 && ray.norm0 > 0.0) {
    // c0 - c(ρ) = (ρ - |ξ|)/(2h) = s·g(s), g(s) = (s + 2a)/(2h(ρ + |ξ|))
    if (!std::isfinite(first)) throw DomainError("radvec: ramp region without crossing");
    const double e = 1.0 / (1.0 - alpha);
    const auto& gl = rule32();
    double sum = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double v = 0.5 * (gl.nodes[i] + 1.0);
      const double s = first * std::pow(v, e);
      sum += 0.5 * gl.weights[i] * (s + 2.0 * a) / (2.0 * ramp.h * (ray.rho(s) + ray.norm0));
    }
    head = std::pow(first, 1.0 - alpha) / (1.0 - alpha) * sum;
  }
  if (!std::isfinite(first)) return head;
  return head + tail_pieces(ray, ramp, c0, alpha, first);
}

// Same integral for u and -u together (needed for α >= 1).
double paired_ray_integral(double a, double b, const Ramp& ramp, double alpha) {
  const Ray plus{a, b, std::sqrt(b)}, minus{-a, b, std::sqrt(b)};
  const double c0 = ramp(plus.norm0);
  auto bp = ray_breaks(plus, ramp), bm = ray_breaks(minus, ramp);
  double first = kInf;
  if (!bp.empty()) first = std::min(first, bp.front());
  if (!bm.empty()) first = std::min(first, bm.front());
  double head = 0.0;
  const double r0 = plus.norm0;
  if (ramp.region(r0) == 2 && r0 > 0.0) {
    if (!std::isfinite(first)) throw DomainError("radvec: ramp region without crossing");
    // [2c0 - c(ρ+) - c(ρ-)] = s² k(s) with
    // k(s) = [ρ+ + ρ- + 2|ξ| - 8a²/(ρ+ + ρ-)] / (2h(ρ+ + |ξ|)(ρ- + |ξ|))
    const double e = 1.0 / (2.0 - alpha);
    const auto& gl = rule32();
    double sum = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double v = 0.5 * (gl.nodes[i] + 1.0);
      const double s = first * std::pow(v, e);
      const double rp = plus.rho(s), rm = minus.rho(s);
      const double k = (rp + rm + 2.0 * r0 - 8.0 * a * a / (rp + rm)) / (2.0 * ramp.h * (rp + r0) * (rm + r0));
      sum += 0.5 * gl.weights[i] * k;
    }
    head = std::pow(first, 2.0 - alpha) / (2.0 - alpha) * sum;
  }
  if (!std::isfinite(first)) return head;
  return head + tail_pieces(plus, ramp, c0, alpha, first) + tail_pieces(minus, ramp, c0, alpha, first);
}

}  // namespace

McIdentityCheck radvec_monte_carlo(const StableParams& params, double r, std::span<const double> samples, double h) {
  const std::size_t n = params.dim();
  if (!(r > 0.0)) throw DomainError("radvec: r must be positive");
  if (!(h > 0.0 && h < r)) throw DomainError("radvec: bandwidth must lie in (0, r)");
  if (samples.size() % n != 0 || samples.size() / n < 2) throw DomainError("radvec: need at least two samples");
  const auto& spectral = params.spectral();
  const double alpha = params.alpha();
  if (alpha >= 1.0 && !spectral.symmetric()) {
    throw DomainError("radvec: alpha >= 1 is supported for symmetric spectral measures only");
  }
  const Ramp ramp{r, h};
  const std::size_t count = samples.size() / n;
  std::vector<double> lhs(count), rhs(count);
  const auto& atoms = spectral.atoms();
  for (std::size_t k = 0; k < count; ++k) {
    const auto xi = samples.subspan(k * n, n);
    const double b = dot(xi, xi), rad = std::sqrt(b);
    lhs[k] = std::fabs(rad - r) < h ? rad / (2.0 * h) : 0.0;
    double integral = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const double a = dot(xi, atoms[i].direction);
      if (spectral.symmetric()) {
        if (spectral.partner()[i] < i) continue;
        integral += atoms[i].weight * alpha * paired_ray_integral(a, b, ramp, alpha);
      } else {
        integral += atoms[i].weight * alpha * single_ray_integral(a, b, ramp, alpha);
      }
    }
    rhs[k] = alpha * integral;
  }
  return summarize_pairs(lhs, rhs, h);
}

McIdentityCheck radvec_residual(const StableParams& params, double r, std::size_t reps, const RngStream& rng,
                                const LePageOptions& options, const ExecutionPolicy& policy) {
  const StableSampler sampler(params, options);
  const auto samples = sampler.sample_many(reps, rng, policy);
  return radvec_monte_carlo(params, r, samples, default_bandwidth(r, reps));
}

IdentityCheck radvec_closed_form_1d(const StableParams& params, double r, const std::function<double(double)>& cdf,
                                    const std::function<double(double)>& pdf, const LevyEnvelope& envelope,
                                    double tol) {
  if (params.dim() != 1) throw DomainError("radvec_closed_form_1d: one-dimensional laws only");
  if (!(r > 0.0)) throw DomainError("radvec: r must be positive");
  IdentityCheck out;
  out.lhs = r * (pdf(r) + pdf(-r));
  const double inside = cdf(r) - cdf(-r);
  // Near z = 0 the difference of distribution functions cancels; integrate the density there instead.
  auto bracket = [&](std::span<const double> z) {
    if (std::fabs(z[0]) <= 1e-3 * r) {
      // z·∫_0^1 [f(r - zv) - f(-r - zv)] dv keeps the interval length exact
      const auto& gl = gauss_legendre_rule(16);
      double sum = 0.0;
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double v = 0.5 * (gl.nodes[i] + 1.0);
        sum += 0.5 * gl.weights[i] * (pdf(r - z[0] * v) - pdf(-r - z[0] * v));
      }
      return z[0] * sum;
    }
    return inside - (cdf(r - z[0]) - cdf(-r - z[0]));
  };
  out.rhs = params.alpha() * levy_integral(params, bracket, envelope, tol);
  out.rhs_truncated = out.rhs;
  return out;
}

// ---------------------------------------------------------------------------
// Distributional properties

KsResult stability_ks(const StableParams& params, double t, std::size_t samples, const RngStream& rng,
                      const LePageOptions& options) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("stability_ks: t must lie in (0,1)");
  const StableSampler sampler(params, options);
  const std::size_t n = params.dim();
  const auto x = sampler.sample_many(samples, rng.substream(0));
  const auto y1 = sampler.sample_many(samples, rng.substream(1));
  const auto y2 = sampler.sample_many(samples, rng.substream(2));
  const double a = std::pow(t, 1.0 / params.alpha()), b = std::pow(1.0 - t, 1.0 / params.alpha());
  std::vector<double> lhs(samples), rhs(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    lhs[i] = a * y1[i * n] + b * y2[i * n];
    rhs[i] = x[i * n];
  }
  return ks_two_sample(lhs, rhs);
}

KsResult scaling_ks(const StableParams& params, double factor, std::size_t samples, const RngStream& rng,
                    const LePageOptions& options) {
  if (!(factor > 0.0)) throw DomainError("scaling_ks: factor must be positive");
  const std::size_t n = params.dim();
  const auto big = StableSampler(params.with_theta(params.theta() * factor), options).sample_many(samples, rng.substream(0));
  const auto base = StableSampler(params, options).sample_many(samples, rng.substream(1));
  const double c = std::pow(factor, 1.0 / params.alpha());
  std::vector<double> lhs(samples), rhs(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    lhs[i] = big[i * n];
    rhs[i] = c * base[i * n];
  }
  return ks_two_sample(lhs, rhs);
}

}  // namespace pivotality
