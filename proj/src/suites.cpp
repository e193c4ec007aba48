// The five check suites behind the runner. Each suite owns
// RngStream(seed, suite_stream(name)) and hands substream(i) to its i-th
// random check, so a suite's rows do not depend on which other suites run.

#include <cmath>
#include <string>

#include "pivotality/bernoulli.hpp"
#include "pivotality/crofton.hpp"
#include "pivotality/errors.hpp"
#include "pivotality/identities.hpp"
#include "pivotality/perturbation.hpp"
#include "pivotality/pmf.hpp"
#include "pivotality/runner.hpp"
#include "pivotality/stable.hpp"
#include "pivotality/statistics.hpp"

namespace pivotality::runner {

using nlohmann::json;

namespace {

class Rows {
 public:
  Rows(std::string suite, const Tolerances& tol) : suite_(std::move(suite)), tol_(tol) {}

  CheckRow& add(const std::string& id, json params, double lhs, double rhs, double lhs_se = 0.0, double rhs_se = 0.0) {
    CheckRow r;
    r.suite = suite_;
    r.check_id = id;
    r.params = std::move(params);
    r.lhs = lhs;
    r.rhs = rhs;
    r.lhs_stderr = lhs_se;
    r.rhs_stderr = rhs_se;
    rows_.push_back(std::move(r));
    return rows_.back();
  }

  /// |lhs - rhs| (or the given gap) <= threshold.
  void gap(const std::string& id, json params, double lhs, double rhs, double threshold, double gap = NAN) {
    auto& r = add(id, std::move(params), lhs, rhs);
    r.rule = Rule::gap_at_most;
    r.z_or_gap = std::isnan(gap) ? std::fabs(lhs - rhs) : gap;
    r.threshold = threshold;
    r.pass = std::isfinite(r.z_or_gap) && r.z_or_gap <= threshold;
  }

  void gap_above(const std::string& id, json params, double lhs, double rhs, double threshold) {
    auto& r = add(id, std::move(params), lhs, rhs);
    r.rule = Rule::gap_above;
    r.z_or_gap = std::fabs(lhs - rhs);
    r.threshold = threshold;
    r.pass = std::isfinite(r.z_or_gap) && r.z_or_gap > threshold;
  }

  /// z = (lhs - rhs)/hypot(se) unless a paired z is supplied.
  void z(const std::string& id, json params, double lhs, double lhs_se, double rhs, double rhs_se,
         double paired_z = NAN) {
    auto& r = add(id, std::move(params), lhs, rhs, lhs_se, rhs_se);
    r.rule = Rule::z_at_most;
    r.threshold = tol_.z;
    if (!std::isnan(paired_z)) {
      r.z_or_gap = paired_z;
    } else {
      const double se = std::hypot(lhs_se, rhs_se);
      const double d = lhs - rhs;
      if (se > 0.0) {
        r.z_or_gap = d / se;
      } else {
        // both sides exact: only rounding may separate them
        r.z_or_gap = std::fabs(d) <= 1e-12 * std::max(1.0, std::fabs(rhs)) ? 0.0 : std::copysign(INFINITY, d);
      }
    }
    r.pass = std::isfinite(r.z_or_gap) && std::fabs(r.z_or_gap) <= tol_.z;
  }

  void ks(const std::string& id, json params, const KsResult& k) {
    auto& r = add(id, std::move(params), k.statistic, 0.0);
    r.rule = Rule::p_above;
    r.z_or_gap = k.p_value;
    r.threshold = tol_.ks_p;
    r.pass = k.p_value > tol_.ks_p;
  }

  void budget(const std::string& id, json params, double lhs, double lhs_se, double rhs, double bound) {
    auto& r = add(id, std::move(params), lhs, rhs, lhs_se, 0.0);
    r.rule = Rule::within_budget;
    r.z_or_gap = std::fabs(lhs - rhs);
    r.threshold = bound + tol_.z * lhs_se;
    r.pass = std::isfinite(r.z_or_gap) && r.z_or_gap <= r.threshold;
  }

  std::vector<CheckRow> take() { return std::move(rows_); }

 private:
  std::string suite_;
  const Tolerances& tol_;
  std::vector<CheckRow> rows_;
};

std::string numbered(const char* id, std::size_t i) { return std::string(id) + "." + std::to_string(i + 1); }

ExecutionPolicy policy_of(const RunConfig& c) { return ExecutionPolicy{static_cast<unsigned>(c.workers)}; }

// Random lattice law on {0..s}, s <= 6; q_0 = 0 half of the time.
LatticeDistribution random_lattice(RngStream& rng) {
  const std::size_t s = 1 + static_cast<std::size_t>(rng.below(6));
  std::vector<double> q(s + 1);
  for (auto& v : q) v = 0.05 + rng.uniform();
  if (rng.uniform() < 0.5) q[0] = 0.0;
  double total = 0.0;
  for (double v : q) total += v;
  for (auto& v : q) v /= total;
  return LatticeDistribution(std::move(q));
}

// ---------------------------------------------------------------------------

std::vector<CheckRow> identities_suite(const RunConfig& c) {
  const auto& p = c.identities;
  Rows rows("identities", c.tol);
  const double exact = c.tol.exact;

  for (std::size_t i = 0; i < p.binomial.size(); ++i) {
    const auto [n, k, q] = p.binomial[i];
    const auto r = identity_report_binomial(int(n), int(k), q);
    rows.gap(numbered("binomial_tail", i), {{"n", int(n)}, {"k", int(k)}, {"p", q}}, r.tail, r.integral, exact);
  }
  for (std::size_t i = 0; i < p.negbin.size(); ++i) {
    const auto [rr, k, q] = p.negbin[i];
    const auto r = identity_report_negbin(int(rr), int(k), q);
    const json params = {{"r", int(rr)}, {"k", int(k)}, {"p", q}};
    rows.gap(numbered("negbin_event", i), params, r.event_probability, r.integral, exact);
    rows.gap(numbered("negbin_sum_below_k", i), params, r.nb_sum_below_k, r.integral, exact);
    // the sum through j = k overshoots by NB(r,p;k) > 0 whenever p < 1
    if (q < 1.0) {
      rows.gap_above(numbered("negbin_sum_through_k_differs", i), params, r.nb_sum_through_k, r.integral, exact);
    }
  }
  for (std::size_t i = 0; i < p.poisson.size(); ++i) {
    const auto [theta, k] = p.poisson[i];
    rows.gap(numbered("poisson_tail", i), {{"theta", theta}, {"k", int(k)}}, poisson_tail(theta, int(k)),
             poisson_tail_integral(theta, int(k)), exact);
  }
  for (std::size_t i = 0; i < p.erlang.size(); ++i) {
    const auto [n, theta, x] = p.erlang[i];
    const auto e = erlang_cdf(int(n), theta, x);
    const json params = {{"n", int(n)}, {"theta", theta}, {"x", x}};
    rows.gap(numbered("erlang_integral", i), params, e.direct, e.via_integral, exact);
    rows.gap(numbered("erlang_poisson", i), params, e.direct, e.via_poisson, exact);
  }

  const RngStream rng(c.seed, suite_stream("identities"));
  for (int i = 0; i < p.cpois_lattices; ++i) {
    auto r = rng.substream(static_cast<std::uint64_t>(i));
    const double theta = r.uniform(0.2, 5.0);
    const auto Q = random_lattice(r);
    const auto table = cpois_pmf_panjer_table(theta, Q, p.cpois_kmax);
    double worst_direct = 0.0, worst_poly = 0.0;
    int k_direct = 0, k_poly = 0;
    double lhs_direct = 0.0, rhs_direct = 0.0, lhs_poly = 0.0, rhs_poly = 0.0;
    for (int k = 0; k <= p.cpois_kmax; ++k) {
      const double a = table[static_cast<std::size_t>(k)];
      const double d = cpois_pmf_direct(theta, Q, k);
      const double pr = cpois_pmf_polyrec(theta, Q, k);
      const auto rel = [](double x, double y) {
        return x == y ? 0.0 : std::fabs(x - y) / std::max(std::fabs(y), 1e-300);
      };
      if (rel(a, d) >= worst_direct) worst_direct = rel(a, d), k_direct = k, lhs_direct = a, rhs_direct = d;
      if (rel(pr, a) >= worst_poly) worst_poly = rel(pr, a), k_poly = k, lhs_poly = pr, rhs_poly = a;
    }
    const json q = Q.probabilities();
    rows.gap(numbered("cpois_panjer_vs_direct", std::size_t(i)), {{"theta", theta}, {"q", q}, {"worst_k", k_direct}},
             lhs_direct, rhs_direct, c.tol.cpois, worst_direct);
    rows.gap(numbered("cpois_polyrec_vs_panjer", std::size_t(i)), {{"theta", theta}, {"q", q}, {"worst_k", k_poly}},
             lhs_poly, rhs_poly, c.tol.cpois, worst_poly);
  }
  for (int i = 0; i < p.ode_cases; ++i) {
    auto r = rng.substream(1000 + static_cast<std::uint64_t>(i));
    const double theta = r.uniform(0.5, 5.0);
    const auto Q = random_lattice(r);
    const double x = r.uniform(0.0, 15.0);
    const auto o = cpois_cdf_ode_residual(theta, Q, x, p.ode_delta);
    rows.gap(numbered("cpois_cdf_ode", std::size_t(i)),
             {{"theta", theta}, {"q", Q.probabilities()}, {"x", x}, {"delta", p.ode_delta}}, o.lhs, o.rhs, c.tol.ode);
  }
  return rows.take();
}

// ---------------------------------------------------------------------------

std::vector<CheckRow> russo_suite(const RunConfig& c) {
  const auto& p = c.russo;
  Rows rows("russo", c.tol);
  const RngStream rng(c.seed, suite_stream("russo"));
  const int total = p.dnf_events + p.table_events;
  for (int e = 0; e < total; ++e) {
    auto r = rng.substream(static_cast<std::uint64_t>(e));
    const int m = 2 + static_cast<int>(r.below(static_cast<std::uint64_t>(p.m_max - 1)));
    const bool dnf = e < p.dnf_events;
    const auto A = dnf ? events::random_monotone_dnf(m, 2 * m, r) : events::random_table(m, r);
    const auto a = enumerate_event(A, policy_of(c)).monomial_coefficients();
    double worst = -1.0, lhs = 0.0, rhs = 0.0, at = 0.0;
    for (double theta : p.thetas) {
      double d = 0.0;
      for (std::size_t n = a.size() - 1; n >= 1; --n) d = d * theta + static_cast<double>(n) * a[n];
      const double russo = russo_derivative(A, theta);
      if (std::fabs(russo - d) > worst) worst = std::fabs(russo - d), lhs = russo, rhs = d, at = theta;
    }
    rows.gap(numbered(dnf ? "russo_dnf" : "russo_table", std::size_t(dnf ? e : e - p.dnf_events)),
             {{"m", m}, {"event", A.name}, {"worst_theta", at}}, lhs, rhs, c.tol.exact);
  }
  rows.gap("russo_at_least_one_of_two", {{"m", 2}, {"theta", 0.5}}, russo_derivative(events::at_least(2, 1), 0.5), 1.0,
           c.tol.exact);
  rows.gap("russo_all_ones", {{"m", 5}, {"theta", 0.3}}, russo_derivative(events::all_ones(5), 0.3),
           5.0 * std::pow(0.3, 4), c.tol.exact);
  // d/dp P(Bin(n,p) >= k) = n Bin(n-1,p;k-1)
  rows.gap("russo_binomial_tail", {{"n", 10}, {"k", 3}, {"p", 0.3}}, russo_derivative(events::at_least(10, 3), 0.3),
           10.0 * binomial_pmf(9, 0.3, 2), c.tol.exact);
  return rows.take();
}

// ---------------------------------------------------------------------------

std::vector<CheckRow> poisson_derivative_suite(const RunConfig& c) {
  const auto& p = c.poisson_derivative;
  Rows rows("poisson-derivative", c.tol);
  const RngStream rng(c.seed, suite_stream("poisson-derivative"));
  const std::size_t reps = p.reps ? p.reps : c.reps;
  const auto policy = policy_of(c);
  const IntensityMeasure lambda(Region::box(Box{{0, 0}, {1, 1}}), Density::uniform(), 1.0);
  const Region B = Region::box(Box{{0, 0}, {p.corner, p.corner}});
  const double b = p.corner * p.corner, theta = p.theta;
  const json params = {{"theta", theta}, {"B", {{"lo", {0, 0}}, {"hi", {p.corner, p.corner}}}}, {"reps", reps}};

  const auto count = derivative_location_estimator(statistics::count(), lambda, theta, reps, rng.substream(0), policy);
  rows.z("location_count", params, count.total.estimate, count.total.std_error, 1.0, 0.0);
  const auto empty =
      derivative_location_estimator(statistics::void_indicator(B), lambda, theta, reps, rng.substream(1), policy);
  rows.z("location_void", params, empty.total.estimate, empty.total.std_error, -b * std::exp(-theta * b), 0.0);
  const auto A = statistics::at_least(B, 1);
  const auto hit = derivative_location_estimator(A, lambda, theta, reps, rng.substream(2), policy);
  rows.z("location_at_least_one", params, hit.total.estimate, hit.total.std_error, b * std::exp(-theta * b), 0.0);

  const auto points = derivative_point_estimator(A, lambda, theta, reps, rng.substream(3), policy);
  rows.z("mecke_points_vs_location_plus", params, points.pivotal_points.estimate, points.pivotal_points.std_error,
         hit.plus.estimate, hit.plus.std_error);
  rows.gap("mecke_added_point_variant", params, points.added_point_variant.estimate, 0.0, c.tol.exact);

  SeriesOptions opts;
  opts.kmax = p.kmax;
  opts.reps_per_term = reps;
  opts.policy = policy;
  for (std::size_t i = 0; i < p.series_thetas.size(); ++i) {
    const double t = p.series_thetas[i];
    const auto s = perturbation_series(statistics::void_indicator(B), lambda, lambda, t, opts,
                                       rng.substream(10 + static_cast<std::uint64_t>(i)));
    rows.budget(numbered("series_void", i),
                {{"theta", t}, {"kmax", p.kmax}, {"reps_per_term", reps}, {"truncation_bound", s.truncation_bound}},
                s.estimate, s.std_error, std::exp(-b * (1.0 + t)), s.truncation_bound);
  }
  return rows.take();
}

// ---------------------------------------------------------------------------

std::vector<CheckRow> stable_suite(const RunConfig& c) {
  const auto& p = c.stable;
  Rows rows("stable", c.tol);
  const RngStream rng(c.seed, suite_stream("stable"));
  const auto policy = policy_of(c);
  const std::size_t reps = p.reps ? p.reps : c.reps;
  const StableParams half(0.5, SpectralMeasure::positive(1.0));

  {
    const auto xs = StableSampler(half).sample_many(p.ecdf_samples, rng.substream(0), policy);
    const double gap = sup_distance(empirical_cdf(xs), [](double x) { return levy_half_cdf(1.0, x); });
    rows.gap("half_ecdf_sup", {{"alpha", 0.5}, {"theta", 1.0}, {"samples", p.ecdf_samples}}, gap, 0.0, c.tol.ecdf);
  }
  for (std::size_t i = 0; i < p.quad_points.size(); ++i) {
    const double x = p.quad_points[i];
    const auto d = dimone_closed_form(1.0, x);
    rows.gap(numbered("dimone_quadrature", i),
             {{"alpha", 0.5}, {"theta", 1.0}, {"x", x}, {"rhs_truncated", d.rhs_truncated}}, d.lhs, d.rhs,
             c.tol.stable_quad);
    const auto a = alphadens1_closed_form(1.0, x);
    rows.gap(numbered("alphadens1_quadrature", i),
             {{"alpha", 0.5}, {"theta", 1.0}, {"x", x}, {"rhs_truncated", a.rhs_truncated}}, a.lhs, a.rhs,
             c.tol.stable_quad);
  }
  {
    std::uint64_t k = 10;
    for (double alpha : {0.5, 0.7}) {
      const auto m = dimone_residual(alpha, 1.0, 1.0, DimoneMethod::monte_carlo, reps, rng.substream(k++), policy);
      rows.z(alpha == 0.5 ? "dimone_mc.1" : "dimone_mc.2",
             {{"alpha", alpha}, {"theta", 1.0}, {"x", 1.0}, {"reps", reps}, {"bandwidth", m.bandwidth}},
             m.lhs.mean, m.lhs.std_error, m.rhs.mean, m.rhs.std_error, m.z());
    }
  }
  {
    std::uint64_t k = 20;
    std::size_t n = 0;
    for (double alpha : {0.5, 0.8}) {
      for (double theta : {1.0, 2.0}) {
        const StableParams sp(alpha, SpectralMeasure::positive(theta));
        for (double t : p.stability_t) {
          rows.ks(numbered("stability_ks", n++), {{"alpha", alpha}, {"theta", theta}, {"t", t}, {"samples", p.ks_samples}},
                  stability_ks(sp, t, p.ks_samples, rng.substream(k++)));
        }
      }
    }
    n = 0;
    const auto scaling = [&](const StableParams& sp, const char* law) {
      rows.ks(numbered("scaling_ks", n++),
              {{"alpha", sp.alpha()}, {"theta", sp.theta()}, {"law", law}, {"factor", p.scaling_factor},
               {"samples", p.ks_samples}},
              scaling_ks(sp, p.scaling_factor, p.ks_samples, rng.substream(k++)));
    };
    for (double alpha : {0.5, 0.8}) {
      for (double theta : {1.0, 2.0}) scaling(StableParams(alpha, SpectralMeasure::positive(theta)), "positive");
    }
    scaling(StableParams(1.5, SpectralMeasure::symmetric_line(1.0)), "symmetric");
  }
  {
    std::size_t n = 0;
    for (double alpha : {0.5, 0.8, 1.5}) {
      const StableParams sp(alpha, SpectralMeasure::symmetric_axes(2, 1.0));
      const auto tail = [&](double r) {
        LevyEnvelope env;
        env.beta = 1.99;
        env.c0 = r < 1.0 ? std::pow(1.0 / r, env.beta) : 0.0;
        env.c_inf = 1.0;
        env.radial_breaks = {r};
        return levy_integral(sp, [r](std::span<const double> z) { return std::hypot(z[0], z[1]) > r ? 1.0 : 0.0; },
                             env, 1e-10);
      };
      const double base = tail(1.0);
      for (double cc : p.homogeneity_c) {
        const double lhs = tail(cc), rhs = std::pow(cc, -alpha) * base;
        rows.gap(numbered("levy_homogeneity", n++), {{"alpha", alpha}, {"theta", 1.0}, {"c", cc}, {"dim", 2}}, lhs,
                 rhs, c.tol.levy, std::fabs(lhs - rhs) / std::fabs(rhs));
      }
    }
  }
  {
    const std::size_t samples = p.radvec_samples ? p.radvec_samples : c.reps;
    const std::pair<const char*, StableParams> configs[] = {
        {"positive", StableParams(0.5, SpectralMeasure::positive(1.0))},
        {"cauchy", StableParams(1.0, SpectralMeasure::symmetric_line(1.0))},
        {"planar_axes", StableParams(0.8, SpectralMeasure::symmetric_axes(2, 1.0))},
    };
    std::uint64_t k = 1000;  // clear of the KS block, whose length depends on stability_t
    for (const auto& [name, sp] : configs) {
      const auto m = radvec_residual(sp, p.radvec_r, samples, rng.substream(k++), {}, policy);
      rows.z(std::string("radvec_") + name,
             {{"alpha", sp.alpha()}, {"theta", sp.theta()}, {"dim", sp.dim()}, {"r", p.radvec_r},
              {"samples", samples}, {"bandwidth", m.bandwidth}},
             m.lhs.mean, m.lhs.std_error, m.rhs.mean, m.rhs.std_error, m.z());
    }
  }
  return rows.take();
}

// ---------------------------------------------------------------------------

std::vector<CheckRow> crofton_suite(const RunConfig& c) {
  const auto& p = c.crofton;
  Rows rows("crofton", c.tol);
  const RngStream rng(c.seed, suite_stream("crofton"));
  const ConvexBody K = parse_shape(p.shape);
  const Density h = parse_density(p.h, K, p.t + 0.25);
  const double t = p.t;
  CroftonOptions opts;
  opts.reps = p.reps ? p.reps : c.reps;
  opts.rhs_reps = crofton_rhs_reps(c);
  opts.policy = policy_of(c);
  const json params = {{"shape", p.shape}, {"h", p.h}, {"t", t}, {"reps", opts.reps}, {"rhs_reps", opts.rhs_reps}};
  const auto hf = [&h](std::span<const double> x) { return h(x); };

  if (K.dim() == 2 && t > 1e-3) {
    const auto s = steiner_derivative_check(K, hf, t);
    rows.gap("steiner_derivative", params, s.fd_value, s.boundary_value, c.tol.steiner);
  }

  // d/dt E N(K_t) = ∫_{∂K_t} h, plus twice the segment integral at t = 0
  double surface = 0.0;
  if (!K.full_dimensional() && t == 0.0) {
    for (const auto& node : K.segment_nodes(opts.order)) surface += 2.0 * node.weight * h(node.x);
  } else {
    surface = boundary_integral(K, t, hf, opts.order);
  }
  const double mass = parallel_mass(K, t, h);

  const auto count = crofton_poisson_check(statistics::count(), K, h, t, opts, rng.substream(0));
  rows.z("poisson_count", params, count.lhs_fd, count.lhs_stderr, count.rhs, count.rhs_stderr);
  rows.z("poisson_count_vs_boundary", params, count.lhs_fd, count.lhs_stderr, surface, 0.0);

  // P(N(K_t) >= n0) with n0 near the mean; derivative λ'(t)·Po(λ(K_t); n0 - 1)
  const auto n0 = static_cast<std::size_t>(std::max(1.0, std::round(mass)));
  const auto hit = crofton_poisson_check(statistics::count_at_least(n0), K, h, t, opts, rng.substream(1));
  const double hit_exact = surface * poisson_pmf(mass, static_cast<std::int64_t>(n0) - 1);
  json hp = params;
  hp["n0"] = n0;
  rows.z("poisson_count_at_least", hp, hit.lhs_fd, hit.lhs_stderr, hit.rhs, hit.rhs_stderr);
  rows.z("poisson_count_at_least_closed_form", hp, hit.lhs_fd, hit.lhs_stderr, hit_exact, 0.0);

  const auto flat = crofton_poisson_check(statistics::constant(1.0), K, h, t, opts, rng.substream(2));
  rows.gap("poisson_constant", params, flat.lhs_fd, flat.rhs, c.tol.exact,
           std::max(std::fabs(flat.lhs_fd), std::fabs(flat.rhs)));

  if (t > 0.0) {
    // E N_ξ(K) = m λ(K)/λ(K_t); for x on ∂K_t (t > 0) x ∉ K
    const double inner = parallel_mass(K, 0.0, h);
    const double exact = -static_cast<double>(p.m) * inner * boundary_integral(K, t, hf, opts.order) / (mass * mass);
    const auto bin =
        crofton_binomial_check(statistics::count_in(K.parallel_region(0.0)), K, h, t, p.m, opts, rng.substream(3));
    json bp = params;
    bp["m"] = p.m;
    rows.z("binomial_count_in_body", bp, bin.lhs_fd, bin.lhs_stderr, bin.rhs, bin.rhs_stderr);
    rows.z("binomial_lhs_closed_form", bp, bin.lhs_fd, bin.lhs_stderr, exact, 0.0);
    rows.z("binomial_rhs_closed_form", bp, bin.rhs, bin.rhs_stderr, exact, 0.0);
  }
  return rows.take();
}

}  // namespace

std::vector<CheckRow> run_suite(const std::string& suite, const RunConfig& config) {
  if (suite == "identities") return identities_suite(config);
  if (suite == "russo") return russo_suite(config);
  if (suite == "poisson-derivative") return poisson_derivative_suite(config);
  if (suite == "stable") return stable_suite(config);
  if (suite == "crofton") return crofton_suite(config);
  throw ConfigError("unknown suite '" + suite + "'");
}

}  // namespace pivotality::runner
