// Acceptance gate: one PASS/FAIL line per criterion, exit 0 iff all pass.
// usage: acceptance [seed] [--only N]...

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include <unistd.h>

#include "pivotality/bernoulli.hpp"
#include "pivotality/crofton.hpp"
#include "pivotality/identities.hpp"
#include "pivotality/perturbation.hpp"
#include "pivotality/pmf.hpp"
#include "pivotality/runner.hpp"
#include "pivotality/stable.hpp"
#include "pivotality/statistics.hpp"

using namespace pivotality;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// |z| of a one- or two-sided comparison; exact agreement counts as 0.
double zval(double a, double sa, double b, double sb) {
  const double se = std::hypot(sa, sb);
  if (se > 0.0) return (a - b) / se;
  return std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(b)) ? 0.0 : INFINITY;
}

LatticeDistribution random_lattice(RngStream& rng) {
  const std::size_t s = 1 + static_cast<std::size_t>(rng.below(8));
  std::vector<double> q(s + 1);
  for (auto& v : q) v = 0.05 + rng.uniform();
  if (rng.uniform() < 0.5) q[0] = 0.0;
  double total = 0.0;
  for (double v : q) total += v;
  for (auto& v : q) v /= total;
  return LatticeDistribution(std::move(q));
}

double rel_gap(double a, double b) { return a == b ? 0.0 : std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

// ---------------------------------------------------------------------------

Verdict russo_exactness(std::uint64_t seed) {
  const RngStream rng(seed, 101);
  double worst = 0.0;
  int evals = 0;
  for (int e = 0; e < 200; ++e) {
    auto r = rng.substream(static_cast<std::uint64_t>(e));
    const int m = 1 + static_cast<int>(r.below(12));
    const auto A = e < 100 ? events::random_monotone_dnf(m, 2 * m, r) : events::random_table(m, r);
    const auto a = enumerate_event(A).monomial_coefficients();
    for (int i = 1; i <= 9; ++i) {
      const double theta = 0.1 * i;
      double d = 0.0;
      for (std::size_t n = a.size() - 1; n >= 1; --n) d = d * theta + static_cast<double>(n) * a[n];
      worst = std::max(worst, std::fabs(russo_derivative(A, theta) - d));
      ++evals;
    }
  }
  return {worst <= 1e-10, fmt("max |russo - poly'| = %.3g <= 1e-10 over %d (event, θ) pairs", worst, evals)};
}

Verdict binomial_identity(std::uint64_t) {
  double worst = 0.0;
  int cases = 0;
  for (int n = 1; n <= 30; ++n) {
    for (int k = 1; k <= n; ++k) {
      for (double p : {0.1, 0.5, 0.9}) {
        worst = std::max(worst, std::fabs(identity_report_binomial(n, k, p).gap()));
        ++cases;
      }
    }
  }
  return {worst <= 1e-10, fmt("max |tail - integral| = %.3g <= 1e-10 over %d cases", worst, cases)};
}

Verdict negbin_identity(std::uint64_t) {
  double worst_event = 0.0, worst_below = 0.0, worst_excess = 0.0;
  int cases = 0, mismatched = 0;
  for (int r = 1; r <= 20; ++r) {
    for (int k = 1; k <= 20; ++k) {
      for (double p : {0.1, 0.5, 0.9}) {
        const auto rep = identity_report_negbin(r, k, p);
        worst_event = std::max(worst_event, std::fabs(rep.event_probability - rep.integral));
        worst_below = std::max(worst_below, std::fabs(rep.nb_sum_below_k - rep.integral));
        // the through-k sum overshoots by exactly NB(r,p;k)
        const double excess = rep.nb_sum_through_k - rep.integral;
        worst_excess = std::max(worst_excess, std::fabs(excess - negbin_pmf(r, p, k)));
        if (std::fabs(excess) > 1e-10) ++mismatched;
        ++cases;
      }
    }
  }
  const bool pass = worst_event <= 1e-10 && worst_below <= 1e-10 && worst_excess <= 1e-10 && mismatched > 0;
  return {pass, fmt("event gap %.3g, sum_{j<=k-1} gap %.3g (<= 1e-10); sum_{j<=k} misses in %d/%d cases, "
                    "excess = NB(r,p;k) within %.3g",
                    worst_event, worst_below, mismatched, cases, worst_excess)};
}

Verdict poisson_erlang(std::uint64_t) {
  double worst_tail = 0.0, worst_erlang = 0.0;
  int cases = 0;
  const double thetas[] = {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0};
  for (double theta : thetas) {
    for (int k = 1; k <= 30; ++k) {
      worst_tail = std::max(worst_tail, std::fabs(poisson_tail(theta, k) - poisson_tail_integral(theta, k)));
      ++cases;
    }
    for (int n = 1; n <= 30; ++n) {
      for (double x : {0.05, 0.5, 1.0, 2.0, 5.0, 10.0}) {
        const auto e = erlang_cdf(n, theta, x);
        worst_erlang = std::max({worst_erlang, std::fabs(e.direct - e.via_integral), std::fabs(e.direct - e.via_poisson),
                                 std::fabs(e.via_integral - e.via_poisson)});
        ++cases;
      }
    }
  }
  return {std::max(worst_tail, worst_erlang) <= 1e-10,
          fmt("Poisson tail gap %.3g, Erlang three-way gap %.3g (<= 1e-10) over %d cases", worst_tail, worst_erlang,
              cases)};
}

Verdict compound_poisson(std::uint64_t seed) {
  const RngStream rng(seed, 105);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    auto r = rng.substream(static_cast<std::uint64_t>(i));
    const double theta = r.uniform(0.1, 8.0);
    const auto Q = random_lattice(r);
    const auto table = cpois_pmf_panjer_table(theta, Q, 50);
    for (int k = 0; k <= 50; ++k) {
      const double a = table[static_cast<std::size_t>(k)], d = cpois_pmf_direct(theta, Q, k),
                   p = cpois_pmf_polyrec(theta, Q, k);
      worst = std::max({worst, rel_gap(a, d), rel_gap(p, a), rel_gap(p, d)});
    }
  }
  double worst_ode = 0.0;
  for (int i = 0; i < 20; ++i) {
    auto r = rng.substream(1000 + static_cast<std::uint64_t>(i));
    const double theta = r.uniform(0.2, 8.0);
    const auto Q = random_lattice(r);
    const double x = r.uniform(0.0, 20.0);
    worst_ode = std::max(worst_ode, std::fabs(cpois_cdf_ode_residual(theta, Q, x, 1e-3).residual()));
  }
  return {worst <= 1e-12 && worst_ode <= 1e-5,
          fmt("max relative pmf gap %.3g <= 1e-12 (50 lattices, k <= 50); max ODE residual %.3g <= 1e-5 (20 cases)",
              worst, worst_ode)};
}

Verdict poisson_derivative(std::uint64_t seed) {
  const RngStream rng(seed, 106);
  const std::size_t reps = 100000;
  const IntensityMeasure lambda(Region::box(Box{{0, 0}, {1, 1}}), Density::uniform(), 1.0);
  const Region B = Region::box(Box{{0, 0}, {0.5, 0.5}});
  const double b = 0.25, theta = 1.5;
  const auto count = derivative_location_estimator(statistics::count(), lambda, theta, reps, rng.substream(0));
  const auto empty =
      derivative_location_estimator(statistics::void_indicator(B), lambda, theta, reps, rng.substream(1));
  const auto A = statistics::at_least(B, 1);
  const auto hit = derivative_location_estimator(A, lambda, theta, reps, rng.substream(2));
  const auto points = derivative_point_estimator(A, lambda, theta, reps, rng.substream(3));
  const double z[] = {
      zval(count.total.estimate, count.total.std_error, 1.0, 0.0),
      zval(empty.total.estimate, empty.total.std_error, -b * std::exp(-theta * b), 0.0),
      zval(hit.total.estimate, hit.total.std_error, b * std::exp(-theta * b), 0.0),
      zval(points.pivotal_points.estimate, points.pivotal_points.std_error, hit.plus.estimate, hit.plus.std_error),
  };
  bool pass = true;
  for (double v : z) pass = pass && std::fabs(v) <= 4.0;
  return {pass, fmt("z: count %.2f, void %.2f, at-least-one %.2f; Mecke vs N+ %.2f (|z| <= 4, reps 1e5)", z[0], z[1],
                    z[2], z[3])};
}

Verdict perturbation(std::uint64_t seed) {
  const RngStream rng(seed, 107);
  const IntensityMeasure lambda(Region::box(Box{{0, 0}, {1, 1}}), Density::uniform(), 1.0);
  const auto g = statistics::void_indicator(Region::box(Box{{0, 0}, {0.5, 0.5}}));
  SeriesOptions opts;
  opts.kmax = 6;
  opts.reps_per_term = 100000;
  bool pass = true;
  std::string detail;
  std::uint64_t k = 0;
  for (double theta : {0.25, 0.5, 1.0}) {
    const auto s = perturbation_series(g, lambda, lambda, theta, opts, rng.substream(k++));
    const double gap = std::fabs(s.estimate - std::exp(-0.25 * (1.0 + theta)));
    const double budget = s.truncation_bound + 4.0 * s.std_error;
    pass = pass && gap <= budget;
    detail += fmt("%sθ=%.2f gap %.2e <= %.2e", detail.empty() ? "" : "; ", theta, gap, budget);
  }
  return {pass, detail + " (truncation + 4σ, kmax 6)"};
}

Verdict stable_golden(std::uint64_t seed) {
  const RngStream rng(seed, 108);
  const StableParams half(0.5, SpectralMeasure::positive(1.0));
  const auto xs = StableSampler(half).sample_many(10000, rng.substream(0));
  const double sup = sup_distance(empirical_cdf(xs), [](double x) { return levy_half_cdf(1.0, x); });
  double worst = 0.0, worst_truncated = 0.0;
  for (double x : {0.5, 1.0, 2.0, 5.0}) {
    const auto d = dimone_closed_form(1.0, x), a = alphadens1_closed_form(1.0, x);
    worst = std::max({worst, std::fabs(d.residual()), std::fabs(a.residual())});
    worst_truncated = std::max({worst_truncated, std::fabs(d.residual_truncated()), std::fabs(a.residual_truncated())});
  }
  return {sup <= 0.02 && worst <= 1e-3,
          fmt("ECDF sup gap %.4f <= 0.02; dimone/alphadens1 residual %.2e <= 1e-3 "
              "(the forms without the z > x term leave %.3f)",
              sup, worst, worst_truncated)};
}

Verdict stable_properties(std::uint64_t seed) {
  const RngStream rng(seed, 109);
  double min_stab = 1.0, min_scale = 1.0;
  std::uint64_t k = 0;
  for (double alpha : {0.5, 0.8}) {
    for (double theta : {1.0, 2.0}) {
      const StableParams p(alpha, SpectralMeasure::positive(theta));
      for (double t : {0.3, 0.5, 0.7}) min_stab = std::min(min_stab, stability_ks(p, t, 10000, rng.substream(k++)).p_value);
      min_scale = std::min(min_scale, scaling_ks(p, 2.5, 10000, rng.substream(k++)).p_value);
    }
  }
  min_scale = std::min(
      min_scale, scaling_ks(StableParams(1.5, SpectralMeasure::symmetric_line(1.0)), 2.5, 10000, rng.substream(k++))
                     .p_value);
  // Λ(cB) = c^{-α} Λ(B) for the box B = [1,2] x [0.5,1.5], atoms off the axes
  std::vector<SpectralAtom> atoms;
  for (double phi : {0.3, 0.7, 1.1}) {
    atoms.push_back({{std::cos(phi), std::sin(phi)}, 0.4});
    atoms.push_back({{-std::cos(phi), -std::sin(phi)}, 0.4});
  }
  const SpectralMeasure sigma(atoms);
  double worst = 0.0, worst_base = 0.0;
  for (double alpha : {0.5, 0.8, 1.5}) {
    const StableParams p(alpha, sigma);
    const auto box = [&](double c) {
      LevyEnvelope env;
      env.beta = 1.99;
      // entry and exit radii of each atom's ray (slab method)
      for (const auto& a : atoms) {
        const double ux = a.direction[0], uy = a.direction[1];
        if (ux <= 0.0 || uy <= 0.0) continue;
        const double lo = std::max(c / ux, 0.5 * c / uy), hi = std::min(2.0 * c / ux, 1.5 * c / uy);
        if (lo < hi) env.radial_breaks.insert(env.radial_breaks.end(), {lo, hi});
      }
      // f = 0 below the first entry and beyond the last exit, |f| <= 1 between
      const auto [rmin, rmax] = std::minmax_element(env.radial_breaks.begin(), env.radial_breaks.end());
      env.c0 = *rmin < 1.0 ? std::pow(1.0 / *rmin, env.beta) : 0.0;
      env.c_inf = *rmax > 1.0 ? 1.0 : 0.0;
      return levy_integral(
          p,
          [c](std::span<const double> z) {
            return z[0] >= c && z[0] <= 2.0 * c && z[1] >= 0.5 * c && z[1] <= 1.5 * c ? 1.0 : 0.0;
          },
          env, 1e-11);
    };
    const double base = box(1.0);
    // closed form: Σ w (lo^{-α} - hi^{-α}) over the rays meeting B
    double exact = 0.0;
    for (const auto& a : atoms) {
      const double ux = a.direction[0], uy = a.direction[1];
      if (ux <= 0.0 || uy <= 0.0) continue;
      const double lo = std::max(1.0 / ux, 0.5 / uy), hi = std::min(2.0 / ux, 1.5 / uy);
      if (lo < hi) exact += a.weight * (std::pow(lo, -alpha) - std::pow(hi, -alpha));
    }
    worst_base = std::max(worst_base, rel_gap(base, exact));
    for (double c : {0.5, 2.0, 4.0}) worst = std::max(worst, rel_gap(box(c), std::pow(c, -alpha) * base));
  }
  return {min_stab > 0.01 && min_scale > 0.01 && worst <= 1e-7 && worst_base <= 1e-7,
          fmt("min KS p: stability %.3f, scaling %.3f (> 0.01, 10^4 samples); Λ homogeneity relative gap %.2e, "
              "Λ(B) vs closed form %.2e (<= 1e-7)",
              min_stab, min_scale, worst, worst_base)};
}

Verdict radvec(std::uint64_t seed) {
  const RngStream rng(seed, 110);
  const std::pair<const char*, StableParams> configs[] = {
      {"positive α=1/2", StableParams(0.5, SpectralMeasure::positive(1.0))},
      {"Cauchy", StableParams(1.0, SpectralMeasure::symmetric_line(1.0))},
      {"planar axes α=0.8", StableParams(0.8, SpectralMeasure::symmetric_axes(2, 1.0))},
  };
  bool pass = true;
  std::string detail;
  std::uint64_t k = 0;
  for (const auto& [name, p] : configs) {
    const auto m = radvec_residual(p, 1.0, 1000000, rng.substream(k++));
    pass = pass && std::fabs(m.z()) <= 4.0;
    detail += fmt("%s%s z=%.2f", detail.empty() ? "" : "; ", name, m.z());
  }
  return {pass, detail + " (r=1, 10^6 samples)"};
}

// For g = count the boundary side is a deterministic quadrature: its
// reported stderr is rounding noise, so agreement is judged on the gap.
bool side_ok(double value, double se, double truth) {
  return std::fabs(value - truth) <= 1e-10 * std::fabs(truth) || std::fabs(zval(value, se, truth, 0.0)) <= 4.0;
}

Verdict crofton_poisson(std::uint64_t seed) {
  const RngStream rng(seed, 111);
  CroftonOptions opts;
  opts.reps = 100000;
  const auto disk = ConvexBody::disk({0, 0}, 1.0);
  const auto h = Density::uniform();
  bool pass = true;
  std::string detail;
  std::uint64_t k = 0;
  for (double t : {0.0, 0.5}) {
    const auto c = crofton_poisson_check(statistics::count(), disk, h, t, opts, rng.substream(k++));
    const double truth = 2.0 * kPi * (1.0 + t);
    const double zl = zval(c.lhs_fd, c.lhs_stderr, truth, 0.0);
    pass = pass && std::fabs(zl) <= 4.0 && side_ok(c.rhs, c.rhs_stderr, truth);
    detail += fmt("disk t=%.1f lhs z %.2f, rhs %.12g vs %.12g; ", t, zl, c.rhs, truth);
  }
  const auto seg = ConvexBody::segment({0, 0}, {2, 1});
  const double L = std::sqrt(5.0);
  const auto s = crofton_poisson_check(statistics::count(), seg, h, 0.0, opts, rng.substream(k++));
  const double zs = zval(s.lhs_fd, s.lhs_stderr, 2.0 * L, 0.0);
  pass = pass && std::fabs(zs) <= 4.0 && side_ok(s.rhs, s.rhs_stderr, 2.0 * L);
  const auto flat = crofton_poisson_check(statistics::constant(3.0), disk, h, 0.5, opts, rng.substream(k++));
  const double flat_gap = std::max(std::fabs(flat.lhs_fd), std::fabs(flat.rhs));
  pass = pass && flat_gap <= 1e-12;
  detail += fmt("segment t=0 lhs z %.2f, rhs %.12g vs 2L %.12g; constant g max |side| %.1e", zs, s.rhs, 2.0 * L,
                flat_gap);
  return {pass, detail};
}

Verdict crofton_binomial(std::uint64_t seed) {
  const RngStream rng(seed, 112);
  CroftonOptions opts;
  opts.reps = 100000;
  opts.delta = 0.05;
  const auto disk = ConvexBody::disk({0, 0}, 1.0);
  const auto sub = Region::ball({0, 0}, 0.5);
  const auto g = statistics::count_in(sub);
  double worst_rhs = 0.0, worst_z = 0.0;
  std::uint64_t k = 0;
  for (std::size_t m : {1u, 5u, 20u}) {
    for (double t : {0.2, 0.5}) {
      const double vol = disk.parallel_volume(t), inner = kPi * 0.25;
      // exact inner expectation E[g(ξ^{(m-1)} + δ_x) - g(ξ^{(m)})] = 1{x ∈ B} - |B ∩ K_t|/|K_t|
      const double analytic =
          static_cast<double>(m) / vol *
          boundary_integral(disk, t, [&](std::span<const double> x) {
            return (std::hypot(x[0], x[1]) <= 0.5 ? 1.0 : 0.0) - inner / vol;
          });
      const double truth = -static_cast<double>(m) / (2.0 * std::pow(1.0 + t, 3));
      worst_rhs = std::max(worst_rhs, std::fabs(analytic - truth));
      const auto c = crofton_binomial_check(g, disk, Density::uniform(), t, m, opts, rng.substream(k++));
      worst_z = std::max(worst_z, std::fabs(zval(c.lhs_fd, c.lhs_stderr, analytic, 0.0)));
    }
  }
  return {worst_rhs <= 1e-10 && worst_z <= 4.0,
          fmt("analytic rhs vs -m/(2(1+t)^3) gap %.2e; MC lhs max |z| %.2f <= 4 (m in {1,5,20}, t in {0.2,0.5})",
              worst_rhs, worst_z)};
}

Verdict determinism(std::uint64_t seed) {
  namespace rn = runner;
  auto j = nlohmann::json::parse(R"({"reps": 3000, "suites": ["identities", "russo", "poisson-derivative", "stable", "crofton"],
    "stable": {"ks_samples": 2000, "ecdf_samples": 2000},
    "crofton": {"shape": {"kind": "polygon", "vertices": [[0, 0], [2, 0], [2.5, 1], [1, 2], [-0.5, 1]]},
                "h": "affine:1,0.2,0.1", "t": 0.5, "m": 10}})");
  j["seed"] = seed;
  const auto config = rn::parse_config(j);
  const auto out = fs::temp_directory_path() / fmt("pivotality_acceptance_%d", static_cast<int>(::getpid()));
  fs::remove_all(out);
  const auto a = rn::execute(config, out), b = rn::execute(config, out);
  const auto read = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  };
  const auto ca = read(a.directory / "results.csv"), cb = read(b.directory / "results.csv");
  fs::remove_all(out);
  return {ca == cb && !ca.empty(),
          fmt("two runs, %zu rows, %zu bytes: CSV %s", a.rows.size(), ca.size(), ca == cb ? "identical" : "DIFFERS")};
}

}  // namespace

int main(int argc, char** argv) {
  std::uint64_t seed = 20240611;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      only.insert(std::atoi(argv[++i]));
    } else {
      seed = std::strtoull(argv[i], nullptr, 10);
    }
  }
  const std::pair<const char*, std::function<Verdict(std::uint64_t)>> criteria[] = {
      {"Russo exactness", russo_exactness},
      {"binomial identity", binomial_identity},
      {"negative-binomial identity", negbin_identity},
      {"Poisson/Erlang three-way", poisson_erlang},
      {"compound Poisson", compound_poisson},
      {"Poisson derivative estimators", poisson_derivative},
      {"perturbation series", perturbation},
      {"stable alpha=1/2 golden checks", stable_golden},
      {"stable property suite", stable_properties},
      {"radius-vector identity", radvec},
      {"Crofton Poisson", crofton_poisson},
      {"Crofton binomial", crofton_binomial},
      {"determinism", determinism},
  };
  std::printf("acceptance seed %llu\n", static_cast<unsigned long long>(seed));
  bool all = true;
  int n = 0;
  for (const auto& [name, fn] : criteria) {
    ++n;
    if (!only.empty() && !only.count(n)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn(seed);
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    all = all && v.pass;
    std::printf("%s %2d %s: %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", n, name, v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
