#include "pivotality/bernoulli.hpp"

#include <bit>
#include <cmath>
#include <memory>

#include "pivotality/errors.hpp"
#include "pivotality/pmf.hpp"
#include "pivotality/quadrature.hpp"

namespace pivotality {

namespace {

void check_m(int m) {
  if (m < 1 || m > 31) throw DomainError("BooleanEvent: m must lie in 1..31");
}

Outcome full_mask(int m) { return m >= 32 ? ~Outcome{0} : (Outcome{1} << m) - 1; }

// x^e with 0^0 = 1 and negative exponents only ever multiplied by zero.
double ipow(double x, int e) {
  if (e < 0) return 0.0;
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

// ∫_0^p c t^a (1-t)^b dt with log c given.
QuadratureResult beta_integral(double log_coef, int a, int b, double p, double tol) {
  if (p == 0.0) return {};
  auto f = [=](double t) {
    double s = log_coef;
    if (a > 0) s += a * std::log(t);
    if (b > 0) s += b * std::log1p(-t);
    return std::exp(s);
  };
  AdaptiveOptions opts;
  opts.abs_tol = tol;
  return integrate_adaptive(f, 0.0, p, opts);
}

}  // namespace

namespace events {

BooleanEvent full(int m) {
  check_m(m);
  return {m, [](Outcome) { return true; }, true, "full"};
}

BooleanEvent empty(int m) {
  check_m(m);
  return {m, [](Outcome) { return false; }, true, "empty"};
}

BooleanEvent all_ones(int m) {
  check_m(m);
  const Outcome all = full_mask(m);
  return {m, [all](Outcome x) { return (x & all) == all; }, true, "all_ones"};
}

BooleanEvent at_least(int m, int k) {
  check_m(m);
  return {m, [k](Outcome x) { return std::popcount(x) >= k; }, true, "S>=" + std::to_string(k)};
}

BooleanEvent exactly(int m, int k) {
  check_m(m);
  return {m, [k](Outcome x) { return std::popcount(x) == k; }, false, "S=" + std::to_string(k)};
}

BooleanEvent monotone_dnf(int m, std::vector<Outcome> clauses) {
  check_m(m);
  for (Outcome c : clauses) {
    if (c & ~full_mask(m)) throw DomainError("monotone_dnf: clause uses a coordinate beyond m");
  }
  return {m,
          [clauses = std::move(clauses)](Outcome x) {
            for (Outcome c : clauses) {
              if ((x & c) == c) return true;
            }
            return false;
          },
          true, "dnf"};
}

BooleanEvent parity(int m) {
  check_m(m);
  return {m, [](Outcome x) { return (std::popcount(x) & 1) == 1; }, false, "parity"};
}

BooleanEvent random_monotone_dnf(int m, int max_clauses, RngStream& rng) {
  check_m(m);
  if (max_clauses < 1) throw DomainError("random_monotone_dnf: need at least one clause");
  const int n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_clauses)));
  std::vector<Outcome> clauses;
  for (int c = 0; c < n; ++c) {
    Outcome clause = 0;
    while (clause == 0) clause = static_cast<Outcome>(rng.next_u64()) & full_mask(m);
    clauses.push_back(clause);
  }
  return monotone_dnf(m, std::move(clauses));
}

BooleanEvent random_table(int m, RngStream& rng) {
  check_m(m);
  if (m > 16) throw DomainError("random_table: m <= 16");
  auto table = std::make_shared<std::vector<bool>>(std::size_t{1} << m);
  for (std::size_t i = 0; i < table->size(); ++i) (*table)[i] = (rng.next_u64() >> 63) != 0;
  return {m, [table](Outcome x) { return static_cast<bool>((*table)[x]); }, false, "table"};
}

}  // namespace events

PivotalCounts pivotal_counts(const BooleanEvent& A, Outcome x) {
  check_m(A.m);
  PivotalCounts out;
  for (int i = 0; i < A.m; ++i) {
    const Outcome bit = Outcome{1} << i;
    const bool up = A.contains(x | bit), down = A.contains(x & ~bit);
    if (up && !down) ++out.plus;
    if (down && !up) ++out.minus;
  }
  return out;
}

PivotalCounts pivotal_counts(const BooleanEvent& A, const std::vector<int>& bits) {
  if (static_cast<int>(bits.size()) != A.m) throw DomainError("pivotal_counts: bit vector length differs from m");
  Outcome x = 0;
  for (int i = 0; i < A.m; ++i) {
    if (bits[static_cast<std::size_t>(i)] != 0 && bits[static_cast<std::size_t>(i)] != 1) {
      throw DomainError("pivotal_counts: entries must be 0 or 1");
    }
    if (bits[static_cast<std::size_t>(i)]) x |= Outcome{1} << i;
  }
  return pivotal_counts(A, x);
}

double EventPolynomial::probability(double theta) const {
  double s = 0.0;
  for (int j = 0; j <= m; ++j) {
    s += static_cast<double>(bernstein[static_cast<std::size_t>(j)]) * ipow(theta, j) * ipow(1.0 - theta, m - j);
  }
  return s;
}

double EventPolynomial::derivative(double theta) const {
  double s = 0.0;
  for (int j = 0; j <= m; ++j) {
    const double c = static_cast<double>(bernstein[static_cast<std::size_t>(j)]);
    if (c == 0.0) continue;
    double d = 0.0;
    if (j > 0) d += j * ipow(theta, j - 1) * ipow(1.0 - theta, m - j);
    if (j < m) d -= (m - j) * ipow(theta, j) * ipow(1.0 - theta, m - j - 1);
    s += c * d;
  }
  return s;
}

double EventPolynomial::expected_pivotal(double theta) const {
  double s = 0.0;
  for (int j = 0; j <= m; ++j) {
    s += static_cast<double>(pivotal[static_cast<std::size_t>(j)]) * ipow(theta, j) * ipow(1.0 - theta, m - j);
  }
  return s;
}

std::vector<double> EventPolynomial::monomial_coefficients() const {
  // θ^j (1-θ)^{m-j} = Σ_n (-1)^{n-j} C(m-j, n-j) θ^n
  std::vector<std::vector<__int128>> binom(static_cast<std::size_t>(m + 1));
  for (int a = 0; a <= m; ++a) {
    auto& row = binom[static_cast<std::size_t>(a)];
    row.assign(static_cast<std::size_t>(a + 1), 1);
    for (int b = 1; b < a; ++b) {
      row[static_cast<std::size_t>(b)] =
          binom[static_cast<std::size_t>(a - 1)][static_cast<std::size_t>(b - 1)] +
          binom[static_cast<std::size_t>(a - 1)][static_cast<std::size_t>(b)];
    }
  }
  std::vector<double> out(static_cast<std::size_t>(m + 1), 0.0);
  for (int n = 0; n <= m; ++n) {
    __int128 a = 0;
    for (int j = 0; j <= n; ++j) {
      const __int128 term = static_cast<__int128>(bernstein[static_cast<std::size_t>(j)]) *
                            binom[static_cast<std::size_t>(m - j)][static_cast<std::size_t>(n - j)];
      a += ((n - j) % 2 == 0) ? term : -term;
    }
    out[static_cast<std::size_t>(n)] = static_cast<double>(a);
  }
  return out;
}

EventPolynomial enumerate_event(const BooleanEvent& A, const ExecutionPolicy& policy) {
  check_m(A.m);
  if (A.m > kMaxExactCoordinates) {
    throw DomainError("enumerate_event: exact enumeration is limited to m <= " +
                      std::to_string(kMaxExactCoordinates));
  }
  const int m = A.m;
  const std::size_t total = std::size_t{1} << m;
  const std::size_t chunk = std::min<std::size_t>(total, std::size_t{1} << 14);
  const std::size_t chunks = total / chunk;

  std::vector<unsigned char> table(total);
  run_replicates<char>(chunks, policy, [&](std::size_t c) {
    for (std::size_t x = c * chunk; x < (c + 1) * chunk; ++x) table[x] = A.contains(static_cast<Outcome>(x)) ? 1 : 0;
    return char{0};
  });
  // Purity spot check: the indicator must be a function of the outcome only.
  for (std::size_t probe = 0; probe < std::min<std::size_t>(total, 64); ++probe) {
    const std::size_t x = (probe * 0x9e3779b9ULL) % total;
    if ((A.contains(static_cast<Outcome>(x)) ? 1 : 0) != table[x]) {
      throw DomainError("enumerate_event: indicator is not a pure function of the outcome");
    }
  }

  struct Buckets {
    std::vector<std::int64_t> in_event, pivotal;
  };
  const auto parts = run_replicates<Buckets>(chunks, policy, [&](std::size_t c) {
    Buckets b{std::vector<std::int64_t>(static_cast<std::size_t>(m + 1), 0),
              std::vector<std::int64_t>(static_cast<std::size_t>(m + 1), 0)};
    for (std::size_t x = c * chunk; x < (c + 1) * chunk; ++x) {
      const auto j = static_cast<std::size_t>(std::popcount(static_cast<Outcome>(x)));
      b.in_event[j] += table[x];
      int net = 0;
      for (int i = 0; i < m; ++i) {
        const std::size_t bit = std::size_t{1} << i;
        net += static_cast<int>(table[x | bit]) - static_cast<int>(table[x & ~bit]);
      }
      b.pivotal[j] += net;
    }
    return b;
  });

  EventPolynomial poly;
  poly.m = m;
  poly.bernstein.assign(static_cast<std::size_t>(m + 1), 0);
  poly.pivotal.assign(static_cast<std::size_t>(m + 1), 0);
  for (const auto& b : parts) {
    for (std::size_t j = 0; j <= static_cast<std::size_t>(m); ++j) {
      poly.bernstein[j] += b.in_event[j];
      poly.pivotal[j] += b.pivotal[j];
    }
  }
  return poly;
}

double event_probability(const BooleanEvent& A, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("event_probability: theta must lie in [0,1]");
  return enumerate_event(A).probability(theta);
}

double russo_derivative(const BooleanEvent& A, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("russo_derivative: theta must lie in [0,1]");
  return enumerate_event(A).expected_pivotal(theta);
}

BinomialIdentityReport identity_report_binomial(int n, int k, double p, double tol) {
  if (!(k >= 1 && k <= n)) throw DomainError("identity_report_binomial: need 1 <= k <= n");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("identity_report_binomial: p must lie in [0,1]");
  BinomialIdentityReport rep;
  for (int j = k; j <= n; ++j) rep.tail += binomial_pmf(static_cast<std::uint64_t>(n), p, j);
  const auto q = beta_integral(log_multinomial(n, k - 1, n - k), k - 1, n - k, p, tol);
  rep.integral = q.value;
  rep.integral_error = q.error_estimate;
  return rep;
}

NegbinIdentityReport identity_report_negbin(int r, int k, double p, double tol) {
  if (r < 1 || k < 1) throw DomainError("identity_report_negbin: need r, k >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("identity_report_negbin: p must lie in [0,1]");
  NegbinIdentityReport rep;
  const int trials = k + r - 1;
  for (int j = r; j <= trials; ++j) rep.event_probability += binomial_pmf(static_cast<std::uint64_t>(trials), p, j);
  const auto q = beta_integral(log_multinomial(trials, k - 1, r - 1), r - 1, k - 1, p, tol);
  rep.integral = q.value;
  rep.integral_error = q.error_estimate;
  for (int j = 0; j < k; ++j) rep.nb_sum_below_k += negbin_pmf(static_cast<std::uint64_t>(r), p, j);
  rep.nb_sum_through_k = rep.nb_sum_below_k + negbin_pmf(static_cast<std::uint64_t>(r), p, k);
  return rep;
}

}  // namespace pivotality
