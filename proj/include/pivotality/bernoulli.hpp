#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pivotality/parallel.hpp"
#include "pivotality/rng.hpp"

namespace pivotality {

/// Outcome of m Bernoulli trials packed into the low m bits (bit i = X_{i+1}).
using Outcome = std::uint32_t;

inline constexpr int kMaxExactCoordinates = 24;

/// Event A ⊆ {0,1}^m given by its indicator.
struct BooleanEvent {
  int m = 0;
  std::function<bool(Outcome)> indicator;
  bool monotone = false;
  std::string name;

  bool contains(Outcome x) const { return indicator(x); }
};

namespace events {
BooleanEvent full(int m);
BooleanEvent empty(int m);
BooleanEvent all_ones(int m);
/// {S_m >= k}.
BooleanEvent at_least(int m, int k);
/// {S_m = k} (not monotone).
BooleanEvent exactly(int m, int k);
/// Union of clauses, each clause the set of coordinates that must all be 1.
BooleanEvent monotone_dnf(int m, std::vector<Outcome> clauses);
/// {S_m is odd} (not monotone).
BooleanEvent parity(int m);
/// Up to `max_clauses` random non-empty clauses, each bit kept with probability 1/2.
BooleanEvent random_monotone_dnf(int m, int max_clauses, RngStream& rng);
/// Uniformly random subset of {0,1}^m, stored as a truth table (m <= 16).
BooleanEvent random_table(int m, RngStream& rng);
}  // namespace events

struct PivotalCounts {
  int plus = 0;
  int minus = 0;
};

/// N^+_A(x) and N^-_A(x).
PivotalCounts pivotal_counts(const BooleanEvent& A, Outcome x);
PivotalCounts pivotal_counts(const BooleanEvent& A, const std::vector<int>& bits);

/// P_θ(A) as a polynomial. `bernstein[j]` is the number of outcomes in A with
/// j ones, so P_θ(A) = Σ_j bernstein[j] θ^j (1-θ)^{m-j}. `pivotal[j]` is the
/// sum of N^+ - N^- over all outcomes with j ones. All entries are integers.
struct EventPolynomial {
  int m = 0;
  std::vector<std::int64_t> bernstein;
  std::vector<std::int64_t> pivotal;

  double probability(double theta) const;
  /// d/dθ of the Bernstein form.
  double derivative(double theta) const;
  /// E_θ[N^+ - N^-].
  double expected_pivotal(double theta) const;
  /// Coefficients a_n of P_θ(A) = Σ_n a_n θ^n (exact integers).
  std::vector<double> monomial_coefficients() const;
};

/// Enumerates all 2^m outcomes (m <= 24). The indicator is tabulated once and
/// spot-checked for purity; buckets are integer sums, so the result does not
/// depend on the number of workers.
EventPolynomial enumerate_event(const BooleanEvent& A, const ExecutionPolicy& policy = {});

double event_probability(const BooleanEvent& A, double theta);
/// E_θ[N^+_A - N^-_A] by exact enumeration.
double russo_derivative(const BooleanEvent& A, double theta);

struct BinomialIdentityReport {
  double tail = 0.0;      ///< Σ_{j>=k} Bin(n,p;j)
  double integral = 0.0;  ///< n!/((k-1)!(n-k)!) ∫_0^p t^{k-1}(1-t)^{n-k} dt
  double integral_error = 0.0;
  double gap() const { return tail - integral; }
};

struct NegbinIdentityReport {
  double event_probability = 0.0;  ///< P(Bin(k+r-1,p) >= r)
  double integral = 0.0;           ///< (k+r-1)!/((k-1)!(r-1)!) ∫_0^p t^{r-1}(1-t)^{k-1} dt
  double integral_error = 0.0;
  double nb_sum_below_k = 0.0;     ///< Σ_{j=0}^{k-1} NB(r,p;j)
  double nb_sum_through_k = 0.0;   ///< Σ_{j=0}^{k} NB(r,p;j), upper limit k
};

BinomialIdentityReport identity_report_binomial(int n, int k, double p, double tol = 1e-13);
NegbinIdentityReport identity_report_negbin(int r, int k, double p, double tol = 1e-13);

}  // namespace pivotality
