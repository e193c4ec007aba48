#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <numeric>

#include "doctest.h"
#include "pivotality/bernoulli.hpp"
#include "pivotality/errors.hpp"
#include "pivotality/rng.hpp"

using namespace pivotality;

namespace {

BooleanEvent random_dnf(int m, RngStream& rng) {
  std::vector<Outcome> clauses(1 + rng.below(4));
  for (auto& c : clauses) {
    c = 0;
    const auto width = 1 + rng.below(3);
    for (std::uint64_t w = 0; w < width; ++w) c |= Outcome{1} << rng.below(static_cast<std::uint64_t>(m));
  }
  return events::monotone_dnf(m, clauses);
}

// Arbitrary (non-monotone) event given by a random truth table.
BooleanEvent random_table(int m, RngStream& rng) {
  auto table = std::make_shared<std::vector<bool>>(std::size_t{1} << m);
  for (std::size_t x = 0; x < table->size(); ++x) (*table)[x] = rng.uniform() < 0.4;
  return {m, [table](Outcome x) { return static_cast<bool>((*table)[x]); }, false, "table"};
}

Outcome permute(Outcome x, const std::vector<int>& perm) {
  Outcome y = 0;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (x >> i & 1) y |= Outcome{1} << perm[i];
  }
  return y;
}

}  // namespace

TEST_CASE("pivotal counts: threshold event") {
  const int n = 7, k = 3;
  const auto A = events::at_least(n, k);
  // S_n = k-1: every zero is (+)-pivotal
  auto pc = pivotal_counts(A, std::vector<int>{1, 1, 0, 0, 0, 0, 0});
  CHECK(pc.plus == n - k + 1);
  CHECK(pc.minus == 0);
  // S_n = k: every one is (+)-pivotal
  pc = pivotal_counts(A, std::vector<int>{1, 1, 1, 0, 0, 0, 0});
  CHECK(pc.plus == k);
  pc = pivotal_counts(A, std::vector<int>{1, 1, 1, 1, 1, 0, 0});
  CHECK(pc.plus == 0);
  CHECK_THROWS_AS(pivotal_counts(A, std::vector<int>{1, 0}), DomainError);
}

TEST_CASE("pivotal counts: full space and the negative-binomial event") {
  const auto full = events::full(5);
  for (Outcome x = 0; x < 32; ++x) {
    const auto pc = pivotal_counts(full, x);
    CHECK(pc.plus == 0);
    CHECK(pc.minus == 0);
  }
  // {S_{k+r-1} >= r} with S = r: each of the r ones is pivotal
  for (int r = 1; r <= 5; ++r) {
    for (int k = 1; k <= 4; ++k) {
      const int trials = k + r - 1;
      const auto A = events::at_least(trials, r);
      const Outcome x = (Outcome{1} << r) - 1;
      const auto pc = pivotal_counts(A, x);
      CHECK(pc.plus == r);
      CHECK(pc.minus == 0);
    }
  }
}

TEST_CASE("event probability examples") {
  CHECK(event_probability(events::full(6), 0.3) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(event_probability(events::all_ones(3), 0.5) == 0.125);
  CHECK(event_probability(events::at_least(2, 1), 0.5) == 0.75);
  CHECK(event_probability(events::empty(4), 0.7) == 0.0);
  CHECK(event_probability(events::at_least(1, 1), 1.0) == 1.0);
  CHECK(event_probability(events::all_ones(3), 0.0) == 0.0);
  CHECK_THROWS_AS(event_probability(events::full(25), 0.5), DomainError);
  CHECK_THROWS_AS(event_probability(events::full(3), 1.5), DomainError);
}

TEST_CASE("russo derivative examples") {
  CHECK(russo_derivative(events::at_least(2, 1), 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  for (int m = 1; m <= 8; ++m) {
    CHECK(russo_derivative(events::all_ones(m), 0.3) == doctest::Approx(m * std::pow(0.3, m - 1)).epsilon(1e-13));
  }
  CHECK(russo_derivative(events::full(10), 0.4) == 0.0);
  CHECK(russo_derivative(events::full(10), 0.0) == 0.0);
}

TEST_CASE("monomial coefficients") {
  // 1 - (1-θ)^2 = 2θ - θ^2
  const auto poly = enumerate_event(events::at_least(2, 1));
  const auto a = poly.monomial_coefficients();
  REQUIRE(a.size() == 3);
  CHECK(a[0] == 0.0);
  CHECK(a[1] == 2.0);
  CHECK(a[2] == -1.0);
  const auto ones = enumerate_event(events::all_ones(4)).monomial_coefficients();
  CHECK(ones == std::vector<double>{0, 0, 0, 0, 1});
}

TEST_CASE("Margulis-Russo holds exactly for random events and a grid of θ") {
  RngStream rng(404, 0);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 1 + static_cast<int>(rng.below(12));
    const auto A = trial % 2 == 0 ? random_dnf(m, rng) : random_table(m, rng);
    const auto poly = enumerate_event(A);
    const auto a = poly.monomial_coefficients();
    for (int g = 1; g <= 9; ++g) {
      const double theta = 0.1 * g;
      // derivative of the monomial form, computed independently of the Bernstein form
      double dp = 0.0;
      for (std::size_t n = 1; n < a.size(); ++n) dp += static_cast<double>(n) * a[n] * std::pow(theta, static_cast<double>(n - 1));
      CHECK(std::fabs(poly.expected_pivotal(theta) - dp) <= 1e-10 * std::max(1.0, std::fabs(dp)));
      CHECK(std::fabs(poly.expected_pivotal(theta) - poly.derivative(theta)) <= 1e-10);
    }
  }
}

TEST_CASE("monotone events have no (-)-pivotal coordinates") {
  RngStream rng(405, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 2 + static_cast<int>(rng.below(9));
    const auto A = random_dnf(m, rng);
    for (Outcome x = 0; x < (Outcome{1} << m); ++x) CHECK(pivotal_counts(A, x).minus == 0);
  }
  // parity is not monotone and has (-)-pivotal coordinates
  const auto pc = pivotal_counts(events::parity(3), Outcome{1});
  CHECK(pc.plus == 1);
  CHECK(pc.minus == 2);
}

TEST_CASE("pivotal counts are invariant under relabelling") {
  RngStream rng(406, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 3 + static_cast<int>(rng.below(6));
    const auto A = random_table(m, rng);
    std::vector<int> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = m - 1; i > 0; --i) std::swap(perm[static_cast<std::size_t>(i)], perm[rng.below(static_cast<std::uint64_t>(i + 1))]);
    std::vector<int> inverse(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) inverse[static_cast<std::size_t>(perm[i])] = static_cast<int>(i);
    const BooleanEvent B{m, [&](Outcome y) { return A.contains(permute(y, inverse)); }, false, "relabelled"};
    for (Outcome x = 0; x < (Outcome{1} << m); ++x) {
      const auto a = pivotal_counts(A, x), b = pivotal_counts(B, permute(x, perm));
      CHECK(a.plus == b.plus);
      CHECK(a.minus == b.minus);
    }
  }
}

TEST_CASE("enumeration does not depend on the worker count") {
  RngStream rng(407, 0);
  const auto A = random_table(16, rng);
  const auto one = enumerate_event(A, ExecutionPolicy{1});
  const auto three = enumerate_event(A, ExecutionPolicy{3});
  CHECK(one.bernstein == three.bernstein);
  CHECK(one.pivotal == three.pivotal);
}

TEST_CASE("impure indicators are detected") {
  int calls = 0;
  const BooleanEvent flaky{4, [&calls](Outcome) { return calls++ < 8; }, false, "flaky"};
  CHECK_THROWS_AS(enumerate_event(flaky), DomainError);
}

TEST_CASE("binomial integral representation") {
  auto rep = identity_report_binomial(2, 1, 0.5);
  CHECK(rep.tail == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(std::fabs(rep.integral - 0.75) < 1e-12);
  for (double p : {0.0, 0.2, 0.7, 1.0}) {
    rep = identity_report_binomial(1, 1, p);
    CHECK(std::fabs(rep.tail - p) < 1e-14);
    CHECK(std::fabs(rep.integral - p) < 1e-12);
  }
  for (int n = 1; n <= 30; n += 7) {
    for (int k = 1; k <= n; k += 2) {
      rep = identity_report_binomial(n, k, 0.37);
      CHECK(std::fabs(rep.gap()) <= 1e-10);
    }
  }
  CHECK_THROWS_AS(identity_report_binomial(3, 0, 0.5), DomainError);
  CHECK_THROWS_AS(identity_report_binomial(3, 4, 0.5), DomainError);
}

TEST_CASE("negative binomial representation and the summation limit") {
  const auto rep = identity_report_negbin(1, 1, 0.5);
  CHECK(std::fabs(rep.integral - 0.5) < 1e-12);
  CHECK(rep.event_probability == doctest::Approx(0.5));
  CHECK(rep.nb_sum_below_k == doctest::Approx(0.5));
  CHECK(rep.nb_sum_through_k == doctest::Approx(0.75));
  for (int r = 1; r <= 6; ++r) {
    for (int k = 1; k <= 6; ++k) {
      const auto q = identity_report_negbin(r, k, 0.3);
      CHECK(std::fabs(q.integral - q.event_probability) <= 1e-10);
      CHECK(std::fabs(q.integral - q.nb_sum_below_k) <= 1e-10);
      CHECK(q.nb_sum_through_k > q.integral + 1e-6);
    }
  }
}

TEST_CASE("binomial derivative via pivotal counts") {
  // d/dp P(S_n >= k) = n!/((k-1)!(n-k)!) p^{k-1} (1-p)^{n-k}
  const int n = 9, k = 4;
  const auto poly = enumerate_event(events::at_least(n, k));
  const double p = 0.35;
  // 9!/(3!5!) = 504
  CHECK(poly.expected_pivotal(p) == doctest::Approx(504.0 * std::pow(p, 3) * std::pow(1 - p, 5)).epsilon(1e-13));
}
