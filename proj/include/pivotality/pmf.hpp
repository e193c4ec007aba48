#pragma once

#include <cstdint>

namespace pivotality {

/// Bin(n,p;k) = C(n,k) p^k (1-p)^{n-k}; 0 outside {0..n}.
double binomial_pmf(std::uint64_t n, double p, std::int64_t k);
/// NB(r,p;j) = C(r+j-1, j) p^r (1-p)^j: j failures before the r-th success.
double negbin_pmf(std::uint64_t r, double p, std::int64_t j);
/// Po(θ;j) = θ^j e^{-θ} / j!.
double poisson_pmf(double theta, std::int64_t j);
/// log of n!/(a! b! ...) style coefficients: lgamma(n+1) - lgamma(a+1) - lgamma(b+1).
double log_multinomial(double n, double a, double b);

}  // namespace pivotality
