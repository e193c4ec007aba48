#pragma once

#include <cstddef>
#include <vector>

namespace pivotality {

/// Probability distribution on {0, 1, ..., K}: q[j] = Q({j}).
class LatticeDistribution {
 public:
  /// Throws DomainError unless q_j >= 0 and |Σ q_j - 1| <= 1e-12.
  explicit LatticeDistribution(std::vector<double> q);
  static LatticeDistribution point_mass(std::size_t j);
  /// Uniform on {a, ..., b}.
  static LatticeDistribution uniform(std::size_t a, std::size_t b);

  double operator[](std::ptrdiff_t j) const {
    return j < 0 || static_cast<std::size_t>(j) >= q_.size() ? 0.0 : q_[static_cast<std::size_t>(j)];
  }
  std::size_t max_support() const { return q_.size() - 1; }
  const std::vector<double>& probabilities() const { return q_; }

 private:
  std::vector<double> q_;
};

/// Σ_{j>=k} Po(θ;j). Uses 1 - Σ_{j<k} when k <= θ and the upward sum otherwise,
/// so both small and tiny tails keep their relative accuracy.
double poisson_tail(double theta, int k);

/// ∫_0^θ t^{k-1} e^{-t} / (k-1)! dt by adaptive quadrature.
double poisson_tail_integral(double theta, int k, double tol = 1e-13);

struct ErlangCdf {
  double direct = 0.0;        ///< ∫_0^x Er(n,θ;y) dy
  double via_integral = 0.0;  ///< x^n/(n-1)! ∫_0^θ t^{n-1} e^{-tx} dt
  double via_poisson = 0.0;   ///< Σ_{j>=n} Po(θx;j)
};

ErlangCdf erlang_cdf(int n, double theta, double x, double tol = 1e-13);

/// Σ_n Po(θ;n) Q^{*n}(k). Summation stops once the Poisson tail bound
/// P(N > n) <= Po(θ;n+1)/(1 - θ/(n+2)) falls below tol times the partial sum
/// (immediately after n = k when q_0 = 0, where the sum is finite).
double cpois_pmf_direct(double theta, const LatticeDistribution& Q, int k, double tol = 1e-15);

/// p_0..p_kmax by the Panjer recursion with p_0 = e^{-θ(1-q_0)}.
std::vector<double> cpois_pmf_panjer_table(double theta, const LatticeDistribution& Q, int kmax);
double cpois_pmf_panjer(double theta, const LatticeDistribution& Q, int k);

/// Coefficients (ascending powers of θ) of c_0..c_kmax, where
/// c_k(θ) = e^{(1-q_0)θ} CPo(θ,Q;k), c_0 = 1 and
/// c_k(θ) = Σ_{j<k} q_{k-j} ∫_0^θ c_j(t) dt.
std::vector<std::vector<double>> cpois_coefficient_polynomials(const LatticeDistribution& Q, int kmax);
double cpois_pmf_polyrec(double theta, const LatticeDistribution& Q, int k);

/// F(θ,Q;x) = Σ_{k<=x} CPo(θ,Q;k) from the Panjer table.
double cpois_cdf(double theta, const LatticeDistribution& Q, double x);

struct OdeResidual {
  double lhs = 0.0;  ///< central difference of F in θ
  double rhs = 0.0;  ///< Σ_z F(θ,x-z) q_z - F(θ,x)
  double residual() const { return lhs - rhs; }
};

/// Checks dF/dθ = ∫ F(θ,x-z) Q(dz) - F(θ,x) with a central difference of step δ.
OdeResidual cpois_cdf_ode_residual(double theta, const LatticeDistribution& Q, double x, double delta);

/// Right-hand sides of the lattice derivative identity in its two forms:
/// Σ_{j≠k} q_{k-j} p_j - (1-q_0) p_k and Σ_j q_{k-j} p_j - p_k.
struct LatticeDerivative {
  double excluding_k = 0.0;
  double including_k = 0.0;
};
LatticeDerivative cpois_pmf_derivative_rhs(double theta, const LatticeDistribution& Q, int k);

}  // namespace pivotality
