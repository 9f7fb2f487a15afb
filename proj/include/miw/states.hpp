#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace miw {

inline constexpr int kMaxOrder = 20;  // exact integer coefficient range

struct HermitePair {
  double value;
  double derivative;
};

// Probabilists' Hermite polynomial p_ell and its derivative at x,
// via the three-term recurrence p_{k+1} = x p_k - k p_{k-1}.
HermitePair hermite_eval(int ell, double x);

// Monomial coefficients of p_ell (index = power); exact integers for
// ell <= kMaxOrder.
std::vector<double> hermite_coeffs(int ell);

// Sorted real roots of p_ell (empty for ell = 0), found by bisection on
// interlacing brackets and polished by Newton steps.
std::vector<double> hermite_roots(int ell);

struct RegionMass {
  int k = 0;
  double mass = 0.0;              // P(X in R_k)
  double conditional_mean = 0.0;  // E[X | X in R_k]
  double conditional_abs_mean = 0.0;
};

struct LogDerivatives {
  double eta;       // f'/f
  double eta_p;     // (f'/f)'
  double eta_pp;    // (f'/f)''
};

// Stationary density of order ell for the quantum harmonic oscillator:
// f = c p_ell(x)^2 exp(-x^2/2), normalized numerically at construction.
class EnergyState {
 public:
  explicit EnergyState(int ell);

  int order() const { return ell_; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  const std::vector<double>& roots() const { return roots_; }
  double norm_constant() const { return norm_c_; }

  int region_count() const { return ell_ + 1; }
  // Index k of the open interval between consecutive roots containing x.
  int region_of(double x) const;
  // Region bounds; infinite ends are +-infinity.
  std::pair<double, double> region(int k) const;

  double density(double x) const;
  // eta = f'/f = -x + 2 sum_j 1/(x - r_j); throws at a root.
  double log_derivative(double x) const;
  LogDerivatives log_derivatives(double x) const;

  double cdf(double x) const;
  const std::vector<RegionMass>& region_masses() const { return masses_; }

  // Effective support bound: |x| beyond this contributes < 1e-300 mass.
  double tail_bound() const { return tail_bound_; }

  std::string to_json() const;

 private:
  void check_not_root(double x) const;

  int ell_;
  std::vector<double> coeffs_;
  std::vector<double> roots_;
  double norm_c_;
  double tail_bound_;
  std::vector<RegionMass> masses_;
};

// Polynomial q of degree n-2 with
//   p(x) - p(0) = (1 - x^2) q(x) + x q'(x) - q(0),
// solved coefficient-wise from the top degree down. The identity is
// consistent only when the input's linear coefficient matches the solved
// q (automatic for even polynomials, the case of squared Hermite factors).
std::vector<double> solve_q(const std::vector<double>& p);

double poly_eval(const std::vector<double>& coeffs, double x);
std::vector<double> poly_derivative(const std::vector<double>& coeffs);

}  // namespace miw
