#pragma once

#include <string>
#include <vector>

#include "miw/states.hpp"

namespace miw {

// Built-in family of differentiable 1-Lipschitz test functions.
enum class TestFunction { identity, tanh_scaled, softplus, sine };

double h_eval(TestFunction h, double x);
double h_prime(TestFunction h, double x);
const char* h_name(TestFunction h);

// Solution g of g' + eta*g = h - E_P[h] on one positivity region of the
// density, with the conditional distribution on that region:
//   g(x) = f(x)^{-1} * integral_a^x f(t) (h(t) - E_P[h]) dt.
class SteinProbe {
 public:
  SteinProbe(const EnergyState& state, int region_k, TestFunction h);

  const EnergyState& state() const { return *state_; }
  int region_index() const { return region_; }
  TestFunction test_function() const { return h_; }
  double expectation() const { return e_h_; }  // E_P[h | region]
  double region_lo() const { return lo_; }
  double region_hi() const { return hi_; }
  // Finite root endpoints; NaN for an infinite side.
  double root_left() const { return root_lo_; }
  double root_right() const { return root_hi_; }

  // Quadrature evaluation; loses precision within ~1e-2 region widths of a
  // finite root endpoint, where eval_g switches to the local series
  // g(x) ~ (1/3)(x - r)(h(x) - E_P[h]).
  double eval_g_direct(double x) const;
  double eval_g(double x) const;
  // g' from the defining equation; g'' from the term-wise split
  // g'' = (eta^2 - eta') g - eta (h - E_P[h]) + h'.
  double eval_gp(double x) const;
  double eval_gpp(double x) const;
  // |g_fd' + eta*g - (h - E_P[h])| with a finite-difference derivative,
  // an independent consistency check on the quadrature solution.
  double residual(double x) const;

  struct Sample {
    double x, g, gp, gpp, residual;
  };
  std::vector<Sample> sample_grid(int n_points) const;

 private:
  const EnergyState* state_;
  int region_;
  TestFunction h_;
  double lo_, hi_;          // region endpoints (clipped to the tail bound)
  double root_lo_, root_hi_;  // finite root endpoints or NaN
  double e_h_;
  double series_radius_;
};

struct BoundaryTerms {
  double g_left_over_gap = 0.0;   // g(x_1) / (x_2 - x_1)
  double g_right_over_gap = 0.0;  // g(x_N) / (x_N - x_{N-1})
  double eta_g_left = 0.0;
  double eta_g_right = 0.0;
  // Ratios against the asymptotic envelopes (2/3)(E_P[X]-a), (5/3)(E_P[X]-a)
  // when the left endpoint is a finite root; zero otherwise.
  double ratio_eta_g_left = 0.0;
  double ratio_g_left_over_gap = 0.0;
};

BoundaryTerms boundary_terms(const SteinProbe& probe,
                             const std::vector<double>& pts,
                             double conditional_mean);

struct SteinBound {
  double bound = 0.0;   // boundary combination plus (x_N-x_1)(1 + sup|g''|)
  double actual = 0.0;  // |E_R[h] - E_P[h]| for the piecewise-uniform R
};

SteinBound stein_bound(const SteinProbe& probe, const std::vector<double>& pts,
                       double beta);

std::string probe_csv(const std::vector<SteinProbe::Sample>& samples);

}  // namespace miw
