#pragma once

#include <string>
#include <vector>

#include "miw/constructor.hpp"
#include "miw/states.hpp"

namespace miw {

// Analytic gradient of H = sum x_n^2 + sum (zeta_{n+1} - zeta_n)^2 for an
// arbitrary strictly increasing configuration (zeta_1 = zeta_{N+1} = 0).
std::vector<double> grad_H(const std::vector<double>& x);

// Gradient component at an interior point of a sequence satisfying the
// reciprocal-gap recursion, reduced to log-derivative differences:
//   2 x_n - 2 (eta(x_{n+1}) - eta(x_n)) / (x_{n+1}-x_n)^2
//         + 2 (eta(x_n) - eta(x_{n-1})) / (x_n-x_{n-1})^2.
double grad_on_miw(const MIWSequence& seq, const EnergyState& state, int n);

struct LimitValue {
  double value = 0.0;              // 2t - 2 eta'(t) eta(t) - 2 eta''(t)
  double identity_residual = 0.0;  // |t^2 - 2 eta' - eta^2 - (4 ell + 2)|
};

LimitValue limit_formula(const EnergyState& state, double t);

struct CenterRow {
  int N = 0;
  double x_center = 0.0;     // first positive point (symmetric order-1 state)
  double grad_center = 0.0;  // gradient of H at that point
};

struct CenterScaling {
  std::vector<CenterRow> rows;
  double slope = 0.0;  // log-log slope of x_center versus N
};

// Sweep of symmetric sequences for the order-1 state over the given total
// counts (each must be even).
CenterScaling center_scaling(const EnergyState& state,
                             const std::vector<int>& totals, int jobs = 1);

std::string center_csv(const CenterScaling& scaling);

}  // namespace miw
