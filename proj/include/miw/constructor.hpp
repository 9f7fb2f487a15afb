#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "miw/states.hpp"

namespace miw {

enum class ShootStatus { completed, terminated_early, root_hit, invalid_start };

// Outcome of the forward recursion x_{n+1} = x_n + 1/D_n started at x1,
// where D_n = 1/(x_n - x_{n-1}) + eta(x_n) (first reciprocal-gap term zero).
struct ShootResult {
  std::vector<double> points;
  ShootStatus status = ShootStatus::invalid_start;
  int stop_step = -1;             // 1-based step where shooting stopped early
  double signed_residual = 0.0;   // D_N when completed
  std::vector<int> achieved_counts;
};

ShootResult shoot(const EnergyState& state, double x1, int N);

struct Residuals {
  double interior = 0.0;  // max over 1 < n < N, relative to 1 + |eta(x_n)|
  double left_bc = 0.0;   // relative
  double right_bc = 0.0;  // relative
};

struct MIWSequence {
  int ell = 0;
  std::vector<int> counts;
  std::vector<double> points;
  Residuals residuals;
  int bisect_iters = 0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;

  int size() const { return static_cast<int>(points.size()); }
  std::string to_json() const;
  static MIWSequence from_json(const std::string& text);
};

struct ConstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unique interacting-worlds sequence with the requested per-region counts,
// found by a grid scan over the first point followed by bisection on the
// right-boundary residual.
MIWSequence construct(const EnergyState& state, const std::vector<int>& counts);

// Counts allocated as floor(N * region mass), remainder to the last region.
std::vector<int> auto_counts(const EnergyState& state, int N);
MIWSequence construct_auto(const EnergyState& state, int N);

struct VerifyReport {
  bool increasing = false;
  bool counts_ok = false;
  Residuals residuals;
  double symmetry = 0.0;  // max |x_n + x_{N-n+1}| for palindromic counts
};

VerifyReport verify(const MIWSequence& seq, const EnergyState& state);

}  // namespace miw
