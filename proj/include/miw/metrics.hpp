#pragma once

#include <string>
#include <vector>

#include "miw/constructor.hpp"
#include "miw/states.hpp"

namespace miw {

// n(t) = max{0 <= k <= N : x_k <= t} with sentinels x_0 = -inf, x_{N+1} = inf.
int locate(const std::vector<double>& points, double t);

struct GapReport {
  double max_gap = 0.0;
  int argmax = 0;  // gap index n with gap x_{n+1} - x_n, 1-based
  double first_gap = 0.0;
  double last_gap = 0.0;
  std::vector<double> root_gaps;  // straddling gap at each density root
  double x1 = 0.0;
  double xN = 0.0;
  double span_ratio_right = 0.0;  // x_N / sqrt(log N_last)
  double span_ratio_left = 0.0;   // |x_1| / sqrt(log N_first)
};

GapReport gap_report(const MIWSequence& seq, const EnergyState& state);

struct RegionDistance {
  int k = 0;
  double distance = 0.0;
  double count_share = 0.0;  // N_k / N
};

struct WassersteinReport {
  double distance = 0.0;
  double coupling_bound = 0.0;
  double scaled = 0.0;  // distance * N / sqrt(log N)
  std::vector<RegionDistance> per_region;
};

// Exact Wasserstein-1 distance between the empirical distribution of the
// points and the state's distribution: integral of |F_Q - F_P| over the line,
// with level crossings of F_P located by bisection between points.
WassersteinReport wasserstein(const MIWSequence& seq, const EnergyState& state);

double coupling_bound(const std::vector<double>& points);

struct MixtureResult {
  double assembled = 0.0;  // sum c_{n,k} d_k + max|c_{n,k} - c_k| * mu
  double bound = 0.0;      // (K + mu) * r
};

MixtureResult mixture_distance(const std::vector<double>& region_distances,
                               const std::vector<double>& count_shares,
                               const std::vector<double>& limit_shares,
                               double mu, double rate);

struct Energy {
  double V = 0.0;  // sum x^2
  double U = 0.0;  // sum (zeta_{n+1} - zeta_n)^2, zeta_1 = zeta_{N+1} = 0
  double H = 0.0;
};

Energy energy(const std::vector<double>& x);

struct RateRow {
  int N = 0;
  int ell = 0;
  std::string counts;
  double wasserstein = 0.0;
  double coupling_bound = 0.0;
  double max_gap = 0.0;
  double x1 = 0.0;
  double xN = 0.0;
  double H = 0.0;
  double runtime_ms = 0.0;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double scaled_min = 0.0;  // min/max of d * N / sqrt(log N)
  double scaled_max = 0.0;
};

// Least-squares fit of log(distance) against log(N).
RateFit rate_fit(const std::vector<RateRow>& rows);

std::string rate_table_csv(const std::vector<RateRow>& rows);

}  // namespace miw
