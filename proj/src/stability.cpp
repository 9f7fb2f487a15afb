#include "miw/stability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

namespace miw {

std::vector<double> grad_H(const std::vector<double>& x) {
  const int N = static_cast<int>(x.size());
  for (int n = 1; n < N; ++n)
    if (!(x[n] > x[n - 1]))
      throw std::invalid_argument("configuration must be strictly increasing");

  // zeta_n = 1/(x_n - x_{n-1}) for 2 <= n <= N, zero at the sentinels;
  // delta_n = zeta_{n+1} - zeta_n for 1 <= n <= N.
  std::vector<double> zeta(N + 2, 0.0);
  for (int n = 2; n <= N; ++n) zeta[n] = 1.0 / (x[n - 1] - x[n - 2]);
  auto delta = [&](int n) {
    if (n < 1 || n > N) return 0.0;
    return zeta[n + 1] - zeta[n];
  };

  std::vector<double> g(N);
  for (int m = 1; m <= N; ++m) {
    g[m - 1] = 2.0 * x[m - 1] +
               2.0 * zeta[m] * zeta[m] * (delta(m) - delta(m - 1)) -
               2.0 * zeta[m + 1] * zeta[m + 1] * (delta(m + 1) - delta(m));
  }
  return g;
}

double grad_on_miw(const MIWSequence& seq, const EnergyState& state, int n) {
  const int N = seq.size();
  if (n <= 1 || n >= N)
    throw std::out_of_range("reduced gradient needs an interior index");
  const auto& x = seq.points;
  const double e_prev = state.log_derivative(x[n - 2]);
  const double e_cur = state.log_derivative(x[n - 1]);
  const double e_next = state.log_derivative(x[n]);
  const double gap_r = x[n] - x[n - 1];
  const double gap_l = x[n - 1] - x[n - 2];
  return 2.0 * x[n - 1] - 2.0 * (e_next - e_cur) / (gap_r * gap_r) +
         2.0 * (e_cur - e_prev) / (gap_l * gap_l);
}

LimitValue limit_formula(const EnergyState& state, double t) {
  const LogDerivatives d = state.log_derivatives(t);
  LimitValue out;
  out.value = 2.0 * t - 2.0 * d.eta_p * d.eta - 2.0 * d.eta_pp;
  const double E = 4.0 * state.order() + 2.0;
  out.identity_residual =
      std::fabs(t * t - 2.0 * d.eta_p - d.eta * d.eta - E);
  return out;
}

CenterScaling center_scaling(const EnergyState& state,
                             const std::vector<int>& totals, int jobs) {
  if (state.order() != 1)
    throw std::invalid_argument("center scaling is defined for order 1");
  for (int N : totals)
    if (N < 4 || N % 2 != 0)
      throw std::invalid_argument("totals must be even and >= 4");

  CenterScaling out;
  out.rows.resize(totals.size());
  std::atomic<size_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = cursor.fetch_add(1);
      if (i >= totals.size()) return;
      const int N = totals[i];
      const MIWSequence seq =
          construct(state, std::vector<int>{N / 2, N / 2});
      CenterRow row;
      row.N = N;
      row.x_center = seq.points[N / 2];  // first positive point
      row.grad_center = grad_H(seq.points)[N / 2];
      out.rows[i] = row;
    }
  };
  const int nthreads =
      std::max(1, std::min<int>(jobs, static_cast<int>(totals.size())));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : out.rows) {
    const double lx = std::log(static_cast<double>(r.N));
    const double ly = std::log(r.x_center);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(out.rows.size());
  out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return out;
}

std::string center_csv(const CenterScaling& scaling) {
  std::string out = "N,x_center,grad_center,slope_estimate\n";
  char buf[160];
  for (const auto& r : scaling.rows) {
    std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.6g\n", r.N, r.x_center,
                  r.grad_center, scaling.slope);
    out += buf;
  }
  return out;
}

}  // namespace miw
