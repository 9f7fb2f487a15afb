#include "miw/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "miw/metrics.hpp"

namespace miw {

namespace {
constexpr double kMinGap = 1e-9;
}

double hamiltonian(const PhaseState& s) {
  double kinetic = 0.0;
  for (double v : s.p) kinetic += 0.5 * v * v;
  return kinetic + energy(s.x).H;
}

std::vector<double> force(const std::vector<double>& x) {
  std::vector<double> f = grad_H(x);
  for (double& v : f) v = -v;
  return f;
}

void step(PhaseState& s, double dt) {
  if (dt == 0.0) throw std::invalid_argument("dt must be nonzero");
  const int N = static_cast<int>(s.x.size());
  if (static_cast<int>(s.p.size()) != N)
    throw std::invalid_argument("position/momentum size mismatch");

  std::vector<double> f = force(s.x);
  for (int n = 0; n < N; ++n) s.p[n] += 0.5 * dt * f[n];
  for (int n = 0; n < N; ++n) s.x[n] += dt * s.p[n];
  for (int n = 1; n < N; ++n)
    if (!(s.x[n] - s.x[n - 1] > kMinGap))
      throw CollisionError(n, s.t + dt);
  f = force(s.x);
  for (int n = 0; n < N; ++n) s.p[n] += 0.5 * dt * f[n];
  s.t += dt;
}

double Trajectory::relative_drift() const {
  if (energies.empty()) return 0.0;
  const double h0 = energies.front();
  double worst = 0.0;
  for (double h : energies)
    worst = std::max(worst, std::fabs(h - h0) / std::fabs(h0));
  return worst;
}

std::string Trajectory::to_csv() const {
  if (samples.empty()) return "";
  const int N = static_cast<int>(samples.front().x.size());
  std::string out = "t";
  for (int n = 1; n <= N; ++n) out += ",x" + std::to_string(n);
  for (int n = 1; n <= N; ++n) out += ",p" + std::to_string(n);
  out += ",H\n";
  char buf[48];
  for (size_t i = 0; i < samples.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g", samples[i].t);
    out += buf;
    for (double v : samples[i].x) {
      std::snprintf(buf, sizeof buf, ",%.12g", v);
      out += buf;
    }
    for (double v : samples[i].p) {
      std::snprintf(buf, sizeof buf, ",%.12g", v);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, ",%.12g\n", energies[i]);
    out += buf;
  }
  return out;
}

std::vector<double> reference_start() { return {-1.0, 0.2, 1.1, 2.3, 3.8}; }

double matched_energy_scale(const std::vector<double>& x, double h_target) {
  const Energy e = energy(x);
  // H(s) = s^2 V + U / s^2; bisect on the branch right of the minimizer.
  double lo = std::pow(e.U / e.V, 0.25);
  const double h_min = lo * lo * e.V + e.U / (lo * lo);
  if (h_target < h_min)
    throw std::invalid_argument("target energy below the scaling minimum");
  auto h_at = [&](double s) { return s * s * e.V + e.U / (s * s); };
  double hi = lo;
  while (h_at(hi) < h_target) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (h_at(mid) < h_target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double excursion(const Trajectory& traj) {
  if (traj.samples.empty()) return 0.0;
  const auto& x0 = traj.samples.front().x;
  double total = 0.0;
  for (size_t n = 0; n < x0.size(); ++n) {
    double worst = 0.0;
    for (const auto& s : traj.samples)
      worst = std::max(worst, std::fabs(s.x[n] - x0[n]));
    total += worst;
  }
  return total;
}

Trajectory simulate(PhaseState init, double dt, double t_max, int stride) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");

  Trajectory traj;
  traj.dt = dt;
  traj.stride = stride;
  traj.samples.push_back(init);
  traj.energies.push_back(hamiltonian(init));

  const long steps = std::lround(t_max / dt);
  for (long k = 1; k <= steps; ++k) {
    try {
      step(init, dt);
    } catch (const CollisionError& e) {
      traj.collided = true;
      traj.collision_index = e.index;
      traj.collision_time = e.time;
      return traj;
    }
    if (k % stride == 0 || k == steps) {
      traj.samples.push_back(init);
      traj.energies.push_back(hamiltonian(init));
    }
  }
  return traj;
}

}  // namespace miw
