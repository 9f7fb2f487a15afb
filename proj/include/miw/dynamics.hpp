#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "miw/stability.hpp"

namespace miw {

struct PhaseState {
  double t = 0.0;
  std::vector<double> x;  // strictly increasing positions
  std::vector<double> p;  // momenta
};

struct CollisionError : std::runtime_error {
  int index;
  double time;
  CollisionError(int idx, double when)
      : std::runtime_error("world gap collapsed at index " +
                           std::to_string(idx) + ", t = " +
                           std::to_string(when)),
        index(idx),
        time(when) {}
};

// Total energy sum p^2/2 + sum x^2 + sum (zeta_{n+1} - zeta_n)^2.
double hamiltonian(const PhaseState& s);

// -dH/dx of the potential part; requires strictly increasing positions.
std::vector<double> force(const std::vector<double>& x);

// One velocity-Verlet (kick-drift-kick) step; throws CollisionError if any
// gap falls below 1e-9 after the drift.
void step(PhaseState& s, double dt);

struct Trajectory {
  double dt = 0.0;
  int stride = 1;
  std::vector<PhaseState> samples;  // includes the initial state
  std::vector<double> energies;     // H at each sample
  bool collided = false;            // aborted early on a gap collapse
  int collision_index = -1;
  double collision_time = 0.0;

  double relative_drift() const;
  std::string to_csv() const;
};

// Integrates until t_max or a collision; on collision the partial
// trajectory is returned with the collided flag set.
Trajectory simulate(PhaseState init, double dt, double t_max, int stride);

// Fixed 5-point reference start for the comparative excursion experiment,
// documented here so the comparison is reproducible. Chosen asymmetric with
// uneven gaps; scaled to matching energy it wanders visibly more than a
// near-stationary 5-point MIW start.
std::vector<double> reference_start();

// Scale s such that the potential energy of s*x equals h_target, found by
// bisection on the increasing branch of s -> H(s*x).
double matched_energy_scale(const std::vector<double>& x, double h_target);

// Total wander sum_n max_t |x_n(t) - x_n(0)|.
double excursion(const Trajectory& traj);

}  // namespace miw
