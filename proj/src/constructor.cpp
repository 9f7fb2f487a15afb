#include "miw/constructor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace miw {

namespace {

constexpr double kRootGuard = 1e-12;    // abort distance to a density root
constexpr double kResidualTol = 1e-10;  // target |D_N| at the right boundary

bool near_root(const EnergyState& state, double x) {
  for (double r : state.roots())
    if (std::fabs(x - r) <= kRootGuard) return true;
  return false;
}

}  // namespace

ShootResult shoot(const EnergyState& state, double x1, int N) {
  if (N < 1) throw std::invalid_argument("shoot needs N >= 1");
  ShootResult out;
  out.achieved_counts.assign(state.region_count(), 0);

  if (state.region_of(x1) != 0 || near_root(state, x1)) {
    out.status = ShootStatus::invalid_start;
    return out;
  }
  double eta = state.log_derivative(x1);
  if (!(eta > 0.0)) {
    out.status = ShootStatus::invalid_start;
    return out;
  }

  out.points.reserve(N);
  out.points.push_back(x1);
  out.achieved_counts[0] = 1;

  double zeta = 0.0;  // 1/(x_n - x_{n-1}), zero for the -inf sentinel
  for (int n = 1; n < N; ++n) {
    const double d = zeta + eta;
    if (!(d > 0.0)) {
      out.status = ShootStatus::terminated_early;
      out.stop_step = n;
      return out;
    }
    const double next = out.points.back() + 1.0 / d;
    if (near_root(state, next)) {
      out.status = ShootStatus::root_hit;
      out.stop_step = n + 1;
      return out;
    }
    out.points.push_back(next);
    out.achieved_counts[state.region_of(next)] += 1;
    zeta = d;
    eta = state.log_derivative(next);
  }

  out.status = ShootStatus::completed;
  out.signed_residual = zeta + eta;
  return out;
}

namespace {

// Ordering of a trial first point against the target counts class:
// -1 means x1 is too small, +1 too large, 0 a completed shoot whose
// right-boundary residual sign decides within the class.
struct Trial {
  int order;       // -1 / +1, or 0 when counts match and residual is small
  ShootResult result;
};

Trial classify(const EnergyState& state, double x1, int N,
               const std::vector<int>& target) {
  ShootResult r = shoot(state, x1, N);
  // A trajectory grazing a root is resolved by nudging the start.
  for (int k = 0; k < 12 && r.status == ShootStatus::root_hit; ++k) {
    x1 += std::ldexp(1.0 + std::fabs(x1), -50 + 2 * k) * 1e-3;
    r = shoot(state, x1, N);
  }
  if (r.status == ShootStatus::invalid_start ||
      r.status == ShootStatus::root_hit)
    return {+1, std::move(r)};

  // Lexicographic comparison of achieved against target counts: too many
  // points in an early region means the start was too far left. This also
  // orders early-terminated shoots (which always undershoot some region).
  for (size_t k = 0; k < target.size(); ++k) {
    if (r.achieved_counts[k] != target[k])
      return {r.achieved_counts[k] > target[k] ? -1 : +1, std::move(r)};
  }
  if (r.signed_residual > kResidualTol) return {-1, std::move(r)};
  if (r.signed_residual < -kResidualTol) return {+1, std::move(r)};
  return {0, std::move(r)};
}

// Residual vector of the full boundary-value system:
//   F_1 = 1/(x_2-x_1) - eta(x_1)
//   F_n = 1/(x_{n+1}-x_n) - 1/(x_n-x_{n-1}) - eta(x_n)
//   F_N = -1/(x_N-x_{N-1}) - eta(x_N).
std::vector<double> system_residual(const EnergyState& state,
                                    const std::vector<double>& x) {
  const int N = static_cast<int>(x.size());
  std::vector<double> F(N);
  for (int n = 0; n < N; ++n) {
    const double zr = (n + 1 < N) ? 1.0 / (x[n + 1] - x[n]) : 0.0;
    const double zl = (n > 0) ? 1.0 / (x[n] - x[n - 1]) : 0.0;
    F[n] = zr - zl - state.log_derivative(x[n]);
  }
  return F;
}

// Shooting controls only the first point, so roundoff amplifies through
// root crossings for large N. A damped Newton iteration on the full
// system (tridiagonal Jacobian, Thomas solve) restores the residuals to
// roundoff level; the counts class of the initial guess pins the unique
// solution being polished.
void newton_polish(const EnergyState& state, std::vector<double>& x) {
  const int N = static_cast<int>(x.size());
  if (N < 2) return;
  std::vector<double> F = system_residual(state, x);
  // Residuals weighted as in the sequence invariants: relative to 1 + |eta|.
  auto norm = [&](const std::vector<double>& y, const std::vector<double>& v) {
    double m = 0.0;
    for (size_t n = 0; n < v.size(); ++n)
      m = std::max(m, std::fabs(v[n]) /
                          (1.0 + std::fabs(state.log_derivative(y[n]))));
    return m;
  };
  auto region_ok = [&](const std::vector<double>& y,
                       const std::vector<double>& ref) {
    for (int n = 0; n < N; ++n) {
      if (n > 0 && !(y[n] > y[n - 1])) return false;
      if (state.region_of(y[n]) != state.region_of(ref[n])) return false;
      for (double r : state.roots())
        if (std::fabs(y[n] - r) <= kRootGuard) return false;
    }
    return true;
  };

  double fnorm = norm(x, F);
  std::vector<double> lower(N), diag(N), upper(N), rhs(N), trial(N);
  for (int iter = 0; iter < 50 && fnorm > 1e-14; ++iter) {
    for (int n = 0; n < N; ++n) {
      const double zr = (n + 1 < N) ? 1.0 / (x[n + 1] - x[n]) : 0.0;
      const double zl = (n > 0) ? 1.0 / (x[n] - x[n - 1]) : 0.0;
      const double etap = state.log_derivatives(x[n]).eta_p;
      lower[n] = -zl * zl;
      diag[n] = zr * zr + zl * zl - etap;
      upper[n] = -zr * zr;
      rhs[n] = -F[n];
    }
    // Thomas algorithm on the tridiagonal Newton system.
    for (int n = 1; n < N; ++n) {
      const double w = lower[n] / diag[n - 1];
      diag[n] -= w * upper[n - 1];
      rhs[n] -= w * rhs[n - 1];
    }
    rhs[N - 1] /= diag[N - 1];
    for (int n = N - 2; n >= 0; --n)
      rhs[n] = (rhs[n] - upper[n] * rhs[n + 1]) / diag[n];

    bool accepted = false;
    for (double alpha = 1.0; alpha > 1e-6; alpha *= 0.5) {
      for (int n = 0; n < N; ++n) trial[n] = x[n] + alpha * rhs[n];
      if (!region_ok(trial, x)) continue;
      const std::vector<double> Ft = system_residual(state, trial);
      const double tnorm = norm(trial, Ft);
      if (tnorm < fnorm) {
        x = trial;
        F = Ft;
        fnorm = tnorm;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
}

Residuals compute_residuals(const EnergyState& state,
                            const std::vector<double>& x) {
  Residuals res;
  const int N = static_cast<int>(x.size());
  if (N < 2) return res;
  const double eta1 = state.log_derivative(x[0]);
  res.left_bc = std::fabs(1.0 / (x[1] - x[0]) - eta1) / (1.0 + std::fabs(eta1));
  const double etaN = state.log_derivative(x[N - 1]);
  res.right_bc = std::fabs(1.0 / (x[N - 1] - x[N - 2]) + etaN) /
                 (1.0 + std::fabs(etaN));
  for (int n = 1; n + 1 < N; ++n) {
    const double eta = state.log_derivative(x[n]);
    const double lhs = 1.0 / (x[n + 1] - x[n]) - 1.0 / (x[n] - x[n - 1]);
    res.interior = std::max(
        res.interior, std::fabs(lhs - eta) / (1.0 + std::fabs(eta)));
  }
  return res;
}

}  // namespace

std::vector<int> auto_counts(const EnergyState& state, int N) {
  std::vector<int> counts(state.region_count());
  int used = 0;
  for (int k = 0; k + 1 < state.region_count(); ++k) {
    counts[k] = static_cast<int>(
        std::floor(N * state.region_masses()[k].mass));
    used += counts[k];
  }
  counts.back() = N - used;
  const int min_last = (state.order() == 0) ? 2 : 1;
  for (int k = 0; k < state.region_count(); ++k) {
    const int need = (k + 1 == state.region_count()) ? min_last : 1;
    if (counts[k] < need)
      throw std::invalid_argument("total count " + std::to_string(N) +
                                  " too small for the allocation rule");
  }
  return counts;
}

MIWSequence construct_auto(const EnergyState& state, int N) {
  return construct(state, auto_counts(state, N));
}

MIWSequence construct(const EnergyState& state,
                      const std::vector<int>& counts) {
  if (static_cast<int>(counts.size()) != state.region_count())
    throw std::invalid_argument("counts size must equal region count");
  int N = 0;
  for (size_t k = 0; k < counts.size(); ++k) {
    const int need = (state.order() == 0) ? 2 : 1;
    if (counts[k] < need)
      throw std::invalid_argument("each region needs at least " +
                                  std::to_string(need) + " points");
    N += counts[k];
  }
  if (N > 100000) throw std::invalid_argument("N capped at 1e5");

  const double cap = state.order() >= 1 ? state.roots().front() : 0.0;
  double lo = -2.0 * std::sqrt(std::log(static_cast<double>(N))) - 2.0;
  double hi = cap;

  // Scan for a bracket across the ordering, refining the grid if needed.
  double blo = 0.0, bhi = 0.0;
  Trial tlo{0, {}}, thi{0, {}};
  bool bracketed = false;
  Trial exact{+2, {}};
  bool have_exact = false;
  int m = 256;
  for (int pass = 0; pass < 4 && !bracketed && !have_exact; ++pass) {
    double prev_x = 0.0;
    Trial prev{0, {}};
    bool have_prev = false;
    int seen_small = 0, seen_large = 0;
    for (int i = 0; i < m; ++i) {
      const double x = lo + (hi - lo) * (i + 1) / (m + 1);
      Trial t = classify(state, x, N, counts);
      if (t.order == 0) {
        exact = std::move(t);
        have_exact = true;
        blo = bhi = x;
        break;
      }
      (t.order < 0 ? seen_small : seen_large) += 1;
      if (have_prev && prev.order < 0 && t.order > 0) {
        blo = prev_x;
        bhi = x;
        tlo = std::move(prev);
        thi = std::move(t);
        bracketed = true;
        break;
      }
      prev_x = x;
      prev = std::move(t);
      have_prev = true;
    }
    if (!bracketed && !have_exact) {
      if (seen_large == m) lo = 2.0 * lo - 2.0;  // everything too large
      m *= 4;
    }
  }
  if (!bracketed && !have_exact)
    throw ConstructionError(
        "no bracket for counts class after grid refinement (N = " +
        std::to_string(N) + ")");

  // Bisect the first point to the right-boundary residual target.
  int iters = 0;
  Trial best{+2, {}};
  auto consider = [&](const Trial& t) {
    if (t.result.status != ShootStatus::completed) return;
    if (t.result.achieved_counts != counts) return;
    if (best.order == +2 || std::fabs(t.result.signed_residual) <
                                std::fabs(best.result.signed_residual))
      best = t;
  };
  if (have_exact) {
    consider(exact);
  } else {
    consider(tlo);
    consider(thi);
    for (; iters < 200; ++iters) {
      const double mid = 0.5 * (blo + bhi);
      if (mid <= blo || mid >= bhi) break;
      Trial t = classify(state, mid, N, counts);
      consider(t);
      if (t.order == 0) break;
      if (t.order < 0)
        blo = mid;
      else
        bhi = mid;
    }
  }
  if (best.order == +2)
    throw ConstructionError("bisection found no completed sequence in class");

  MIWSequence seq;
  seq.ell = state.order();
  seq.counts = counts;
  seq.points = best.result.points;
  newton_polish(state, seq.points);
  seq.residuals = compute_residuals(state, seq.points);
  seq.bisect_iters = iters;
  seq.bracket_lo = blo;
  seq.bracket_hi = bhi;
  return seq;
}

VerifyReport verify(const MIWSequence& seq, const EnergyState& state) {
  VerifyReport rep;
  const auto& x = seq.points;
  const int N = seq.size();
  rep.increasing = true;
  for (int n = 1; n < N; ++n)
    if (!(x[n] > x[n - 1])) rep.increasing = false;

  std::vector<int> achieved(state.region_count(), 0);
  for (double v : x) achieved[state.region_of(v)] += 1;
  rep.counts_ok =
      achieved == seq.counts &&
      static_cast<int>(seq.counts.size()) == state.region_count();

  if (rep.increasing) rep.residuals = compute_residuals(state, x);

  bool palindromic = true;
  for (size_t k = 0; k < seq.counts.size(); ++k)
    if (seq.counts[k] != seq.counts[seq.counts.size() - 1 - k])
      palindromic = false;
  if (palindromic)
    for (int n = 0; n < N; ++n)
      rep.symmetry = std::max(rep.symmetry, std::fabs(x[n] + x[N - 1 - n]));
  return rep;
}

std::string MIWSequence::to_json() const {
  nlohmann::json j;
  j["ell"] = ell;
  j["counts"] = counts;
  j["points"] = points;
  j["residuals"] = {{"interior", residuals.interior},
                    {"left_bc", residuals.left_bc},
                    {"right_bc", residuals.right_bc}};
  return j.dump(2);
}

MIWSequence MIWSequence::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  MIWSequence seq;
  seq.ell = j.at("ell").get<int>();
  seq.counts = j.at("counts").get<std::vector<int>>();
  seq.points = j.at("points").get<std::vector<double>>();
  const auto& r = j.at("residuals");
  seq.residuals.interior = r.at("interior").get<double>();
  seq.residuals.left_bc = r.at("left_bc").get<double>();
  seq.residuals.right_bc = r.at("right_bc").get<double>();
  return seq;
}

}  // namespace miw
