#include "miw/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "miw/quadrature.hpp"

namespace miw {

int locate(const std::vector<double>& points, double t) {
  return static_cast<int>(
      std::upper_bound(points.begin(), points.end(), t) - points.begin());
}

Energy energy(const std::vector<double>& x) {
  const int N = static_cast<int>(x.size());
  for (int n = 1; n < N; ++n)
    if (!(x[n] > x[n - 1]))
      throw std::invalid_argument("configuration must be strictly increasing");
  Energy e;
  for (double v : x) e.V += v * v;
  double prev_zeta = 0.0;
  for (int n = 1; n <= N; ++n) {
    const double zeta = (n < N) ? 1.0 / (x[n] - x[n - 1]) : 0.0;
    e.U += (zeta - prev_zeta) * (zeta - prev_zeta);
    prev_zeta = zeta;
  }
  e.H = e.V + e.U;
  return e;
}

double coupling_bound(const std::vector<double>& points) {
  if (points.size() < 2)
    throw std::invalid_argument("coupling bound needs N >= 2");
  return (points.back() - points.front()) /
         static_cast<double>(points.size() - 1);
}

GapReport gap_report(const MIWSequence& seq, const EnergyState& state) {
  const auto& x = seq.points;
  const int N = seq.size();
  if (N < 2) throw std::invalid_argument("gap report needs N >= 2");
  GapReport rep;
  rep.x1 = x.front();
  rep.xN = x.back();
  rep.first_gap = x[1] - x[0];
  rep.last_gap = x[N - 1] - x[N - 2];
  for (int n = 1; n < N; ++n) {
    const double g = x[n] - x[n - 1];
    if (g > rep.max_gap) {
      rep.max_gap = g;
      rep.argmax = n;
    }
  }
  for (double r : state.roots()) {
    const int n = locate(x, r);
    if (n >= 1 && n < N) rep.root_gaps.push_back(x[n] - x[n - 1]);
  }
  const double log_last = std::log(static_cast<double>(seq.counts.back()));
  const double log_first = std::log(static_cast<double>(seq.counts.front()));
  rep.span_ratio_right = log_last > 0.0 ? rep.xN / std::sqrt(log_last) : 0.0;
  rep.span_ratio_left =
      log_first > 0.0 ? std::fabs(rep.x1) / std::sqrt(log_first) : 0.0;
  return rep;
}

namespace {

// Exact integral of |F_Q - F| over [lo, hi] for the empirical distribution Q
// of pts against a distribution with density f/mass on [lo, hi]. Uses
//   int_a^b F dx = b F(b) - a F(a) - int_a^b t f(t)/mass dt
// on each piece and bisects the crossing of each level n/N.
template <class Density>
double w1_against_cdf(const std::vector<double>& pts, const Density& f,
                      double mass, double lo, double hi) {
  const int N = static_cast<int>(pts.size());
  if (N == 0) throw std::invalid_argument("empty point set");
  const double inv_mass = 1.0 / mass;
  auto fc = [&](double t) { return f(t) * inv_mass; };

  double dist = 0.0;
  // Tails, integrated by parts: F_Q is 0 (resp. 1) outside the points.
  dist += integrate([&](double t) { return (pts.front() - t) * fc(t); }, lo,
                    pts.front(), 1e-14, 1e-12)
              .value;
  dist += integrate([&](double t) { return (t - pts.back()) * fc(t); },
                    pts.back(), hi, 1e-14, 1e-12)
              .value;

  double F_a = integrate(fc, lo, pts.front(), 1e-14, 1e-12).value;
  for (int n = 1; n < N; ++n) {
    const double a = pts[n - 1], b = pts[n];
    const double level = static_cast<double>(n) / N;
    const double F_b = F_a + integrate(fc, a, b, 1e-14, 1e-12).value;
    // int_u^v F dx via the parts identity, with F anchored at F(a) = F_a.
    auto int_F = [&](double u, double v, double F_u, double F_v) {
      const double moment =
          integrate([&](double t) { return t * fc(t); }, u, v, 1e-14, 1e-12)
              .value;
      return v * F_v - u * F_u - moment;
    };
    if (F_b <= level) {
      dist += level * (b - a) - int_F(a, b, F_a, F_b);
    } else if (F_a >= level) {
      dist += int_F(a, b, F_a, F_b) - level * (b - a);
    } else {
      double clo = a, chi = b, F_lo = F_a;
      while (chi - clo > 1e-12) {
        const double mid = 0.5 * (clo + chi);
        const double F_mid =
            F_lo + integrate(fc, clo, mid, 1e-15, 1e-12).value;
        if (F_mid < level) {
          clo = mid;
          F_lo = F_mid;
        } else {
          chi = mid;
        }
      }
      const double c = 0.5 * (clo + chi);
      dist += level * (c - a) - int_F(a, c, F_a, level);
      dist += int_F(c, b, level, F_b) - level * (b - c);
    }
    F_a = F_b;
  }
  return dist;
}

}  // namespace

WassersteinReport wasserstein(const MIWSequence& seq,
                              const EnergyState& state) {
  const auto& x = seq.points;
  const int N = seq.size();
  if (N < 2) throw std::invalid_argument("wasserstein needs N >= 2");
  WassersteinReport rep;
  const double tail = state.tail_bound();
  auto f = [&](double t) { return state.density(t); };
  rep.distance = w1_against_cdf(x, f, 1.0, -tail, tail);
  rep.coupling_bound = coupling_bound(x);
  rep.scaled = rep.distance * N / std::sqrt(std::log(static_cast<double>(N)));

  for (int k = 0; k < state.region_count(); ++k) {
    const auto [rlo, rhi] = state.region(k);
    const double lo = std::max(rlo, -tail);
    const double hi = std::min(rhi, tail);
    std::vector<double> part;
    for (double v : x)
      if (v > rlo && v < rhi) part.push_back(v);
    RegionDistance rd;
    rd.k = k;
    rd.count_share = static_cast<double>(part.size()) / N;
    if (!part.empty())
      rd.distance =
          w1_against_cdf(part, f, state.region_masses()[k].mass, lo, hi);
    rep.per_region.push_back(rd);
  }
  return rep;
}

MixtureResult mixture_distance(const std::vector<double>& region_distances,
                               const std::vector<double>& count_shares,
                               const std::vector<double>& limit_shares,
                               double mu, double rate) {
  if (region_distances.size() != count_shares.size() ||
      count_shares.size() != limit_shares.size())
    throw std::invalid_argument("mixture inputs must have equal length");
  const double sum =
      std::accumulate(count_shares.begin(), count_shares.end(), 0.0);
  if (std::fabs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("count shares must sum to 1");
  MixtureResult out;
  for (size_t k = 0; k < region_distances.size(); ++k)
    out.assembled += count_shares[k] * region_distances[k] +
                     std::fabs(count_shares[k] - limit_shares[k]) * mu;
  const double K = static_cast<double>(region_distances.size()) - 1.0;
  out.bound = (K + mu) * rate;
  return out;
}

RateFit rate_fit(const std::vector<RateRow>& rows) {
  if (rows.size() < 4) throw std::invalid_argument("rate fit needs >= 4 rows");
  RateFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  fit.scaled_min = std::numeric_limits<double>::infinity();
  fit.scaled_max = 0.0;
  for (const auto& r : rows) {
    const double lx = std::log(static_cast<double>(r.N));
    const double ly = std::log(r.wasserstein);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    const double scaled = r.wasserstein * r.N / std::sqrt(lx);
    fit.scaled_min = std::min(fit.scaled_min, scaled);
    fit.scaled_max = std::max(fit.scaled_max, scaled);
  }
  const double n = static_cast<double>(rows.size());
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("degenerate rate table");
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

std::string rate_table_csv(const std::vector<RateRow>& rows) {
  std::string out = "N,ell,counts,wasserstein,coupling_bound,max_gap,x1,xN,H,"
                    "runtime_ms\n";
  char buf[320];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf,
                  "%d,%d,%s,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.3f\n", r.N,
                  r.ell, r.counts.c_str(), r.wasserstein, r.coupling_bound,
                  r.max_gap, r.x1, r.xN, r.H, r.runtime_ms);
    out += buf;
  }
  return out;
}

}  // namespace miw
