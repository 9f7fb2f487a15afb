#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "miw/constructor.hpp"
#include "miw/metrics.hpp"
#include "miw/states.hpp"

using namespace miw;

namespace {

// Trapezoid cross-check of the Wasserstein-1 integral on a dense grid.
double w1_trapezoid(const std::vector<double>& pts, const EnergyState& st,
                    int grid = 1000000) {
  const double a = -10.0, b = 10.0;
  const double dx = (b - a) / grid;
  const double N = static_cast<double>(pts.size());
  // cumulative density by trapezoid, empirical CDF by counting
  double total = 0.0;
  double fp_prev = st.density(a);
  double F = st.cdf(a);
  for (int i = 0; i < grid; ++i) {
    const double x0 = a + i * dx, x1 = x0 + dx;
    const double fp1 = st.density(x1);
    const double Fnext = F + 0.5 * (fp_prev + fp1) * dx;
    const double Fq0 =
        (std::upper_bound(pts.begin(), pts.end(), x0) - pts.begin()) / N;
    const double Fq1 =
        (std::upper_bound(pts.begin(), pts.end(), x1) - pts.begin()) / N;
    total += 0.5 * (std::fabs(Fq0 - F) + std::fabs(Fq1 - Fnext)) * dx;
    F = Fnext;
    fp_prev = fp1;
  }
  return total;
}

MIWSequence wrap(int ell, std::vector<int> counts, std::vector<double> pts) {
  MIWSequence q;
  q.ell = ell;
  q.counts = std::move(counts);
  q.points = std::move(pts);
  return q;
}

}  // namespace

TEST_CASE("locate with sentinel conventions") {
  const std::vector<double> pts = {-1.0, 0.0, 1.0};
  CHECK(locate(pts, 0.5) == 2);
  CHECK(locate(pts, -5.0) == 0);
  CHECK(locate(pts, 0.0) == 2);  // ties go left by the <= definition
  CHECK(locate(pts, 7.0) == 3);
}

TEST_CASE("gap report on the three-point ground sequence") {
  EnergyState s0(0);
  auto rep = gap_report(wrap(0, {3}, {-1.0, 0.0, 1.0}), s0);
  CHECK(rep.max_gap == doctest::Approx(1.0));
  CHECK(rep.first_gap == doctest::Approx(1.0));
  CHECK(rep.last_gap == doctest::Approx(1.0));
  CHECK(rep.x1 == doctest::Approx(-1.0));
  CHECK(rep.xN == doctest::Approx(1.0));
}

TEST_CASE("symmetric root gap is twice the first positive point") {
  EnergyState s1(1);
  auto seq = construct(s1, {6, 6});
  auto rep = gap_report(seq, s1);
  REQUIRE(rep.root_gaps.size() == 1);
  CHECK(rep.root_gaps[0] == doctest::Approx(2.0 * seq.points[6]).epsilon(1e-8));
}

TEST_CASE("max gap sits at a root crossing or an extremity") {
  for (int ell = 0; ell <= 2; ++ell) {
    EnergyState st(ell);
    auto seq = construct_auto(st, 64);
    auto rep = gap_report(seq, st);
    const int n = rep.argmax;  // gap between x_n and x_{n+1}, 1-based
    bool boundary = (n == 1) || (n == seq.size() - 1);
    bool straddles = st.region_of(seq.points[n - 1]) !=
                     st.region_of(seq.points[n]);
    CHECK((boundary || straddles));
  }
}

TEST_CASE("wasserstein distance of (-1,0,1) against the normal") {
  EnergyState s0(0);
  auto rep = wasserstein(wrap(0, {3}, {-1.0, 0.0, 1.0}), s0);
  // frozen value, independently confirmed by the trapezoid cross-check
  CHECK(rep.distance == doctest::Approx(0.343414011119).epsilon(1e-8));
  CHECK(rep.coupling_bound == doctest::Approx(1.0));
}

TEST_CASE("exact wasserstein agrees with the trapezoid oracle") {
  EnergyState s0(0), s1(1), s2(2);
  struct Case {
    const EnergyState* st;
    MIWSequence seq;
  };
  std::vector<Case> cases;
  cases.push_back({&s0, construct(s0, {16})});
  cases.push_back({&s1, construct(s1, {3, 2})});
  cases.push_back({&s2, construct_auto(s2, 32)});
  for (auto& c : cases) {
    const double exact = wasserstein(c.seq, *c.st).distance;
    const double oracle = w1_trapezoid(c.seq.points, *c.st);
    CHECK(std::fabs(exact - oracle) <= 1e-5);
  }
}

TEST_CASE("distance decreases for quantile empiricals of growing size") {
  EnergyState s0(0);
  double prev = 1e9;
  for (int N : {4, 8, 16, 32}) {
    std::vector<double> pts;
    for (int j = 1; j <= N; ++j) {
      // invert the CDF by bisection
      double lo = -10.0, hi = 10.0;
      const double target = j / (N + 1.0);
      for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        (s0.cdf(mid) < target ? lo : hi) = mid;
      }
      pts.push_back(0.5 * (lo + hi));
    }
    const double d = wasserstein(wrap(0, {N}, pts), s0).distance;
    CHECK(d < prev);
    prev = d;
  }
}

TEST_CASE("coupling bound closed forms") {
  CHECK(coupling_bound({-1.0, 0.0, 1.0}) == doctest::Approx(1.0));
  const double g = 1.0 / std::sqrt(2.0);
  CHECK(coupling_bound({-g, g}) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("triangle inequality through the intermediate distribution") {
  EnergyState s0(0);
  auto seq = construct(s0, {12});
  const auto& x = seq.points;
  const int N = seq.size();

  // piecewise-linear CDF of the intermediate density 1/((N-1) gap)
  auto F_R = [&](double t) {
    if (t <= x.front()) return 0.0;
    if (t >= x.back()) return 1.0;
    const int n = locate(x, t);
    return ((n - 1) + (t - x[n - 1]) / (x[n] - x[n - 1])) / (N - 1.0);
  };
  auto F_Q = [&](double t) {
    return (std::upper_bound(x.begin(), x.end(), t) - x.begin()) /
           static_cast<double>(N);
  };

  const int grid = 400000;
  const double a = -10.0, b = 10.0, dx = (b - a) / grid;
  double d_qr = 0.0, d_rp = 0.0;
  double F = s0.cdf(a), fprev = s0.density(a);
  for (int i = 0; i < grid; ++i) {
    const double t0 = a + i * dx, t1 = t0 + dx;
    const double f1 = s0.density(t1);
    const double Fnext = F + 0.5 * (fprev + f1) * dx;
    d_qr += 0.5 * (std::fabs(F_Q(t0) - F_R(t0)) +
                   std::fabs(F_Q(t1) - F_R(t1))) * dx;
    d_rp += 0.5 * (std::fabs(F_R(t0) - F) + std::fabs(F_R(t1) - Fnext)) * dx;
    F = Fnext;
    fprev = f1;
  }
  const auto rep = wasserstein(seq, s0);
  CHECK(d_qr <= rep.coupling_bound + 1e-6);
  CHECK(rep.distance <= d_qr + d_rp + 1e-5);
}

TEST_CASE("mixture distance reduces and bounds") {
  // single region: assembled equals the region distance
  auto single = mixture_distance({0.02}, {1.0}, {1.0}, 0.5, 0.05);
  CHECK(single.assembled == doctest::Approx(0.02));

  // two symmetric regions with a small count imbalance
  auto two = mixture_distance({0.01, 0.012}, {0.5, 0.5}, {0.5, 0.5}, 1.2,
                              0.02);
  CHECK(two.assembled == doctest::Approx(0.5 * 0.01 + 0.5 * 0.012));
  CHECK(two.bound == doctest::Approx((1.0 + 1.2) * 0.02));
  CHECK(two.assembled <= two.bound);

  // imbalanced shares add the mu penalty for each deviating component
  auto imb = mixture_distance({0.01, 0.01}, {0.45, 0.55}, {0.5, 0.5}, 1.0,
                              0.06);
  CHECK(imb.assembled == doctest::Approx(0.01 + 0.10 * 1.0));
  CHECK(imb.assembled <= imb.bound);

  CHECK_THROWS(mixture_distance({0.1}, {0.7}, {1.0}, 1.0, 0.1));
}

TEST_CASE("energy closed forms and variational bound") {
  const double g = 1.0 / std::sqrt(2.0);
  auto e2 = energy({-g, g});
  CHECK(e2.V == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e2.U == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e2.H == doctest::Approx(2.0).epsilon(1e-12));

  auto e3 = energy({-1.0, 0.0, 1.0});
  CHECK(e3.V == doctest::Approx(2.0));
  CHECK(e3.U == doctest::Approx(2.0));
  CHECK(e3.H == doctest::Approx(4.0));

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.1, 1.5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(5);
    x[0] = -u(rng) - 1.0;
    for (int n = 1; n < 5; ++n) x[n] = x[n - 1] + u(rng);
    CHECK(energy(x).H >= 8.0);
  }

  // equality is tight only at the constructed ground sequence
  EnergyState s0(0);
  auto seq = construct(s0, {5});
  CHECK(energy(seq.points).H == doctest::Approx(8.0).epsilon(1e-8));
  auto bent = seq.points;
  bent[2] += 0.1;
  CHECK(energy(bent).H > 8.0 + 1e-3);

  CHECK_THROWS(energy({1.0, 0.5}));
}

TEST_CASE("rate fit on synthetic tables") {
  std::vector<RateRow> rows;
  for (int N = 64; N <= 4096; N *= 2) {
    RateRow r;
    r.N = N;
    r.wasserstein = std::sqrt(std::log(N)) / N;
    rows.push_back(r);
  }
  auto fit = rate_fit(rows);
  CHECK(fit.slope == doctest::Approx(-1.0).epsilon(0.05));
  CHECK(fit.scaled_min == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.scaled_max == doctest::Approx(1.0).epsilon(1e-12));

  for (auto& r : rows) r.wasserstein = 1.0 / r.N;
  fit = rate_fit(rows);
  CHECK(fit.slope == doctest::Approx(-1.0).epsilon(1e-9));
  // pure 1/N decay drifts against the sqrt(log N) scaling
  CHECK(fit.scaled_max / fit.scaled_min > 1.2);
}

TEST_CASE("rate table csv header") {
  std::vector<RateRow> rows(1);
  rows[0].N = 64;
  rows[0].counts = "32;32";
  auto csv = rate_table_csv(rows);
  CHECK(csv.rfind("N,ell,counts,wasserstein,coupling_bound,max_gap,x1,xN,H,"
                  "runtime_ms\n", 0) == 0);
}
