#pragma once

#include <cmath>
#include <functional>
#include <queue>
#include <stdexcept>
#include <vector>

namespace miw {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;       // estimated absolute error
  bool converged = false;
  int segments = 0;
};

namespace detail {

// Gauss 7 / Kronrod 15 node pairs on [-1, 1].
inline constexpr double kGK15Nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Segment {
  double a, b;
  double value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(const F& fn, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  double fc = fn(center);
  double kronrod = kKronrodWeights[7] * fc;
  double gauss = kGaussWeights[3] * fc;
  double resasc_center = fc;

  double fv[7][2];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kGK15Nodes[i];
    fv[i][0] = fn(center - dx);
    fv[i][1] = fn(center + dx);
    const double sum = fv[i][0] + fv[i][1];
    kronrod += kKronrodWeights[i] * sum;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;

  // QUADPACK-style error estimate from the deviation about the mean.
  const double mean = kronrod / (b - a);
  double resasc = kKronrodWeights[7] * std::fabs(resasc_center - mean);
  for (int i = 0; i < 7; ++i)
    resasc += kKronrodWeights[i] *
              (std::fabs(fv[i][0] - mean) + std::fabs(fv[i][1] - mean));
  resasc *= std::fabs(half);

  double err = std::fabs(kronrod - gauss);
  if (resasc > 0.0 && err > 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  return {a, b, kronrod, err};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod integration of fn over [a, b].
template <class F>
QuadResult integrate(const F& fn, double a, double b, double abs_tol = 1e-12,
                     double rel_tol = 1e-12, int max_segments = 4000) {
  QuadResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }

  std::priority_queue<detail::Segment> heap;
  heap.push(detail::gk15(fn, a, b));
  double total = heap.top().value;
  double total_err = heap.top().error;
  int n = 1;

  auto tol = [&] { return std::max(abs_tol, rel_tol * std::fabs(total)); };
  while (total_err > tol() && n < max_segments) {
    detail::Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {  // interval exhausted
      heap.push(worst);
      break;
    }
    detail::Segment left = detail::gk15(fn, worst.a, mid);
    detail::Segment right = detail::gk15(fn, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++n;
  }

  out.value = sign * total;
  out.error = total_err;
  out.converged = total_err <= tol();
  out.segments = n;
  return out;
}

// Integration with forced initial subdivision at the given breakpoints
// (useful when the integrand has known features, e.g. density roots).
template <class F>
QuadResult integrate_split(const F& fn, const std::vector<double>& breaks,
                           double abs_tol = 1e-12, double rel_tol = 1e-12) {
  if (breaks.size() < 2) throw std::invalid_argument("need >= 2 breakpoints");
  QuadResult out;
  out.converged = true;
  const double piece_tol = abs_tol / static_cast<double>(breaks.size() - 1);
  for (size_t i = 0; i + 1 < breaks.size(); ++i) {
    QuadResult r = integrate(fn, breaks[i], breaks[i + 1], piece_tol, rel_tol);
    out.value += r.value;
    out.error += r.error;
    out.segments += r.segments;
    out.converged = out.converged && r.converged;
  }
  return out;
}

}  // namespace miw
