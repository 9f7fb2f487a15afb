#include "miw/states.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "miw/quadrature.hpp"

namespace miw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_order(int ell) {
  if (ell < 0 || ell > kMaxOrder)
    throw std::domain_error("hermite order out of supported range [0, " +
                            std::to_string(kMaxOrder) + "]: " +
                            std::to_string(ell));
}

}  // namespace

HermitePair hermite_eval(int ell, double x) {
  check_order(ell);
  if (ell == 0) return {1.0, 0.0};
  double prev = 1.0;  // p_0
  double cur = x;     // p_1
  for (int k = 1; k < ell; ++k) {
    const double next = x * cur - static_cast<double>(k) * prev;
    prev = cur;
    cur = next;
  }
  // p'_ell = ell * p_{ell-1}
  return {cur, static_cast<double>(ell) * prev};
}

std::vector<double> hermite_coeffs(int ell) {
  check_order(ell);
  std::vector<double> prev = {1.0};
  if (ell == 0) return prev;
  std::vector<double> cur = {0.0, 1.0};
  for (int k = 1; k < ell; ++k) {
    std::vector<double> next(cur.size() + 1, 0.0);
    for (size_t i = 0; i < cur.size(); ++i) next[i + 1] = cur[i];
    for (size_t i = 0; i < prev.size(); ++i)
      next[i] -= static_cast<double>(k) * prev[i];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

std::vector<double> hermite_roots(int ell) {
  check_order(ell);
  std::vector<double> roots;
  for (int k = 1; k <= ell; ++k) {
    // Roots of p_k interlace those of p_{k-1}; bracket with them plus an
    // outer bound that encloses the extreme roots.
    const double bound = 2.0 * std::sqrt(static_cast<double>(k)) + 1.0;
    std::vector<double> brackets;
    brackets.reserve(roots.size() + 2);
    brackets.push_back(-bound);
    brackets.insert(brackets.end(), roots.begin(), roots.end());
    brackets.push_back(bound);

    std::vector<double> next;
    next.reserve(k);
    for (int i = 0; i < k; ++i) {
      double lo = brackets[i], hi = brackets[i + 1];
      double flo = hermite_eval(k, lo).value;
      for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::fabs(lo));
           ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = hermite_eval(k, mid).value;
        if ((flo < 0.0) == (fmid < 0.0)) {
          lo = mid;
          flo = fmid;
        } else {
          hi = mid;
        }
      }
      // Newton polish in extended precision: the polynomial slope at the
      // outer roots of higher orders is large enough that double-precision
      // Newton leaves |p(r)| above the 1e-12 residual target.
      long double r = 0.5L * (static_cast<long double>(lo) + hi);
      for (int it = 0; it < 6; ++it) {
        long double pm = 0.0L, p = 1.0L, dm = 0.0L, d = 0.0L;
        for (int j = 0; j < k; ++j) {
          const long double pn = r * p - static_cast<long double>(j) * pm;
          const long double dn = p + r * d - static_cast<long double>(j) * dm;
          pm = p;
          p = pn;
          dm = d;
          d = dn;
        }
        if (d == 0.0L) break;
        const long double step = p / d;
        if (!std::isfinite(static_cast<double>(step)) ||
            std::fabs(static_cast<double>(step)) > hi - lo)
          break;
        r -= step;
      }
      next.push_back(static_cast<double>(r));
    }
    roots = std::move(next);
  }
  // Enforce exact symmetry about 0 (the recurrence preserves parity).
  const int n = static_cast<int>(roots.size());
  for (int i = 0; i < n / 2; ++i) {
    const double m = 0.5 * (roots[n - 1 - i] - roots[i]);
    roots[i] = -m;
    roots[n - 1 - i] = m;
  }
  if (n % 2 == 1) roots[n / 2] = 0.0;
  return roots;
}

EnergyState::EnergyState(int ell)
    : ell_(ell),
      coeffs_(hermite_coeffs(ell)),
      roots_(hermite_roots(ell)),
      tail_bound_(40.0) {
  auto unnormalized = [this](double x) {
    const double p = poly_eval(coeffs_, x);
    return p * p * std::exp(-0.5 * x * x);
  };

  std::vector<double> breaks = {-tail_bound_, tail_bound_};
  for (double r : roots_) breaks.push_back(r);
  for (int i = -10; i <= 10; ++i) breaks.push_back(static_cast<double>(i));
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  const QuadResult total = integrate_split(unnormalized, breaks, 1e-14, 1e-13);
  if (!total.converged || total.value <= 0.0)
    throw std::runtime_error("normalization quadrature failed, error " +
                             std::to_string(total.error));
  norm_c_ = 1.0 / total.value;

  masses_.resize(ell_ + 1);
  for (int k = 0; k <= ell_; ++k) {
    const double lo = (k == 0) ? -tail_bound_ : roots_[k - 1];
    const double hi = (k == ell_) ? tail_bound_ : roots_[k];
    std::vector<double> sub;
    for (double b : breaks)
      if (b >= lo && b <= hi) sub.push_back(b);
    if (sub.empty() || sub.front() != lo) sub.insert(sub.begin(), lo);
    if (sub.back() != hi) sub.push_back(hi);

    auto f = [this](double x) { return density(x); };
    const double mass = integrate_split(f, sub, 1e-13, 1e-12).value;
    const double mean =
        integrate_split([this](double x) { return x * density(x); }, sub,
                        1e-13, 1e-12)
            .value;
    const double abs_mean =
        integrate_split(
            [this](double x) { return std::fabs(x) * density(x); }, sub,
            1e-13, 1e-12)
            .value;
    masses_[k] = {k, mass, mean / mass, abs_mean / mass};
  }
}

int EnergyState::region_of(double x) const {
  return static_cast<int>(
      std::upper_bound(roots_.begin(), roots_.end(), x) - roots_.begin());
}

std::pair<double, double> EnergyState::region(int k) const {
  if (k < 0 || k > ell_) throw std::out_of_range("region index");
  const double lo = (k == 0) ? -kInf : roots_[k - 1];
  const double hi = (k == ell_) ? kInf : roots_[k];
  return {lo, hi};
}

double EnergyState::density(double x) const {
  const double p = poly_eval(coeffs_, x);
  return norm_c_ * p * p * std::exp(-0.5 * x * x);
}

void EnergyState::check_not_root(double x) const {
  for (double r : roots_)
    if (x == r)
      throw std::domain_error("log-derivative pole at root " +
                              std::to_string(r));
}

double EnergyState::log_derivative(double x) const {
  check_not_root(x);
  double eta = -x;
  for (double r : roots_) eta += 2.0 / (x - r);
  return eta;
}

LogDerivatives EnergyState::log_derivatives(double x) const {
  check_not_root(x);
  LogDerivatives d{-x, -1.0, 0.0};
  for (double r : roots_) {
    const double inv = 1.0 / (x - r);
    d.eta += 2.0 * inv;
    d.eta_p -= 2.0 * inv * inv;
    d.eta_pp += 4.0 * inv * inv * inv;
  }
  return d;
}

double EnergyState::cdf(double x) const {
  if (x <= -tail_bound_) return 0.0;
  if (x >= tail_bound_) return 1.0;
  std::vector<double> breaks = {-tail_bound_};
  for (double r : roots_)
    if (r < x) breaks.push_back(r);
  for (int i = -10; i <= 10; ++i)
    if (i > -tail_bound_ && i < x) breaks.push_back(static_cast<double>(i));
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  breaks.push_back(x);
  const QuadResult r = integrate_split(
      [this](double t) { return density(t); }, breaks, 1e-12, 1e-12);
  if (!r.converged)
    throw std::runtime_error("cdf quadrature non-convergence, error " +
                             std::to_string(r.error));
  return std::clamp(r.value, 0.0, 1.0);
}

std::string EnergyState::to_json() const {
  nlohmann::json j;
  j["ell"] = ell_;
  j["roots"] = roots_;
  j["norm_c"] = norm_c_;
  return j.dump();
}

std::vector<double> solve_q(const std::vector<double>& p) {
  std::vector<double> a = p;
  while (a.size() > 1 && a.back() == 0.0) a.pop_back();
  const int n = static_cast<int>(a.size()) - 1;
  if (n < 2) throw std::invalid_argument("solve_q needs degree >= 2");

  // Matching x^k coefficients: a_k = (k+1) b_k - b_{k-2}, solved downward.
  std::vector<double> b(n - 1, 0.0);
  for (int k = n; k >= 2; --k) {
    const double bk = (k <= n - 2) ? b[k] : 0.0;
    b[k - 2] = (k + 1) * bk - a[k];
  }
  return b;
}

double poly_eval(const std::vector<double>& coeffs, double x) {
  double v = 0.0;
  for (size_t i = coeffs.size(); i-- > 0;) v = v * x + coeffs[i];
  return v;
}

std::vector<double> poly_derivative(const std::vector<double>& coeffs) {
  if (coeffs.size() <= 1) return {0.0};
  std::vector<double> d(coeffs.size() - 1);
  for (size_t i = 1; i < coeffs.size(); ++i)
    d[i - 1] = static_cast<double>(i) * coeffs[i];
  return d;
}

}  // namespace miw
