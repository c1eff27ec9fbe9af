#include "brwlab/analytics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace brwlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kE = std::numbers::e;

// lgamma_r: the plain lgamma writes the global signgam.
double log_gamma(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

double log_factorial(std::uint64_t n) { return log_gamma(static_cast<double>(n) + 1.0); }

double log_power(double base, double exponent) {
  if (exponent == 0.0) return 0.0;
  return exponent * std::log(base);
}

double simpson_step(const std::function<double(double)>& f, double a, double b,
                    double fa, double fm, double fb, double whole, double tol,
                    int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

LogValue LogValue::from_linear(double value) {
  if (value < 0.0) throw std::domain_error("LogValue holds non-negative magnitudes");
  return {std::log(value)};
}

LogValue LogValue::zero() { return {-kInf}; }

bool LogValue::linear_safe() const {
  return log_magnitude == -kInf || std::abs(log_magnitude) <= 700.0;
}

double LogValue::to_linear() const {
  if (log_magnitude > 700.0) {
    throw std::overflow_error("LogValue too large for linear scale");
  }
  return std::exp(log_magnitude);
}

LogValue operator*(LogValue a, LogValue b) { return {a.log_magnitude + b.log_magnitude}; }
LogValue operator/(LogValue a, LogValue b) { return {a.log_magnitude - b.log_magnitude}; }

LogValue log_add(LogValue a, LogValue b) {
  const double hi = std::max(a.log_magnitude, b.log_magnitude);
  const double lo = std::min(a.log_magnitude, b.log_magnitude);
  if (hi == -kInf) return LogValue::zero();
  return {hi + std::log1p(std::exp(lo - hi))};
}

LevelClass::LevelClass(std::uint64_t n_, std::uint64_t k_) : n(n_), k(k_) {
  if (n == 0) throw std::invalid_argument("LevelClass requires n >= 1");
}

LogValue gamma_density(std::uint64_t h, double x) {
  if (h == 0) throw std::invalid_argument("gamma_density requires h >= 1");
  if (!(x >= 0.0)) throw std::invalid_argument("gamma_density requires x >= 0");
  const double shape = static_cast<double>(h);
  return {log_power(x, shape - 1.0) - x - log_gamma(shape)};
}

double gamma_cdf(std::uint64_t h, double x) {
  if (h == 0) throw std::invalid_argument("gamma_cdf requires h >= 1");
  if (x <= 0.0) return 0.0;
  // Q(h, x) = e^-x sum_{i<h} x^i / i!, summed in log scale.
  LogValue tail = LogValue::zero();
  for (std::uint64_t i = 0; i < h; ++i) {
    tail = log_add(tail, {log_power(x, static_cast<double>(i)) - log_factorial(i) - x});
  }
  return -std::expm1(tail.log_magnitude);
}

TnkCount count_tnk(LevelClass c) {
  TnkCount out;
  const std::uint64_t top = c.n + c.k - 1;
  out.log = {log_factorial(top) - log_factorial(c.k) - log_factorial(c.n - 1)};
  if (c.n + c.k <= 64) {
    // binomial(top, j) built up multiplicatively stays integral at each step.
    const std::uint64_t j_max = std::min(c.k, c.n - 1);
    unsigned __int128 value = 1;
    for (std::uint64_t j = 1; j <= j_max; ++j) {
      value = value * (top - j_max + j) / j;
    }
    out.exact = static_cast<std::uint64_t>(value);
  }
  return out;
}

LogValue f_nk(LevelClass c, double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("f_nk requires x >= 0");
  const double power = static_cast<double>(c.n + c.k - 1);
  return {log_power(x, power) - x - log_factorial(c.k) - log_factorial(c.n - 1)};
}

LogValue f_nk_stirling(LevelClass c, double x) {
  if (c.k == 0) throw std::invalid_argument("f_nk_stirling requires k >= 1");
  if (c.n < 2) throw std::invalid_argument("f_nk_stirling requires n >= 2");
  if (!(x > 0.0)) throw std::invalid_argument("f_nk_stirling requires x > 0");
  const double n = static_cast<double>(c.n);
  const double r = kE * static_cast<double>(c.k) - n;
  const double y = kE * x - n;
  const double log_value = -std::log(n + y) + 0.5 * (std::log(n) - std::log(n + r)) +
                           (r - y) / kE +
                           (n + r) / kE * std::log1p(-(r - y) / (n + r)) +
                           n * std::log1p(y / n) + 1.5 - std::log(2.0 * std::numbers::pi);
  return {log_value};
}

LogValue expected_tn(std::uint64_t n, double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("expected_tn requires x >= 0");
  return {log_power(x, static_cast<double>(n)) - log_factorial(n)};
}

double expected_tn_partial_sum(std::uint64_t n, double x, std::uint64_t k_max) {
  if (n == 0) throw std::invalid_argument("expected_tn_partial_sum requires n >= 1");
  if (!(x >= 0.0)) throw std::invalid_argument("expected_tn_partial_sum requires x >= 0");
  if (x == 0.0) return 0.0;
  double total = 0.0;
  for (std::uint64_t k = 0; k <= k_max; ++k) {
    const LevelClass c(n, k);
    total += integrate([&](double t) { return f_nk(c, t).to_linear(); }, 0.0, x);
  }
  return total;
}

LogValue expected_tn_truncation_bound(std::uint64_t n, double x, std::uint64_t k_max) {
  // sum_{k>K} f_{n,k}(t) = t^(n-1)/(n-1)! P{Poisson(t) > K} and the Poisson
  // tail grows with t, so the remainder is at most x^n/n! P{Poisson(x) > K}.
  const LogValue total = expected_tn(n, x);
  if (x == 0.0) return LogValue::zero();
  const double beta = static_cast<double>(k_max + 1) / x;
  if (beta < 1.0) return total;
  return total * poisson_tail(x, TailSide::upper, beta) * LogValue{-x};
}

LogValue poisson_tail(double z, TailSide side, double factor) {
  if (!(z > 0.0)) throw std::invalid_argument("poisson_tail requires z > 0");
  if (side == TailSide::lower && !(factor > 0.0 && factor <= 1.0)) {
    throw std::invalid_argument("lower Poisson tail requires 0 < alpha <= 1");
  }
  if (side == TailSide::upper && !(factor >= 1.0)) {
    throw std::invalid_argument("upper Poisson tail requires beta >= 1");
  }
  return {factor * z * (1.0 - std::log(factor))};
}

LogValue poisson_partial_sum(double z, TailSide side, double factor) {
  poisson_tail(z, side, factor);  // same preconditions
  const double log_z = std::log(z);
  auto term = [&](std::uint64_t k) {
    return LogValue{static_cast<double>(k) * log_z - log_factorial(k)};
  };
  LogValue sum = LogValue::zero();
  if (side == TailSide::lower) {
    const auto k_end = static_cast<std::uint64_t>(std::floor(factor * z));
    for (std::uint64_t k = 0; k <= k_end; ++k) sum = log_add(sum, term(k));
    return sum;
  }
  auto k = static_cast<std::uint64_t>(std::ceil(factor * z));
  for (;; ++k) {
    const LogValue t = term(k);
    sum = log_add(sum, t);
    if (static_cast<double>(k) > z && t.log_magnitude < sum.log_magnitude - 40.0) break;
  }
  return sum;
}

double concentration_ratio(std::uint64_t n, double x, double t) {
  if (n == 0) throw std::invalid_argument("concentration_ratio requires n >= 1");
  if (!(x > 0.0)) throw std::invalid_argument("concentration_ratio requires x > 0");
  if (!(t >= 0.0) || t > std::pow(x, 1.0 / 6.0)) {
    throw std::invalid_argument("concentration_ratio requires 0 <= t <= x^(1/6)");
  }
  const double width = t * std::sqrt(x);
  const double log_scale = static_cast<double>(n - 1) * std::log(x) - log_factorial(n - 1);
  // Terms beyond k_end are below e^-40 of the peak.
  const auto k_end = static_cast<std::uint64_t>(x + 20.0 * std::sqrt(x) + 60.0);
  LogValue sum = LogValue::zero();
  for (std::uint64_t k = 0; k <= k_end; ++k) {
    if (std::abs(static_cast<double>(k) - x) >= width) {
      sum = log_add(sum, f_nk(LevelClass(n, k), x));
    }
  }
  return std::exp(sum.log_magnitude - log_scale + 0.5 * t * t);
}

double m_n(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("m_n requires n >= 1");
  const double nd = static_cast<double>(n);
  return nd / kE + 3.0 * std::log(nd) / (2.0 * kE);
}

double har(std::uint64_t s) {
  if (s > 100'000'000) {
    const double sd = static_cast<double>(s);
    const double inv2 = 1.0 / (sd * sd);
    return std::log(sd) + std::numbers::egamma + 0.5 / sd - inv2 / 12.0 +
           inv2 * inv2 / 120.0;
  }
  // Neumaier summation, smallest terms first.
  double sum = 0.0;
  double carry = 0.0;
  for (std::uint64_t i = s; i >= 1; --i) {
    const double term = 1.0 / static_cast<double>(i);
    const double t = sum + term;
    carry += std::abs(sum) >= term ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return sum + carry;
}

std::uint64_t d_of_m(std::uint64_t m) {
  if (m < 2) throw std::invalid_argument("d_of_m requires m >= 2");
  const double target = har(m - 1);
  // m_n is increasing; m_n(1) < 1 <= target and m_n(n) > target once n > e*target.
  std::uint64_t lo = 1;
  auto hi = static_cast<std::uint64_t>(std::ceil(kE * target)) + 2;
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (m_n(mid) <= target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol) {
  if (a == b) return 0.0;
  // Fixed initial split so a narrow peak cannot hide between the first nodes.
  constexpr int kPieces = 32;
  const double width = (b - a) / kPieces;
  double total = 0.0;
  double fa = f(a);
  for (int i = 0; i < kPieces; ++i) {
    const double lo = a + width * i;
    const double hi = i + 1 == kPieces ? b : lo + width;
    const double fb = f(hi);
    const double fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    total += simpson_step(f, lo, hi, fa, fm, fb, whole, abs_tol / kPieces, 40);
    fa = fb;
  }
  return total;
}

}  // namespace brwlab
