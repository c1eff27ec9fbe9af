#pragma once

#include <cstdint>
#include <functional>
#include <optional>

namespace brwlab {

/**
 * A non-negative magnitude held as its natural logarithm.
 *
 * Densities and counts at generation n ~ 10^3 overflow doubles, so nothing
 * here is exponentiated implicitly.  to_linear() throws when the magnitude
 * is outside the range a double can carry (|log| > 700); zero is represented
 * by a log of -infinity and converts to 0.
 */
struct LogValue {
  double log_magnitude = 0.0;

  static LogValue from_linear(double value);
  static LogValue zero();

  bool linear_safe() const;
  double to_linear() const;
};

LogValue operator*(LogValue a, LogValue b);
LogValue operator/(LogValue a, LogValue b);
/// log(e^a + e^b) without overflow.
LogValue log_add(LogValue a, LogValue b);

/// Generation n >= 1 together with excess weight k = h(v) - n >= 0.
struct LevelClass {
  std::uint64_t n;
  std::uint64_t k;

  LevelClass(std::uint64_t n, std::uint64_t k);
};

/// log of gamma_h(x) = x^(h-1) e^(-x) / (h-1)!.  Throws for h = 0 or x < 0.
LogValue gamma_density(std::uint64_t h, double x);

/// Regularized lower incomplete gamma P(h, x) for integer shape h >= 1.
double gamma_cdf(std::uint64_t h, double x);

struct TnkCount {
  LogValue log;
  std::optional<std::uint64_t> exact;  // present when n + k <= 64
};

/// |T_{n,k}| = binomial(n+k-1, k).
TnkCount count_tnk(LevelClass c);

/// f_{n,k}(x) = x^(n+k-1) e^(-x) / (k! (n-1)!), the summed density of
/// S(v) over T_{n,k}.
LogValue f_nk(LevelClass c, double x);

/// Stirling approximation of f_{n,k}(x) with k = (n+r)/e, x = (n+y)/e and the
/// 1 + O(1/n + 1/k) factor dropped.  Requires n >= 2, k >= 1, x > 0.
LogValue f_nk_stirling(LevelClass c, double x);

/// E|T_n(x)| = x^n / n!.
LogValue expected_tn(std::uint64_t n, double x);

/// sum_{k=0}^{k_max} int_0^x f_{n,k}(t) dt by adaptive quadrature.
double expected_tn_partial_sum(std::uint64_t n, double x, std::uint64_t k_max);

/// Upper bound on the k > k_max remainder of expected_tn_partial_sum, from the
/// upper Poisson tail bound (valid once k_max + 1 >= x).
LogValue expected_tn_truncation_bound(std::uint64_t n, double x,
                                      std::uint64_t k_max);

enum class TailSide { lower, upper };

/// (e/alpha)^(alpha z) for the lower side (0 < alpha <= 1) or
/// (e/beta)^(beta z) for the upper side (beta >= 1).
LogValue poisson_tail(double z, TailSide side, double factor);

/// The unnormalized Poisson sums those bounds dominate:
/// sum_{k <= alpha z} z^k/k!  or  sum_{k >= beta z} z^k/k!.
LogValue poisson_partial_sum(double z, TailSide side, double factor);

/// (sum_{|k-x| >= t sqrt(x)} f_{n,k}(x)) / (e^(-t^2/2) x^(n-1)/(n-1)!),
/// by direct summation.  Requires x > 0 and 0 <= t <= x^(1/6).
double concentration_ratio(std::uint64_t n, double x, double t);

/// n/e + 3 log(n) / (2e).
double m_n(std::uint64_t n);

/// Harmonic number sum_{i=1}^s 1/i (compensated summation).
double har(std::uint64_t s);

/// max{n : m_n(n) <= har(m-1)}, m >= 2.
std::uint64_t d_of_m(std::uint64_t m);

/// Adaptive Simpson quadrature on [a, b] to an absolute tolerance.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-10);

}  // namespace brwlab
