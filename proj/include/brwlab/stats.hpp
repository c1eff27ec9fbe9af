#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace brwlab {

/// Equal-width histogram layout; bins outside [lo, hi) go to the end bins.
struct HistogramSpec {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t bins = 0;  // 0 disables the histogram
};

/**
 * Mergeable accumulator for Monte Carlo experiments.
 *
 * Moments use Welford/Chan updates.  Quantiles come from the retained samples
 * (exact order statistics), so merging is an exact multiset union and
 * quantiles are order independent.  Mean and variance agree across merge
 * orders up to rounding.
 */
class StatSummary {
 public:
  StatSummary() = default;
  explicit StatSummary(HistogramSpec histogram);

  void add(double x);
  void merge(const StatSummary& other);

  std::uint64_t count() const { return count_; }
  bool empty() const { return count_ == 0; }
  double mean() const { return mean_; }
  double m2() const { return m2_; }
  double variance() const;  // unbiased
  double stddev() const;
  double standard_error() const;
  double min() const { return min_; }
  double max() const { return max_; }

  /// sup{x : P_emp(X < x) < q}, i.e. the ceil(q N)-th order statistic.
  double quantile(double q) const;
  double median() const { return quantile(0.5); }

  /// Distribution-free CI for the q-quantile from binomial order statistics.
  std::pair<double, double> quantile_ci(double q, double level = 0.95) const;

  const std::vector<double>& sorted_values() const;
  const HistogramSpec& histogram_spec() const { return histogram_; }
  const std::vector<std::uint64_t>& histogram() const { return bins_; }

 private:
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double min_ = 0.0;
  double max_ = 0.0;
  HistogramSpec histogram_{};
  std::vector<std::uint64_t> bins_;
  mutable std::vector<double> values_;
  mutable bool sorted_ = true;
};

/// Binomial proportion with its standard error and Wilson score interval.
struct Proportion {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double p = 0.0;
  double se = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
};

Proportion proportion(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054);

/// sup_x |F_emp(x) - cdf(x)|.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
double ks_two_sample_statistic(std::vector<double> a, std::vector<double> b);
/// Asymptotic Kolmogorov p-value with Stephens' small-sample correction.
double kolmogorov_pvalue(double d, double effective_n);
double ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);
double ks_test_two_sample(std::vector<double> a, std::vector<double> b);

/// Upper tail P(chi^2_dof >= stat).
double chi_square_pvalue(double stat, double dof);
/// Pearson goodness of fit against equal cell probabilities.
double chi_square_uniform_pvalue(std::span<const std::uint64_t> counts);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
};

/// Weighted least squares y ~ intercept + slope x with weights w (inverse
/// variances); standard errors from the weights (no residual rescaling).
LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                              std::span<const double> w);

/// Ordinary least squares with residual-based standard errors.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

}  // namespace brwlab
