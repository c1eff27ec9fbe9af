#include "brwlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace brwlab {

StatSummary::StatSummary(HistogramSpec histogram) : histogram_(histogram) {
  if (histogram_.bins > 0) {
    if (!(histogram_.hi > histogram_.lo)) throw std::invalid_argument("histogram needs hi > lo");
    bins_.assign(histogram_.bins, 0);
  }
}

void StatSummary::add(double x) {
  if (count_ == 0) {
    min_ = max_ = x;
  } else {
    min_ = std::min(min_, x);
    max_ = std::max(max_, x);
  }
  ++count_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (x - mean_);
  if (sorted_ && !values_.empty() && x < values_.back()) sorted_ = false;
  values_.push_back(x);
  if (!bins_.empty()) {
    const double width = (histogram_.hi - histogram_.lo) / static_cast<double>(histogram_.bins);
    double slot = std::floor((x - histogram_.lo) / width);
    slot = std::clamp(slot, 0.0, static_cast<double>(histogram_.bins - 1));
    ++bins_[static_cast<std::size_t>(slot)];
  }
}

void StatSummary::merge(const StatSummary& other) {
  if (other.count_ == 0) return;
  if (histogram_.bins != other.histogram_.bins || histogram_.lo != other.histogram_.lo ||
      histogram_.hi != other.histogram_.hi) {
    throw std::invalid_argument("cannot merge summaries with different histograms");
  }
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double delta = other.mean_ - mean_;
  const double n = na + nb;
  mean_ = (na * mean_ + nb * other.mean_) / n;
  m2_ = m2_ + other.m2_ + delta * delta * na * nb / n;
  count_ += other.count_;
  min_ = std::min(min_, other.min_);
  max_ = std::max(max_, other.max_);
  values_.insert(values_.end(), other.values_.begin(), other.values_.end());
  sorted_ = false;
  for (std::size_t i = 0; i < bins_.size(); ++i) bins_[i] += other.bins_[i];
}

double StatSummary::variance() const {
  if (count_ < 2) return 0.0;
  return m2_ / static_cast<double>(count_ - 1);
}

double StatSummary::stddev() const { return std::sqrt(variance()); }

double StatSummary::standard_error() const {
  if (count_ == 0) return 0.0;
  return stddev() / std::sqrt(static_cast<double>(count_));
}

const std::vector<double>& StatSummary::sorted_values() const {
  if (!sorted_) {
    std::sort(values_.begin(), values_.end());
    sorted_ = true;
  }
  return values_;
}

double StatSummary::quantile(double q) const {
  if (count_ == 0) throw std::logic_error("quantile of an empty summary");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level must be in [0,1]");
  const auto& v = sorted_values();
  const double rank = std::ceil(q * static_cast<double>(count_));
  const auto index = static_cast<std::size_t>(std::max(rank, 1.0)) - 1;
  return v[std::min(index, v.size() - 1)];
}

std::pair<double, double> StatSummary::quantile_ci(double q, double level) const {
  if (count_ == 0) throw std::logic_error("quantile CI of an empty summary");
  const auto& v = sorted_values();
  const double alpha = 1.0 - level;
  const boost::math::binomial_distribution<double> b(static_cast<double>(count_), q);
  // Order statistics l < u with P(l <= B < u) >= level, B ~ Binomial(N, q).
  double lo_rank = std::floor(boost::math::quantile(b, alpha / 2.0));
  double hi_rank = std::ceil(boost::math::quantile(boost::math::complement(b, alpha / 2.0))) + 1.0;
  lo_rank = std::clamp(lo_rank, 1.0, static_cast<double>(count_));
  hi_rank = std::clamp(hi_rank, 1.0, static_cast<double>(count_));
  return {v[static_cast<std::size_t>(lo_rank) - 1], v[static_cast<std::size_t>(hi_rank) - 1]};
}

Proportion proportion(std::uint64_t successes, std::uint64_t trials, double z) {
  Proportion out;
  out.successes = successes;
  out.trials = trials;
  if (trials == 0) return out;
  const double n = static_cast<double>(trials);
  out.p = static_cast<double>(successes) / n;
  out.se = std::sqrt(out.p * (1.0 - out.p) / n);
  const double z2 = z * z;
  const double centre = (out.p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half =
      z * std::sqrt(out.p * (1.0 - out.p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  out.wilson_lo = std::max(0.0, centre - half);
  out.wilson_hi = std::min(1.0, centre + half);
  return out;
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("KS statistic of an empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("KS statistic of an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double kolmogorov_pvalue(double d, double effective_n) {
  const double root = std::sqrt(effective_n);
  const double lambda = (root + 0.12 + 0.11 / root) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double ks_test(std::vector<double> sample, const std::function<double(double)>& cdf) {
  const double n = static_cast<double>(sample.size());
  return kolmogorov_pvalue(ks_statistic(std::move(sample), cdf), n);
}

double ks_test_two_sample(std::vector<double> a, std::vector<double> b) {
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  return kolmogorov_pvalue(ks_two_sample_statistic(std::move(a), std::move(b)),
                           na * nb / (na + nb));
}

double chi_square_pvalue(double stat, double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("chi-square needs dof > 0");
  if (stat <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, stat / 2.0);
}

double chi_square_uniform_pvalue(std::span<const std::uint64_t> counts) {
  if (counts.size() < 2) throw std::invalid_argument("chi-square needs >= 2 cells");
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0,
                                       [](double s, std::uint64_t c) { return s + c; });
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (const auto c : counts) {
    const double diff = static_cast<double>(c) - expected;
    stat += diff * diff / expected;
  }
  return chi_square_pvalue(stat, static_cast<double>(counts.size() - 1));
}

LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                              std::span<const double> w) {
  if (x.size() != y.size() || x.size() != w.size() || x.size() < 2) {
    throw std::invalid_argument("weighted fit needs >= 2 matching points");
  }
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
    sxx += w[i] * x[i] * x[i];
    sxy += w[i] * x[i] * y[i];
  }
  const double det = sw * sxx - sx * sx;
  if (!(det > 0.0)) throw std::invalid_argument("degenerate weighted fit");
  LinearFit fit;
  fit.slope = (sw * sxy - sx * sy) / det;
  fit.intercept = (sxx * sy - sx * sxy) / det;
  fit.slope_se = std::sqrt(sw / det);
  fit.intercept_se = std::sqrt(sxx / det);
  return fit;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3) {
    throw std::invalid_argument("linear fit needs >= 3 matching points");
  }
  const std::vector<double> ones(x.size(), 1.0);
  LinearFit fit = weighted_linear_fit(x, y, ones);
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    rss += r * r;
  }
  const double sigma = std::sqrt(rss / static_cast<double>(x.size() - 2));
  fit.slope_se *= sigma;
  fit.intercept_se *= sigma;
  return fit;
}

}  // namespace brwlab
