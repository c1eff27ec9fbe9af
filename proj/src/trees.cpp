#include "brwlab/trees.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "brwlab/parallel.hpp"

namespace brwlab {

RecursiveTree::RecursiveTree(std::vector<std::uint64_t> parents)
    : parents_(std::move(parents)) {
  depth_.assign(parents_.size() + 1, 0);
  for (std::uint64_t i = 2; i <= parents_.size() + 1; ++i) {
    const std::uint64_t p = parents_[i - 2];
    if (p == 0 || p >= i) {
      throw std::invalid_argument("recursive tree needs 1 <= parent(i) < i (node " +
                                  std::to_string(i) + ")");
    }
    depth_[i - 1] = depth_[p - 1] + 1;
    height_ = std::max(height_, depth_[i - 1]);
  }
}

RecursiveTree build_rrt(std::uint64_t m, RngStream& rng) {
  if (m == 0) throw std::invalid_argument("build_rrt requires m >= 1");
  std::vector<std::uint64_t> parents;
  parents.reserve(m - 1);
  for (std::uint64_t i = 1; i < m; ++i) parents.push_back(rng.uniform_int(1, i));
  return RecursiveTree(std::move(parents));
}

RecursiveTree rrt_from_pwit(std::uint64_t m, const BrwSample& sample,
                            std::uint64_t work_limit) {
  if (sample.model() != Model::pwit) {
    throw std::invalid_argument("rrt_from_pwit needs a PWIT sample");
  }
  const std::vector<BrwNode> nodes = lowest_m(m, sample, work_limit);
  std::vector<std::uint64_t> parents;
  parents.reserve(m - 1);
  for (std::size_t i = 1; i < nodes.size(); ++i) parents.push_back(*nodes[i].parent_id + 1);
  return RecursiveTree(std::move(parents));
}

HeightTail height_tail(std::uint64_t m, const std::vector<std::uint64_t>& ks,
                       std::uint64_t replicates, const RngStream& rng, unsigned threads) {
  if (replicates == 0) throw std::invalid_argument("height_tail needs replicates >= 1");
  std::vector<std::uint32_t> heights(replicates);
  parallel_for(replicates, threads, [&](std::uint64_t i) {
    RngStream stream = rng.substream(i);
    heights[i] = build_rrt(m, stream).height();
  });
  HeightTail out;
  out.m = m;
  for (const auto h : heights) out.heights.add(h);
  const double mean = out.heights.mean();
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> w;
  for (const std::uint64_t k : ks) {
    std::uint64_t hits = 0;
    for (const auto h : heights) hits += std::abs(h - mean) >= static_cast<double>(k);
    const Proportion p = proportion(hits, replicates);
    out.tail.emplace_back(k, p);
    if (hits > 0) {
      x.push_back(static_cast<double>(k));
      y.push_back(std::log(p.p));
      w.push_back(static_cast<double>(hits));
    }
  }
  out.decay_rate = x.size() >= 2 ? -weighted_linear_fit(x, y, w).slope : std::nan("");
  return out;
}

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t pow_mod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t result = 1 % m;
  a %= m;
  while (e > 0) {
    if (e & 1) result = mul_mod(result, a, m);
    a = mul_mod(a, a, m);
    e >>= 1;
  }
  return result;
}

bool is_prime(std::uint64_t n) {
  static constexpr std::uint64_t kBases[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  if (n < 2) return false;
  for (const std::uint64_t p : kBases) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  unsigned r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  for (const std::uint64_t a : kBases) {
    std::uint64_t x = pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (unsigned i = 1; i < r && composite; ++i) {
      x = mul_mod(x, x, n);
      if (x == n - 1) composite = false;
    }
    if (composite) return false;
  }
  return true;
}

namespace {

constexpr std::uint64_t kTrialLimit = 1'000'000;

std::vector<std::uint32_t> sieve_below(std::uint64_t limit) {
  std::vector<char> composite(limit, 0);
  std::vector<std::uint32_t> primes;
  for (std::uint64_t i = 2; i < limit; ++i) {
    if (composite[i]) continue;
    primes.push_back(static_cast<std::uint32_t>(i));
    for (std::uint64_t j = i * i; j < limit; j += i) composite[j] = 1;
  }
  return primes;
}

const std::vector<std::uint32_t>& small_primes() {
  static const std::vector<std::uint32_t> primes = sieve_below(kTrialLimit);
  return primes;
}

// A non-trivial factor of the odd composite n.
std::uint64_t brent_factor(std::uint64_t n) {
  constexpr std::uint64_t kBatch = 128;
  for (std::uint64_t c = 1;; ++c) {
    const auto f = [&](std::uint64_t x) { return (mul_mod(x, x, n) + c) % n; };
    std::uint64_t y = 2;
    std::uint64_t x = y;
    std::uint64_t ys = y;
    std::uint64_t g = 1;
    std::uint64_t q = 1;
    for (std::uint64_t r = 1; g == 1; r <<= 1) {
      x = y;
      for (std::uint64_t i = 0; i < r; ++i) y = f(y);
      for (std::uint64_t k = 0; k < r && g == 1; k += kBatch) {
        ys = y;
        for (std::uint64_t i = 0; i < std::min(kBatch, r - k); ++i) {
          y = f(y);
          q = mul_mod(q, x > y ? x - y : y - x, n);
        }
        g = std::gcd(q, n);
      }
    }
    if (g == n) {
      // The batch overshot; step one at a time from the saved point.
      do {
        ys = f(ys);
        g = std::gcd(x > ys ? x - ys : ys - x, n);
      } while (g == 1);
    }
    if (g != n) return g;
  }
}

void split(std::uint64_t n, std::vector<std::uint64_t>& out) {
  if (n == 1) return;
  if (is_prime(n)) {
    out.push_back(n);
    return;
  }
  const std::uint64_t d = brent_factor(n);
  split(d, out);
  split(n / d, out);
}

}  // namespace

std::vector<std::pair<std::uint64_t, std::uint32_t>> factorize(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("cannot factor 0");
  std::vector<std::pair<std::uint64_t, std::uint32_t>> out;
  for (const std::uint32_t p : small_primes()) {
    if (static_cast<std::uint64_t>(p) * p > n) break;
    if (n % p != 0) continue;
    std::uint32_t e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    out.emplace_back(p, e);
  }
  if (n == 1) return out;
  if (n < kTrialLimit * kTrialLimit) {  // no factor below 10^6 left
    out.emplace_back(n, 1);
    return out;
  }
  std::vector<std::uint64_t> large;
  split(n, large);
  std::sort(large.begin(), large.end());
  for (const std::uint64_t p : large) {
    if (!out.empty() && out.back().first == p) {
      ++out.back().second;
    } else {
      out.emplace_back(p, 1);
    }
  }
  return out;
}

PrattTree build_pratt(std::uint64_t p) {
  if (!is_prime(p)) throw std::invalid_argument(std::to_string(p) + " is not prime");
  PrattTree tree;
  tree.prime = p;
  if (p == 2) return tree;
  for (const auto& [q, e] : factorize(p - 1)) {
    tree.children.push_back(build_pratt(q));
    tree.height = std::max(tree.height, tree.children.back().height + 1);
  }
  return tree;
}

std::uint32_t PrattHeights::height(std::uint64_t p) {
  {
    const std::shared_lock lock(mutex_);
    const auto it = memo_.find(p);
    if (it != memo_.end()) return it->second;
  }
  if (!is_prime(p)) throw std::invalid_argument(std::to_string(p) + " is not prime");
  return compute(p);
}

std::uint32_t PrattHeights::compute(std::uint64_t p) {
  if (p == 2) return 0;
  {
    const std::shared_lock lock(mutex_);
    const auto it = memo_.find(p);
    if (it != memo_.end()) return it->second;
  }
  std::uint32_t h = 0;
  for (const auto& [q, e] : factorize(p - 1)) h = std::max(h, compute(q) + 1);
  const std::unique_lock lock(mutex_);
  memo_.emplace(p, h);
  return h;
}

std::size_t PrattHeights::memo_size() const {
  const std::shared_lock lock(mutex_);
  return memo_.size();
}

std::uint32_t pratt_height(std::uint64_t p) {
  static PrattHeights heights;
  return heights.height(p);
}

std::vector<std::uint64_t> primes_in(std::uint64_t lo, std::uint64_t hi) {
  std::vector<std::uint64_t> out;
  if (hi < 2 || lo > hi) return out;
  lo = std::max<std::uint64_t>(lo, 2);
  auto root = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(hi)));
  while (root * root > hi) --root;
  while ((root + 1) * (root + 1) <= hi) ++root;
  const std::vector<std::uint32_t> base = sieve_below(root + 1);
  constexpr std::uint64_t kSegment = 1 << 20;
  std::vector<char> composite(kSegment);
  for (std::uint64_t start = lo; start <= hi; start += kSegment) {
    const std::uint64_t end = std::min(hi, start + kSegment - 1);
    std::fill(composite.begin(), composite.end(), 0);
    for (const std::uint32_t p : base) {
      const std::uint64_t pp = static_cast<std::uint64_t>(p) * p;
      if (pp > end) break;
      std::uint64_t first = std::max(pp, (start + p - 1) / p * p);
      for (std::uint64_t j = first; j <= end; j += p) composite[j - start] = 1;
    }
    for (std::uint64_t x = start; x <= end; ++x) {
      if (!composite[x - start]) out.push_back(x);
    }
    if (end == hi) break;
  }
  return out;
}

std::vector<PrattSurveyRecord> pratt_survey(std::uint64_t x_lo, std::uint64_t x_hi,
                                            const PrattSurveyOptions& options) {
  if (x_lo < 2 || x_lo >= x_hi || x_hi > (std::uint64_t{1} << 50)) {
    throw std::invalid_argument("pratt_survey requires 2 <= x_lo < x_hi <= 2^50");
  }
  if (x_hi - x_lo > options.max_span) {
    throw std::invalid_argument("survey range " + std::to_string(x_hi - x_lo) +
                                " exceeds the work budget of " +
                                std::to_string(options.max_span));
  }
  const std::vector<std::uint64_t> primes = primes_in(x_lo, x_hi);
  std::vector<PrattSurveyRecord> records(primes.size());
  parallel_for(primes.size(), options.threads, [&](std::uint64_t i) {
    PrattSurveyRecord& r = records[i];
    r.p = primes[i];
    r.H = pratt_height(r.p);
    if (r.p > 2) r.factors = factorize(r.p - 1);
    const double lp = std::log(static_cast<double>(r.p));
    r.E_printed = r.H - (std::numbers::e * lp - 1.5 * std::log(lp));
    const double llp = std::log(lp);
    r.E_loglog = llp > 0.0 ? r.H - (std::numbers::e * llp - 1.5 * std::log(llp)) : std::nan("");
  });
  return records;
}

}  // namespace brwlab
