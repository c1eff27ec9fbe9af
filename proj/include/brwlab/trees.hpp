#pragma once

#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <unordered_map>
#include <utility>
#include <vector>

#include "brwlab/engine.hpp"
#include "brwlab/rng.hpp"
#include "brwlab/stats.hpp"

namespace brwlab {

/// Rooted tree on labels 1..m where every node i > 1 has parent(i) < i.
class RecursiveTree {
 public:
  /// parents[i] is the parent of label i + 2, so parents has m - 1 entries.
  explicit RecursiveTree(std::vector<std::uint64_t> parents);

  std::uint64_t size() const { return depth_.size(); }
  /// Parent label of node i >= 2.
  std::uint64_t parent(std::uint64_t i) const { return parents_.at(i - 2); }
  std::uint32_t depth(std::uint64_t i) const { return depth_.at(i - 1); }
  /// Largest depth; a single node has height 0.
  std::uint32_t height() const { return height_; }

 private:
  std::vector<std::uint64_t> parents_;
  std::vector<std::uint32_t> depth_;
  std::uint32_t height_ = 0;
};

/// Node i + 1 attaches to a uniform node of {1, ..., i}.
RecursiveTree build_rrt(std::uint64_t m, RngStream& rng);

/// Subtree of the PWIT induced by its m lowest-displacement nodes, labelled
/// by displacement rank.  `sample` must be a PWIT.
RecursiveTree rrt_from_pwit(std::uint64_t m, const BrwSample& sample,
                            std::uint64_t work_limit = 20'000'000);

struct HeightTail {
  std::uint64_t m = 0;
  StatSummary heights;
  /// (k, P(|H_m - mean| >= k)) for each requested k, with the sample mean.
  std::vector<std::pair<std::uint64_t, Proportion>> tail;
  /// -slope of log P against k over the k with at least one hit.
  double decay_rate = 0.0;
};

/// Tail of |H_m - E H_m| from `replicates` direct recursive trees; replicate
/// i uses rng.substream(i).
HeightTail height_tail(std::uint64_t m, const std::vector<std::uint64_t>& ks,
                       std::uint64_t replicates, const RngStream& rng, unsigned threads = 1);

// Number theory on 64-bit integers.

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m);
std::uint64_t pow_mod(std::uint64_t a, std::uint64_t e, std::uint64_t m);

/// Deterministic Miller-Rabin (first twelve prime bases; exact below 2^64).
bool is_prime(std::uint64_t n);

/// Prime factorization p_1^e_1 ... as (p_i, e_i) with increasing p_i:
/// trial division by primes below 10^6, then Pollard rho with Brent cycles.
std::vector<std::pair<std::uint64_t, std::uint32_t>> factorize(std::uint64_t n);

struct PrattTree {
  std::uint64_t prime = 2;
  std::vector<PrattTree> children;  // distinct prime factors of prime - 1
  std::uint32_t height = 0;
};

/// Full tree of p.  Throws std::invalid_argument if p is not prime.
PrattTree build_pratt(std::uint64_t p);

/// Pratt heights with a memo shared between threads.
class PrattHeights {
 public:
  /// H(p) = 1 + max H(q) over primes q | p - 1, H(2) = 0.
  std::uint32_t height(std::uint64_t p);
  std::size_t memo_size() const;

 private:
  std::uint32_t compute(std::uint64_t p);

  mutable std::shared_mutex mutex_;
  std::unordered_map<std::uint64_t, std::uint32_t> memo_;
};

/// Process-wide memo used by pratt_height.
std::uint32_t pratt_height(std::uint64_t p);

struct PrattSurveyRecord {
  std::uint64_t p = 0;
  std::uint32_t H = 0;
  double E_printed = 0.0;  // H - (e log p - 1.5 log log p)
  double E_loglog = 0.0;   // H - (e log log p - 1.5 log log log p); NaN for p = 2
  std::vector<std::pair<std::uint64_t, std::uint32_t>> factors;  // of p - 1
};

struct PrattSurveyOptions {
  std::uint64_t max_span = 100'000'000;  // largest x_hi - x_lo accepted
  unsigned threads = 1;
};

/// Every prime in [x_lo, x_hi] in increasing order (segmented sieve) with
/// its height and both centred errors.  Requires 2 <= x_lo < x_hi <= 2^50.
std::vector<PrattSurveyRecord> pratt_survey(std::uint64_t x_lo, std::uint64_t x_hi,
                                            const PrattSurveyOptions& options = {});

/// All primes in [lo, hi] by a segmented sieve of Eratosthenes.
std::vector<std::uint64_t> primes_in(std::uint64_t lo, std::uint64_t hi);

}  // namespace brwlab
