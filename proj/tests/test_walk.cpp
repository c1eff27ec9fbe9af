#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "brwlab/analytics.hpp"
#include "brwlab/engine.hpp"
#include "brwlab/stats.hpp"
#include "brwlab/walk.hpp"
#include "doctest.h"

using namespace brwlab;

namespace {

// All h vectors with 0 < h_1 < ... < h_n = n + k, in lexicographic order.
std::vector<std::vector<std::uint64_t>> enumerate_h(std::uint64_t n, std::uint64_t k) {
  std::vector<std::vector<std::uint64_t>> out;
  std::vector<std::uint64_t> current;
  std::function<void(std::uint64_t)> rec = [&](std::uint64_t last) {
    if (current.size() + 1 == n) {
      current.push_back(n + k);
      out.push_back(current);
      current.pop_back();
      return;
    }
    for (std::uint64_t h = last + 1; h < n + k; ++h) {
      current.push_back(h);
      rec(h);
      current.pop_back();
    }
  };
  rec(0);
  return out;
}

// Direct transcription of the four predicates, written independently of
// event_flags: loops over every index and builds the window from integers.
EventFlags reference_flags(const WalkSample& w, double a) {
  const auto n = static_cast<long>(w.n);
  const double wn = w.w[n - 1];
  EventFlags f{true, true, false, false};
  for (long i = 1; i <= n; ++i) {
    const double line = static_cast<double>(i) / static_cast<double>(n) * wn;
    f.leading = f.leading && w.w[i - 1] >= line - a;
    f.trailing = f.trailing && w.w[i - 1] <= line + a;
  }
  for (long m = 1; m < n; ++m) {
    const double reach = std::pow(a, 40.0);
    if (static_cast<double>(m) < reach || static_cast<double>(m) > static_cast<double>(n) - reach) {
      continue;
    }
    const double margin = std::pow(static_cast<double>(std::min(m, n - m)), 0.025);
    if (w.w[m - 1] - static_cast<double>(m) / static_cast<double>(n) * wn <= margin) {
      f.near_chord = true;
    }
  }
  const auto hn = static_cast<double>(w.h[n - 1]);
  for (long j = 1; j <= n; ++j) {
    const auto hj = static_cast<double>(w.h[j - 1]);
    if (hj > 3.0 * a * j || hn - hj > 3.0 * a * (n - j)) f.heavy_weights = true;
  }
  return f;
}

bool same(const EventFlags& x, const EventFlags& y) {
  return x.leading == y.leading && x.trailing == y.trailing && x.near_chord == y.near_chord &&
         x.heavy_weights == y.heavy_weights;
}

}  // namespace

TEST_CASE("sample_h examples") {
  RngStream rng(1, 1);
  std::uint64_t first = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const auto h = sample_h(2, 1, rng);
    REQUIRE(h.size() == 2);
    CHECK(h[1] == 3);
    if (h[0] == 1) ++first;
    else CHECK(h[0] == 2);
  }
  const Proportion p = proportion(first, draws);
  CHECK(std::abs(p.p - 0.5) < 3.0 * std::sqrt(0.25 / draws));
  for (int i = 0; i < 100; ++i) CHECK(sample_h(3, 0, rng) == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(sample_h(1, 7, rng) == std::vector<std::uint64_t>{8});
  CHECK_THROWS_AS(sample_h(0, 1, rng), std::invalid_argument);
}

TEST_CASE("sample_h is uniform on every small weight set") {
  RngStream rng(2, 0);
  int tested = 0;
  for (std::uint64_t n = 2; n <= 12; ++n) {
    for (std::uint64_t k = 1; k <= 12; ++k) {
      const auto all = enumerate_h(n, k);
      REQUIRE(all.size() == *count_tnk({n, k}).exact);
      if (all.size() > 100) continue;
      std::map<std::vector<std::uint64_t>, std::size_t> slot;
      for (std::size_t i = 0; i < all.size(); ++i) slot[all[i]] = i;
      std::vector<std::uint64_t> counts(all.size(), 0);
      const std::size_t draws = 200 * all.size();
      for (std::size_t i = 0; i < draws; ++i) {
        const auto it = slot.find(sample_h(n, k, rng));
        REQUIRE(it != slot.end());
        ++counts[it->second];
      }
      CAPTURE(n);
      CAPTURE(k);
      CHECK(chi_square_uniform_pvalue(counts) > 1e-4);
      ++tested;
    }
  }
  CHECK(tested > 20);
}

TEST_CASE("sample_walk marginals") {
  RngStream rng(3, 0);
  StatSummary end;
  std::vector<double> single;
  for (int i = 0; i < 100000; ++i) {
    const WalkSample w = sample_walk(5, 3, rng);
    REQUIRE(w.w.size() == 5);
    CHECK(w.h.back() == 8);
    for (std::size_t j = 1; j < w.w.size(); ++j) CHECK(w.w[j] > w.w[j - 1]);
    end.add(w.w.back());
    single.push_back(sample_walk(1, 0, rng).w[0]);
  }
  CHECK(std::abs(end.mean() - 8.0) < 3.0 * end.standard_error());
  // Var of the sample variance of Gamma(8): (mu4 - sigma^4 (N-3)/(N-1)) / N,
  // with mu4 = 3 * 8^2 + 6 * 8 for Gamma(8).
  const double n = static_cast<double>(end.count());
  const double var_se = std::sqrt((3.0 * 64.0 + 48.0 - 64.0 * (n - 3.0) / (n - 1.0)) / n);
  CHECK(std::abs(end.variance() - 8.0) < 3.0 * var_se);
  CHECK(ks_test(single, [](double x) { return 1.0 - std::exp(-x); }) > 1e-3);
}

TEST_CASE("increments are Gamma given the weights") {
  RngStream rng(4, 0);
  std::map<std::uint64_t, std::vector<double>> by_gap;
  for (int i = 0; i < 60000; ++i) {
    const WalkSample w = sample_walk(4, 4, rng);
    by_gap[w.h[2] - w.h[1]].push_back(w.w[2] - w.w[1]);
  }
  for (const auto& [gap, values] : by_gap) {
    if (values.size() < 500) continue;
    CAPTURE(gap);
    CHECK(ks_test(values, [g = gap](double x) { return gamma_cdf(g, x); }) > 1e-3);
  }
}

TEST_CASE("condition_on_endpoint") {
  RngStream rng(5, 0);
  const WalkSample w = sample_walk(6, 2, rng);
  const WalkSample c = condition_on_endpoint(w, 3.25);
  CHECK(c.w.back() == 3.25);
  for (std::size_t i = 0; i + 1 < w.w.size(); ++i) {
    CHECK(c.w[i] / c.w.back() == doctest::Approx(w.w[i] / w.w.back()).epsilon(1e-14));
  }
  CHECK(c.h == w.h);
  CHECK_THROWS_AS(condition_on_endpoint(w, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(condition_on_endpoint(w, -1.0), std::invalid_argument);
  // L_0 and R_0 depend only on the ratios W_i / W_n.
  for (int i = 0; i < 2000; ++i) {
    const WalkSample x = sample_walk(12, 5, rng);
    for (double S : {0.5, 7.0, 90.0}) {
      const EventFlags a = event_flags(x, {});
      const EventFlags b = event_flags(condition_on_endpoint(x, S), {});
      CHECK(a.leading == b.leading);
      CHECK(a.trailing == b.trailing);
    }
  }
}

TEST_CASE("event flags examples") {
  RngStream rng(6, 0);
  for (int i = 0; i < 500; ++i) {
    const WalkSample w = sample_walk(15, 6, rng);
    EventParams p;
    p.a = w.w.back();
    const EventFlags f = event_flags(w, p);
    CHECK(f.leading);
    CHECK(f.trailing);
  }
  for (int i = 0; i < 200; ++i) {
    const WalkSample w = sample_walk(20, 0, rng);
    for (double a : {1.0 / 3.0, 0.5, 1.0, 4.0}) {
      EventParams p;
      p.a = a;
      CHECK_FALSE(event_flags(w, p).heavy_weights);
    }
  }
  for (int i = 0; i < 3000; ++i) {
    const WalkSample w = condition_on_endpoint(sample_walk(100, 30, rng), 100.0 * rng.uniform() + 1.0);
    for (double a : {0.0, 0.5, 1.0, 1.01}) {
      EventParams p;
      p.a = a;
      CAPTURE(a);
      CHECK(same(event_flags(w, p), reference_flags(w, a)));
    }
  }
  EventParams negative;
  negative.a = -1.0;
  CHECK_THROWS_AS(event_flags(sample_walk(3, 1, rng), negative), std::invalid_argument);
}

TEST_CASE("rotations and the cycle lemma") {
  RngStream rng(7, 0);
  const WalkSample w = sample_walk(9, 3, rng);
  const auto rot = rotations(w);
  REQUIRE(rot.size() == 9);
  CHECK(rot[0].w == w.w);
  CHECK(rot[0].h == w.h);
  for (const WalkSample& r : rot) {
    CHECK(r.w.back() == w.w.back());
    CHECK(r.h.back() == w.h.back());
    for (std::size_t j = 1; j < r.w.size(); ++j) {
      CHECK(r.w[j] > r.w[j - 1]);
      CHECK(r.h[j] > r.h[j - 1]);
    }
  }
  for (int i = 0; i < 100000; ++i) {
    const WalkSample x = sample_walk(10, 4, rng);
    int leading = 0;
    int trailing = 0;
    for (const WalkSample& r : rotations(x)) {
      const EventFlags f = event_flags(r, {});
      leading += f.leading;
      trailing += f.trailing;
    }
    REQUIRE(leading == 1);
    REQUIRE(trailing == 1);
  }
}

TEST_CASE("P(L_0 | W_n = S) = 1/n") {
  const EventExpression leading("L");
  const EventExpression trailing("R");
  for (std::uint64_t n : {2u, 5u, 10u, 20u}) {
    const auto e = estimate_event_prob(n, n / 2, static_cast<double>(n), {}, leading, 100000,
                                       RngStream(8, n));
    const double se = std::sqrt((1.0 / n) * (1.0 - 1.0 / n) / 100000.0);
    CAPTURE(n);
    CHECK(std::abs(e.proportion.p - 1.0 / n) < 3.0 * se);
    const auto r = estimate_event_prob(n, n / 2, static_cast<double>(n), {}, trailing, 100000,
                                       RngStream(9, n));
    CHECK(std::abs(r.proportion.p - 1.0 / n) < 3.0 * se);
  }
  const auto e = estimate_event_prob(10, 4, 14.0, {}, leading, 100000, RngStream(10, 0));
  CHECK(std::abs(e.proportion.p - 0.1) < 3.0 * std::sqrt(0.09 / 100000.0));
  CHECK(e.proportion.wilson_lo < 0.1);
  CHECK(e.proportion.wilson_hi > 0.1);
}

TEST_CASE("P(L_0 | W_n = S) does not depend on S") {
  const EventExpression leading("L");
  std::vector<Proportion> est;
  for (double S : {5.0, 10.0, 20.0}) {
    est.push_back(estimate_event_prob(10, 4, S, {}, leading, 100000, RngStream(11, 0)).proportion);
  }
  for (std::size_t i = 0; i < est.size(); ++i) {
    for (std::size_t j = i + 1; j < est.size(); ++j) {
      const double se = std::hypot(est[i].se, est[j].se);
      CHECK(std::abs(est[i].p - est[j].p) <= 3.0 * se);
    }
  }
}

TEST_CASE("estimates do not depend on the thread count") {
  const EventExpression expr("L & !D | B");
  EventParams p;
  p.a = 1.0;
  const auto one = estimate_event_prob(30, 10, 20.0, p, expr, 5000, RngStream(12, 0), 1);
  const auto four = estimate_event_prob(30, 10, 20.0, p, expr, 5000, RngStream(12, 0), 4);
  CHECK(one.proportion.successes == four.proportion.successes);
  CHECK(one.indicators.sorted_values() == four.indicators.sorted_values());
}

TEST_CASE("event expressions") {
  const EventFlags f{true, false, true, false};
  CHECK(EventExpression("L").evaluate(f));
  CHECK_FALSE(EventExpression("R").evaluate(f));
  CHECK(EventExpression("L & B").evaluate(f));
  CHECK_FALSE(EventExpression("L & D").evaluate(f));
  CHECK(EventExpression("R | B & L").evaluate(f));
  CHECK_FALSE(EventExpression("(R | B) & D").evaluate(f));
  CHECK(EventExpression("!R & !!L").evaluate(f));
  CHECK(EventExpression(" ( L|D ) ").evaluate(f));
  CHECK_THROWS_AS(EventExpression("L &"), std::invalid_argument);
  CHECK_THROWS_AS(EventExpression("(L"), std::invalid_argument);
  CHECK_THROWS_AS(EventExpression("X"), std::invalid_argument);
  CHECK_THROWS_AS(EventExpression("L R"), std::invalid_argument);
  CHECK_THROWS_AS(EventExpression(""), std::invalid_argument);
}

TEST_CASE("sub-walks split by a fixed weight are fresh walks") {
  // Condition a (6, 3) walk on h_3 = 4; the last three increments then form
  // a (3, 2) walk and the first three a (3, 1) walk.
  RngStream rng(13, 0);
  std::vector<double> tail_first;
  std::vector<double> head_second;
  while (tail_first.size() < 10000) {
    const WalkSample w = sample_walk(6, 3, rng);
    if (w.h[2] != 4) continue;
    tail_first.push_back(w.w[3] - w.w[2]);
    head_second.push_back(w.w[1]);
  }
  std::vector<double> fresh_tail;
  std::vector<double> fresh_head;
  for (int i = 0; i < 10000; ++i) {
    fresh_tail.push_back(sample_walk(3, 2, rng).w[0]);
    fresh_head.push_back(sample_walk(3, 1, rng).w[1]);
  }
  CHECK(ks_test_two_sample(tail_first, fresh_tail) > 1e-3);
  CHECK(ks_test_two_sample(head_second, fresh_head) > 1e-3);
}

TEST_CASE("sampled walks match paths of weight-4 nodes in the tree") {
  // In a census far above the typical displacement every generation-3 node
  // of weight 4 is present; pick one uniformly per tree.
  RngStream pick(14, 0);
  std::vector<double> tree_w2;
  std::vector<double> tree_w3;
  for (int i = 0; tree_w2.size() < 10000; ++i) {
    const BrwSample sample(Model::pwit, RngStream(15, replicate_stream("walk-law", i)));
    CensusOptions options;
    options.record_paths = true;
    const CensusTable table = census(3, 30.0, sample, options);
    std::vector<const std::vector<double>*> matching;
    for (const auto& [weights, partial] : table.depth_n_paths) {
      if (weights.back() == 4) matching.push_back(&partial);
    }
    REQUIRE(matching.size() == 3);
    const auto& chosen = *matching[pick.uniform_int(0, 2)];
    tree_w2.push_back(chosen[1]);
    tree_w3.push_back(chosen[2]);
  }
  std::vector<double> walk_w2;
  std::vector<double> walk_w3;
  RngStream rng(16, 0);
  for (int i = 0; i < 10000; ++i) {
    const WalkSample w = sample_walk(3, 1, rng);
    walk_w2.push_back(w.w[1]);
    walk_w3.push_back(w.w[2]);
  }
  CHECK(ks_test_two_sample(tree_w2, walk_w2) > 1e-3);
  CHECK(ks_test_two_sample(tree_w3, walk_w3) > 1e-3);
}
