#include <cmath>
#include <stdexcept>
#include <vector>

#include "brwlab/analytics.hpp"
#include "brwlab/engine.hpp"
#include "brwlab/stats.hpp"
#include "doctest.h"

using namespace brwlab;

namespace {

BrwSample sample_for(Model model, std::uint64_t seed, std::uint64_t replicate) {
  return BrwSample(model, RngStream(seed, replicate_stream("engine-test", replicate)));
}

}  // namespace

TEST_CASE("M_1 on the PWIT is Exponential(1)") {
  std::vector<double> values;
  for (int i = 0; i < 100000; ++i) {
    values.push_back(min_displacement(1, sample_for(Model::pwit, 1, i)).value);
  }
  CHECK(ks_test(values, [](double x) { return 1.0 - std::exp(-x); }) > 1e-3);
}

TEST_CASE("M_1 on the PD walk is the smallest stick displacement") {
  for (int i = 0; i < 2000; ++i) {
    const BrwSample sample = sample_for(Model::pd, 2, i);
    DisplacementStream stream = sample.children_of(sample.root_key());
    double best = INFINITY;
    for (int k = 0; k < 10000; ++k) best = std::min(best, stream.advance().displacement);
    CHECK(min_displacement(1, sample).value == best);
  }
}

TEST_CASE("uniform-cost search equals exhaustive DFS") {
  for (Model model : {Model::pwit, Model::pd}) {
    for (std::uint32_t n : {2u, 5u, 8u}) {
      for (int i = 0; i < 100; ++i) {
        const BrwSample sample = sample_for(model, 3, i);
        const SearchResult r = min_displacement(n, sample);
        const auto oracle = min_displacement_dfs(n, sample, m_n(n) + 6.0);
        REQUIRE(oracle.has_value());
        CAPTURE(model_name(model));
        CAPTURE(n);
        CHECK(r.value == *oracle);
        CHECK(r.argmin_path.size() == n);
        CHECK(std::abs(path_displacement(sample, r.argmin_path) - r.value) < 1e-12);
        CHECK(r.value <= r.budget_used);
      }
    }
  }
}

TEST_CASE("branch and bound equals uniform-cost search") {
  for (Model model : {Model::pwit, Model::pd}) {
    for (std::uint32_t n : {1u, 3u, 10u, 16u, 22u}) {
      for (int i = 0; i < 40; ++i) {
        const BrwSample sample = sample_for(model, 17, i);
        const SearchResult exact = min_displacement(n, sample);
        for (std::size_t width : {1u, 8u, 256u}) {
          const CensoredSearch b = min_displacement_bnb(n, sample, {}, width);
          REQUIRE(b.result.has_value());
          CAPTURE(model_name(model));
          CAPTURE(n);
          CAPTURE(width);
          CHECK(b.result->value == exact.value);
          CHECK(b.result->argmin_path == exact.argmin_path);
          CHECK(b.result->value <= b.result->budget_used);
        }
      }
    }
  }
}

TEST_CASE("branch and bound censoring") {
  for (Model model : {Model::pwit, Model::pd}) {
    for (int i = 0; i < 100; ++i) {
      const BrwSample sample = sample_for(model, 18, i);
      const double exact = min_displacement(12, sample).value;
      SearchOptions capped;
      capped.value_cap = m_n(12) + 0.5;
      const CensoredSearch c = min_displacement_bnb(12, sample, capped);
      CHECK_FALSE(c.work_limited);
      if (exact <= capped.value_cap) {
        REQUIRE(c.result.has_value());
        CHECK(c.result->value == exact);
      } else {
        CHECK_FALSE(c.result.has_value());
        CHECK(c.lower_bound == capped.value_cap);
      }
      SearchOptions tiny;
      tiny.work_limit = 5;
      const CensoredSearch w = min_displacement_bnb(12, sample, tiny);
      CHECK(w.work_limited);
      CHECK_FALSE(w.result.has_value());
    }
  }
  const BrwSample sample = sample_for(Model::pwit, 18, 0);
  CHECK_THROWS_AS(min_displacement_bnb(0, sample), std::invalid_argument);
  CHECK_THROWS_AS(min_displacement_bnb(51, sample), DepthCapExceeded);
  CHECK_THROWS_AS(min_displacement_bnb(5, sample, {}, 0), std::invalid_argument);
}

TEST_CASE("search is deterministic") {
  const BrwSample sample = sample_for(Model::pd, 4, 17);
  const SearchResult a = min_displacement(12, sample);
  const SearchResult b = min_displacement(12, sample);
  CHECK(a.value == b.value);
  CHECK(a.argmin_path == b.argmin_path);
  CHECK(a.nodes_expanded == b.nodes_expanded);
}

TEST_CASE("search errors") {
  const BrwSample sample = sample_for(Model::pwit, 5, 0);
  CHECK_THROWS_AS(min_displacement(0, sample), std::invalid_argument);
  CHECK_THROWS_AS(min_displacement(51, sample), DepthCapExceeded);
  SearchOptions tiny;
  tiny.work_limit = 10;
  CHECK_THROWS_AS(min_displacement(20, sample, tiny), WorkLimitExceeded);
  const CensoredSearch censored = min_displacement_censored(20, sample, tiny);
  CHECK_FALSE(censored.result.has_value());
  CHECK(censored.work_limited);
  CHECK(censored.lower_bound < min_displacement(20, sample).value);
}

TEST_CASE("censored search agrees with the exact search below its cap") {
  for (int i = 0; i < 200; ++i) {
    const BrwSample sample = sample_for(Model::pwit, 6, i);
    const double exact = min_displacement(10, sample).value;
    SearchOptions capped;
    capped.value_cap = m_n(10);
    const CensoredSearch c = min_displacement_censored(10, sample, capped);
    if (exact <= capped.value_cap) {
      REQUIRE(c.result.has_value());
      CHECK(c.result->value == exact);
    } else {
      CHECK_FALSE(c.result.has_value());
      CHECK(c.lower_bound >= capped.value_cap);
      CHECK(c.lower_bound <= exact);
    }
  }
}

TEST_CASE("M_30 median sits near m_n") {
  for (Model model : {Model::pwit, Model::pd}) {
    StatSummary values;
    for (int i = 0; i < 81; ++i) {
      values.add(min_displacement_bnb(30, sample_for(model, 7, i)).result->value);
    }
    CHECK(std::abs(values.median() - m_n(30)) < 4.0);
  }
}

TEST_CASE("census") {
  for (Model model : {Model::pwit, Model::pd}) {
    const auto trivial = census(4, 3.0, sample_for(model, 8, 0));
    CHECK(trivial.per_level[0] == 1);
    StatSummary t5;
    StatSummary t31;
    const LevelClass c31(3, 1);
    const double t31_expected = integrate([&](double t) { return f_nk(c31, t).to_linear(); }, 0.0, 2.0);
    CensusOptions options;
    options.by_class = true;
    for (int i = 0; i < 100000; ++i) {
      const CensusTable table = census(5, 2.0, sample_for(model, 9, i), options);
      CHECK(table.per_level[0] == 1);
      t5.add(static_cast<double>(table.per_level[5]));
      const auto it = table.per_class.find({3, 1});
      t31.add(it == table.per_class.end() ? 0.0 : static_cast<double>(it->second));
    }
    CAPTURE(model_name(model));
    CHECK(std::abs(t5.mean() - 4.0 / 15.0) < 3.0 * t5.standard_error());
    CHECK(std::abs(t31.mean() - t31_expected) < 3.0 * t31.standard_error());
  }
  CHECK_THROWS_AS(census(10, 40.0, sample_for(Model::pwit, 8, 0)), WorkLimitExceeded);
}

TEST_CASE("census is consistent with the search") {
  for (Model model : {Model::pwit, Model::pd}) {
    for (int i = 0; i < 50; ++i) {
      const BrwSample sample = sample_for(model, 10, i);
      const double mn = min_displacement(9, sample).value;
      CHECK(census(9, mn - 1e-9, sample).per_level[9] == 0);
      CHECK(census(9, mn, sample).per_level[9] >= 1);
    }
  }
}

TEST_CASE("lowest m nodes") {
  const BrwSample sample = sample_for(Model::pwit, 11, 0);
  const auto nodes = lowest_m(30, sample);
  REQUIRE(nodes.size() == 30);
  CHECK(nodes[0].displacement == 0.0);
  CHECK_FALSE(nodes[0].parent_id.has_value());
  CHECK(nodes[1].depth == 1);
  CHECK(nodes[1].weight == 1);  // w_2 is child 1 of the root
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    CHECK(nodes[i].displacement >= nodes[i - 1].displacement);
    REQUIRE(nodes[i].parent_id.has_value());
    CHECK(*nodes[i].parent_id < nodes[i].id);
    CHECK(nodes[*nodes[i].parent_id].depth + 1 == nodes[i].depth);
    CHECK(nodes[*nodes[i].parent_id].displacement < nodes[i].displacement);
  }
  CHECK_THROWS_AS(lowest_m(0, sample), std::invalid_argument);
}

TEST_CASE("S(w_m) is the maximum of m-1 exponentials") {
  StatSummary s50;
  for (int i = 0; i < 10000; ++i) {
    s50.add(lowest_m(50, sample_for(Model::pwit, 12, i)).back().displacement);
  }
  CHECK(std::abs(s50.mean() - har(49)) < 3.0 * s50.standard_error());
  std::vector<double> s20;
  for (int i = 0; i < 10000; ++i) {
    s20.push_back(lowest_m(20, sample_for(Model::pwit, 13, i)).back().displacement);
  }
  CHECK(ks_test(s20, [](double x) { return std::pow(1.0 - std::exp(-x), 19.0); }) > 1e-3);
}
