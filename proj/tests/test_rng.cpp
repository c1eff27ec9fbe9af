#include <cmath>
#include <set>
#include <vector>

#include "brwlab/rng.hpp"
#include "brwlab/stats.hpp"
#include "doctest.h"

using namespace brwlab;

TEST_CASE("philox4x32-10 known-answer vectors") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) ==
        std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                      {0xffffffff, 0xffffffff}) ==
        std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                      {0xa4093822, 0x299f31d0}) ==
        std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("identical triples reproduce, counter offsets agree") {
  RngStream a(42, 7);
  RngStream b(42, 7);
  std::vector<std::uint64_t> first;
  for (int i = 0; i < 100; ++i) {
    first.push_back(a.next_u64());
    CHECK(first.back() == b.next_u64());
  }
  RngStream c(42, 7, 37);
  for (int i = 37; i < 100; ++i) CHECK(c.next_u64() == first[i]);
}

TEST_CASE("distinct streams differ and look independent") {
  RngStream a(1, 100);
  RngStream b(1, 101);
  RngStream c(2, 100);
  double sab = 0, sac = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double ua = a.uniform() - 0.5;
    sab += ua * (b.uniform() - 0.5);
    sac += ua * (c.uniform() - 0.5);
  }
  // correlation of independent uniforms: sd = (1/12)/sqrt(n)
  const double sd = 1.0 / 12.0 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(sab / n) < 4 * sd);
  CHECK(std::abs(sac / n) < 4 * sd);
}

TEST_CASE("uniform stays in the open unit interval and is uniform") {
  RngStream r(9, 9);
  std::vector<double> xs;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    xs.push_back(u);
  }
  CHECK(ks_test(xs, [](double x) { return x; }) > 1e-3);
}

TEST_CASE("uniform_int is unbiased on a small range") {
  RngStream r(3, 5);
  std::vector<std::uint64_t> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = r.uniform_int(10, 16);
    REQUIRE(v >= 10);
    REQUIRE(v <= 16);
    ++counts[v - 10];
  }
  CHECK(chi_square_uniform_pvalue(counts) > 1e-3);
}

TEST_CASE("replicate streams are distinct across replicates and experiments") {
  std::set<std::uint64_t> ids;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    ids.insert(replicate_stream("median-sweep", i));
    ids.insert(replicate_stream("tail-fit", i));
  }
  CHECK(ids.size() == 2000);
}
