#include <cmath>
#include <stdexcept>
#include <vector>

#include "brwlab/analytics.hpp"
#include "brwlab/samplers.hpp"
#include "brwlab/stats.hpp"
#include "doctest.h"

using namespace brwlab;

namespace {

constexpr int kReps = 100000;

bool same(const std::vector<ChildDisplacement>& a, const std::vector<ChildDisplacement>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].index != b[i].index || a[i].displacement != b[i].displacement) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("pwit child counts are Poisson(budget)") {
  StatSummary count;
  std::uint64_t empty = 0;
  for (int i = 0; i < kReps; ++i) {
    count.add(static_cast<double>(pwit_children(3.0, RngStream(11, i)).size()));
    if (pwit_children(1.0, RngStream(12, i)).empty()) ++empty;
  }
  CHECK(std::abs(count.mean() - 3.0) < 3.0 * std::sqrt(3.0 / kReps));
  const Proportion p0 = proportion(empty, kReps);
  CHECK(std::abs(p0.p - std::exp(-1.0)) < 3.0 * p0.se);
}

TEST_CASE("pwit children are increasing, within budget, and complete") {
  for (int i = 0; i < 1000; ++i) {
    DisplacementStream stream(Model::pwit, RngStream(5, i));
    double last = 0.0;
    std::uint64_t index = 0;
    while (auto c = stream.next(4.0)) {
      CHECK(c->displacement > last);
      CHECK(c->displacement <= 4.0);
      CHECK(c->index == ++index);
      last = c->displacement;
    }
    CHECK(stream.envelope() > 4.0);  // first rejected child
    CHECK(stream.advance().displacement > 4.0);
  }
}

TEST_CASE("pd stick masses sum to one") {
  for (int i = 0; i < 100; ++i) {
    DisplacementStream stream(Model::pd, RngStream(21, i));
    double mass = 0.0;
    for (int k = 0; k < 1000; ++k) mass += std::exp(-stream.advance().displacement);
    const double residual = std::exp(-stream.envelope());  // prod (1 - U_i)
    CHECK(std::abs(mass - 1.0) < 1e-9);
    CHECK(std::abs(mass + residual - 1.0) < 1e-12);
  }
}

TEST_CASE("pd envelope lower-bounds every child and never decreases") {
  for (int i = 0; i < 1000; ++i) {
    DisplacementStream stream(Model::pd, RngStream(22, i));
    double last_envelope = 0.0;
    for (int k = 0; k < 50; ++k) {
      const double envelope = stream.envelope();
      CHECK(envelope >= last_envelope);
      CHECK(stream.advance().displacement >= envelope);
      last_envelope = envelope;
    }
  }
}

TEST_CASE("pd marginals") {
  StatSummary x1;
  StatSummary x3;
  for (int i = 0; i < kReps; ++i) {
    DisplacementStream stream(Model::pd, RngStream(23, i));
    x1.add(stream.advance().displacement);
    stream.advance();
    x3.add(stream.advance().displacement);
  }
  CHECK(std::abs(x1.mean() - 1.0) < 3.0 / std::sqrt(double(kReps)));
  CHECK(std::abs(x3.mean() - 3.0) < 3.0 * x3.standard_error());
  // SE of the sample variance: sqrt((mu4 - sigma^4) / N), mu4 = 3k(k+2) for Gamma(k).
  const double var_se = std::sqrt((45.0 - 9.0) / kReps);
  CHECK(std::abs(x3.variance() - 3.0) < 3.0 * var_se);
}

TEST_CASE("both models have exponential steps: X_k ~ Gamma(k)") {
  for (Model model : {Model::pwit, Model::pd}) {
    std::vector<std::vector<double>> marginals(5);
    for (int i = 0; i < kReps; ++i) {
      DisplacementStream stream(model, RngStream(31, i));
      for (int k = 0; k < 5; ++k) marginals[k].push_back(stream.advance().displacement);
    }
    for (std::uint64_t k = 1; k <= 5; ++k) {
      const double p = ks_test(marginals[k - 1], [k](double x) { return gamma_cdf(k, x); });
      CAPTURE(model_name(model));
      CAPTURE(k);
      CHECK(p > 1e-3);
    }
  }
}

TEST_CASE("raising the budget only adds children") {
  for (Model model : {Model::pwit, Model::pd}) {
    for (int i = 0; i < 500; ++i) {
      const RngStream rng(41, i);
      const auto small = children(model, 2.0, rng);
      const auto large = children(model, 5.0, rng);
      std::vector<ChildDisplacement> filtered;
      for (const auto& c : large) {
        if (c.displacement <= 2.0) filtered.push_back(c);
      }
      CHECK(same(small, filtered));
    }
  }
}

TEST_CASE("children dispatch is deterministic and validates input") {
  for (Model model : {Model::pwit, Model::pd}) {
    const RngStream rng(99, 3);
    CHECK(same(children(model, 6.0, rng), children(model, 6.0, rng)));
    CHECK_THROWS_AS(children(model, 0.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(children(model, -1.0, rng), std::invalid_argument);
  }
  CHECK(same(children(Model::pwit, 3.0, RngStream(1, 2)), pwit_children(3.0, RngStream(1, 2))));
  CHECK(same(children(Model::pd, 3.0, RngStream(1, 2)), pd_children(3.0, RngStream(1, 2))));
  CHECK(parse_model("pwit") == Model::pwit);
  CHECK(parse_model("pd") == Model::pd);
  CHECK_THROWS_AS(parse_model("gem"), std::invalid_argument);
}

TEST_CASE("resumed streams continue identically") {
  for (Model model : {Model::pwit, Model::pd}) {
    DisplacementStream a(model, RngStream(7, 8));
    for (int i = 0; i < 5; ++i) a.advance();
    DisplacementStream b = DisplacementStream::resume(model, 7, 8, a.cursor());
    for (int i = 0; i < 20; ++i) {
      const auto ca = a.advance();
      const auto cb = b.advance();
      CHECK(ca.index == cb.index);
      CHECK(ca.displacement == cb.displacement);
    }
  }
}

TEST_CASE("gamma sampler") {
  for (std::uint64_t shape : {1, 3, 16, 17, 40}) {
    RngStream rng(55, shape);
    std::vector<double> xs;
    StatSummary s;
    for (int i = 0; i < 50000; ++i) {
      xs.push_back(sample_gamma(shape, rng));
      s.add(xs.back());
    }
    CAPTURE(shape);
    CHECK(std::abs(s.mean() - double(shape)) < 4.0 * s.standard_error());
    CHECK(ks_test(xs, [shape](double x) { return gamma_cdf(shape, x); }) > 1e-3);
  }
  RngStream rng(1, 1);
  CHECK_THROWS_AS(sample_gamma(0, rng), std::invalid_argument);
}
