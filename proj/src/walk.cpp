#include "brwlab/walk.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "brwlab/parallel.hpp"
#include "brwlab/samplers.hpp"

namespace brwlab {

std::vector<std::uint64_t> sample_h(std::uint64_t n, std::uint64_t k, RngStream& rng) {
  if (n == 0) throw std::invalid_argument("sample_h requires n >= 1");
  const std::uint64_t universe = n + k - 1;  // choose n-1 of {1..n+k-1}
  const std::uint64_t picks = n - 1;
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(picks * 2);
  for (std::uint64_t j = universe - picks + 1; j <= universe; ++j) {
    const std::uint64_t t = rng.uniform_int(1, j);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> h(chosen.begin(), chosen.end());
  std::sort(h.begin(), h.end());
  h.push_back(n + k);
  return h;
}

WalkSample sample_walk(std::uint64_t n, std::uint64_t k, RngStream& rng) {
  WalkSample walk;
  walk.n = n;
  walk.k = k;
  walk.h = sample_h(n, k, rng);
  walk.w.resize(n);
  double s = 0.0;
  std::uint64_t previous = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    s += sample_gamma(walk.h[i] - previous, rng);
    previous = walk.h[i];
    walk.w[i] = s;
  }
  return walk;
}

WalkSample condition_on_endpoint(const WalkSample& walk, double S) {
  if (!(S > 0.0) || !std::isfinite(S)) throw std::invalid_argument("endpoint must be positive");
  WalkSample out = walk;
  const double scale = S / walk.w.back();
  for (double& x : out.w) x *= scale;
  out.w.back() = S;
  return out;
}

EventFlags event_flags(const WalkSample& walk, const EventParams& params) {
  if (!(params.a >= 0.0)) throw std::invalid_argument("event slack a must be >= 0");
  const std::uint64_t n = walk.n;
  const double wn = walk.w.back();
  const double a = params.a;
  const auto chord = [&](std::uint64_t i) {
    return static_cast<double>(i) / static_cast<double>(n) * wn;
  };

  EventFlags f;
  f.leading = true;
  f.trailing = true;
  for (std::uint64_t i = 1; i <= n; ++i) {
    const double wi = walk.w[i - 1];
    if (wi < chord(i) - a) f.leading = false;
    if (wi > chord(i) + a) f.trailing = false;
  }

  const double reach = std::pow(a, params.window_exponent);
  const double lo = std::max(1.0, std::ceil(reach));
  const double hi = std::min(static_cast<double>(n) - 1.0,
                             std::floor(static_cast<double>(n) - reach));
  for (double mm = lo; mm <= hi; mm += 1.0) {
    const auto m = static_cast<std::uint64_t>(mm);
    const double margin =
        std::pow(static_cast<double>(std::min(m, n - m)), 1.0 / params.margin_root);
    if (walk.w[m - 1] <= chord(m) + margin) {
      f.near_chord = true;
      break;
    }
  }

  const double c = params.d_factor * a;
  const std::uint64_t hn = walk.h.back();
  for (std::uint64_t j = 1; j <= n && !f.heavy_weights; ++j) {
    const double hj = static_cast<double>(walk.h[j - 1]);
    if (hj > c * static_cast<double>(j) ||
        static_cast<double>(hn) - hj > c * static_cast<double>(n - j)) {
      f.heavy_weights = true;
    }
  }
  return f;
}

std::vector<WalkSample> rotations(const WalkSample& walk) {
  const std::uint64_t n = walk.n;
  const double wn = walk.w.back();
  const std::uint64_t hn = walk.h.back();
  // Index i in 0..2n-1 holds W_i, with W_{n+l} = W_n + W_l.
  const auto W = [&](std::uint64_t i) {
    if (i == 0) return 0.0;
    if (i <= n) return walk.w[i - 1];
    return wn + walk.w[i - n - 1];
  };
  const auto H = [&](std::uint64_t i) -> std::uint64_t {
    if (i == 0) return 0;
    if (i <= n) return walk.h[i - 1];
    return hn + walk.h[i - n - 1];
  };
  std::vector<WalkSample> out;
  out.reserve(n);
  for (std::uint64_t l = 0; l < n; ++l) {
    WalkSample r;
    r.n = n;
    r.k = walk.k;
    r.w.resize(n);
    r.h.resize(n);
    for (std::uint64_t j = 1; j <= n; ++j) {
      r.w[j - 1] = W(j + l) - W(l);
      r.h[j - 1] = H(j + l) - H(l);
    }
    r.w.back() = wn;
    out.push_back(std::move(r));
  }
  return out;
}

struct EventExpression::Node {
  enum class Kind { letter, negation, conjunction, disjunction } kind;
  char letter = 0;
  std::shared_ptr<const Node> left;
  std::shared_ptr<const Node> right;
};

namespace {

using NodePtr = std::shared_ptr<const EventExpression::Node>;
using Kind = EventExpression::Node::Kind;

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    NodePtr root = disjunction();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected character");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw std::invalid_argument("event expression '" + std::string(text_) + "': " + why +
                                " at position " + std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr disjunction() {
    NodePtr left = conjunction();
    while (accept('|')) {
      left = std::make_shared<EventExpression::Node>(
          EventExpression::Node{Kind::disjunction, 0, left, conjunction()});
    }
    return left;
  }

  NodePtr conjunction() {
    NodePtr left = unary();
    while (accept('&')) {
      left = std::make_shared<EventExpression::Node>(
          EventExpression::Node{Kind::conjunction, 0, left, unary()});
    }
    return left;
  }

  NodePtr unary() {
    if (accept('!')) {
      return std::make_shared<EventExpression::Node>(
          EventExpression::Node{Kind::negation, 0, unary(), nullptr});
    }
    if (accept('(')) {
      NodePtr inner = disjunction();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end");
    const char c = text_[pos_];
    if (c != 'L' && c != 'R' && c != 'B' && c != 'D') fail("expected one of L, R, B, D");
    ++pos_;
    return std::make_shared<EventExpression::Node>(
        EventExpression::Node{Kind::letter, c, nullptr, nullptr});
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

bool eval(const EventExpression::Node& node, const EventFlags& f) {
  switch (node.kind) {
    case Kind::letter:
      switch (node.letter) {
        case 'L':
          return f.leading;
        case 'R':
          return f.trailing;
        case 'B':
          return f.near_chord;
        default:
          return f.heavy_weights;
      }
    case Kind::negation:
      return !eval(*node.left, f);
    case Kind::conjunction:
      return eval(*node.left, f) && eval(*node.right, f);
    case Kind::disjunction:
      return eval(*node.left, f) || eval(*node.right, f);
  }
  return false;
}

}  // namespace

EventExpression::EventExpression(std::string_view text)
    : text_(text), root_(Parser(text).parse()) {}

bool EventExpression::evaluate(const EventFlags& flags) const { return eval(*root_, flags); }

EventEstimate estimate_event_prob(std::uint64_t n, std::uint64_t k, double S,
                                  const EventParams& params,
                                  const EventExpression& expression,
                                  std::uint64_t replicates, const RngStream& rng,
                                  unsigned threads) {
  if (replicates == 0) throw std::invalid_argument("replicates must be >= 1");
  if (!(S > 0.0)) throw std::invalid_argument("endpoint must be positive");
  std::vector<unsigned char> hits(replicates, 0);
  parallel_for(replicates, threads, [&](std::uint64_t i) {
    RngStream stream = rng.substream(i);
    const WalkSample walk = condition_on_endpoint(sample_walk(n, k, stream), S);
    hits[i] = expression.evaluate(event_flags(walk, params)) ? 1 : 0;
  });
  EventEstimate out;
  std::uint64_t successes = 0;
  for (const unsigned char h : hits) {
    out.indicators.add(h);
    successes += h;
  }
  out.proportion = proportion(successes, replicates);
  return out;
}

}  // namespace brwlab
