#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "brwlab/rng.hpp"
#include "brwlab/stats.hpp"

namespace brwlab {

/// Weights and partial displacements along one generation-n path:
/// 0 < h_1 < ... < h_n = n + k and 0 < W_1 < ... < W_n.
struct WalkSample {
  std::uint64_t n = 0;
  std::uint64_t k = 0;
  std::vector<std::uint64_t> h;
  std::vector<double> w;
};

/// Uniform element of the set of weight sequences with h_n = n + k: a
/// uniform (n-1)-subset of {1, ..., n+k-1} (Floyd's algorithm) followed by n+k.
std::vector<std::uint64_t> sample_h(std::uint64_t n, std::uint64_t k, RngStream& rng);

/// Draws h, then independent Gamma(h_i - h_{i-1}) increments.
WalkSample sample_walk(std::uint64_t n, std::uint64_t k, RngStream& rng);

/// Rescales the path so that W_n = S exactly.  Throws for S <= 0.
WalkSample condition_on_endpoint(const WalkSample& walk, double S);

struct EventParams {
  double a = 0.0;
  double window_exponent = 40.0;  // B_a window [a^e, n - a^e]
  double margin_root = 40.0;      // B_a margin min(m, n-m)^(1/r)
  double d_factor = 3.0;          // D_a threshold factor * a
};

struct EventFlags {
  bool leading = false;       // L_a: W_i >= (i/n) W_n - a for all i
  bool trailing = false;      // R_a: W_i <= (i/n) W_n + a for all i
  bool near_chord = false;    // B_a: some mid-window W_m within the margin of the chord
  bool heavy_weights = false; // D_a: h_j > c a j or h_n - h_j > c a (n - j)
};

/// Evaluates L_a, R_a, B_a and D_a with the non-strict inequalities as
/// written.  The B_a window is intersected with [1, n-1].
EventFlags event_flags(const WalkSample& walk, const EventParams& params);

/// The n cyclic shifts W^(l)_j = W_{j+l} - W_l (with W_{n+l} = W_n + W_l),
/// l = 0..n-1, and likewise for h.  Every shift ends at W_n exactly.
std::vector<WalkSample> rotations(const WalkSample& walk);

/// Boolean combination of the letters L, R, B, D with !, &, | and
/// parentheses ("L & !B", "(L|R) & D").  Precedence: ! then & then |.
class EventExpression {
 public:
  /// Throws std::invalid_argument with the offending position on bad syntax.
  explicit EventExpression(std::string_view text);
  bool evaluate(const EventFlags& flags) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

struct EventEstimate {
  StatSummary indicators;  // 0/1 per replicate
  Proportion proportion;   // with Wilson interval
};

/// Monte Carlo estimate of P(expression | W_n = S) for walks drawn from the
/// law of a uniform generation-n node of weight n + k.  Replicate i draws
/// from rng.substream(i), so results do not depend on the thread count.
EventEstimate estimate_event_prob(std::uint64_t n, std::uint64_t k, double S,
                                  const EventParams& params,
                                  const EventExpression& expression,
                                  std::uint64_t replicates, const RngStream& rng,
                                  unsigned threads = 1);

}  // namespace brwlab
