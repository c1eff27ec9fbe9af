#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "brwlab/rng.hpp"

namespace brwlab {

/// Displacement-vector laws with exponential steps.
enum class Model {
  pwit,  ///< X_i = E_1 + ... + E_i (unit-rate Poisson process)
  pd,    ///< X_k = -log G_k, G the GEM(0,1) stick-breaking sequence
};

/// Parses "pwit" / "pd"; throws std::invalid_argument otherwise.
Model parse_model(std::string_view name);
std::string_view model_name(Model model);

struct ChildDisplacement {
  std::uint64_t index = 0;    // child label i >= 1
  double displacement = 0.0;  // X_i > 0
};

/**
 * Lazy generator of one node's child displacements, in index order.
 *
 * envelope() is a lower bound on the displacement of every child not yet
 * emitted, and it never decreases.  For the PWIT it is the next X_i itself;
 * for PD it is L_k = -log prod_{i<k} (1 - U_i) <= X_k.  Stopping at the first
 * envelope above a budget therefore never loses a child below the budget.
 */
class DisplacementStream {
 public:
  DisplacementStream(Model model, RngStream rng);

  Model model() const { return model_; }
  double envelope() const { return envelope_; }
  std::uint64_t next_index() const { return index_; }

  /// Resumable position: next child index, envelope and stream counter.
  struct Cursor {
    std::uint64_t index;
    double envelope;
    std::uint64_t counter;
  };
  Cursor cursor() const { return {index_, envelope_, rng_.counter()}; }
  static DisplacementStream resume(Model model, std::uint64_t master_seed,
                                   std::uint64_t stream_id, Cursor cursor);

  /// Emits the next child regardless of any budget.
  ChildDisplacement advance();

  /// Next child with displacement <= budget, or nullopt once the envelope
  /// exceeds the budget.  PD children passed over because they exceed the
  /// budget are consumed; use a fresh stream for a larger budget.
  std::optional<ChildDisplacement> next(double budget);

 private:
  DisplacementStream(Model model, RngStream rng, Cursor cursor)
      : model_(model), rng_(rng), index_(cursor.index), envelope_(cursor.envelope) {}

  Model model_;
  RngStream rng_;
  std::uint64_t index_ = 1;
  double envelope_ = 0.0;  // PWIT: pending X_index; PD: L_index
};

inline ChildDisplacement DisplacementStream::advance() {
  ChildDisplacement child{index_, 0.0};
  if (model_ == Model::pwit) {
    child.displacement = envelope_;
    envelope_ += rng_.exponential();
  } else {
    const double u = rng_.uniform();
    child.displacement = envelope_ - std::log(u);
    envelope_ -= std::log1p(-u);
  }
  ++index_;
  return child;
}

inline std::optional<ChildDisplacement> DisplacementStream::next(double budget) {
  while (envelope_ <= budget) {
    ChildDisplacement child = advance();
    if (child.displacement <= budget) return child;
  }
  return std::nullopt;
}

/// All PWIT children with X_i <= budget.  Requires budget > 0.
std::vector<ChildDisplacement> pwit_children(double budget, RngStream rng);

/// All PD children with X_k <= budget.  Requires budget > 0.
std::vector<ChildDisplacement> pd_children(double budget, RngStream rng);

/// Model dispatch with the same contract as the two functions above.
std::vector<ChildDisplacement> children(Model model, double budget, RngStream rng);

/// Gamma(shape) with integer shape >= 1: sum of exponentials for shape <= 16,
/// Marsaglia-Tsang squeeze otherwise.
double sample_gamma(std::uint64_t shape, RngStream& rng);

}  // namespace brwlab
