#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "brwlab/rng.hpp"
#include "brwlab/samplers.hpp"

namespace brwlab {

/**
 * One realization of a branching random walk.
 *
 * Every node owns a stream id derived from its parent's id and its child
 * index, and its displacement vector is drawn from that stream alone.  The
 * whole infinite tree is therefore a pure function of (model, master seed,
 * root stream id), and any two traversals see the same tree.
 */
class BrwSample {
 public:
  BrwSample(Model model, RngStream root)
      : model_(model), master_seed_(root.master_seed()), root_key_(root.stream_id()) {}

  Model model() const { return model_; }
  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t root_key() const { return root_key_; }

  static std::uint64_t child_key(std::uint64_t parent_key, std::uint64_t index) {
    return derive_stream(parent_key, index);
  }

  /// Child displacements of the node whose stream id is `key`.
  DisplacementStream children_of(std::uint64_t key) const {
    return {model_, RngStream(master_seed_, key)};
  }

 private:
  Model model_;
  std::uint64_t master_seed_;
  std::uint64_t root_key_;
};

struct BrwNode {
  std::uint64_t id = 0;
  std::optional<std::uint64_t> parent_id;
  std::uint32_t depth = 0;     // generation n
  std::uint64_t weight = 0;    // h(v): sum of child indices on the path
  double displacement = 0.0;   // S(v)
};

struct SearchResult {
  double value = 0.0;                       // M_n
  std::vector<std::uint64_t> argmin_path;   // child indices, root to argmin
  std::uint64_t nodes_expanded = 0;
  double budget_used = 0.0;                 // largest key popped
};

struct SearchOptions {
  std::uint32_t depth_cap = 50;
  std::uint64_t work_limit = 20'000'000;  // materialized nodes
  /// Give up once the search frontier passes this value (censored search).
  double value_cap = std::numeric_limits<double>::infinity();
};

/// Outcome of a search that may stop early.  When `result` is empty the
/// only information is M_n > lower_bound.
struct CensoredSearch {
  std::optional<SearchResult> result;
  double lower_bound = 0.0;
  std::uint64_t nodes_expanded = 0;
  bool work_limited = false;
};

class WorkLimitExceeded : public std::runtime_error {
 public:
  WorkLimitExceeded(const std::string& what, double lower_bound)
      : std::runtime_error(what), lower_bound_(lower_bound) {}
  double lower_bound() const { return lower_bound_; }

 private:
  double lower_bound_;
};

class DepthCapExceeded : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exact M_n by uniform-cost search: the frontier holds expanded nodes and,
/// for every node with unexplored children, a lazy cursor keyed by S(v) plus
/// the child envelope.  Popped keys never decrease, so the first
/// generation-n node popped is the minimum.
SearchResult min_displacement(std::uint32_t n, const BrwSample& sample,
                              const SearchOptions& options = {});

/// Same search, but returns a lower bound instead of throwing when it hits
/// options.value_cap or options.work_limit.
CensoredSearch min_displacement_censored(std::uint32_t n, const BrwSample& sample,
                                         const SearchOptions& options = {});

/// Exact M_n by depth-first branch and bound.  A beam search of the given
/// width supplies the initial upper bound (a real generation-n node); the
/// depth-first pass then visits every node below the running best, so the
/// result is exact and memory stays O(n).  Honours value_cap like the
/// censored uniform-cost search.  A work-limited run carries no lower bound
/// (lower_bound = 0) because depth-first order says nothing about the
/// unexplored part of the tree.
CensoredSearch min_displacement_bnb(std::uint32_t n, const BrwSample& sample,
                                    const SearchOptions& options = {},
                                    std::size_t beam_width = 1024);

/// Exhaustive depth-first enumeration of every node with S(v) <= budget and
/// depth <= n; returns min S over generation n, or nullopt if none.  Shares
/// no code with the uniform-cost search beyond the child generator.
std::optional<double> min_displacement_dfs(std::uint32_t n, const BrwSample& sample,
                                           double budget,
                                           std::uint64_t work_limit = 200'000'000);

struct CensusTable {
  double x = 0.0;
  std::vector<std::uint64_t> per_level;  // |T_j(x)|, j = 0..n
  /// |T_{j,k}(x)| keyed by (j, k); filled only when requested.
  std::map<std::pair<std::uint32_t, std::uint64_t>, std::uint64_t> per_class;
  /// Partial paths (W_1..W_j) of every generation-n node with its weights,
  /// when requested; used to cross-check the sampled-walk law.
  std::vector<std::pair<std::vector<std::uint64_t>, std::vector<double>>> depth_n_paths;
};

struct CensusOptions {
  bool by_class = false;
  bool record_paths = false;
  std::uint64_t work_limit = 10'000'000;  // bound on E(nodes visited)
};

/// Exact counts of nodes with S(v) <= x, generations 0..n.
CensusTable census(std::uint32_t n, double x, const BrwSample& sample,
                   const CensusOptions& options = {});

/// The m lowest-displacement nodes w_1, ..., w_m in increasing order (w_1 is
/// the root).  Node ids index into the returned vector: parent_id < id.
std::vector<BrwNode> lowest_m(std::uint64_t m, const BrwSample& sample,
                              std::uint64_t work_limit = 20'000'000);

/// Re-evaluates S along a child-index path by regenerating the displacement
/// vectors; used to audit search results.
double path_displacement(const BrwSample& sample,
                         const std::vector<std::uint64_t>& path);

}  // namespace brwlab
