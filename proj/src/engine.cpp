#include "brwlab/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "brwlab/analytics.hpp"

namespace brwlab {

namespace {

// Stream budgets get a little slack so rounding in (budget - s) never hides a
// child whose exact sum s + X lands on the budget; the sum itself is compared
// without slack.
double slack_budget(double budget, double s) {
  return (budget - s) + 1e-12 * std::max(1.0, std::abs(budget));
}

constexpr std::uint32_t kNoParent = ~std::uint32_t{0};

/// Best-first enumeration of the nodes of a BrwSample in increasing order of
/// displacement, down to a maximum generation.
class FrontierSearch {
 public:
  struct Record {
    double s;
    std::uint64_t key;
    std::uint64_t weight;
    std::uint32_t parent;
    std::uint32_t index;
    std::uint32_t depth;
  };

  FrontierSearch(const BrwSample& sample, std::uint32_t max_depth,
                 std::uint64_t work_limit)
      : sample_(sample), max_depth_(max_depth), work_limit_(work_limit) {
    records_.reserve(std::min<std::uint64_t>(work_limit, 1u << 16));
    records_.push_back({0.0, sample.root_key(), 0, kNoParent, 0, 0});
    heap_.push_back({0.0, 0.0, 0, 0, 0, 0, false});
  }

  const std::vector<Record>& records() const { return records_; }
  double last_key() const { return last_key_; }

  /// Id of the next node in displacement order, or nullopt once the frontier
  /// key exceeds value_cap.  Throws WorkLimitExceeded.
  std::optional<std::uint32_t> next(double value_cap) {
    while (!heap_.empty()) {
      if (heap_.front().key > value_cap) return std::nullopt;
      std::pop_heap(heap_.begin(), heap_.end(), later);
      const Entry e = heap_.back();
      heap_.pop_back();
      if (e.key < last_key_) throw std::logic_error("frontier popped out of order");
      last_key_ = e.key;
      if (!e.is_cursor) return settle(e.node);

      DisplacementStream stream = DisplacementStream::resume(
          sample_.model(), sample_.master_seed(), records_[e.node].key,
          {e.next_index, e.envelope, e.counter});
      const ChildDisplacement child = stream.advance();
      push_cursor(e.node, stream);

      if (records_.size() >= work_limit_) {
        throw WorkLimitExceeded("search work limit of " + std::to_string(work_limit_) +
                                    " nodes exceeded",
                                last_key_);
      }
      const Record p = records_[e.node];
      const double s = p.s + child.displacement;
      if (!std::isfinite(s)) throw std::runtime_error("non-finite displacement (sampler fault)");
      const auto id = static_cast<std::uint32_t>(records_.size());
      records_.push_back({s, BrwSample::child_key(p.key, child.index),
                          p.weight + child.index, e.node,
                          static_cast<std::uint32_t>(child.index), p.depth + 1});
      if (s <= e.key) return settle(id);  // PWIT: the cursor key is the child itself
      heap_.push_back({s, 0.0, 0, id, 0, p.depth + 1, false});
      std::push_heap(heap_.begin(), heap_.end(), later);
    }
    return std::nullopt;
  }

 private:
  struct Entry {
    double key;
    double envelope;
    std::uint64_t counter;
    std::uint32_t node;
    std::uint32_t next_index;
    std::uint32_t depth;  // generation of the node this entry yields
    bool is_cursor;
  };

  // Max-heap comparator producing a min-heap on key; ties go to deeper
  // entries, then to lower ids.
  static bool later(const Entry& a, const Entry& b) {
    if (a.key != b.key) return a.key > b.key;
    if (a.depth != b.depth) return a.depth < b.depth;
    if (a.node != b.node) return a.node > b.node;
    return a.next_index > b.next_index;
  }

  std::uint32_t settle(std::uint32_t id) {
    const Record& r = records_[id];
    if (r.depth < max_depth_) push_cursor(id, sample_.children_of(r.key));
    return id;
  }

  void push_cursor(std::uint32_t id, const DisplacementStream& stream) {
    const Record& r = records_[id];
    const DisplacementStream::Cursor c = stream.cursor();
    heap_.push_back({r.s + c.envelope, c.envelope, c.counter, id,
                     static_cast<std::uint32_t>(c.index), r.depth + 1, true});
    std::push_heap(heap_.begin(), heap_.end(), later);
  }

  const BrwSample& sample_;
  std::uint32_t max_depth_;
  std::uint64_t work_limit_;
  std::vector<Record> records_;
  std::vector<Entry> heap_;
  double last_key_ = 0.0;
};

std::vector<std::uint64_t> path_to(const std::vector<FrontierSearch::Record>& records,
                                   std::uint32_t id) {
  std::vector<std::uint64_t> path;
  for (std::uint32_t v = id; records[v].parent != kNoParent; v = records[v].parent) {
    path.push_back(records[v].index);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

void check_depth(std::uint32_t n, const SearchOptions& options) {
  if (n == 0) throw std::invalid_argument("min_displacement requires n >= 1");
  if (n > options.depth_cap) {
    throw DepthCapExceeded("generation " + std::to_string(n) + " exceeds depth cap " +
                           std::to_string(options.depth_cap));
  }
}

}  // namespace

CensoredSearch min_displacement_censored(std::uint32_t n, const BrwSample& sample,
                                         const SearchOptions& options) {
  check_depth(n, options);
  const std::uint64_t limit =
      std::min<std::uint64_t>(options.work_limit, std::uint64_t{kNoParent} - 1);
  FrontierSearch search(sample, n, limit);
  CensoredSearch out;
  try {
    while (auto id = search.next(options.value_cap)) {
      const auto& r = search.records()[*id];
      if (r.depth == n) {
        out.result = SearchResult{r.s, path_to(search.records(), *id),
                                  search.records().size(), search.last_key()};
        out.lower_bound = r.s;
        out.nodes_expanded = search.records().size();
        return out;
      }
    }
    out.lower_bound = std::max(search.last_key(), options.value_cap);
  } catch (const WorkLimitExceeded& e) {
    out.work_limited = true;
    out.lower_bound = e.lower_bound();
  }
  out.nodes_expanded = search.records().size();
  return out;
}

SearchResult min_displacement(std::uint32_t n, const BrwSample& sample,
                              const SearchOptions& options) {
  SearchOptions unbounded = options;
  unbounded.value_cap = std::numeric_limits<double>::infinity();
  CensoredSearch out = min_displacement_censored(n, sample, unbounded);
  if (!out.result) {
    throw WorkLimitExceeded("search work limit of " + std::to_string(options.work_limit) +
                                " nodes exceeded at generation " + std::to_string(n),
                            out.lower_bound);
  }
  return std::move(*out.result);
}

namespace {

struct BeamResult {
  double value = std::numeric_limits<double>::infinity();
  std::vector<std::uint64_t> path;
};

// Keeps the `width` lowest nodes of each generation among the children of the
// previous generation's survivors.
BeamResult beam_upper_bound(std::uint32_t n, const BrwSample& sample, std::size_t width) {
  struct Node {
    double s;
    std::uint64_t key;
    std::uint32_t parent;  // index into the previous level
    std::uint64_t index;
  };
  const auto by_s = [](const Node& a, const Node& b) { return a.s < b.s; };
  std::vector<std::vector<Node>> levels(1, {{0.0, sample.root_key(), kNoParent, 0}});
  for (std::uint32_t depth = 0; depth < n; ++depth) {
    const std::vector<Node>& current = levels.back();
    std::vector<Node> next;  // max-heap on s once full
    for (std::uint32_t i = 0; i < current.size(); ++i) {
      const Node& v = current[i];
      DisplacementStream stream = sample.children_of(v.key);
      for (std::size_t c = 0; c < width; ++c) {
        if (next.size() == width && v.s + stream.envelope() >= next.front().s) break;
        const ChildDisplacement child = stream.advance();
        const double s = v.s + child.displacement;
        if (next.size() < width) {
          next.push_back({s, BrwSample::child_key(v.key, child.index), i, child.index});
          if (next.size() == width) std::make_heap(next.begin(), next.end(), by_s);
        } else if (s < next.front().s) {
          std::pop_heap(next.begin(), next.end(), by_s);
          next.back() = {s, BrwSample::child_key(v.key, child.index), i, child.index};
          std::push_heap(next.begin(), next.end(), by_s);
        }
      }
    }
    std::sort(next.begin(), next.end(), by_s);
    levels.push_back(std::move(next));
  }
  BeamResult out;
  out.value = levels.back().front().s;
  std::uint32_t at = 0;
  for (std::uint32_t depth = n; depth > 0; --depth) {
    out.path.push_back(levels[depth][at].index);
    at = levels[depth][at].parent;
  }
  std::reverse(out.path.begin(), out.path.end());
  return out;
}

}  // namespace

CensoredSearch min_displacement_bnb(std::uint32_t n, const BrwSample& sample,
                                    const SearchOptions& options, std::size_t beam_width) {
  check_depth(n, options);
  if (beam_width == 0) throw std::invalid_argument("beam width must be >= 1");
  const BeamResult beam = beam_upper_bound(n, sample, beam_width);

  CensoredSearch out;
  bool have = beam.value <= options.value_cap;
  double best = have ? beam.value : options.value_cap;
  std::vector<std::uint64_t> best_path = have ? beam.path : std::vector<std::uint64_t>{};
  const double initial = best;

  struct Frame {
    DisplacementStream stream;
    double s;
    std::uint64_t key;
  };
  std::vector<Frame> stack;
  std::vector<std::uint64_t> path;  // child indices of stack[1..]
  stack.reserve(n);
  stack.push_back({sample.children_of(sample.root_key()), 0.0, sample.root_key()});
  std::uint64_t visited = 1;
  while (!stack.empty()) {
    Frame& top = stack.back();
    const auto child = top.stream.next(slack_budget(best, top.s));
    if (!child) {
      stack.pop_back();
      if (!path.empty()) path.pop_back();
      continue;
    }
    const double s = top.s + child->displacement;
    if (have ? !(s < best) : s > best) continue;
    if (++visited > options.work_limit) {
      out.work_limited = true;
      out.nodes_expanded = visited - 1;
      return out;
    }
    if (stack.size() == n) {
      best = s;
      have = true;
      best_path = path;
      best_path.push_back(child->index);
      continue;
    }
    const std::uint64_t key = BrwSample::child_key(top.key, child->index);
    path.push_back(child->index);
    stack.push_back({sample.children_of(key), s, key});
  }
  out.nodes_expanded = visited;
  if (have) {
    out.result = SearchResult{best, std::move(best_path), visited, initial};
    out.lower_bound = best;
  } else {
    out.lower_bound = options.value_cap;
  }
  return out;
}

std::optional<double> min_displacement_dfs(std::uint32_t n, const BrwSample& sample,
                                           double budget, std::uint64_t work_limit) {
  if (n == 0) throw std::invalid_argument("min_displacement_dfs requires n >= 1");
  struct Frame {
    DisplacementStream stream;
    double s;
    std::uint64_t key;
    std::uint32_t depth;
  };
  std::vector<Frame> stack;
  stack.push_back({sample.children_of(sample.root_key()), 0.0, sample.root_key(), 0});
  std::optional<double> best;
  std::uint64_t visited = 1;
  while (!stack.empty()) {
    Frame& top = stack.back();
    const auto child = top.stream.next(slack_budget(budget, top.s));
    if (!child) {
      stack.pop_back();
      continue;
    }
    const double s = top.s + child->displacement;
    if (s > budget) continue;
    if (++visited > work_limit) {
      throw WorkLimitExceeded("DFS work limit exceeded", 0.0);
    }
    if (top.depth + 1 == n) {
      if (!best || s < *best) best = s;
      continue;
    }
    const std::uint64_t key = BrwSample::child_key(top.key, child->index);
    const std::uint32_t depth = top.depth + 1;
    stack.push_back({sample.children_of(key), s, key, depth});
  }
  return best;
}

CensusTable census(std::uint32_t n, double x, const BrwSample& sample,
                   const CensusOptions& options) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("census requires x >= 0");
  double expected = 0.0;
  for (std::uint32_t j = 0; j <= n; ++j) expected += expected_tn(j, x).to_linear();
  if (expected > static_cast<double>(options.work_limit)) {
    throw WorkLimitExceeded("census expected size " + std::to_string(expected) +
                                " exceeds work limit",
                            0.0);
  }
  // Hard stop far in the tail of the node count.
  const std::uint64_t hard_limit = 50 * options.work_limit + 1000;

  CensusTable table;
  table.x = x;
  table.per_level.assign(n + 1, 0);
  table.per_level[0] = 1;
  if (options.by_class) table.per_class[{0, 0}] = 1;
  if (n == 0 || x == 0.0) return table;

  struct Frame {
    DisplacementStream stream;
    double s;
    std::uint64_t key;
    std::uint64_t weight;
    std::uint32_t depth;
  };
  std::vector<Frame> stack;
  std::vector<std::uint64_t> weights;  // h_1..h_depth of the current path
  std::vector<double> partial;         // W_1..W_depth of the current path
  stack.push_back({sample.children_of(sample.root_key()), 0.0, sample.root_key(), 0, 0});
  std::uint64_t visited = 1;
  while (!stack.empty()) {
    Frame& top = stack.back();
    const auto child = top.stream.next(slack_budget(x, top.s));
    if (!child) {
      stack.pop_back();
      if (!weights.empty()) {
        weights.pop_back();
        partial.pop_back();
      }
      continue;
    }
    const double s = top.s + child->displacement;
    if (s > x) continue;
    if (++visited > hard_limit) throw WorkLimitExceeded("census work limit exceeded", 0.0);
    const std::uint32_t depth = top.depth + 1;
    const std::uint64_t weight = top.weight + child->index;
    ++table.per_level[depth];
    if (options.by_class) ++table.per_class[{depth, weight - depth}];
    if (depth == n) {
      if (options.record_paths) {
        auto w = weights;
        auto p = partial;
        w.push_back(weight);
        p.push_back(s);
        table.depth_n_paths.emplace_back(std::move(w), std::move(p));
      }
      continue;
    }
    const std::uint64_t key = BrwSample::child_key(top.key, child->index);
    stack.push_back({sample.children_of(key), s, key, weight, depth});
    weights.push_back(weight);
    partial.push_back(s);
  }
  return table;
}

std::vector<BrwNode> lowest_m(std::uint64_t m, const BrwSample& sample,
                              std::uint64_t work_limit) {
  if (m == 0) throw std::invalid_argument("lowest_m requires m >= 1");
  FrontierSearch search(sample, ~std::uint32_t{0} - 1,
                        std::min<std::uint64_t>(work_limit, std::uint64_t{kNoParent} - 1));
  std::vector<BrwNode> out;
  out.reserve(m);
  std::vector<std::uint64_t> rank_of(1, 0);  // record id -> rank in `out`
  while (out.size() < m) {
    const auto id = search.next(std::numeric_limits<double>::infinity());
    if (!id) throw std::logic_error("frontier exhausted on an infinite tree");
    const auto& r = search.records()[*id];
    BrwNode node;
    node.id = out.size();
    if (r.parent != kNoParent) node.parent_id = rank_of[r.parent];
    node.depth = r.depth;
    node.weight = r.weight;
    node.displacement = r.s;
    if (rank_of.size() < search.records().size()) rank_of.resize(search.records().size());
    rank_of[*id] = node.id;
    out.push_back(node);
  }
  return out;
}

double path_displacement(const BrwSample& sample, const std::vector<std::uint64_t>& path) {
  double s = 0.0;
  std::uint64_t key = sample.root_key();
  for (const std::uint64_t index : path) {
    DisplacementStream stream = sample.children_of(key);
    ChildDisplacement child = stream.advance();
    while (child.index < index) child = stream.advance();
    s += child.displacement;
    key = BrwSample::child_key(key, index);
  }
  return s;
}

}  // namespace brwlab
