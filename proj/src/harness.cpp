#include "brwlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "brwlab/analytics.hpp"
#include "brwlab/engine.hpp"
#include "brwlab/parallel.hpp"
#include "brwlab/stats.hpp"
#include "brwlab/trees.hpp"
#include "brwlab/walk.hpp"

#ifndef BRWLAB_GIT_HASH
#define BRWLAB_GIT_HASH "unknown"
#endif

namespace brwlab {

using nlohmann::json;

namespace {

constexpr double kE = std::numbers::e;

double z_for(double level) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + level / 2.0);
}

/// Typed access to spec.params.  Every read is recorded so the resolved
/// parameter set (defaults included) can be echoed into the summary, and
/// finish() rejects keys the runner never asked for.
class Params {
 public:
  Params(const json& j, std::string kind) : raw_(j), kind_(std::move(kind)) {
    if (!raw_.is_object()) fail("params", "expected an object");
  }

  std::uint64_t uint(const std::string& name, std::uint64_t def, std::uint64_t min = 0) {
    std::uint64_t v = def;
    if (const json* x = find(name)) {
      if (!x->is_number_integer() || (x->is_number_integer() && x->get<std::int64_t>() < 0)) {
        fail(name, "expected a non-negative integer");
      }
      v = x->get<std::uint64_t>();
    }
    if (v < min) fail(name, "must be >= " + std::to_string(min));
    resolved_[name] = v;
    return v;
  }

  std::uint64_t required_uint(const std::string& name, std::uint64_t min = 0) {
    if (!find(name)) fail(name, "required field is missing");
    return uint(name, 0, min);
  }

  double real(const std::string& name, double def) {
    double v = def;
    if (const json* x = find(name)) {
      if (!x->is_number()) fail(name, "expected a number");
      v = x->get<double>();
    }
    if (!std::isfinite(v)) fail(name, "must be finite");
    resolved_[name] = v;
    return v;
  }

  std::string text(const std::string& name, const std::string& def) {
    std::string v = def;
    if (const json* x = find(name)) {
      if (!x->is_string()) fail(name, "expected a string");
      v = x->get<std::string>();
    }
    resolved_[name] = v;
    return v;
  }

  std::vector<std::uint64_t> uints(const std::string& name, std::vector<std::uint64_t> def,
                                   std::uint64_t min = 0) {
    if (const json* x = find(name)) {
      if (!x->is_array() || x->empty()) fail(name, "expected a non-empty array of integers");
      def.clear();
      for (const json& e : *x) {
        if (!e.is_number_integer() || e.get<std::int64_t>() < static_cast<std::int64_t>(min)) {
          fail(name, "entries must be integers >= " + std::to_string(min));
        }
        def.push_back(e.get<std::uint64_t>());
      }
    }
    resolved_[name] = def;
    return def;
  }

  std::vector<double> reals(const std::string& name, std::vector<double> def) {
    if (const json* x = find(name)) {
      if (!x->is_array() || x->empty()) fail(name, "expected a non-empty array of numbers");
      def.clear();
      for (const json& e : *x) {
        if (!e.is_number()) fail(name, "entries must be numbers");
        def.push_back(e.get<double>());
      }
    }
    resolved_[name] = def;
    return def;
  }

  /// Object mapping decimal keys to integers, e.g. {"40": 50}.
  std::map<std::uint64_t, std::uint64_t> uint_map(const std::string& name) {
    std::map<std::uint64_t, std::uint64_t> out;
    if (const json* x = find(name)) {
      if (!x->is_object()) fail(name, "expected an object of integer values");
      for (const auto& [k, v] : x->items()) {
        std::uint64_t key = 0;
        try {
          std::size_t used = 0;
          key = std::stoull(k, &used);
          if (used != k.size()) throw std::invalid_argument(k);
        } catch (const std::exception&) {
          fail(name, "key '" + k + "' is not an integer");
        }
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
          fail(name + "." + k, "expected a positive integer");
        }
        out[key] = v.get<std::uint64_t>();
      }
      resolved_[name] = *x;
    } else {
      resolved_[name] = json::object();
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& name, const std::string& why) const {
    throw ConfigError(kind_ + ": params." + name + ": " + why);
  }

  json finish() const {
    for (const auto& [k, v] : raw_.items()) {
      if (!resolved_.contains(k)) throw ConfigError(kind_ + ": params." + k + ": unknown parameter");
    }
    return resolved_;
  }

 private:
  const json* find(const std::string& name) const {
    const auto it = raw_.find(name);
    return it == raw_.end() ? nullptr : &*it;
  }

  const json& raw_;
  std::string kind_;
  json resolved_ = json::object();
};

std::uint64_t stream_for(const std::string& tag, std::uint64_t replicate) {
  return replicate_stream(tag, replicate);
}

std::string tag_of(const std::string& kind, Model model, const std::string& detail) {
  return kind + "/" + std::string(model_name(model)) + "/" + detail;
}

json summary_json(const StatSummary& s) {
  return {{"count", s.count()}, {"mean", s.mean()}, {"sd", s.stddev()},
          {"se", s.standard_error()}, {"min", s.min()}, {"max", s.max()}};
}

json proportion_json(const Proportion& p) {
  return {{"successes", p.successes}, {"trials", p.trials}, {"p", p.p}, {"se", p.se},
          {"wilson", {p.wilson_lo, p.wilson_hi}}};
}

bool all_true(const json& checks) {
  for (const auto& [k, v] : checks.items()) {
    if (!v.get<bool>()) return false;
  }
  return true;
}

// Exact M_n per replicate with the branch-and-bound engine; a work-limited
// replicate is reported by throwing, since it carries no lower bound.
double exact_mn(std::uint32_t n, const BrwSample& sample, std::uint64_t work_limit,
                std::size_t beam, std::uint64_t* nodes = nullptr) {
  SearchOptions options;
  options.work_limit = work_limit;
  const CensoredSearch r = min_displacement_bnb(n, sample, options, beam);
  if (!r.result) {
    throw WorkLimitExceeded("search at generation " + std::to_string(n) +
                                " exceeded the work limit of " + std::to_string(work_limit),
                            r.lower_bound);
  }
  if (nodes) *nodes = r.nodes_expanded;
  return r.result->value;
}

double estimated_search_seconds(std::uint32_t n) {
  // Calibrated on the development machine: ~125 ns per explored node and
  // ~0.7 e^{median} nodes per search.
  return 1.25e-7 * 0.7 * std::exp(m_n(n) + 0.8);
}

}  // namespace

// ---------------------------------------------------------------------------
// Spec plumbing

ExperimentSpec ExperimentSpec::from_json(const json& input) {
  const json& j = input.contains("spec") && input["spec"].is_object() ? input["spec"] : input;
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  ExperimentSpec spec;
  static const std::set<std::string> known{"kind", "models", "seed", "threads", "work_limit",
                                           "params"};
  for (const auto& [k, v] : j.items()) {
    if (!known.contains(k)) throw ConfigError("config." + k + ": unknown field");
  }
  if (!j.contains("kind")) throw ConfigError("config.kind: required field is missing");
  if (!j["kind"].is_string()) throw ConfigError("config.kind: expected a string");
  spec.kind = j["kind"].get<std::string>();
  if (std::find(std::begin(kExperimentKinds), std::end(kExperimentKinds), spec.kind) ==
      std::end(kExperimentKinds)) {
    throw ConfigError("config.kind: unknown experiment '" + spec.kind + "'");
  }
  if (j.contains("models")) {
    const json& m = j["models"];
    if (!m.is_array() || m.empty()) throw ConfigError("config.models: expected a non-empty array");
    spec.models.clear();
    for (const json& e : m) {
      if (!e.is_string()) throw ConfigError("config.models: entries must be strings");
      try {
        spec.models.push_back(parse_model(e.get<std::string>()));
      } catch (const std::invalid_argument& err) {
        throw ConfigError(std::string("config.models: ") + err.what());
      }
    }
  }
  const auto get_uint = [&](const char* name, std::uint64_t def) {
    if (!j.contains(name)) return def;
    if (!j[name].is_number_integer() || j[name].get<std::int64_t>() < 0) {
      throw ConfigError(std::string("config.") + name + ": expected a non-negative integer");
    }
    return j[name].get<std::uint64_t>();
  };
  spec.seed = get_uint("seed", spec.seed);
  spec.threads = static_cast<unsigned>(get_uint("threads", spec.threads));
  if (spec.threads == 0) throw ConfigError("config.threads: must be >= 1");
  spec.work_limit = get_uint("work_limit", spec.work_limit);
  if (spec.work_limit == 0) throw ConfigError("config.work_limit: must be >= 1");
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw ConfigError("config.params: expected an object");
    spec.params = j["params"];
  }
  return spec;
}

json ExperimentSpec::to_json() const {
  json models_json = json::array();
  for (Model m : models) models_json.push_back(std::string(model_name(m)));
  return {{"kind", kind},         {"models", models_json}, {"seed", seed},
          {"threads", threads},   {"work_limit", work_limit}, {"params", params}};
}

bool ExperimentOutput::passed() const {
  return !summary.contains("checks") || all_true(summary["checks"]);
}

ExperimentOutput run_experiment(const ExperimentSpec& spec) {
  if (spec.kind == "median-sweep") return run_median_sweep(spec);
  if (spec.kind == "tail-fit") return run_tail_fit(spec);
  if (spec.kind == "census-check") return run_census_check(spec);
  if (spec.kind == "walk-check") return run_walk_check(spec);
  if (spec.kind == "rrt-sweep") return run_rrt_sweep(spec);
  if (spec.kind == "pratt-survey") return run_pratt_survey(spec);
  if (spec.kind == "tight-check") return run_tight_check(spec);
  throw ConfigError("config.kind: unknown experiment '" + spec.kind + "'");
}

// ---------------------------------------------------------------------------
// median-sweep

ExperimentOutput run_median_sweep(const ExperimentSpec& spec) {
  Params p(spec.params, spec.kind);
  std::vector<std::uint64_t> grid;
  for (std::uint64_t n = 12; n <= 44; n += 4) grid.push_back(n);
  const auto n_values = p.uints("n_values", grid, 1);
  const std::uint64_t replicates = p.uint("replicates", 2000, 1);
  const auto replicates_by_n = p.uint_map("replicates_by_n");
  const std::uint64_t beam = p.uint("beam_width", 256, 1);
  const double level = p.real("ci_level", 0.95);
  const std::uint64_t leading_n = p.uint("leading_n", 40, 1);
  const double leading_tol = p.real("leading_tolerance", 0.05);
  const double slope_max = p.real("slope_max", 1.5);
  const double band_max = p.real("residual_band_max", 2.0);
  const json resolved = p.finish();
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("median-sweep: params.ci_level: must be in (0,1)");
  for (const auto n : n_values) {
    if (n > 50) throw ConfigError("median-sweep: params.n_values: n above the engine cap of 50");
  }
  const double z = z_for(level);

  ExperimentOutput out;
  json rows = json::array();
  json fits = json::object();
  json checks = json::object();
  double residual_lo = INFINITY;
  double residual_hi = -INFINITY;
  for (const Model model : spec.models) {
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> ws;
    for (const auto n : n_values) {
      const auto it = replicates_by_n.find(n);
      const std::uint64_t reps = it == replicates_by_n.end() ? replicates : it->second;
      const std::string tag = tag_of(spec.kind, model, "n=" + std::to_string(n));
      std::vector<double> values(reps);
      std::vector<std::uint64_t> nodes(reps);
      parallel_for(reps, spec.threads, [&](std::uint64_t i) {
        const BrwSample sample(model, RngStream(spec.seed, stream_for(tag, i)));
        values[i] = exact_mn(static_cast<std::uint32_t>(n), sample, spec.work_limit, beam,
                             &nodes[i]);
      });
      StatSummary s;
      StatSummary node_stats;
      for (std::uint64_t i = 0; i < reps; ++i) {
        s.add(values[i]);
        node_stats.add(static_cast<double>(nodes[i]));
        out.records.push_back({{"model", model_name(model)}, {"n", n}, {"replicate", i},
                               {"value", values[i]}, {"nodes", nodes[i]}});
      }
      const double median = s.median();
      const auto [lo, hi] = s.quantile_ci(0.5, level);
      const double se = std::max((hi - lo) / (2.0 * z), 1e-12);
      const double residual = median - m_n(n);
      residual_lo = std::min(residual_lo, residual);
      residual_hi = std::max(residual_hi, residual);
      xs.push_back(std::log(static_cast<double>(n)));
      ys.push_back(median - static_cast<double>(n) / kE);
      ws.push_back(1.0 / (se * se));
      rows.push_back({{"model", model_name(model)},
                      {"n", n},
                      {"replicates", reps},
                      {"median", median},
                      {"median_ci", {lo, hi}},
                      {"median_over_n", median / static_cast<double>(n)},
                      {"m_n", m_n(n)},
                      {"residual", residual},
                      {"values", summary_json(s)},
                      {"mean_nodes", node_stats.mean()}});
      if (n == leading_n) {
        checks["leading_term_" + std::string(model_name(model))] =
            std::abs(median / static_cast<double>(n) - 1.0 / kE) <= leading_tol;
      }
    }
    if (xs.size() >= 2) {
      const LinearFit fit = weighted_linear_fit(xs, ys, ws);
      const double ci_lo = fit.slope - z * fit.slope_se;
      const double ci_hi = fit.slope + z * fit.slope_se;
      fits[std::string(model_name(model))] = {{"slope", fit.slope},
                                              {"slope_se", fit.slope_se},
                                              {"slope_ci", {ci_lo, ci_hi}},
                                              {"intercept", fit.intercept},
                                              {"target", 1.5 / kE}};
      checks["slope_" + std::string(model_name(model))] =
          fit.slope > 0.0 && fit.slope < slope_max && ci_lo > 0.0;
    }
  }
  const double band = residual_hi - residual_lo;
  checks["residual_band"] = band <= band_max;
  out.summary = {{"kind", spec.kind},
                 {"params", resolved},
                 {"rows", rows},
                 {"fits", fits},
                 {"residual_band", {{"lo", residual_lo}, {"hi", residual_hi}, {"width", band}}},
                 {"checks", checks},
                 {"note", "median bands are empirical regression contracts"}};
  for (const Model model : spec.models) {
    for (const auto n : n_values) {
      const auto it = replicates_by_n.find(n);
      const std::uint64_t reps = it == replicates_by_n.end() ? replicates : it->second;
      out.expected_seconds += reps * estimated_search_seconds(static_cast<std::uint32_t>(n)) *
                              (model == Model::pd ? 1.3 : 1.0) / spec.threads;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// tail-fit

namespace {

struct TailSide_ {
  json grid = json::array();
  double slope = NAN;
  double slope_se = NAN;
};

// Empirical tail P(side distance >= x) on the grid x_j = j * width, fitted
// by weighted least squares of log P on x over buckets j >= 2 with at least
// min_hits hits.
TailSide_ fit_tail(const std::vector<double>& sorted, double median, bool right, double width,
                   std::uint64_t min_hits) {
  TailSide_ out;
  const double n = static_cast<double>(sorted.size());
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> ws;
  for (std::uint64_t j = 1;; ++j) {
    const double x = width * static_cast<double>(j);
    std::uint64_t hits = 0;
    if (right) {
      hits = static_cast<std::uint64_t>(
          sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), median + x));
    } else {
      hits = static_cast<std::uint64_t>(
          std::upper_bound(sorted.begin(), sorted.end(), median - x) - sorted.begin());
    }
    if (hits == 0) break;
    const double prob = static_cast<double>(hits) / n;
    const bool used = j >= 2 && hits >= min_hits;
    out.grid.push_back({{"x", x}, {"hits", hits}, {"log_tail", std::log(prob)}, {"used", used}});
    if (used) {
      xs.push_back(x);
      ys.push_back(std::log(prob));
      ws.push_back(static_cast<double>(hits) / (1.0 - prob));
    }
  }
  if (xs.size() >= 2) {
    const LinearFit fit = weighted_linear_fit(xs, ys, ws);
    out.slope = -fit.slope;
    out.slope_se = fit.slope_se;
  }
  return out;
}

}  // namespace

ExperimentOutput run_tail_fit(const ExperimentSpec& spec) {
  Params p(spec.params, spec.kind);
  const std::uint64_t n = p.uint("n", 25, 1);
  const std::uint64_t replicates = p.uint("replicates", 100000, 100);
  const double width = p.real("bucket_width", 0.25);
  const std::uint64_t min_hits = p.uint("min_hits", 30, 1);
  const std::uint64_t beam = p.uint("beam_width", 256, 1);
  const double right_min = p.real("right_slope_min", 0.5);
  const json resolved = p.finish();
  if (n > 50) throw ConfigError("tail-fit: params.n: above the engine cap of 50");
  if (!(width > 0.0)) throw ConfigError("tail-fit: params.bucket_width: must be positive");
  const double z = z_for(0.95);

  ExperimentOutput out;
  json fits = json::object();
  json checks = json::object();
  json observations = json::object();
  std::map<Model, double> right_slope;
  for (const Model model : spec.models) {
    const std::string tag = tag_of(spec.kind, model, "n=" + std::to_string(n));
    std::vector<double> values(replicates);
    parallel_for(replicates, spec.threads, [&](std::uint64_t i) {
      const BrwSample sample(model, RngStream(spec.seed, stream_for(tag, i)));
      values[i] = exact_mn(static_cast<std::uint32_t>(n), sample, spec.work_limit, beam);
    });
    StatSummary s;
    for (std::uint64_t i = 0; i < replicates; ++i) {
      s.add(values[i]);
      out.records.push_back(
          {{"model", model_name(model)}, {"n", n}, {"replicate", i}, {"value", values[i]}});
    }
    const double median = s.median();
    const auto& sorted = s.sorted_values();
    const TailSide_ left = fit_tail(sorted, median, false, width, min_hits);
    const TailSide_ right = fit_tail(sorted, median, true, width, min_hits);
    const auto side_json = [&](const char* name, const TailSide_& t) {
      return json{{"side", name},
                  {"grid", t.grid},
                  {"slope", std::isnan(t.slope) ? json(nullptr) : json(t.slope)},
                  {"slope_ci", std::isnan(t.slope)
                                   ? json(nullptr)
                                   : json({t.slope - z * t.slope_se, t.slope + z * t.slope_se})}};
    };
    const std::string name(model_name(model));
    fits[name] = {{"median", median},
                  {"values", summary_json(s)},
                  {"left", side_json("left", left)},
                  {"right", side_json("right", right)}};
    if (std::isnan(left.slope) || std::isnan(right.slope)) {
      throw ConfigError("tail-fit: fewer than two buckets with >= " + std::to_string(min_hits) +
                        " hits; raise params.replicates or params.bucket_width");
    }
    // Both rates are sharp only for the PWIT; the PD right tail is far
    // thinner, so its ordering is reported without an assertion.
    if (model == Model::pwit) {
      checks["left_exceeds_right_pwit"] = left.slope > right.slope;
      checks["right_slope_min_pwit"] = right.slope >= right_min;
    } else {
      observations["left_exceeds_right_" + name] = left.slope > right.slope;
    }
    right_slope[model] = right.slope;
  }
  if (right_slope.contains(Model::pwit) && right_slope.contains(Model::pd)) {
    checks["pd_right_at_least_pwit"] = right_slope[Model::pd] >= right_slope[Model::pwit];
  }
  out.summary = {{"kind", spec.kind}, {"params", resolved},         {"fits", fits},
                 {"checks", checks}, {"observations", observations}};
  out.expected_seconds = static_cast<double>(spec.models.size()) * replicates *
                         estimated_search_seconds(static_cast<std::uint32_t>(n)) / spec.threads;
  return out;
}

// ---------------------------------------------------------------------------
// census-check

ExperimentOutput run_census_check(const ExperimentSpec& spec) {
  Params p(spec.params, spec.kind);
  const auto ns = p.uints("n_values", {3, 5, 8}, 0);
  const auto xs = p.reals("x_values", {1.5, 2.0, 3.0});
  const std::uint64_t replicates = p.uint("replicates", 100000, 2);
  const double sigmas = p.real("sigmas", 3.0);
  const json resolved = p.finish();
  if (ns.size() != xs.size()) {
    throw ConfigError("census-check: params.x_values: must pair up with params.n_values");
  }
  CensusOptions options;
  options.work_limit = spec.work_limit;

  ExperimentOutput out;
  json checks = json::object();
  for (const Model model : spec.models) {
    for (std::size_t c = 0; c < ns.size(); ++c) {
      const auto n = static_cast<std::uint32_t>(ns[c]);
      const double x = xs[c];
      if (!(x >= 0.0)) throw ConfigError("census-check: params.x_values: must be >= 0");
      const std::string tag = tag_of(spec.kind, model, "n=" + std::to_string(n) + ",x=" + json(x).dump());
      std::vector<std::vector<std::uint64_t>> levels(replicates);
      parallel_for(replicates, spec.threads, [&](std::uint64_t i) {
        const BrwSample sample(model, RngStream(spec.seed, stream_for(tag, i)));
        levels[i] = census(n, x, sample, options).per_level;
      });
      std::vector<StatSummary> per_level(n + 1);
      for (const auto& lv : levels) {
        for (std::uint32_t j = 0; j <= n; ++j) per_level[j].add(static_cast<double>(lv[j]));
      }
      json level_rows = json::array();
      for (std::uint32_t j = 0; j <= n; ++j) {
        level_rows.push_back({{"level", j},
                              {"mean", per_level[j].mean()},
                              {"se", per_level[j].standard_error()},
                              {"expected", expected_tn(j, x).to_linear()}});
      }
      const double expected = expected_tn(n, x).to_linear();
      const StatSummary& s = per_level[n];
      const double zscore = (s.mean() - expected) / s.standard_error();
      const bool ok = std::abs(s.mean() - expected) <= sigmas * s.standard_error();
      checks["mean_T" + std::to_string(n) + "_" + std::string(model_name(model))] = ok;
      out.records.push_back({{"model", model_name(model)},
                             {"n", n},
                             {"x", x},
                             {"replicates", replicates},
                             {"mean", s.mean()},
                             {"se", s.standard_error()},
                             {"expected", expected},
                             {"z", zscore},
                             {"levels", level_rows}});
      double e = 0.0;
      for (std::uint32_t j = 0; j <= n; ++j) e += expected_tn(j, x).to_linear();
      out.expected_seconds += replicates * 3e-7 * (e + 1.0) / spec.threads;
    }
  }
  out.summary = {{"kind", spec.kind}, {"params", resolved}, {"rows", out.records},
                 {"checks", checks}};
  return out;
}

// ---------------------------------------------------------------------------
// walk-check

ExperimentOutput run_walk_check(const ExperimentSpec& spec) {
  Params p(spec.params, spec.kind);
  const auto leading_n = p.uints("leading_n", {2, 5, 10, 20}, 1);
  const std::uint64_t leading_reps = p.uint("leading_replicates", 100000, 1);
  const std::uint64_t rot_n = p.uint("rotation_n", 10, 1);
  const std::uint64_t rot_k = p.uint("rotation_k", 4);
  const std::uint64_t rot_reps = p.uint("rotation_replicates", 100000, 1);
  const auto near_n = p.uints("nearleading_n", {20, 40, 80}, 1);
  const double near_a = p.real("nearleading_a", 2.0);
  const std::uint64_t near_reps = p.uint("nearleading_replicates", 100000, 1);
  const double near_bound = p.real("nearleading_bound", 0.2);
  const auto exp_a = p.reals("exponent_a", {2.0, 4.0, 8.0});
  const std::uint64_t dnka_n = p.uint("dnka_n", 40, 1);
  const std::uint64_t dnka_k = p.uint("dnka_k", 10);
  const auto dnka_a = p.reals("dnka_a", {1.0, 2.0, 3.0});
  const std::uint64_t dnka_reps = p.uint("dnka_replicates", 100000, 1);
  const double dnka_bound = p.real("dnka_bound", 1.0);
  const json resolved = p.finish();

  ExperimentOutput out;
  json checks = json::object();
  const EventExpression leading("L");
  json leading_rows = json::array();
  bool leading_ok = true;
  for (const auto n : leading_n) {
    const std::uint64_t k = n / 2;
    const double S = static_cast<double>(n);
    const RngStream rng(spec.seed, stream_for("walk-check/leading", n));
    const EventEstimate e = estimate_event_prob(n, k, S, {}, leading, leading_reps, rng,
                                                spec.threads);
    const double target = 1.0 / static_cast<double>(n);
    const double se = std::sqrt(target * (1.0 - target) / static_cast<double>(leading_reps));
    const bool ok = std::abs(e.proportion.p - target) <= 3.0 * se;
    leading_ok = leading_ok && ok;
    json row = {{"test", "leading"}, {"n", n}, {"k", k},          {"S", S},
                {"target", target},  {"estimate", proportion_json(e.proportion)}, {"ok", ok}};
    leading_rows.push_back(row);
    out.records.push_back(row);
  }
  checks["leading_probability"] = leading_ok;

  std::vector<unsigned char> rot_ok(rot_reps, 0);
  const RngStream rot_rng(spec.seed, stream_for("walk-check/rotations", 0));
  parallel_for(rot_reps, spec.threads, [&](std::uint64_t i) {
    RngStream s = rot_rng.substream(i);
    const WalkSample w = sample_walk(rot_n, rot_k, s);
    int l = 0;
    int r = 0;
    for (const WalkSample& x : rotations(w)) {
      const EventFlags f = event_flags(x, {});
      l += f.leading;
      r += f.trailing;
    }
    rot_ok[i] = l == 1 && r == 1;
  });
  const auto rot_good =
      static_cast<std::uint64_t>(std::count(rot_ok.begin(), rot_ok.end(), 1));
  checks["rotation_exactly_one"] = rot_good == rot_reps;
  const json rot_row = {{"test", "rotations"}, {"n", rot_n},       {"k", rot_k},
                        {"samples", rot_reps}, {"exactly_one", rot_good}};
  out.records.push_back(rot_row);

  // n P(L_a | W_n = n + k) / (a^6 + 1), k = ceil(n/e): an empirical constant.
  json near_rows = json::array();
  double near_max = 0.0;
  for (const auto n : near_n) {
    EventParams params;
    params.a = near_a;
    const auto k = static_cast<std::uint64_t>(std::ceil(static_cast<double>(n) / kE));
    const RngStream rng(spec.seed, stream_for("walk-check/nearleading", n));
    const EventEstimate e = estimate_event_prob(n, k, static_cast<double>(n + k), params,
                                                leading, near_reps, rng, spec.threads);
    const double scaled = static_cast<double>(n) * e.proportion.p / (std::pow(near_a, 6) + 1.0);
    near_max = std::max(near_max, scaled);
    json row = {{"test", "nearleading"}, {"n", n}, {"k", k}, {"a", near_a},
                {"estimate", proportion_json(e.proportion)}, {"scaled", scaled}};
    near_rows.push_back(row);
    out.records.push_back(row);
  }
  checks["nearleading_bounded"] = near_max <= near_bound;

  // Slope of log(n P(L_a)) against log a at n = 40, reported only.
  std::vector<double> lx;
  std::vector<double> ly;
  {
    const std::uint64_t n = 40;
    const auto k = static_cast<std::uint64_t>(std::ceil(n / kE));
    for (const double a : exp_a) {
      EventParams params;
      params.a = a;
      const RngStream rng(spec.seed, stream_for("walk-check/exponent", static_cast<std::uint64_t>(a * 1000)));
      const EventEstimate e = estimate_event_prob(n, k, static_cast<double>(n + k), params,
                                                  leading, near_reps, rng, spec.threads);
      if (e.proportion.p > 0.0) {
        lx.push_back(std::log(a));
        ly.push_back(std::log(static_cast<double>(n) * e.proportion.p));
      }
    }
  }
  const double fitted_exponent = lx.size() >= 3 ? linear_fit(lx, ly).slope : NAN;

  json dnka_rows = json::array();
  double dnka_max = 0.0;
  const EventExpression ld("L & D");
  for (const double a : dnka_a) {
    EventParams params;
    params.a = a;
    const RngStream rng(spec.seed, stream_for("walk-check/dnka", static_cast<std::uint64_t>(a * 1000)));
    const EventEstimate e = estimate_event_prob(dnka_n, dnka_k, dnka_n / 2.0, params, ld,
                                                dnka_reps, rng, spec.threads);
    const double scaled = static_cast<double>(dnka_n) * std::exp(a) * e.proportion.p;
    dnka_max = std::max(dnka_max, scaled);
    json row = {{"test", "dnka"}, {"n", dnka_n}, {"k", dnka_k}, {"a", a},
                {"estimate", proportion_json(e.proportion)}, {"scaled", scaled}};
    dnka_rows.push_back(row);
    out.records.push_back(row);
  }
  checks["dnka_bounded"] = dnka_max <= dnka_bound;

  out.summary = {{"kind", spec.kind},
                 {"params", resolved},
                 {"leading", leading_rows},
                 {"rotations", rot_row},
                 {"nearleading", {{"rows", near_rows}, {"max_scaled", near_max},
                                  {"fitted_exponent", std::isnan(fitted_exponent) ? json(nullptr) : json(fitted_exponent)}}},
                 {"dnka", {{"rows", dnka_rows}, {"max_scaled", dnka_max}}},
                 {"checks", checks},
                 {"note", "bounds on scaled probabilities are empirical constants"}};
  out.expected_seconds = 2e-6 * (leading_reps * leading_n.size() * 10 + rot_reps * rot_n * 10 +
                                 near_reps * (near_n.size() + exp_a.size()) * 50 +
                                 dnka_reps * dnka_a.size() * 40) / spec.threads;
  return out;
}

// ---------------------------------------------------------------------------
// rrt-sweep

ExperimentOutput run_rrt_sweep(const ExperimentSpec& spec) {
  Params p(spec.params, spec.kind);
  std::vector<std::uint64_t> grid;
  for (std::uint64_t m = 64; m <= 8192; m *= 2) grid.push_back(m);
  const auto m_values = p.uints("m_values", grid, 2);
  const std::uint64_t replicates = p.uint("replicates", 4000, 2);
  const double band_lo = p.real("band_lo", -2.5);
  const double band_hi = p.real("band_hi", -1.2);
  const std::uint64_t smax_m = p.uint("smax_m", 50, 2);
  const std::uint64_t smax_reps = p.uint("smax_replicates", 10000, 2);
  const auto tail_x = p.reals("tail_x", {1.0, 2.0, 3.0});
  const std::uint64_t coupling_m = p.uint("coupling_m", 64, 1);
  const std::uint64_t coupling_reps = p.uint("coupling_replicates", 10000, 2);
  const std::uint64_t tail_m = p.uint("height_tail_m", 1024, 2);
  const auto tail_k = p.uints("height_tail_k", {2, 3, 4, 5, 6, 7, 8}, 1);
  const std::uint64_t tail_reps = p.uint("height_tail_replicates", 2000, 2);
  const json resolved = p.finish();

  ExperimentOutput out;
  json checks = json::object();

  json height_rows = json::array();
  bool in_band = true;
  for (const auto m : m_values) {
    std::vector<std::uint32_t> heights(replicates);
    const RngStream rng(spec.seed, stream_for("rrt-sweep/height", m));
    parallel_for(replicates, spec.threads, [&](std::uint64_t i) {
      RngStream s = rng.substream(i);
      heights[i] = build_rrt(m, s).height();
    });
    StatSummary s;
    for (const auto h : heights) s.add(h);
    const double lm = std::log(static_cast<double>(m));
    const double centre = kE * lm - 1.5 * std::log(lm);
    const double offset = s.mean() - centre;
    in_band = in_band && offset >= band_lo && offset <= band_hi;
    json row = {{"test", "height"}, {"m", m}, {"mean", s.mean()}, {"se", s.standard_error()},
                {"centre", centre}, {"offset", offset}};
    height_rows.push_back(row);
    out.records.push_back(row);
  }
  checks["height_offset_in_band"] = in_band;

  // S(w_m): the m-th lowest displacement of the PWIT.
  std::vector<double> smax(smax_reps);
  parallel_for(smax_reps, spec.threads, [&](std::uint64_t i) {
    const BrwSample sample(Model::pwit, RngStream(spec.seed, stream_for("rrt-sweep/smax", i)));
    smax[i] = lowest_m(smax_m, sample, spec.work_limit).back().displacement;
  });
  StatSummary ss;
  for (const double v : smax) ss.add(v);
  const double har_m = har(smax_m - 1);
  checks["smax_mean"] = std::abs(ss.mean() - har_m) <= 3.0 * ss.standard_error();
  json tail_rows = json::array();
  bool upper_ok = true;
  bool lower_ok = true;
  for (const double x : tail_x) {
    const auto upper = static_cast<std::uint64_t>(
        std::count_if(smax.begin(), smax.end(), [&](double v) { return v >= har_m + x; }));
    const auto lower = static_cast<std::uint64_t>(
        std::count_if(smax.begin(), smax.end(), [&](double v) { return v <= har_m - x; }));
    const double pu = static_cast<double>(upper) / smax_reps;
    const double pl = static_cast<double>(lower) / smax_reps;
    const double bu = std::exp(-x);
    const double bl = std::exp(-std::exp(x - 1.0));
    upper_ok = upper_ok && pu <= bu;
    lower_ok = lower_ok && pl <= bl;
    tail_rows.push_back({{"x", x}, {"upper", pu}, {"upper_bound", bu}, {"lower", pl},
                         {"lower_bound", bl}});
  }
  checks["smax_upper_tail"] = upper_ok;
  checks["smax_lower_tail"] = lower_ok;
  const json smax_row = {{"test", "smax"},         {"m", smax_m},
                         {"mean", ss.mean()},      {"se", ss.standard_error()},
                         {"har", har_m},           {"tails", tail_rows}};
  out.records.push_back(smax_row);

  std::vector<double> direct(coupling_reps);
  std::vector<double> coupled(coupling_reps);
  const RngStream direct_rng(spec.seed, stream_for("rrt-sweep/direct", coupling_m));
  parallel_for(coupling_reps, spec.threads, [&](std::uint64_t i) {
    RngStream s = direct_rng.substream(i);
    direct[i] = build_rrt(coupling_m, s).height();
    const BrwSample sample(Model::pwit, RngStream(spec.seed, stream_for("rrt-sweep/coupled", i)));
    coupled[i] = rrt_from_pwit(coupling_m, sample, spec.work_limit).height();
  });
  const double ks_p = ks_test_two_sample(direct, coupled);
  checks["coupling_ks"] = ks_p > 1e-3;
  const json coupling_row = {{"test", "coupling"}, {"m", coupling_m}, {"ks_p", ks_p},
                             {"replicates", coupling_reps}};
  out.records.push_back(coupling_row);

  const HeightTail ht = height_tail(tail_m, tail_k, tail_reps,
                                    RngStream(spec.seed, stream_for("rrt-sweep/tail", tail_m)),
                                    spec.threads);
  json ht_rows = json::array();
  bool monotone = true;
  for (std::size_t i = 0; i < ht.tail.size(); ++i) {
    ht_rows.push_back({{"k", ht.tail[i].first}, {"p", ht.tail[i].second.p}});
    if (i > 0 && ht.tail[i].first > ht.tail[i - 1].first) {
      monotone = monotone && ht.tail[i].second.p <= ht.tail[i - 1].second.p;
    }
  }
  checks["height_tail_decays"] = ht.decay_rate > 0.0 && monotone;
  const json tail_row = {{"test", "height_tail"}, {"m", tail_m}, {"tail", ht_rows},
                         {"decay_rate", std::isnan(ht.decay_rate) ? json(nullptr) : json(ht.decay_rate)}};
  out.records.push_back(tail_row);

  out.summary = {{"kind", spec.kind},   {"params", resolved}, {"heights", height_rows},
                 {"smax", smax_row},    {"coupling", coupling_row},
                 {"height_tail", tail_row}, {"checks", checks},
                 {"note", "the height band is an empirical regression contract"}};
  double work = 0.0;
  for (const auto m : m_values) work += static_cast<double>(replicates) * m;
  out.expected_seconds = (3e-8 * work + 2e-6 * smax_reps * smax_m +
                          2e-6 * coupling_reps * coupling_m + 3e-8 * tail_reps * tail_m) /
                         spec.threads;
  return out;
}

// ---------------------------------------------------------------------------
// pratt-survey

ExperimentOutput run_pratt_survey(const ExperimentSpec& spec) {
  Params p(spec.params, spec.kind);
  const std::uint64_t x_lo = p.required_uint("x_lo", 2);
  const std::uint64_t x_hi = p.required_uint("x_hi", 3);
  const auto z_grid = p.reals("z_grid", {0.0, 1.0, 2.0, 3.0});
  const auto qs = p.reals("quantiles", {0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99});
  const std::uint64_t max_span = p.uint("max_span", 100'000'000, 1);
  const json resolved = p.finish();
  if (x_lo >= x_hi) throw ConfigError("pratt-survey: params.x_hi: must exceed x_lo");
  if (x_hi - x_lo > max_span) {
    throw WorkLimitExceeded("pratt-survey range exceeds params.max_span", 0.0);
  }
  for (const double q : qs) {
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("pratt-survey: params.quantiles: must be in [0,1]");
  }
  PrattSurveyOptions options;
  options.max_span = max_span;
  options.threads = spec.threads;
  const auto records = pratt_survey(x_lo, x_hi, options);

  ExperimentOutput out;
  bool bound_ok = true;
  bool product_ok = true;
  bool height_ok = true;
  StatSummary e_loglog;
  StatSummary e_printed;
  StatSummary heights;
  for (const auto& r : records) {
    std::uint64_t prod = 1;
    std::uint32_t h = 0;
    for (const auto& [q, e] : r.factors) {
      for (std::uint32_t i = 0; i < e; ++i) prod *= q;
      h = std::max(h, pratt_height(q) + 1);
    }
    product_ok = product_ok && (r.p == 2 ? r.factors.empty() : prod == r.p - 1);
    height_ok = height_ok && h == r.H;
    bound_ok = bound_ok && r.H <= std::log(static_cast<double>(r.p)) / std::numbers::ln2 + 1.0;
    heights.add(r.H);
    e_printed.add(r.E_printed);
    if (!std::isnan(r.E_loglog)) e_loglog.add(r.E_loglog);
    json factors = json::array();
    for (const auto& [q, e] : r.factors) factors.push_back({q, e});
    out.records.push_back({{"p", r.p},
                           {"H", r.H},
                           {"E", std::isnan(r.E_loglog) ? json(nullptr) : json(r.E_loglog)},
                           {"E_printed", r.E_printed},
                           {"factors", factors}});
  }
  const auto quantiles = [&](const StatSummary& s) {
    json q = json::object();
    if (s.empty()) return q;
    for (const double level : qs) q[json(level).dump()] = s.quantile(level);
    return q;
  };
  const auto exceedance = [&](const StatSummary& s) {
    json rows = json::array();
    const auto& v = s.sorted_values();
    for (const double zv : z_grid) {
      const auto count = static_cast<std::uint64_t>(
          v.end() - std::lower_bound(v.begin(), v.end(), zv));
      rows.push_back({{"z", zv}, {"count", count},
                      {"fraction", records.empty() ? 0.0 : static_cast<double>(count) / records.size()}});
    }
    return rows;
  };
  const json exc_loglog = exceedance(e_loglog);
  bool decreasing = true;
  for (std::size_t i = 1; i < exc_loglog.size(); ++i) {
    if (z_grid[i] > z_grid[i - 1]) {
      decreasing = decreasing && exc_loglog[i]["count"].get<std::uint64_t>() <=
                                     exc_loglog[i - 1]["count"].get<std::uint64_t>();
    }
  }
  json checks = {{"height_bound", bound_ok}, {"factor_product", product_ok},
                 {"height_recursion", height_ok}, {"exceedance_decreasing", decreasing}};
  out.summary = {
      {"kind", spec.kind},
      {"params", resolved},
      {"range", {x_lo, x_hi}},
      {"count", records.size()},
      {"height", summary_json(heights)},
      {"centerings",
       {{"loglog", {{"formula", "H - (e log log p - 1.5 log log log p)"},
                    {"values", summary_json(e_loglog)},
                    {"quantiles", quantiles(e_loglog)},
                    {"exceedance", exc_loglog}}},
        {"printed", {{"formula", "H - (e log p - 1.5 log log p)"},
                     {"values", summary_json(e_printed)},
                     {"quantiles", quantiles(e_printed)},
                     {"exceedance", exceedance(e_printed)}}}}},
      {"checks", checks},
      {"note", "E is the loglog centering; the printed centering exceeds the trivial height bound"}};
  out.expected_seconds = 2e-5 * static_cast<double>(x_hi - x_lo) / std::log(static_cast<double>(x_hi)) / spec.threads;
  return out;
}

// ---------------------------------------------------------------------------
// tight-check

ExperimentOutput run_tight_check(const ExperimentSpec& spec) {
  Params p(spec.params, spec.kind);
  const std::uint64_t m = p.uint("m", 5, 1);
  const std::uint64_t n = p.uint("n", 5, 1);
  const double M = p.real("M", 3.0);
  const double N = p.real("N", 3.0);
  const std::uint64_t replicates = p.uint("replicates", 100000, 2);
  const std::uint64_t q_replicates = p.uint("q_replicates", 100000, 2);
  const std::uint64_t m2 = p.uint("tight2_m", 1, 1);
  const std::uint64_t n2 = p.uint("tight2_n", 10, 1);
  const double eps = p.real("tight2_epsilon", 0.05);
  const std::uint64_t pilot_reps = p.uint("tight2_pilot_replicates", 2000, 2);
  const std::uint64_t reps2 = p.uint("tight2_replicates", 10000, 2);
  const std::uint64_t beam = p.uint("beam_width", 64, 1);
  const json resolved = p.finish();
  if (!(M >= 0.0) || !(N >= 0.0)) throw ConfigError("tight-check: params.M/N: must be >= 0");
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("tight-check: params.tight2_epsilon: must be in (0,1)");
  if (m + n > 50 || m2 + n2 > 50) throw ConfigError("tight-check: generations above the engine cap");
  CensusOptions census_options;
  census_options.work_limit = spec.work_limit;

  ExperimentOutput out;
  json checks = json::object();
  json models_json = json::object();
  for (const Model model : spec.models) {
    const std::string name(model_name(model));
    const std::string base = spec.kind + "/" + name;

    // Shared instances: T_m(M) and the indicator of M_{m+n} >= M + N.
    std::vector<std::uint64_t> T(replicates);
    std::vector<unsigned char> lhs_hit(replicates);
    parallel_for(replicates, spec.threads, [&](std::uint64_t i) {
      const BrwSample sample(model, RngStream(spec.seed, stream_for(base + "/shared", i)));
      T[i] = census(static_cast<std::uint32_t>(m), M, sample, census_options).per_level[m];
      SearchOptions capped;
      capped.value_cap = M + N;
      capped.work_limit = spec.work_limit;
      const CensoredSearch r =
          min_displacement_bnb(static_cast<std::uint32_t>(m + n), sample, capped, beam);
      if (r.work_limited) throw WorkLimitExceeded("tight-check search hit the work limit", 0.0);
      lhs_hit[i] = !r.result.has_value();
    });
    // Independent instances for q = P(M_n >= N).
    std::vector<unsigned char> q_hit(q_replicates);
    parallel_for(q_replicates, spec.threads, [&](std::uint64_t i) {
      const BrwSample sample(model, RngStream(spec.seed, stream_for(base + "/q", i)));
      SearchOptions capped;
      capped.value_cap = N;
      capped.work_limit = spec.work_limit;
      const CensoredSearch r =
          min_displacement_bnb(static_cast<std::uint32_t>(n), sample, capped, beam);
      if (r.work_limited) throw WorkLimitExceeded("tight-check search hit the work limit", 0.0);
      q_hit[i] = !r.result.has_value();
    });
    const auto lhs_count = static_cast<std::uint64_t>(std::count(lhs_hit.begin(), lhs_hit.end(), 1));
    const auto q_count = static_cast<std::uint64_t>(std::count(q_hit.begin(), q_hit.end(), 1));
    const Proportion lhs = proportion(lhs_count, replicates);
    const double q = static_cast<double>(q_count) / q_replicates;
    StatSummary rhs_terms;
    StatSummary derivative;
    StatSummary t_stats;
    for (const auto t : T) {
      const double td = static_cast<double>(t);
      rhs_terms.add(std::pow(q, td));
      derivative.add(t == 0 ? 0.0 : td * std::pow(q, td - 1.0));
      t_stats.add(td);
    }
    const double rhs = rhs_terms.mean();
    const double rhs_se = std::sqrt(rhs_terms.standard_error() * rhs_terms.standard_error() +
                                    derivative.mean() * derivative.mean() * q * (1.0 - q) /
                                        q_replicates);
    const double combined = std::hypot(lhs.se, rhs_se);
    checks["tight1_" + name] = lhs.p <= rhs + 3.0 * combined;

    // Degenerate N = 0: P(M_n >= 0) = 1, so the right side is exactly 1.
    std::uint64_t zero_hits = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
      const BrwSample sample(model, RngStream(spec.seed, stream_for(base + "/zero", i)));
      SearchOptions capped;
      capped.value_cap = 0.0;
      zero_hits += !min_displacement_bnb(static_cast<std::uint32_t>(n), sample, capped, beam)
                        .result.has_value();
    }
    checks["tight1_degenerate_" + name] = zero_hits == 200;

    // tight2: choose M by pilot so that P{T_m2(M) < 1/eps} <= 1/5.
    const double target_count = 1.0 / eps;
    std::vector<std::vector<double>> pilot(pilot_reps);
    double M2 = NAN;
    const double grid_step = 0.25;
    const double grid_max = 4.0 * target_count + 20.0;
    std::vector<double> pilot_level(m2 == 1 ? 0 : 1);
    {
      // Level-m2 displacements of each pilot tree up to grid_max.
      std::vector<std::vector<double>> level(pilot_reps);
      parallel_for(pilot_reps, spec.threads, [&](std::uint64_t i) {
        const BrwSample sample(model, RngStream(spec.seed, stream_for(base + "/pilot", i)));
        if (m2 == 1) {
          DisplacementStream stream = sample.children_of(sample.root_key());
          while (auto c = stream.next(grid_max)) level[i].push_back(c->displacement);
        } else {
          CensusOptions o = census_options;
          o.record_paths = true;
          const CensusTable t = census(static_cast<std::uint32_t>(m2), grid_max, sample, o);
          for (const auto& path : t.depth_n_paths) level[i].push_back(path.second.back());
        }
        std::sort(level[i].begin(), level[i].end());
      });
      for (double x = grid_step; x <= grid_max; x += grid_step) {
        std::uint64_t small = 0;
        for (const auto& lv : level) {
          const auto count = std::upper_bound(lv.begin(), lv.end(), x) - lv.begin();
          small += static_cast<double>(count) < target_count;
        }
        if (static_cast<double>(small) / pilot_reps <= 0.2) {
          M2 = x;
          break;
        }
      }
    }
    json tight2 = json::object();
    if (std::isnan(M2)) {
      checks["tight2_" + name] = false;
      tight2["error"] = "no pilot grid value satisfies the hypothesis";
    } else {
      std::vector<double> hyp(reps2);
      std::vector<double> long_values(reps2);
      std::vector<double> short_values(reps2);
      parallel_for(reps2, spec.threads, [&](std::uint64_t i) {
        const BrwSample a(model, RngStream(spec.seed, stream_for(base + "/tight2-T", i)));
        const auto t = census(static_cast<std::uint32_t>(m2), M2, a, census_options).per_level[m2];
        hyp[i] = std::pow(1.0 - eps, static_cast<double>(t));
        const BrwSample b(model, RngStream(spec.seed, stream_for(base + "/tight2-long", i)));
        long_values[i] = exact_mn(static_cast<std::uint32_t>(n2 + m2), b, spec.work_limit, beam);
        const BrwSample c(model, RngStream(spec.seed, stream_for(base + "/tight2-short", i)));
        short_values[i] = exact_mn(static_cast<std::uint32_t>(n2), c, spec.work_limit, beam);
      });
      StatSummary h;
      for (const double v : hyp) h.add(v);
      StatSummary lv;
      for (const double v : long_values) lv.add(v);
      const double median_long = lv.median();
      const auto below = static_cast<std::uint64_t>(std::count_if(
          short_values.begin(), short_values.end(), [&](double v) { return v < median_long - M2; }));
      const Proportion conclusion = proportion(below, reps2);
      const double conclusion_se = std::sqrt(eps * (1.0 - eps) / reps2);
      const bool hypothesis = h.mean() < 0.5;
      checks["tight2_" + name] = hypothesis && conclusion.p <= eps + 3.0 * conclusion_se;
      tight2 = {{"M", M2},
                {"hypothesis_mean", h.mean()},
                {"hypothesis_se", h.standard_error()},
                {"median_long", median_long},
                {"conclusion", proportion_json(conclusion)},
                {"epsilon", eps}};
    }
    json row = {{"model", name},
                {"m", m},
                {"n", n},
                {"M", M},
                {"N", N},
                {"lhs", proportion_json(lhs)},
                {"q", q},
                {"rhs", rhs},
                {"rhs_se", rhs_se},
                {"T_mean", t_stats.mean()},
                {"tight2", tight2}};
    out.records.push_back(row);
    models_json[name] = row;
  }
  out.summary = {{"kind", spec.kind}, {"params", resolved}, {"models", models_json},
                 {"checks", checks}};
  out.expected_seconds = static_cast<double>(spec.models.size()) *
                         (replicates + q_replicates + 3 * reps2) * 3e-5 / spec.threads;
  return out;
}

// ---------------------------------------------------------------------------
// Output files

std::string to_jsonl(const std::vector<json>& records) {
  std::string out;
  for (const json& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

std::string to_csv(const std::vector<json>& records) {
  std::set<std::string> keys;
  for (const json& r : records) {
    for (const auto& [k, v] : r.items()) keys.insert(k);
  }
  const auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (const char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  };
  std::string out;
  bool first = true;
  for (const auto& k : keys) {
    out += (first ? "" : ",") + quote(k);
    first = false;
  }
  out += '\n';
  for (const json& r : records) {
    first = true;
    for (const auto& k : keys) {
      if (!first) out += ',';
      first = false;
      const auto it = r.find(k);
      if (it == r.end() || it->is_null()) continue;
      out += quote(it->is_string() ? it->get<std::string>() : it->dump());
    }
    out += '\n';
  }
  return out;
}

std::string digest(const std::string& bytes) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

json write_outputs(const std::filesystem::path& dir, const ExperimentSpec& spec,
                   const ExperimentOutput& output, double elapsed_seconds) {
  std::filesystem::create_directories(dir);
  const auto write = [&](const std::string& name, const std::string& bytes) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    f << bytes;
    if (!f) throw std::runtime_error("write failed for " + (dir / name).string());
    return json{{"path", name}, {"digest", digest(bytes)}, {"bytes", bytes.size()}};
  };
  const std::string jsonl = to_jsonl(output.records);
  json files = json::object();
  files["jsonl"] = write(spec.kind + ".jsonl", jsonl);
  files["summary"] = write(spec.kind + "_summary.json", output.summary.dump(2) + "\n");
  files["csv"] = write(spec.kind + ".csv", to_csv(output.records));
  json manifest = {{"tool", "brwlab"},
                   {"git", BRWLAB_GIT_HASH},
                   {"seed", spec.seed},
                   {"spec", spec.to_json()},
                   {"digest", digest(jsonl)},
                   {"outputs", files},
                   {"expected_seconds", output.expected_seconds},
                   {"elapsed_seconds", elapsed_seconds},
                   {"passed", output.passed()}};
  std::ofstream f(dir / "manifest.json");
  f << manifest.dump(2) << "\n";
  if (!f) throw std::runtime_error("cannot write manifest");
  return manifest;
}

}  // namespace brwlab
