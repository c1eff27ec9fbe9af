// Command-line front end for the experiment harness.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "brwlab/engine.hpp"
#include "brwlab/harness.hpp"

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kWorkLimit = 3;
constexpr int kAcceptanceFailure = 4;

struct Flags {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> work_limit;
  std::optional<std::string> model;
  std::string config;
  std::string out;
  std::vector<std::string> sets;
  bool assert_checks = false;
};

json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw brwlab::ConfigError("cannot read config file " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw brwlab::ConfigError("config file " + path + ": " + e.what());
  }
}

brwlab::ExperimentSpec make_spec(const std::string& kind, const Flags& flags) {
  json j = flags.config.empty() ? json::object() : load_json(flags.config);
  json& body = j.contains("spec") && j["spec"].is_object() ? j["spec"] : j;
  if (!body.is_object()) throw brwlab::ConfigError("config: expected a JSON object");
  if (body.contains("kind") && body["kind"] != kind) {
    throw brwlab::ConfigError("config.kind: '" + body["kind"].dump() + "' does not match subcommand " +
                              kind);
  }
  body["kind"] = kind;
  if (flags.seed) body["seed"] = *flags.seed;
  if (flags.threads) body["threads"] = *flags.threads;
  if (flags.work_limit) body["work_limit"] = *flags.work_limit;
  if (flags.model) {
    if (*flags.model == "both") {
      body["models"] = {"pwit", "pd"};
    } else {
      body["models"] = {*flags.model};
    }
  }
  for (const std::string& s : flags.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw brwlab::ConfigError("--set expects key=value, got '" + s + "'");
    }
    const std::string key = s.substr(0, eq);
    const std::string value = s.substr(eq + 1);
    if (!body.contains("params")) body["params"] = json::object();
    try {
      body["params"][key] = json::parse(value);
    } catch (const json::parse_error&) {
      body["params"][key] = value;
    }
  }
  return brwlab::ExperimentSpec::from_json(body);
}

int run(const std::string& kind, const Flags& flags) {
  const brwlab::ExperimentSpec spec = make_spec(kind, flags);
  const auto start = std::chrono::steady_clock::now();
  const brwlab::ExperimentOutput output = brwlab::run_experiment(spec);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string dir = flags.out.empty() ? "out/" + kind : flags.out;
  const json manifest = brwlab::write_outputs(dir, spec, output, elapsed);
  std::cout << kind << ": " << output.records.size() << " records in " << elapsed << " s -> "
            << dir << "\n";
  for (const auto& [name, ok] : output.summary["checks"].items()) {
    std::cout << "  " << (ok.get<bool>() ? "ok    " : "FAILED") << " " << name << "\n";
  }
  std::cout << "  digest " << manifest["digest"].get<std::string>() << "\n";
  if (flags.assert_checks && !output.passed()) return kAcceptanceFailure;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extremal statistics of branching random walks"};
  app.require_subcommand(1);
  Flags flags;
  std::string chosen;
  for (const char* kind : brwlab::kExperimentKinds) {
    CLI::App* sub = app.add_subcommand(kind, std::string("run the ") + kind + " experiment");
    sub->add_option("--seed", flags.seed, "master seed");
    sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", flags.out, "output directory (default out/<kind>)");
    sub->add_option("--config", flags.config, "experiment spec or manifest JSON");
    sub->add_option("--model", flags.model, "pwit, pd or both")
        ->check(CLI::IsMember({"pwit", "pd", "both"}));
    sub->add_option("--work-limit", flags.work_limit, "node budget per search")
        ->check(CLI::PositiveNumber);
    sub->add_option("--set", flags.sets, "override a parameter: key=json");
    sub->add_flag("--assert", flags.assert_checks, "exit 4 if any check fails");
    sub->callback([&chosen, kind] { chosen = kind; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  try {
    return run(chosen, flags);
  } catch (const brwlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const brwlab::WorkLimitExceeded& e) {
    std::cerr << "work limit: " << e.what() << "\n";
    return kWorkLimit;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
}
