#include "brwlab/samplers.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace brwlab {

Model parse_model(std::string_view name) {
  if (name == "pwit") return Model::pwit;
  if (name == "pd") return Model::pd;
  throw std::invalid_argument("unknown model '" + std::string(name) +
                              "' (expected pwit or pd)");
}

std::string_view model_name(Model model) {
  switch (model) {
    case Model::pwit:
      return "pwit";
    case Model::pd:
      return "pd";
  }
  return "?";
}

DisplacementStream::DisplacementStream(Model model, RngStream rng)
    : model_(model), rng_(rng) {
  if (model_ == Model::pwit) envelope_ = rng_.exponential();
}

DisplacementStream DisplacementStream::resume(Model model, std::uint64_t master_seed,
                                              std::uint64_t stream_id, Cursor cursor) {
  return {model, RngStream(master_seed, stream_id, cursor.counter), cursor};
}

namespace {

std::vector<ChildDisplacement> collect(Model model, double budget, RngStream rng) {
  if (!(budget > 0.0) || !std::isfinite(budget)) {
    throw std::invalid_argument("child budget must be positive and finite");
  }
  std::vector<ChildDisplacement> out;
  DisplacementStream stream(model, rng);
  while (auto child = stream.next(budget)) out.push_back(*child);
  return out;
}

}  // namespace

std::vector<ChildDisplacement> pwit_children(double budget, RngStream rng) {
  return collect(Model::pwit, budget, rng);
}

std::vector<ChildDisplacement> pd_children(double budget, RngStream rng) {
  return collect(Model::pd, budget, rng);
}

std::vector<ChildDisplacement> children(Model model, double budget, RngStream rng) {
  switch (model) {
    case Model::pwit:
      return pwit_children(budget, rng);
    case Model::pd:
      return pd_children(budget, rng);
  }
  throw std::invalid_argument("unknown model");
}

double sample_gamma(std::uint64_t shape, RngStream& rng) {
  if (shape == 0) throw std::invalid_argument("gamma shape must be >= 1");
  if (shape <= 16) {
    double sum = 0.0;
    for (std::uint64_t i = 0; i < shape; ++i) sum += rng.exponential();
    return sum;
  }
  const double d = static_cast<double>(shape) - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z;
    double v;
    do {
      z = rng.normal();
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * z * z * z * z) return d * v;
    if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace brwlab
