#include "stochacc/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace stochacc {

namespace {

void check_keys(const YAML::Node& node, const std::string& section, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError(fmt::format("config: section '{}' must be a map", section));
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ConfigError(fmt::format("config: unknown key '{}' in {} (allowed: {})", key, section, list));
    }
  }
}

template <class T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& section) {
  if (!node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("config: {}.{} has the wrong type", section, key));
  }
}

void read_vec(const YAML::Node& node, const char* key, std::vector<double>& out, const std::string& section) {
  if (!node[key]) return;
  if (!node[key].IsSequence()) throw ConfigError(fmt::format("config: {}.{} must be a list", section, key));
  read(node, key, out, section);
}

Problem problem_from(const std::string& s) {
  if (s == "example1") return Problem::example1;
  if (s == "example2") return Problem::example2;
  if (s == "counterexample") return Problem::counterexample;
  if (s == "custom-perturbation") return Problem::custom;
  throw ConfigError("config: problem must be one of example1, example2, counterexample, custom-perturbation (got '" + s + "')");
}

Pipeline pipeline_from(const std::string& s) {
  if (s == "analytic") return Pipeline::analytic;
  if (s == "synthesized") return Pipeline::synthesized;
  throw ConfigError("config: pipeline must be analytic or synthesized (got '" + s + "')");
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> from_vector(const Vector& v) { return {v.data(), v.data() + v.size()}; }

void parse_example1(const YAML::Node& n, PulsePlasmaConfig& c) {
  check_keys(n, "example1", {"strength", "tau", "window", "unit_area"});
  read(n, "strength", c.strength, "example1");
  read(n, "tau", c.tau, "example1");
  read(n, "unit_area", c.unit_area, "example1");
  if (n["window"]) {
    const auto w = n["window"].as<std::string>();
    if (w == "uniform") c.window = PulseWindow::uniform;
    else if (w == "bump") c.window = PulseWindow::bump;
    else throw ConfigError("config: example1.window must be uniform or bump");
  }
}

void parse_example2(const YAML::Node& n, KarneyConfig& c, double& i0, bool& single) {
  check_keys(n, "example2",
             {"epsilon", "n0", "delta", "series_margin", "i_min", "i_lo", "i_hi", "initial_action", "single_harmonic"});
  read(n, "single_harmonic", single, "example2");
  read(n, "epsilon", c.epsilon, "example2");
  read(n, "n0", c.n0, "example2");
  read(n, "delta", c.delta, "example2");
  read(n, "series_margin", c.series_margin, "example2");
  read(n, "i_min", c.i_min, "example2");
  read(n, "i_lo", c.i_lo, "example2");
  read(n, "i_hi", c.i_hi, "example2");
  read(n, "initial_action", i0, "example2");
}

void parse_counterexample(const YAML::Node& n, CounterexampleConfig& c) {
  check_keys(n, "counterexample", {"phase", "constant", "linear"});
  if (n["phase"]) {
    const auto p = n["phase"].as<std::string>();
    if (p == "constant") c.phase = CounterexampleConfig::Phase::constant;
    else if (p == "linear") c.phase = CounterexampleConfig::Phase::linear;
    else throw ConfigError("config: counterexample.phase must be constant or linear");
  }
  read(n, "constant", c.constant, "counterexample");
  std::vector<double> lin;
  read_vec(n, "linear", lin, "counterexample");
  if (n["linear"]) {
    if (lin.size() != 6) throw ConfigError("config: counterexample.linear needs 6 entries over (x, v)");
    c.linear = to_vector(lin);
  }
}

void parse_custom(const YAML::Node& n, CustomPerturbationConfig& c) {
  check_keys(n, "custom", {"dof", "tau", "epsilon", "waves", "s2_realizations"});
  read(n, "dof", c.dof, "custom");
  read(n, "tau", c.tau, "custom");
  read(n, "epsilon", c.epsilon, "custom");
  read(n, "s2_realizations", c.s2_realizations, "custom");
  if (n["waves"]) {
    if (!n["waves"].IsSequence()) throw ConfigError("config: custom.waves must be a list");
    c.waves.clear();
    for (const auto& w : n["waves"]) {
      check_keys(w, "custom.waves[]", {"amplitude", "k", "omega"});
      PlaneWave pw;
      read(w, "amplitude", pw.amplitude, "custom.waves[]");
      read_vec(w, "k", pw.k, "custom.waves[]");
      read(w, "omega", pw.omega, "custom.waves[]");
      c.waves.push_back(pw);
    }
  }
}

void parse_ensemble(const YAML::Node& n, EnsembleSettings& e) {
  check_keys(n, "ensemble", {"paths", "T", "h", "intervals", "steps_per_interval", "scheme", "record_every", "csv_paths", "tol", "max_iter"});
  read(n, "paths", e.paths, "ensemble");
  read(n, "T", e.T, "ensemble");
  read(n, "h", e.h, "ensemble");
  read(n, "intervals", e.intervals, "ensemble");
  read(n, "steps_per_interval", e.steps_per_interval, "ensemble");
  read(n, "record_every", e.record_every, "ensemble");
  read(n, "csv_paths", e.csv_paths, "ensemble");
  read(n, "tol", e.tol, "ensemble");
  read(n, "max_iter", e.max_iter, "ensemble");
  if (n["scheme"]) {
    try {
      e.scheme = scheme_from_string(n["scheme"].as<std::string>());
    } catch (const std::invalid_argument&) {
      throw ConfigError("config: ensemble.scheme must be euler-heun, midpoint or euler-maruyama");
    }
  }
}

void parse_basis(const YAML::Node& n, BasisSettings& b) {
  check_keys(n, "basis", {"samples", "holdout", "rank", "energy", "rank_tolerance", "nodes", "flow_max_step",
                          "lo", "hi", "per_axis", "test_pairs", "residual_tolerance"});
  read(n, "samples", b.samples, "basis");
  read(n, "holdout", b.holdout, "basis");
  if (n["rank"] && !n["rank"].IsNull()) {
    std::size_t r = 0;
    read(n, "rank", r, "basis");
    b.rank = r;
  }
  read(n, "energy", b.energy, "basis");
  read(n, "rank_tolerance", b.rank_tolerance, "basis");
  read(n, "nodes", b.nodes, "basis");
  read(n, "flow_max_step", b.flow_max_step, "basis");
  read_vec(n, "lo", b.lo, "basis");
  read_vec(n, "hi", b.hi, "basis");
  if (n["per_axis"]) read(n, "per_axis", b.per_axis, "basis");
  read(n, "test_pairs", b.test_pairs, "basis");
  if (n["residual_tolerance"]) {
    double r = 0.0;
    read(n, "residual_tolerance", r, "basis");
    b.residual_tolerance = r;
  }
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError("config: " + msg);
}

// Wrap library validation errors so callers see one exception type.
template <class F>
void validated(const char* section, F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("config: {}: {}", section, e.what()));
  }
}

}  // namespace

std::string to_string(Problem p) {
  switch (p) {
    case Problem::example1: return "example1";
    case Problem::example2: return "example2";
    case Problem::counterexample: return "counterexample";
    case Problem::custom: return "custom-perturbation";
  }
  return "?";
}

std::string to_string(Pipeline p) { return p == Pipeline::analytic ? "analytic" : "synthesized"; }

void CustomPerturbationConfig::validate() const {
  if (dof < 1 || dof > 3) throw std::invalid_argument("dof must be 1, 2 or 3");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be positive");
  if (!std::isfinite(epsilon) || epsilon < 0.0) throw std::invalid_argument("epsilon must be finite and >= 0");
  if (waves.empty()) throw std::invalid_argument("need at least one wave");
  for (const auto& w : waves) {
    if (w.k.size() != dof) throw std::invalid_argument(fmt::format("every wave needs k with {} entries", dof));
    if (!std::isfinite(w.amplitude) || !std::isfinite(w.omega)) throw std::invalid_argument("wave amplitude/omega must be finite");
  }
  if (s2_realizations < 0) throw std::invalid_argument("s2_realizations must be >= 0");
}

std::size_t ExperimentConfig::dim() const {
  switch (problem) {
    case Problem::example1:
    case Problem::counterexample: return 6;
    case Problem::example2: return 2;
    case Problem::custom: return 2 * custom.dof;
  }
  return 0;
}

double ExperimentConfig::interval() const {
  switch (problem) {
    case Problem::example1:
    case Problem::counterexample: return example1.tau;
    case Problem::example2: return KarneyConfig::tau;
    case Problem::custom: return custom.tau;
  }
  return 1.0;
}

double ExperimentConfig::horizon() const {
  return ensemble.intervals > 0 ? ensemble.intervals * interval() : ensemble.T;
}

double ExperimentConfig::step() const {
  return ensemble.steps_per_interval > 0 ? interval() / ensemble.steps_per_interval : ensemble.h;
}

Vector ExperimentConfig::initial() const {
  if (!initial_state.empty()) return to_vector(initial_state);
  if (problem == Problem::example2) return Eigen::Vector2d(0.0, initial_action);
  return Vector::Zero(static_cast<Eigen::Index>(dim()));
}

void ExperimentConfig::validate() const {
  validated("example1", [&] { example1.validate(); });
  if (problem == Problem::example2) {
    validated("example2", [&] { example2.validate(); });
    require(initial_action >= example2.i_min, "example2.initial_action must be >= i_min");
    require(micro.samples == 0 || example2.epsilon >= karney_chaos_threshold(example2),
            fmt::format("example2: micro runs need epsilon >= nu^(1/3)/4 = {:.4g} (chaotic regime); got {}",
                        karney_chaos_threshold(example2), example2.epsilon));
  }
  if (problem == Problem::counterexample) {
    CounterexampleConfig c = counterexample;
    c.pulse = example1;
    validated("counterexample", [&] { c.validate(); });
  }
  if (problem == Problem::custom) validated("custom", [&] { custom.validate(); });

  require(threads >= 1, "threads must be >= 1");
  require(problem != Problem::counterexample || pipeline == Pipeline::analytic,
          "counterexample has no kick process; use pipeline: analytic");
  require(problem != Problem::custom || pipeline == Pipeline::synthesized,
          "custom-perturbation has no closed-form model; use pipeline: synthesized");
  require(initial_state.empty() || initial_state.size() == dim(),
          fmt::format("initial_state needs {} entries for {}", dim(), to_string(problem)));

  require(ensemble.paths >= 2, "ensemble.paths must be >= 2");
  require(ensemble.h > 0.0 && ensemble.T > 0.0, "ensemble.T and ensemble.h must be positive");
  require(ensemble.intervals >= 0 && ensemble.steps_per_interval >= 0,
          "ensemble.intervals and ensemble.steps_per_interval must be >= 0");
  validated("ensemble", [&] { step_count(horizon(), step()); });
  require(ensemble.record_every >= 1, "ensemble.record_every must be >= 1");
  require(ensemble.tol > 0.0 && ensemble.max_iter >= 1, "ensemble.tol must be positive and max_iter >= 1");

  require(basis.samples >= 2, "basis.samples must be >= 2");
  require(basis.holdout >= 2, "basis.holdout must be >= 2");
  require(basis.energy > 0.0 && basis.energy <= 1.0, "basis.energy must lie in (0, 1]");
  require(basis.nodes >= 1 && basis.flow_max_step > 0.0, "basis.nodes >= 1 and basis.flow_max_step > 0");
  require(!basis.rank || *basis.rank >= 1, "basis.rank must be >= 1");
  require(basis.lo.size() == basis.hi.size(), "basis.lo and basis.hi must have equal length");
  require(basis.lo.empty() || basis.lo.size() == dim(), fmt::format("basis.lo/hi need {} entries", dim()));
  for (std::size_t i = 0; i < basis.lo.size(); ++i) require(basis.lo[i] < basis.hi[i], "basis.lo must be below basis.hi");
  require(basis.per_axis.empty() || basis.per_axis.size() == dim(), fmt::format("basis.per_axis needs {} entries", dim()));
  for (int k : basis.per_axis) require(k >= 1, "basis.per_axis entries must be >= 1");
  require(basis.test_pairs >= 1, "basis.test_pairs must be >= 1");
  require(!basis.residual_tolerance || *basis.residual_tolerance > 0.0, "basis.residual_tolerance must be positive");

  require(micro.count >= 1 && micro.steps_per_period >= 1, "micro.count and micro.steps_per_period must be >= 1");
  require(short_time.h > 0.0 && short_time.samples >= 2, "short_time.h > 0 and short_time.samples >= 2");
  if (problem == Problem::example2) {
    for (double a : short_time.actions) require(a >= example2.i_min, "short_time.actions must be >= example2.i_min");
  }
  require(pairs.count >= 2, "pairs.count must be >= 2");
  require(pairs.separation.size() == dim() || problem == Problem::example2 || problem == Problem::custom,
          "pairs.separation needs one entry per coordinate");

  require(weak_order.steps.size() >= 3, "weak_order.steps needs at least 3 step sizes");
  require(weak_order.paths >= 2, "weak_order.paths must be >= 2");
  require(weak_order.initial_state.size() == 2, "weak_order.initial_state needs (q, p)");
  for (double h : weak_order.steps) validated("weak_order", [&] { step_count(weak_order.T, h); });
  require(sigma_band > 0.0, "sigma_band must be positive");
}

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: YAML syntax error: ") + e.what());
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  check_keys(root, "top level",
             {"problem", "pipeline", "seed", "threads", "out", "initial_state", "example1", "example2", "counterexample",
              "custom", "ensemble", "basis", "micro", "short_time", "pairs", "weak_order", "sigma_band"});

  ExperimentConfig c;
  if (root["problem"]) c.problem = problem_from(root["problem"].as<std::string>());
  if (root["pipeline"]) c.pipeline = pipeline_from(root["pipeline"].as<std::string>());
  read(root, "seed", c.seed, "top level");
  read(root, "threads", c.threads, "top level");
  read(root, "out", c.out, "top level");
  read_vec(root, "initial_state", c.initial_state, "top level");
  read(root, "sigma_band", c.sigma_band, "top level");

  if (root["example1"]) parse_example1(root["example1"], c.example1);
  if (root["example2"]) parse_example2(root["example2"], c.example2, c.initial_action, c.single_harmonic);
  if (root["counterexample"]) parse_counterexample(root["counterexample"], c.counterexample);
  if (root["custom"]) parse_custom(root["custom"], c.custom);
  if (root["ensemble"]) parse_ensemble(root["ensemble"], c.ensemble);
  if (root["basis"]) parse_basis(root["basis"], c.basis);
  if (const auto n = root["micro"]) {
    check_keys(n, "micro", {"samples", "count", "steps_per_period"});
    read(n, "samples", c.micro.samples, "micro");
    read(n, "count", c.micro.count, "micro");
    read(n, "steps_per_period", c.micro.steps_per_period, "micro");
  }
  if (const auto n = root["short_time"]) {
    check_keys(n, "short_time", {"h", "samples", "actions"});
    read(n, "h", c.short_time.h, "short_time");
    read(n, "samples", c.short_time.samples, "short_time");
    read_vec(n, "actions", c.short_time.actions, "short_time");
  }
  if (const auto n = root["pairs"]) {
    check_keys(n, "pairs", {"count", "separation"});
    read(n, "count", c.pairs.count, "pairs");
    read_vec(n, "separation", c.pairs.separation, "pairs");
  }
  if (const auto n = root["weak_order"]) {
    check_keys(n, "weak_order", {"lambda", "sigma", "T", "paths", "steps", "initial_state"});
    read(n, "lambda", c.weak_order.lambda, "weak_order");
    read(n, "sigma", c.weak_order.sigma, "weak_order");
    read(n, "T", c.weak_order.T, "weak_order");
    read(n, "paths", c.weak_order.paths, "weak_order");
    read_vec(n, "steps", c.weak_order.steps, "weak_order");
    read_vec(n, "initial_state", c.weak_order.initial_state, "weak_order");
  }
  // Pair separation defaults to a unit offset in the first coordinate.
  if (!root["pairs"] || !root["pairs"]["separation"]) {
    c.pairs.separation.assign(c.dim(), 0.0);
    c.pairs.separation[0] = 1.0;
  }
  c.counterexample.pulse = c.example1;
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_yaml(const ExperimentConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "problem" << YAML::Value << to_string(c.problem);
  e << YAML::Key << "pipeline" << YAML::Value << to_string(c.pipeline);
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  if (!c.initial_state.empty()) e << YAML::Key << "initial_state" << YAML::Value << YAML::Flow << c.initial_state;
  e << YAML::Key << "sigma_band" << YAML::Value << c.sigma_band;

  e << YAML::Key << "example1" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "strength" << YAML::Value << c.example1.strength;
  e << YAML::Key << "tau" << YAML::Value << c.example1.tau;
  e << YAML::Key << "window" << YAML::Value << (c.example1.window == PulseWindow::uniform ? "uniform" : "bump");
  e << YAML::Key << "unit_area" << YAML::Value << c.example1.unit_area;
  e << YAML::EndMap;

  e << YAML::Key << "example2" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "epsilon" << YAML::Value << c.example2.epsilon;
  e << YAML::Key << "n0" << YAML::Value << c.example2.n0;
  e << YAML::Key << "delta" << YAML::Value << c.example2.delta;
  e << YAML::Key << "series_margin" << YAML::Value << c.example2.series_margin;
  e << YAML::Key << "i_min" << YAML::Value << c.example2.i_min;
  e << YAML::Key << "i_lo" << YAML::Value << c.example2.i_lo;
  e << YAML::Key << "i_hi" << YAML::Value << c.example2.i_hi;
  e << YAML::Key << "initial_action" << YAML::Value << c.initial_action;
  e << YAML::Key << "single_harmonic" << YAML::Value << c.single_harmonic;
  e << YAML::EndMap;

  e << YAML::Key << "counterexample" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "phase" << YAML::Value
    << (c.counterexample.phase == CounterexampleConfig::Phase::linear ? "linear" : "constant");
  e << YAML::Key << "constant" << YAML::Value << c.counterexample.constant;
  e << YAML::Key << "linear" << YAML::Value << YAML::Flow << from_vector(c.counterexample.linear);
  e << YAML::EndMap;

  e << YAML::Key << "custom" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "dof" << YAML::Value << c.custom.dof;
  e << YAML::Key << "tau" << YAML::Value << c.custom.tau;
  e << YAML::Key << "epsilon" << YAML::Value << c.custom.epsilon;
  e << YAML::Key << "s2_realizations" << YAML::Value << c.custom.s2_realizations;
  e << YAML::Key << "waves" << YAML::Value << YAML::BeginSeq;
  for (const auto& w : c.custom.waves) {
    e << YAML::Flow << YAML::BeginMap << YAML::Key << "amplitude" << YAML::Value << w.amplitude << YAML::Key << "k"
      << YAML::Value << YAML::Flow << w.k << YAML::Key << "omega" << YAML::Value << w.omega << YAML::EndMap;
  }
  e << YAML::EndSeq << YAML::EndMap;

  e << YAML::Key << "ensemble" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "paths" << YAML::Value << c.ensemble.paths;
  e << YAML::Key << "T" << YAML::Value << c.ensemble.T;
  e << YAML::Key << "h" << YAML::Value << c.ensemble.h;
  e << YAML::Key << "intervals" << YAML::Value << c.ensemble.intervals;
  e << YAML::Key << "steps_per_interval" << YAML::Value << c.ensemble.steps_per_interval;
  e << YAML::Key << "scheme" << YAML::Value << to_string(c.ensemble.scheme);
  e << YAML::Key << "record_every" << YAML::Value << c.ensemble.record_every;
  e << YAML::Key << "csv_paths" << YAML::Value << c.ensemble.csv_paths;
  e << YAML::Key << "tol" << YAML::Value << c.ensemble.tol;
  e << YAML::Key << "max_iter" << YAML::Value << c.ensemble.max_iter;
  e << YAML::EndMap;

  e << YAML::Key << "basis" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "samples" << YAML::Value << c.basis.samples;
  e << YAML::Key << "holdout" << YAML::Value << c.basis.holdout;
  if (c.basis.rank) e << YAML::Key << "rank" << YAML::Value << *c.basis.rank;
  e << YAML::Key << "energy" << YAML::Value << c.basis.energy;
  e << YAML::Key << "rank_tolerance" << YAML::Value << c.basis.rank_tolerance;
  e << YAML::Key << "nodes" << YAML::Value << c.basis.nodes;
  e << YAML::Key << "flow_max_step" << YAML::Value << c.basis.flow_max_step;
  if (!c.basis.lo.empty()) {
    e << YAML::Key << "lo" << YAML::Value << YAML::Flow << c.basis.lo;
    e << YAML::Key << "hi" << YAML::Value << YAML::Flow << c.basis.hi;
  }
  if (!c.basis.per_axis.empty()) e << YAML::Key << "per_axis" << YAML::Value << YAML::Flow << c.basis.per_axis;
  e << YAML::Key << "test_pairs" << YAML::Value << c.basis.test_pairs;
  if (c.basis.residual_tolerance) e << YAML::Key << "residual_tolerance" << YAML::Value << *c.basis.residual_tolerance;
  e << YAML::EndMap;

  e << YAML::Key << "micro" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "samples" << YAML::Value << c.micro.samples;
  e << YAML::Key << "count" << YAML::Value << c.micro.count;
  e << YAML::Key << "steps_per_period" << YAML::Value << c.micro.steps_per_period;
  e << YAML::EndMap;

  e << YAML::Key << "short_time" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "h" << YAML::Value << c.short_time.h;
  e << YAML::Key << "samples" << YAML::Value << c.short_time.samples;
  e << YAML::Key << "actions" << YAML::Value << YAML::Flow << c.short_time.actions;
  e << YAML::EndMap;

  e << YAML::Key << "pairs" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "count" << YAML::Value << c.pairs.count;
  e << YAML::Key << "separation" << YAML::Value << YAML::Flow << c.pairs.separation;
  e << YAML::EndMap;

  e << YAML::Key << "weak_order" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "lambda" << YAML::Value << c.weak_order.lambda;
  e << YAML::Key << "sigma" << YAML::Value << c.weak_order.sigma;
  e << YAML::Key << "T" << YAML::Value << c.weak_order.T;
  e << YAML::Key << "paths" << YAML::Value << c.weak_order.paths;
  e << YAML::Key << "steps" << YAML::Value << YAML::Flow << c.weak_order.steps;
  e << YAML::Key << "initial_state" << YAML::Value << YAML::Flow << c.weak_order.initial_state;
  e << YAML::EndMap;

  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace stochacc
