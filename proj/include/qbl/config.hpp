#pragma once

// Run configuration: a JSON document with environment, agents, simulation,
// analysis and output blocks. Unknown keys are rejected with their path.

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "qbl/core.hpp"
#include "qbl/delta.hpp"
#include "qbl/engine.hpp"
#include "qbl/environments.hpp"
#include "qbl/equilibrium.hpp"
#include "qbl/metrics.hpp"

namespace qbl {

using json = nlohmann::ordered_json;

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { batch, grid, bias_sweep, durations, conditional_curve };
enum class EnvironmentKind { decision, pd, duopoly };

struct EnvironmentConfig {
  EnvironmentKind kind = EnvironmentKind::pd;
  // decision and pd
  double x = 2.5;
  double y = -0.5;
  // decision
  int initial_state = 2;  // 1 = favorable
  std::optional<DecisionAutomatonEnv::Transitions> transitions;
  // pd
  PayoffChannel channel = PayoffChannel::deterministic;
  double V = 5.0;
  ShockCorrelation correlation = ShockCorrelation::correlated;
  // duopoly
  LogitDuopolyEnv::Params duopoly;

  bool operator==(const EnvironmentConfig&) const = default;
};

struct BiasGridConfig {
  BiasGrid grid;
  SeedMode seed_mode = SeedMode::independent;
  bool operator==(const BiasGridConfig& o) const {
    return grid.increment == o.grid.increment && grid.kappa_min == o.grid.kappa_min &&
           grid.kappa_max == o.grid.kappa_max && seed_mode == o.seed_mode;
  }
};

struct AgentsConfig {
  std::vector<double> alpha{0.1};      // several values only for list experiments
  std::vector<double> epsilon{0.1};
  double delta = 0.95;
  std::vector<double> bias;            // empty: zero; one value: shared; else per agent
  std::optional<std::string> distortion_name;  // "cooperation", "own-price-profit", "none"
  std::vector<double> distortion_values;
  std::vector<std::vector<double>> initial_q;  // one shared table or one per agent
  std::optional<BiasGridConfig> bias_grid;

  bool operator==(const AgentsConfig&) const = default;
};

struct SimulationConfig {
  std::size_t horizon = 10000;
  std::size_t paths = 1;
  std::uint64_t seed = 1;
  double window_fraction = 1.0;
  TraceLevel trace = TraceLevel::none;
  std::size_t threads = 0;
  std::optional<DeltaSpec> phase_delta;

  bool operator==(const SimulationConfig&) const = default;
};

struct DurationsConfig {
  std::vector<double> favorable_q{1.5, 1.4};
  std::vector<double> unfavorable_q{1.2, 1.25};
  bool operator==(const DurationsConfig&) const = default;
};

struct AnalysisConfig {
  HistogramSpec histogram;
  DurationsConfig durations;
  bool operator==(const AnalysisConfig& o) const {
    return histogram.omega == o.histogram.omega && histogram.k_min == o.histogram.k_min &&
           histogram.k_max == o.histogram.k_max && histogram.min_count == o.histogram.min_count &&
           durations == o.durations;
  }
};

struct OutputConfig {
  std::string directory = "out";
  std::size_t stride = 1;
  int precision = 2;  // decimals in summary tables
  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  std::string name;
  std::string description;
  ExperimentKind experiment = ExperimentKind::batch;
  EnvironmentConfig environment;
  AgentsConfig agents;
  SimulationConfig simulation;
  AnalysisConfig analysis;
  OutputConfig output;

  bool operator==(const RunConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Enum spellings.

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::batch: return "batch";
    case ExperimentKind::grid: return "grid";
    case ExperimentKind::bias_sweep: return "bias-sweep";
    case ExperimentKind::durations: return "durations";
    case ExperimentKind::conditional_curve: return "conditional-curve";
  }
  return "?";
}
inline const char* to_string(EnvironmentKind k) {
  switch (k) {
    case EnvironmentKind::decision: return "decision";
    case EnvironmentKind::pd: return "pd";
    case EnvironmentKind::duopoly: return "duopoly";
  }
  return "?";
}
inline const char* to_string(TraceLevel t) {
  switch (t) {
    case TraceLevel::none: return "none";
    case TraceLevel::aggregates: return "aggregates";
    case TraceLevel::full: return "full";
  }
  return "?";
}
inline const char* to_string(PayoffChannel c) { return c == PayoffChannel::deterministic ? "deterministic" : "stochastic"; }
inline const char* to_string(ShockCorrelation c) { return c == ShockCorrelation::correlated ? "correlated" : "independent"; }
inline const char* to_string(SeedMode m) { return m == SeedMode::independent ? "independent" : "common"; }
inline const char* to_string(DeltaSpec::Orientation o) {
  return o == DeltaSpec::Orientation::low_minus_high ? "low-minus-high" : "high-minus-low";
}

inline TraceLevel parse_trace_level(const std::string& s) {
  if (s == "none") return TraceLevel::none;
  if (s == "aggregates") return TraceLevel::aggregates;
  if (s == "full") return TraceLevel::full;
  throw config_error("trace level must be none, aggregates or full (got '" + s + "')");
}

namespace detail {

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items())
      if (!allowed.count(k)) throw config_error(field(k) + ": unknown key");
  }

  bool has(const char* key) const { return j_.contains(key); }
  Reader child(const char* key) const { return Reader(j_.at(key), field(key)); }
  const json& raw(const char* key) const { return j_.at(key); }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number()) throw config_error(field(key) + ": expected a number");
    return v.get<double>();
  }
  std::uint64_t unsigned_int(const char* key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
      throw config_error(field(key) + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  int integer(const char* key, int fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) throw config_error(field(key) + ": expected an integer");
    return v.get<int>();
  }
  std::string string(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_string()) throw config_error(field(key) + ": expected a string");
    return v.get<std::string>();
  }
  // Scalar or array of numbers.
  std::vector<double> numbers(const char* key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (v.is_number()) return {v.get<double>()};
    return number_array(v, field(key));
  }
  static std::vector<double> number_array(const json& v, const std::string& where) {
    if (!v.is_array()) throw config_error(where + ": expected a number or an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw config_error(where + ": array entries must be numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  [[noreturn]] void fail(const std::string& msg) const { throw config_error((path_.empty() ? "config" : path_) + ": " + msg); }

 private:
  const json& j_;
  std::string path_;
};

template <class E>
E pick(const std::string& where, const std::string& value, std::initializer_list<std::pair<const char*, E>> options) {
  std::string names;
  for (const auto& [n, e] : options) {
    if (value == n) return e;
    names += names.empty() ? n : std::string(", ") + n;
  }
  throw config_error(where + ": '" + value + "' is not one of " + names);
}

}  // namespace detail

inline RunConfig parse_run_config(const json& j) {
  using detail::Reader;
  Reader root(j, "");
  root.allow({"name", "description", "experiment", "environment", "agents", "simulation", "analysis", "output"});
  RunConfig c;
  c.name = root.string("name", "");
  c.description = root.string("description", "");
  c.experiment = detail::pick<ExperimentKind>("experiment", root.string("experiment", "batch"),
                                              {{"batch", ExperimentKind::batch},
                                               {"grid", ExperimentKind::grid},
                                               {"bias-sweep", ExperimentKind::bias_sweep},
                                               {"durations", ExperimentKind::durations},
                                               {"conditional-curve", ExperimentKind::conditional_curve}});

  if (!root.has("environment")) throw config_error("environment: required block missing");
  {
    Reader e = root.child("environment");
    auto& env = c.environment;
    env.kind = detail::pick<EnvironmentKind>(e.field("kind"), e.string("kind", ""),
                                             {{"decision", EnvironmentKind::decision},
                                              {"pd", EnvironmentKind::pd},
                                              {"duopoly", EnvironmentKind::duopoly}});
    switch (env.kind) {
      case EnvironmentKind::decision: {
        e.allow({"kind", "x", "y", "initial_state", "transitions"});
        env.x = e.number("x", 1.0);
        env.y = e.number("y", -0.5);
        env.initial_state = e.integer("initial_state", 2);
        if (env.initial_state != 1 && env.initial_state != 2)
          throw config_error(e.field("initial_state") + ": must be 1 or 2");
        if (e.has("transitions")) {
          Reader t = e.child("transitions");
          t.allow({"action1", "action2"});
          DecisionAutomatonEnv::Transitions tr{};
          const char* keys[2] = {"action1", "action2"};
          for (int a = 0; a < 2; ++a) {
            if (!t.has(keys[a])) throw config_error(t.field(keys[a]) + ": required");
            auto v = Reader::number_array(t.raw(keys[a]), t.field(keys[a]));
            if (v.size() != 2) throw config_error(t.field(keys[a]) + ": expected [leave state 1, leave state 2]");
            tr[a] = {v[0], v[1]};
          }
          env.transitions = tr;
        }
        break;
      }
      case EnvironmentKind::pd: {
        e.allow({"kind", "x", "y", "channel", "V", "correlation"});
        env.x = e.number("x", 2.5);
        env.y = e.number("y", -0.5);
        env.channel = detail::pick<PayoffChannel>(e.field("channel"), e.string("channel", "deterministic"),
                                                  {{"deterministic", PayoffChannel::deterministic},
                                                   {"stochastic", PayoffChannel::stochastic}});
        env.V = e.number("V", 5.0);
        env.correlation = detail::pick<ShockCorrelation>(e.field("correlation"), e.string("correlation", "correlated"),
                                                         {{"correlated", ShockCorrelation::correlated},
                                                          {"independent", ShockCorrelation::independent}});
        break;
      }
      case EnvironmentKind::duopoly: {
        e.allow({"kind", "d", "mu", "c", "price_min", "price_step", "num_prices", "scale"});
        auto& p = env.duopoly;
        p.d = e.number("d", p.d);
        p.mu = e.number("mu", p.mu);
        p.c = e.number("c", p.c);
        p.price_min = e.number("price_min", p.price_min);
        p.price_step = e.number("price_step", p.price_step);
        p.num_prices = e.unsigned_int("num_prices", p.num_prices);
        p.scale = e.number("scale", p.scale);
        break;
      }
    }
  }

  if (root.has("agents")) {
    Reader a = root.child("agents");
    a.allow({"alpha", "epsilon", "delta", "bias", "distortion", "initial_q", "bias_grid"});
    auto& ag = c.agents;
    ag.alpha = a.numbers("alpha", ag.alpha);
    ag.epsilon = a.numbers("epsilon", ag.epsilon);
    if (ag.alpha.empty() || ag.epsilon.empty()) throw config_error("agents: alpha and epsilon need at least one value");
    ag.delta = a.number("delta", ag.delta);
    ag.bias = a.numbers("bias", {});
    if (a.has("distortion")) {
      const auto& d = a.raw("distortion");
      if (d.is_string()) {
        ag.distortion_name = d.get<std::string>();
        detail::pick<int>(a.field("distortion"), *ag.distortion_name,
                          {{"cooperation", 0}, {"own-price-profit", 1}, {"none", 2}});
      } else {
        ag.distortion_values = Reader::number_array(d, a.field("distortion"));
      }
    }
    if (a.has("initial_q")) {
      const auto& q = a.raw("initial_q");
      if (q.is_array() && !q.empty() && q.front().is_array()) {
        for (std::size_t i = 0; i < q.size(); ++i)
          ag.initial_q.push_back(Reader::number_array(q[i], a.field("initial_q") + "[" + std::to_string(i) + "]"));
      } else {
        ag.initial_q.push_back(Reader::number_array(q, a.field("initial_q")));
      }
    }
    if (a.has("bias_grid")) {
      Reader g = a.child("bias_grid");
      g.allow({"increment", "kappa_min", "kappa_max", "seed_mode"});
      BiasGridConfig bg;
      bg.grid.increment = g.number("increment", bg.grid.increment);
      bg.grid.kappa_min = g.integer("kappa_min", bg.grid.kappa_min);
      bg.grid.kappa_max = g.integer("kappa_max", bg.grid.kappa_max);
      bg.seed_mode = detail::pick<SeedMode>(g.field("seed_mode"), g.string("seed_mode", "independent"),
                                            {{"independent", SeedMode::independent}, {"common", SeedMode::common}});
      ag.bias_grid = bg;
    }
  }

  if (root.has("simulation")) {
    Reader s = root.child("simulation");
    s.allow({"horizon", "paths", "seed", "window_fraction", "trace", "threads", "phase_split", "phase_orientation"});
    auto& sim = c.simulation;
    sim.horizon = s.unsigned_int("horizon", sim.horizon);
    sim.paths = s.unsigned_int("paths", sim.paths);
    sim.seed = s.unsigned_int("seed", sim.seed);
    sim.window_fraction = s.number("window_fraction", sim.window_fraction);
    if (s.has("trace")) {
      try {
        sim.trace = parse_trace_level(s.string("trace", "none"));
      } catch (const config_error& err) {
        throw config_error(s.field("trace") + ": " + err.what());
      }
    }
    sim.threads = s.unsigned_int("threads", sim.threads);
    if (s.has("phase_split") || s.has("phase_orientation")) {
      DeltaSpec ds;
      ds.split = s.unsigned_int("phase_split", ds.split);
      ds.orientation = detail::pick<DeltaSpec::Orientation>(
          s.field("phase_orientation"), s.string("phase_orientation", "low-minus-high"),
          {{"low-minus-high", DeltaSpec::Orientation::low_minus_high},
           {"high-minus-low", DeltaSpec::Orientation::high_minus_low}});
      sim.phase_delta = ds;
    }
  }

  if (root.has("analysis")) {
    Reader an = root.child("analysis");
    an.allow({"histogram", "durations"});
    if (an.has("histogram")) {
      Reader h = an.child("histogram");
      h.allow({"omega", "k_min", "k_max", "min_count"});
      auto& hs = c.analysis.histogram;
      hs.omega = h.number("omega", hs.omega);
      hs.k_min = h.integer("k_min", hs.k_min);
      hs.k_max = h.integer("k_max", hs.k_max);
      hs.min_count = h.unsigned_int("min_count", hs.min_count);
    }
    if (an.has("durations")) {
      Reader d = an.child("durations");
      d.allow({"favorable_q", "unfavorable_q"});
      auto& du = c.analysis.durations;
      du.favorable_q = d.numbers("favorable_q", du.favorable_q);
      du.unfavorable_q = d.numbers("unfavorable_q", du.unfavorable_q);
    }
  }

  if (root.has("output")) {
    Reader o = root.child("output");
    o.allow({"directory", "stride", "precision"});
    c.output.directory = o.string("directory", c.output.directory);
    c.output.stride = o.unsigned_int("stride", c.output.stride);
    c.output.precision = o.integer("precision", c.output.precision);
  }
  return c;
}

inline RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("parse error: ") + e.what());
  }
  return parse_run_config(j);
}

inline json to_json(const RunConfig& c) {
  json j;
  j["name"] = c.name;
  if (!c.description.empty()) j["description"] = c.description;
  j["experiment"] = to_string(c.experiment);

  json env;
  env["kind"] = to_string(c.environment.kind);
  switch (c.environment.kind) {
    case EnvironmentKind::decision:
      env["x"] = c.environment.x;
      env["y"] = c.environment.y;
      env["initial_state"] = c.environment.initial_state;
      if (c.environment.transitions) {
        const auto& t = *c.environment.transitions;
        env["transitions"] = {{"action1", {t[0][0], t[0][1]}}, {"action2", {t[1][0], t[1][1]}}};
      }
      break;
    case EnvironmentKind::pd:
      env["x"] = c.environment.x;
      env["y"] = c.environment.y;
      env["channel"] = to_string(c.environment.channel);
      if (c.environment.channel == PayoffChannel::stochastic) {
        env["V"] = c.environment.V;
        env["correlation"] = to_string(c.environment.correlation);
      }
      break;
    case EnvironmentKind::duopoly: {
      const auto& p = c.environment.duopoly;
      env["d"] = p.d;
      env["mu"] = p.mu;
      env["c"] = p.c;
      env["price_min"] = p.price_min;
      env["price_step"] = p.price_step;
      env["num_prices"] = p.num_prices;
      env["scale"] = p.scale;
      break;
    }
  }
  j["environment"] = env;

  json ag;
  const auto& a = c.agents;
  ag["alpha"] = a.alpha.size() == 1 ? json(a.alpha[0]) : json(a.alpha);
  ag["epsilon"] = a.epsilon.size() == 1 ? json(a.epsilon[0]) : json(a.epsilon);
  ag["delta"] = a.delta;
  if (!a.bias.empty()) ag["bias"] = a.bias.size() == 1 ? json(a.bias[0]) : json(a.bias);
  if (a.distortion_name) ag["distortion"] = *a.distortion_name;
  else if (!a.distortion_values.empty()) ag["distortion"] = a.distortion_values;
  if (a.initial_q.size() == 1) ag["initial_q"] = a.initial_q[0];
  else if (!a.initial_q.empty()) ag["initial_q"] = a.initial_q;
  if (a.bias_grid) {
    ag["bias_grid"] = {{"increment", a.bias_grid->grid.increment},
                       {"kappa_min", a.bias_grid->grid.kappa_min},
                       {"kappa_max", a.bias_grid->grid.kappa_max},
                       {"seed_mode", to_string(a.bias_grid->seed_mode)}};
  }
  j["agents"] = ag;

  json sim;
  const auto& s = c.simulation;
  sim["horizon"] = s.horizon;
  sim["paths"] = s.paths;
  sim["seed"] = s.seed;
  sim["window_fraction"] = s.window_fraction;
  sim["trace"] = to_string(s.trace);
  sim["threads"] = s.threads;
  if (s.phase_delta) {
    sim["phase_split"] = s.phase_delta->split;
    sim["phase_orientation"] = to_string(s.phase_delta->orientation);
  }
  j["simulation"] = sim;

  const auto& h = c.analysis.histogram;
  j["analysis"] = {{"histogram", {{"omega", h.omega}, {"k_min", h.k_min}, {"k_max", h.k_max}, {"min_count", h.min_count}}},
                   {"durations",
                    {{"favorable_q", c.analysis.durations.favorable_q},
                     {"unfavorable_q", c.analysis.durations.unfavorable_q}}}};
  j["output"] = {{"directory", c.output.directory}, {"stride", c.output.stride}, {"precision", c.output.precision}};
  return j;
}

// ---------------------------------------------------------------------------
// Expansion into engine objects.

inline AnyEnvironment make_environment(const EnvironmentConfig& e) {
  switch (e.kind) {
    case EnvironmentKind::decision:
      return DecisionAutomatonEnv(e.y, e.x, static_cast<std::size_t>(e.initial_state - 1),
                                  e.transitions.value_or(DecisionAutomatonEnv::kDefaultTransitions));
    case EnvironmentKind::pd: {
      PDGame g{e.x, e.y, e.channel};
      if (e.channel == PayoffChannel::stochastic) return PDEnv(g, stochastic_params_from_xy(e.x, e.y, e.V, e.correlation));
      return PDEnv(g);
    }
    case EnvironmentKind::duopoly:
      return LogitDuopolyEnv(e.duopoly);
  }
  throw config_error("unknown environment kind");
}

inline std::size_t agent_count(const EnvironmentConfig& e) { return e.kind == EnvironmentKind::decision ? 1 : 2; }

inline std::vector<double> resolve_distortion(const RunConfig& c, const AnyEnvironment& env) {
  const std::size_t A = std::visit([](const auto& e) { return e.num_actions(); }, env);
  const auto& ag = c.agents;
  if (!ag.distortion_values.empty()) {
    if (ag.distortion_values.size() != A) throw config_error("agents.distortion: length must equal the action count");
    return ag.distortion_values;
  }
  const std::string name = ag.distortion_name.value_or(c.environment.kind == EnvironmentKind::duopoly ? "own-price-profit"
                                                                                                    : "cooperation");
  if (name == "none") return std::vector<double>(A, 0.0);
  if (name == "cooperation") {
    std::vector<double> g(A, 0.0);
    g[0] = 1.0;
    return g;
  }
  if (c.environment.kind != EnvironmentKind::duopoly)
    throw config_error("agents.distortion: own-price-profit needs the duopoly environment");
  return std::get<LogitDuopolyEnv>(env).duopoly_distortion();
}

// Agent specs for one (alpha, epsilon) pair.
inline std::vector<AgentSpec> make_agents(const RunConfig& c, const AnyEnvironment& env, double alpha, double epsilon) {
  const std::size_t n = agent_count(c.environment);
  const auto g = resolve_distortion(c, env);
  const auto& b = c.agents.bias;
  if (!(b.empty() || b.size() == 1 || b.size() == n))
    throw config_error("agents.bias: give one value or one per agent");
  std::vector<AgentSpec> out;
  for (std::size_t i = 0; i < n; ++i) {
    AgentSpec s{alpha, epsilon, c.agents.delta, b.empty() ? 0.0 : (b.size() == 1 ? b[0] : b[i]), g};
    s.validate(g.size());
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<QTable> make_initial_q(const RunConfig& c, const AnyEnvironment& env,
                                          const std::vector<std::vector<double>>& tables) {
  const std::size_t n = agent_count(c.environment);
  const std::size_t A = std::visit([](const auto& e) { return e.num_actions(); }, env);
  std::vector<QTable> out;
  if (tables.empty()) {
    out.assign(n, QTable(std::vector<double>(A, 1.0)));
  } else if (tables.size() == 1) {
    out.assign(n, QTable(tables[0]));
  } else if (tables.size() == n) {
    for (const auto& t : tables) out.emplace_back(t);
  } else {
    throw config_error("agents.initial_q: give one table or one per agent");
  }
  for (const auto& q : out)
    if (q.size() != A)
      throw config_error("agents.initial_q: table length " + std::to_string(q.size()) + " does not match action count " +
                         std::to_string(A));
  return out;
}

inline DeltaSpec default_phase_delta(const RunConfig& c) {
  if (c.simulation.phase_delta) return *c.simulation.phase_delta;
  if (c.environment.kind == EnvironmentKind::duopoly) {
    bool biased = c.agents.bias_grid.has_value();
    for (double b : c.agents.bias) biased = biased || b != 0.0;
    if (biased) return {3, DeltaSpec::Orientation::high_minus_low};
  }
  return {1, DeltaSpec::Orientation::low_minus_high};
}

inline SimConfig make_sim_config(const RunConfig& c, const AnyEnvironment& env) {
  SimConfig s;
  s.horizon = c.simulation.horizon;
  s.num_paths = c.simulation.paths;
  s.master_seed = c.simulation.seed;
  s.trace_level = c.simulation.trace;
  s.threads = c.simulation.threads;
  if (s.horizon < 1) throw config_error("simulation.horizon: must be at least 1");
  if (s.num_paths < 1) throw config_error("simulation.paths: must be at least 1");
  try {
    s.window = trailing_window(s.horizon, c.simulation.window_fraction);
  } catch (const usage_error& e) {
    throw config_error(std::string("simulation.window_fraction: ") + e.what());
  }
  s.initial_q = make_initial_q(c, env, c.agents.initial_q);
  s.delta_spec = default_phase_delta(c);
  return s;
}

// Checks everything that can be checked without running.
inline void validate(const RunConfig& c) {
  AnyEnvironment env = [&] {
    try {
      return make_environment(c.environment);
    } catch (const std::invalid_argument& e) {
      throw config_error(std::string("environment: ") + e.what());
    }
  }();
  for (double a : c.agents.alpha)
    for (double e : c.agents.epsilon) {
      try {
        make_agents(c, env, a, e);
      } catch (const std::invalid_argument& err) {
        throw config_error(std::string("agents: ") + err.what());
      }
    }
  make_sim_config(c, env);
  const bool lists = c.agents.alpha.size() > 1 || c.agents.epsilon.size() > 1;
  switch (c.experiment) {
    case ExperimentKind::batch:
      if (lists) throw config_error("agents: batch experiments take a single alpha and epsilon");
      break;
    case ExperimentKind::bias_sweep:
      if (lists) throw config_error("agents: bias sweeps take a single alpha and epsilon");
      if (!c.agents.bias_grid) throw config_error("agents.bias_grid: required for bias-sweep experiments");
      if (agent_count(c.environment) != 2) throw config_error("environment: bias sweeps need a two-agent environment");
      try {
        c.agents.bias_grid->grid.validate();
      } catch (const usage_error& e) {
        throw config_error(std::string("agents.bias_grid: ") + e.what());
      }
      break;
    case ExperimentKind::durations:
    case ExperimentKind::conditional_curve:
      if (c.agents.alpha.size() != 1) throw config_error("agents.alpha: this experiment takes a single alpha");
      if (agent_count(c.environment) != 2) throw config_error("environment: this experiment needs two agents");
      if (c.experiment == ExperimentKind::durations) {
        make_initial_q(c, env, {c.analysis.durations.favorable_q});
        make_initial_q(c, env, {c.analysis.durations.unfavorable_q});
      } else {
        try {
          c.analysis.histogram.validate();
        } catch (const usage_error& e) {
          throw config_error(std::string("analysis.histogram: ") + e.what());
        }
      }
      break;
    case ExperimentKind::grid:
      break;
  }
  if (c.simulation.trace == TraceLevel::full && c.experiment != ExperimentKind::batch &&
      c.experiment != ExperimentKind::conditional_curve)
    throw config_error("simulation.trace: full traces are available for batch and conditional-curve experiments only");
  if (c.output.stride < 1) throw config_error("output.stride: must be at least 1");
  if (c.output.precision < 0 || c.output.precision > 17) throw config_error("output.precision: must lie in [0,17]");
}

}  // namespace qbl
