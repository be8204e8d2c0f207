#pragma once

// Executes a RunConfig and writes its artifacts: expanded config, CSV
// tables, optional JSONL traces, a rounded summary and a manifest.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "qbl/config.hpp"
#include "qbl/engine.hpp"
#include "qbl/equilibrium.hpp"
#include "qbl/io.hpp"
#include "qbl/metrics.hpp"

namespace qbl {

inline constexpr const char* kVersion = "1.0.0";

struct RunInfo {
  std::optional<std::string> preset;
  std::string source;  // preset name, config path or manifest path
};

struct RunReport {
  std::vector<std::string> outputs;  // relative to the output directory
  double wall_seconds = 0.0;
  std::string summary;
};

namespace detail {

inline std::vector<std::string> profile_labels(const RunConfig& c, std::size_t A) {
  switch (c.environment.kind) {
    case EnvironmentKind::decision: return {"a1", "a2"};
    case EnvironmentKind::pd: return {"CC", "CD", "DC", "DD"};
    case EnvironmentKind::duopoly: break;
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < A; ++i)
    for (std::size_t j = 0; j < A; ++j) out.push_back("p" + std::to_string(i) + "_p" + std::to_string(j));
  return out;
}

struct Columns {
  std::vector<std::string> names;
  std::vector<std::string> values;
  void add(std::string n, std::string v) {
    names.push_back(std::move(n));
    values.push_back(std::move(v));
  }
  void add(std::string n, double v) { add(std::move(n), format_full(v)); }
};

// Run parameters repeated on every long-format row.
inline Columns parameter_columns(const RunConfig& c, const SimConfig& s) {
  Columns p;
  const auto& e = c.environment;
  p.add("environment", to_string(e.kind));
  switch (e.kind) {
    case EnvironmentKind::decision:
      p.add("x", e.x);
      p.add("y", e.y);
      p.add("initial_state", std::to_string(e.initial_state));
      break;
    case EnvironmentKind::pd:
      p.add("x", e.x);
      p.add("y", e.y);
      p.add("channel", to_string(e.channel));
      p.add("V", e.channel == PayoffChannel::stochastic ? format_full(e.V) : std::string());
      p.add("correlation", e.channel == PayoffChannel::stochastic ? to_string(e.correlation) : "");
      break;
    case EnvironmentKind::duopoly:
      p.add("d", e.duopoly.d);
      p.add("mu", e.duopoly.mu);
      p.add("c", e.duopoly.c);
      p.add("scale", e.duopoly.scale);
      break;
  }
  p.add("discount", c.agents.delta);
  p.add("horizon", std::to_string(s.horizon));
  p.add("paths", std::to_string(s.num_paths));
  p.add("seed", std::to_string(s.master_seed));
  p.add("window_begin", std::to_string(s.effective_window().begin));
  p.add("window_end", std::to_string(s.effective_window().end));
  return p;
}

template <class F>
decltype(auto) with_env(const AnyEnvironment& env, F&& f) {
  return std::visit(std::forward<F>(f), env);
}

inline std::size_t action_count(const AnyEnvironment& env) {
  return with_env(env, [](const auto& e) { return e.num_actions(); });
}

inline BatchResult batch_for(const AnyEnvironment& env, const std::vector<AgentSpec>& agents, const SimConfig& s) {
  return with_env(env, [&](const auto& e) { return run_batch(e, std::span<const AgentSpec>(agents), s); });
}

inline std::string rounded_matrix(const std::vector<std::string>& row_labels, const std::vector<std::string>& col_labels,
                                  const std::string& corner, const std::vector<std::vector<double>>& v, int precision) {
  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%14s", corner.c_str());
  out += buf;
  for (const auto& c : col_labels) {
    std::snprintf(buf, sizeof buf, " %9s", c.c_str());
    out += buf;
  }
  out += '\n';
  for (std::size_t i = 0; i < row_labels.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%14s", row_labels[i].c_str());
    out += buf;
    for (double x : v[i]) {
      std::snprintf(buf, sizeof buf, " %9s", format_fixed(x, precision).c_str());
      out += buf;
    }
    out += '\n';
  }
  return out;
}

inline std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path root) : root_(std::move(root)) {}
  void write(const std::string& rel, const std::string& text) {
    write_text(root_ / rel, text);
    outputs_.push_back(rel);
  }
  const std::vector<std::string>& outputs() const { return outputs_; }
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
  std::vector<std::string> outputs_;
};

inline std::string trace_name(std::size_t path, std::optional<std::size_t> eps_index = {}) {
  char buf[64];
  if (eps_index) std::snprintf(buf, sizeof buf, "traces/eps%02zu_path_%05zu.jsonl", *eps_index, path);
  else std::snprintf(buf, sizeof buf, "traces/path_%05zu.jsonl", path);
  return buf;
}

// ---------------------------------------------------------------------------

inline std::string run_batch_experiment(const RunConfig& c, const AnyEnvironment& env, ArtifactWriter& out) {
  const auto agents = make_agents(c, env, c.agents.alpha[0], c.agents.epsilon[0]);
  const SimConfig s = make_sim_config(c, env);
  const BatchResult b = batch_for(env, agents, s);
  const std::size_t n = agents.size();
  const auto labels = profile_labels(c, action_count(env));
  const auto params = parameter_columns(c, s);
  const auto w = mean_welfare(b.paths);
  const auto f = profile_frequencies(b.paths);
  const double pooled = pooled_welfare(b.paths);
  const double se = welfare_standard_error(b.paths);
  const double exit_up = exit_fraction(b.paths, ExitDirection::to_cooperation);
  const double exit_down = exit_fraction(b.paths, ExitDirection::to_defection);

  std::vector<std::string> header = params.names;
  for (const char* k : {"alpha", "epsilon"}) header.emplace_back(k);
  for (std::size_t i = 0; i < n; ++i) header.push_back("bias_" + std::to_string(i + 1));
  for (std::size_t i = 0; i < n; ++i) header.push_back("welfare_" + std::to_string(i + 1));
  for (const char* k : {"welfare", "welfare_se", "exit_to_cooperation", "exit_to_defection"}) header.emplace_back(k);
  for (const auto& l : labels) header.push_back("freq_" + l);
  CsvTable summary(header);
  {
    auto r = summary.row();
    for (const auto& v : params.values) r << v;
    r << agents[0].alpha << agents[0].epsilon;
    for (const auto& a : agents) r << a.bias;
    for (double v : w) r << v;
    r << pooled << se << exit_up << exit_down;
    for (double v : f) r << v;
  }
  out.write("summary.csv", summary.str());

  if (s.trace_level != TraceLevel::none) {
    std::vector<std::string> h{"path"};
    for (std::size_t i = 0; i < n; ++i) h.push_back("mean_reward_" + std::to_string(i + 1));
    for (std::size_t i = 0; i < n; ++i) h.push_back("window_mean_reward_" + std::to_string(i + 1));
    for (const char* k : {"exit_to_cooperation", "exit_to_defection", "first_crossing_up", "first_crossing_down"})
      h.emplace_back(k);
    for (const auto& l : labels) h.push_back("count_" + l);
    CsvTable pr(h);
    for (const auto& p : b.paths) {
      auto r = pr.row();
      r << p.path_index;
      for (double v : p.reward_total) r << v / static_cast<double>(p.horizon);
      for (std::size_t i = 0; i < n; ++i) r << p.mean_window_reward(i);
      r << p.exit_to_cooperation << p.exit_to_defection << p.first_crossing_up << p.first_crossing_down;
      for (auto k : p.profile_counts) r << static_cast<std::size_t>(k);
    }
    out.write("path_results.csv", pr.str());
  }
  for (std::size_t p = 0; p < b.traces.size(); ++p) out.write(trace_name(p), trace_jsonl(b.traces[p], c.output.stride));

  const int prec = c.output.precision;
  std::string txt = "welfare (pooled over " + std::to_string(s.num_paths) + " paths, periods [" +
                    std::to_string(s.effective_window().begin) + "," + std::to_string(s.effective_window().end) +
                    ")): " + format_fixed(pooled, prec) + "  (se " + format_fixed(se, prec + 1) + ")\n";
  for (std::size_t i = 0; i < n; ++i) txt += "  agent " + std::to_string(i + 1) + ": " + format_fixed(w[i], prec) + "\n";
  txt += "exit to cooperation: " + format_fixed(exit_up, prec) + "   exit to defection: " + format_fixed(exit_down, prec) + "\n";
  txt += "profile frequencies:";
  for (std::size_t k = 0; k < f.size(); ++k)
    if (labels.size() <= 4 || f[k] >= 0.01) txt += " " + labels[k] + "=" + format_fixed(f[k], prec);
  return txt + "\n";
}

inline std::string run_grid_experiment(const RunConfig& c, const AnyEnvironment& env, ArtifactWriter& out) {
  const auto& alphas = c.agents.alpha;
  const auto& epsilons = c.agents.epsilon;
  const SimConfig s = make_sim_config(c, env);
  const auto labels = profile_labels(c, action_count(env));
  const auto params = parameter_columns(c, s);

  std::vector<std::vector<double>> welfare(alphas.size()), exits(alphas.size());
  std::vector<std::string> header = params.names;
  for (const char* k : {"alpha", "epsilon", "welfare", "welfare_se", "exit_to_cooperation", "exit_to_defection"})
    header.emplace_back(k);
  for (const auto& l : labels) header.push_back("freq_" + l);
  CsvTable cells(header);
  std::vector<std::vector<std::vector<double>>> freqs(alphas.size());

  for (std::size_t i = 0; i < alphas.size(); ++i)
    for (double eps : epsilons) {
      const auto agents = make_agents(c, env, alphas[i], eps);
      const BatchResult b = batch_for(env, agents, s);
      const double wv = pooled_welfare(b.paths);
      const double ex = exit_fraction(b.paths, ExitDirection::to_cooperation);
      const auto f = profile_frequencies(b.paths);
      welfare[i].push_back(wv);
      exits[i].push_back(ex);
      freqs[i].push_back(f);
      auto r = cells.row();
      for (const auto& v : params.values) r << v;
      r << alphas[i] << eps << wv << welfare_standard_error(b.paths) << ex
        << exit_fraction(b.paths, ExitDirection::to_defection);
      for (double v : f) r << v;
    }

  auto wide = [&](const std::vector<std::vector<double>>& v) {
    std::vector<std::string> h{"alpha\\epsilon"};
    for (double e : epsilons) h.push_back(format_full(e));
    CsvTable t(h);
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      auto r = t.row();
      r << alphas[i];
      for (double x : v[i]) r << x;
    }
    return t.str();
  };
  out.write("welfare_grid.csv", wide(welfare));
  out.write("exit_grid.csv", wide(exits));
  out.write("grid_cells.csv", cells.str());

  std::vector<std::string> rl, cl;
  for (double a : alphas) rl.push_back(short_number(a));
  for (double e : epsilons) cl.push_back(short_number(e));
  const int prec = c.output.precision;
  std::string txt = "welfare\n" + rounded_matrix(rl, cl, "alpha\\eps", welfare, prec);
  txt += "\nexit to cooperation (fraction of paths)\n" + rounded_matrix(rl, cl, "alpha\\eps", exits, prec);
  if (labels.size() <= 4) {
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      std::vector<std::string> hl{"gains"};
      for (const auto& l : labels) hl.push_back("%" + l);
      std::vector<std::vector<double>> rows;
      for (std::size_t j = 0; j < epsilons.size(); ++j) {
        std::vector<double> r{welfare[i][j]};
        r.insert(r.end(), freqs[i][j].begin(), freqs[i][j].end());
        rows.push_back(r);
      }
      txt += "\nalpha=" + short_number(alphas[i]) + "\n" + rounded_matrix(cl, hl, "eps", rows, prec);
    }
  }
  return txt;
}

inline std::string run_sweep_experiment(const RunConfig& c, const AnyEnvironment& env, ArtifactWriter& out) {
  const auto base = make_agents(c, env, c.agents.alpha[0], c.agents.epsilon[0])[0];
  const SimConfig s = make_sim_config(c, env);
  const auto& bg = *c.agents.bias_grid;
  const SweepResult r = with_env(env, [&](const auto& e) {
    return sweep_bias_grid(e, base, bg.grid, s, bg.seed_mode, to_string(c.environment.kind));
  });
  const GainMatrix v = r.anonymized();
  const double tol = default_tolerance(v);
  const NashReport nash = pure_nash(v, tol);
  const auto labels = profile_labels(c, action_count(env));
  const auto params = parameter_columns(c, s);
  const std::size_t K = bg.grid.size();

  out.write("gain_matrix.csv", gain_matrix_csv(v, "kappa\\opponent").str());
  out.write("gain_matrix_se.csv", gain_matrix_csv(v, "kappa\\opponent", true).str());
  out.write("gain_seat1.csv", gain_matrix_csv(r.seat1, "kappa1\\kappa2").str());
  out.write("gain_seat2.csv", gain_matrix_csv(r.seat2, "kappa1\\kappa2").str());

  nlohmann::ordered_json meta;
  meta["layout"] = "row = own kappa, column = opponent kappa; seat files: row = kappa1, column = kappa2";
  meta["kappas"] = v.kappas();
  meta["increment"] = bg.grid.increment;
  meta["environment"] = v.meta.environment;
  meta["paths"] = v.meta.paths;
  meta["horizon"] = v.meta.horizon;
  meta["window"] = {s.effective_window().begin, s.effective_window().end};
  meta["master_seed"] = v.meta.master_seed;
  meta["seed_mode"] = to_string(v.meta.seed_mode);
  meta["alpha"] = base.alpha;
  meta["epsilon"] = base.epsilon;
  meta["discount"] = base.delta;
  meta["distortion"] = base.distortion;
  out.write("gain_matrix.json", meta.dump(2) + "\n");

  nlohmann::ordered_json nj;
  nj["tolerance"] = tol;
  auto& eq = nj["equilibria"] = nlohmann::ordered_json::array();
  for (const auto& e : nash.equilibria)
    eq.push_back({{"kappa1", e.profile.kappa1}, {"kappa2", e.profile.kappa2}, {"pressure1", e.pressure.player1},
                  {"pressure2", e.pressure.player2}});
  auto& pr = nj["pressures"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < K; ++j) {
      const auto p = best_response_pressure(v, i, j);
      pr.push_back({{"kappa1", v.kappas()[i]}, {"kappa2", v.kappas()[j]}, {"pressure1", p.player1},
                    {"pressure2", p.player2}});
    }
  out.write("nash.json", nj.dump(2) + "\n");

  std::vector<std::string> header = params.names;
  for (const char* k : {"alpha", "epsilon", "kappa1", "kappa2", "bias1", "bias2", "welfare1", "welfare2", "se1", "se2",
                        "exit_to_cooperation"})
    header.emplace_back(k);
  for (const auto& l : labels) header.push_back("freq_" + l);
  CsvTable cells(header);
  for (std::size_t cidx = 0; cidx < K * K; ++cidx) {
    const std::size_t i = cidx / K, j = cidx % K;
    const int k1 = bg.grid.kappa(i), k2 = bg.grid.kappa(j);
    auto row = cells.row();
    for (const auto& pv : params.values) row << pv;
    row << base.alpha << base.epsilon << k1 << k2 << bg.grid.bias(k1) << bg.grid.bias(k2) << r.seat1(i, j)
        << r.seat2(i, j) << r.seat1.std_error(i, j) << r.seat2.std_error(i, j) << r.exit_to_cooperation[cidx];
    for (double f : r.profile_frequencies[cidx]) row << f;
  }
  out.write("profiles.csv", cells.str());

  const int prec = c.output.precision;
  std::vector<std::string> kl;
  for (int k : v.kappas()) kl.push_back(std::to_string(k));
  std::vector<std::vector<double>> rows(K);
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < K; ++j) rows[i].push_back(v(i, j));
  std::string txt = "anonymized gains (row = own kappa, column = opponent kappa)\n" +
                    rounded_matrix(kl, kl, "k\\k'", rows, prec);
  txt += "\ntolerance " + format_fixed(tol, 4) + "; pure Nash profiles:";
  if (nash.equilibria.empty()) txt += " none";
  for (const auto& e : nash.equilibria)
    txt += " (" + std::to_string(e.profile.kappa1) + "," + std::to_string(e.profile.kappa2) + ")";
  txt += "\ndiagonal pressures (best unilateral gain):\n";
  for (std::size_t i = 0; i < K; ++i)
    txt += "  (" + kl[i] + "," + kl[i] + "): " + format_fixed(best_response_pressure(v, i, i).player1, 4) + "\n";
  return txt;
}

inline std::string run_durations_experiment(const RunConfig& c, const AnyEnvironment& env, ArtifactWriter& out) {
  RunConfig base = c;
  SimConfig s = make_sim_config(c, env);
  s.trace_level = TraceLevel::none;
  SimConfig fav = s, unfav = s;
  fav.initial_q = make_initial_q(c, env, {c.analysis.durations.favorable_q});
  unfav.initial_q = make_initial_q(c, env, {c.analysis.durations.unfavorable_q});
  const auto params = parameter_columns(c, s);

  std::vector<std::string> header = params.names;
  for (const char* k : {"alpha", "epsilon", "cooperative_median", "cooperative_censored", "cooperative_exits",
                        "defective_median", "defective_censored", "defective_exits", "first_crossing_median"})
    header.emplace_back(k);
  CsvTable t(header);
  std::vector<std::vector<double>> rows;
  std::vector<std::string> rl;
  for (double eps : c.agents.epsilon) {
    const auto agents = make_agents(c, env, c.agents.alpha[0], eps);
    const BatchResult bf = batch_for(env, agents, fav);
    const BatchResult bu = batch_for(env, agents, unfav);
    std::vector<std::optional<std::size_t>> coop, defe, cross;
    for (const auto& p : bf.paths) coop.push_back(p.exit_to_defection);
    for (const auto& p : bu.paths) defe.push_back(p.exit_to_cooperation), cross.push_back(p.first_crossing_up);
    const auto mc = median_duration(coop, s.horizon);
    const auto md = median_duration(defe, s.horizon);
    const auto mx = median_duration(cross, s.horizon);
    auto count = [](const auto& v) {
      std::size_t k = 0;
      for (const auto& x : v) k += x.has_value();
      return k;
    };
    auto r = t.row();
    for (const auto& pv : params.values) r << pv;
    r << c.agents.alpha[0] << eps << mc.median << (mc.censored ? "true" : "false") << count(coop) << md.median
      << (md.censored ? "true" : "false") << count(defe) << mx.median;
    rows.push_back({mc.median, md.median});
    rl.push_back(short_number(eps));
  }
  out.write("durations.csv", t.str());
  return "median phase durations (periods; censored medians equal the horizon)\n" +
         rounded_matrix(rl, {"cooperative", "defective"}, "eps", rows, 0);
}

inline std::string run_curve_experiment(const RunConfig& c, const AnyEnvironment& env, ArtifactWriter& out) {
  SimConfig s = make_sim_config(c, env);
  const bool export_traces = s.trace_level == TraceLevel::full;
  s.trace_level = TraceLevel::full;
  const auto params = parameter_columns(c, s);
  std::vector<std::string> header = params.names;
  for (const char* k : {"alpha", "epsilon", "k", "lower", "upper", "count", "frequency"}) header.emplace_back(k);
  CsvTable t(header);
  std::string txt = "Pr(Delta_2 > 0 | Delta_1 in bin), bins with at least " +
                    std::to_string(c.analysis.histogram.min_count) + " periods\n";
  for (std::size_t ei = 0; ei < c.agents.epsilon.size(); ++ei) {
    const double eps = c.agents.epsilon[ei];
    const auto agents = make_agents(c, env, c.agents.alpha[0], eps);
    const BatchResult b = batch_for(env, agents, s);
    const auto curve = conditional_frequency_curve(b.traces, c.analysis.histogram);
    for (const auto& bin : curve) {
      auto r = t.row();
      for (const auto& pv : params.values) r << pv;
      r << c.agents.alpha[0] << eps << bin.k << bin.lower << bin.upper << bin.count << bin.frequency;
    }
    if (export_traces)
      for (std::size_t p = 0; p < b.traces.size(); ++p)
        out.write(trace_name(p, ei), trace_jsonl(b.traces[p], c.output.stride));
    txt += "  eps=" + short_number(eps) + ": " + std::to_string(curve.size()) + " bins";
    if (!curve.empty())
      txt += ", Delta_1 range [" + format_fixed(curve.front().lower, 3) + "," + format_fixed(curve.back().upper, 3) + "]";
    txt += "\n";
  }
  out.write("fk_curve.csv", t.str());
  return txt;
}

}  // namespace detail

// Validates, runs and writes everything under `dir`. Throws config_error on
// an invalid config and io_error on write failures.
inline RunReport run_experiment(RunConfig c, const std::filesystem::path& dir, const RunInfo& info = {}) {
  validate(c);
  const auto start = std::chrono::steady_clock::now();
  c.output.directory = dir.string();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw io_error("cannot create output directory " + dir.string() + ": " + ec.message());

  detail::ArtifactWriter out(dir);
  const AnyEnvironment env = make_environment(c.environment);
  out.write("config.json", to_json(c).dump(2) + "\n");

  std::string summary;
  switch (c.experiment) {
    case ExperimentKind::batch: summary = detail::run_batch_experiment(c, env, out); break;
    case ExperimentKind::grid: summary = detail::run_grid_experiment(c, env, out); break;
    case ExperimentKind::bias_sweep: summary = detail::run_sweep_experiment(c, env, out); break;
    case ExperimentKind::durations: summary = detail::run_durations_experiment(c, env, out); break;
    case ExperimentKind::conditional_curve: summary = detail::run_curve_experiment(c, env, out); break;
  }
  std::string head = (c.name.empty() ? std::string("run") : c.name) + " [" + to_string(c.experiment) + ", seed " +
                     std::to_string(c.simulation.seed) + "]\n";
  if (!c.description.empty()) head += c.description + "\n";
  summary = head + "\n" + summary;
  out.write("summary.txt", summary);

  RunReport rep;
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rep.outputs = out.outputs();
  rep.outputs.push_back("manifest.json");
  rep.summary = summary;

  nlohmann::ordered_json m;
  m["tool"] = "qbl";
  m["version"] = kVersion;
  m["preset"] = info.preset ? nlohmann::ordered_json(*info.preset) : nlohmann::ordered_json(nullptr);
  m["source"] = info.source;
  m["master_seed"] = c.simulation.seed;
  m["threads"] = resolve_threads(c.simulation.threads, std::numeric_limits<std::size_t>::max());
  m["wall_time_seconds"] = rep.wall_seconds;
  m["outputs"] = rep.outputs;
  m["config"] = to_json(c);
  write_text(dir / "manifest.json", m.dump(2) + "\n");
  return rep;
}

// A manifest carries the full config; anything else is parsed as a config.
inline bool is_manifest(const json& j) { return j.is_object() && j.contains("tool") && j.contains("config"); }

inline RunConfig load_config_file(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw config_error(path.string() + ": " + e.what());
  }
  try {
    return parse_run_config(is_manifest(j) ? j.at("config") : j);
  } catch (const config_error& e) {
    throw config_error(path.string() + ": " + e.what());
  }
}

}  // namespace qbl
