// qbl: run presets or config files and write their artifacts.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qbl/presets.hpp"
#include "qbl/runner.hpp"

namespace {

qbl::RunConfig resolve_target(const std::string& target, qbl::RunInfo& info) {
  if (qbl::has_preset(target)) {
    info.preset = target;
    info.source = "preset:" + target;
    return qbl::preset(target);
  }
  if (!std::filesystem::exists(target))
    throw qbl::config_error("'" + target + "' is neither a preset nor an existing file (see `qbl presets`)");
  info.source = target;
  return qbl::load_config_file(target);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Q-learning and biased Q-learning simulations"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a preset, config file or manifest");
  std::string target, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths, horizon, threads, stride;
  std::optional<std::string> trace;
  run->add_option("target", target, "Preset name or path to a config/manifest JSON file")->required();
  run->add_option("--out", out_dir, "Output directory (default: the config's output.directory)");
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--paths", paths, "Number of paths per cell");
  run->add_option("--horizon", horizon, "Periods per path");
  run->add_option("--threads", threads, "Worker threads (0 = all available)");
  run->add_option("--trace", trace, "Trace level")->check(CLI::IsMember({"none", "aggregates", "full"}));
  run->add_option("--stride", stride, "Keep every N-th period in JSONL traces");
  bool quiet = false;
  run->add_flag("-q,--quiet", quiet, "Do not print the summary");

  auto* list = app.add_subcommand("presets", "List presets");
  auto* show = app.add_subcommand("show", "Print the expanded config of a preset or file");
  std::string show_target;
  show->add_option("target", show_target, "Preset name or config path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      for (const auto& p : qbl::preset_entries()) std::cout << p.name << "\t" << p.summary << "\n";
      return 0;
    }
    if (*show) {
      qbl::RunInfo info;
      auto c = resolve_target(show_target, info);
      qbl::validate(c);
      std::cout << qbl::to_json(c).dump(2) << "\n";
      return 0;
    }

    qbl::RunInfo info;
    qbl::RunConfig c = resolve_target(target, info);
    if (seed) c.simulation.seed = *seed;
    if (paths) c.simulation.paths = *paths;
    if (horizon) c.simulation.horizon = *horizon;
    if (threads) c.simulation.threads = *threads;
    if (trace) c.simulation.trace = qbl::parse_trace_level(*trace);
    if (stride) c.output.stride = *stride;
    const std::filesystem::path dir = out_dir.empty() ? std::filesystem::path(c.output.directory) : std::filesystem::path(out_dir);

    const auto rep = qbl::run_experiment(c, dir, info);
    if (!quiet) std::cout << rep.summary;
    std::cerr << "wrote " << rep.outputs.size() << " files to " << dir.string() << " in " << rep.wall_seconds << " s\n";
    return 0;
  } catch (const qbl::config_error& e) {
    std::cerr << "qbl: invalid config: " << e.what() << "\n";
    return 2;
  } catch (const qbl::io_error& e) {
    std::cerr << "qbl: I/O error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "qbl: error: " << e.what() << "\n";
    return 1;
  }
}
