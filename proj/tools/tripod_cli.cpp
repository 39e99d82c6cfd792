// Command-line front end of the tripod memory beam-splitter simulator.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tripod/commands.hpp"
#include "tripod/simd/ops.hpp"

namespace {

struct GlobalOptions {
  std::string config_path;
  std::string output_dir;
  long long workers = -1;
};

tripod::RunConfig load_config(const GlobalOptions& g) {
  tripod::RunConfig cfg = tripod::parse_config_file(g.config_path);
  if (!g.output_dir.empty()) cfg.output_dir = g.output_dir;
  if (g.workers >= 0) cfg.workers = static_cast<std::size_t>(g.workers);
  std::filesystem::create_directories(cfg.output_dir);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Simulator of a tripod high-speed quantum memory operated as a "
      "tunable beam splitter"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("-c,--config", g.config_path, "configuration file")
      ->required();
  app.add_option("-o,--output-dir", g.output_dir,
                 "output directory (overrides the config)");
  app.add_option("-w,--workers", g.workers,
                 "worker threads (0 = machine parallelism)");

  auto* kernel = app.add_subcommand(
      "kernel", "build and export the full-memory-cycle kernel");
  auto* modes =
      app.add_subcommand("modes", "eigenvalues and eigenmodes of the cycle");
  auto* sweep = app.add_subcommand(
      "sweep", "efficiency spectrum over the configured (T, L) box");
  auto* split = app.add_subcommand(
      "split", "run the two-input/two-output protocol or measure the "
               "mode-wise splitter matrix");
  auto* validate =
      app.add_subcommand("validate", "run the invariant suite (exit 0 iff "
                                     "all checks pass)");

  tripod::SplitInputs split_inputs;
  std::string a1_path, a2_path;
  long long mode_index = -1;
  split->add_option("--a1", a1_path, "input envelope CSV for port 1");
  split->add_option("--a2", a2_path, "input envelope CSV for port 2");
  split->add_option("--mode", mode_index,
                    "measure the 2x2 matrix of this mode (0-based)");

  CLI11_PARSE(app, argc, argv);

  try {
    const tripod::RunConfig cfg = load_config(g);
    if (kernel->parsed()) return tripod::cmd_kernel(cfg, std::cout);
    if (modes->parsed()) return tripod::cmd_modes(cfg, std::cout);
    if (sweep->parsed()) return tripod::cmd_sweep(cfg, std::cout);
    if (split->parsed()) {
      if (!a1_path.empty()) split_inputs.a1_path = a1_path;
      if (!a2_path.empty()) split_inputs.a2_path = a2_path;
      if (mode_index >= 0) {
        split_inputs.mode_index = static_cast<std::size_t>(mode_index);
      }
      return tripod::cmd_split(cfg, split_inputs, std::cout);
    }
    if (validate->parsed()) return tripod::cmd_validate(cfg, std::cout);
  } catch (const tripod::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return tripod::kExitUsage;
  } catch (const tripod::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return tripod::kExitUsage;
  } catch (const tripod::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tripod::kExitCheckFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tripod::kExitCheckFailed;
  }
  return tripod::kExitUsage;
}
