// cemwave run --config <path> [--mode fine|multiscale|study] [--override section.key=value ...]
//
// Exit status: 0 success, 1 configuration error, 2 numerical failure.

#include "cemwave/cemwave.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Elastic wave simulation with a fine IPDG reference and the CEM-GMsFEM coarse solver"};
  app.require_subcommand(1);

  std::string config_path;
  std::string mode;
  std::vector<std::string> overrides;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Run a configuration or re-run a manifest");
  run->add_option("--config", config_path, "INI configuration or manifest.json")->required();
  run->add_option("--mode", mode, "Override run.mode")->check(CLI::IsMember({"fine", "multiscale", "study"}));
  run->add_option("--override", overrides, "section.key=value, repeatable");
  run->add_flag("--quiet", quiet, "No progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    cemwave::SimulationConfig cfg = cemwave::load_config_or_manifest(config_path);
    if (!mode.empty()) cemwave::apply_setting(cfg, "run.mode", mode);
    for (const auto& o : overrides) cemwave::apply_override(cfg, o);
    const auto summary = cemwave::run(cfg, quiet ? nullptr : &std::cerr);
    if (!quiet) {
      std::cerr << "wrote " << summary.artifacts.size() << " files to " << summary.directory.string() << '\n';
      if (summary.errors)
        std::cerr << "relative L2 error " << summary.errors->l2 << ", DG error " << summary.errors->dg << '\n';
      if (summary.study) cemwave::write_table_markdown(*summary.study, std::cerr);
    }
    return 0;
  } catch (const cemwave::InputError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const cemwave::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
