#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "pce/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Plane-wave Maxwell band engine"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::string out_dir;
  std::optional<int> threads;
  for (const char* name : {"bands", "groundstate", "projections", "symbol-check", "validate", "oracle", "convergence"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
    sub->add_option("--threads", threads, "worker threads (default: PCE_THREADS, else 1)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : pce::cli::kConfigFailure;
  }
  try {
    pce::cli::RunConfig cfg = pce::cli::load_config(config_path);
    cfg.command = app.get_subcommands().front()->get_name();
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    cfg.threads = pce::cli::resolve_threads(threads);
    return pce::cli::run(cfg, std::cerr);
  } catch (const pce::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return pce::cli::kConfigFailure;
  } catch (const pce::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pce::cli::kNumericalFailure;
  }
}
