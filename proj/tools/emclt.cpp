#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "emclt/cli.hpp"
#include "emclt/presets.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Euler-Maruyama fluctuation experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", emclt::cli::code_version());

  auto* run = app.add_subcommand("run", "Run one experiment from a JSON config or manifest");
  std::string config;
  std::string positional;
  emclt::cli::RunOptions opts;
  std::size_t threads = 0;
  std::uint64_t seed = 0;
  std::string out;
  run->add_option("--config", config, "Config or manifest file");
  run->add_option("config_file", positional, "Config or manifest file (positional form)");
  run->add_flag("--check", opts.check, "Exit 2 when an acceptance threshold is violated");
  auto* threads_opt =
      run->add_option("--threads", threads, "Worker cap (default: EMCLT_THREADS or all cores)")
          ->check(CLI::PositiveNumber);
  auto* seed_opt = run->add_option("--seed", seed, "Master seed, overrides the config");
  auto* out_opt = run->add_option("--out", out, "Output directory, overrides the config");

  app.add_subcommand("list-presets", "List drift and diffusion presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (app.got_subcommand("list-presets")) {
    std::cout << emclt::list_presets();
    return 0;
  }
  if (config.empty()) config = positional;
  if (config.empty()) {
    std::cerr << "emclt: run needs --config <path>\n";
    return 1;
  }
  if (*threads_opt) opts.threads = threads;
  if (*seed_opt) opts.seed = seed;
  if (*out_opt) opts.out = out;
  return emclt::cli::run(config, opts, std::cout, std::cerr);
}
