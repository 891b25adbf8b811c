// rde <command> --config <file.json> [--out <dir>] [--seed <n>]

#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "rough/experiments.hpp"

int main(int argc, char** argv) {
  namespace ex = rough::experiments;
  CLI::App app{"Level-2 rough differential equations: experiments"};
  app.footer(ex::defaults_table());

  std::string command;
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  app.add_option("command", command, "experiment to run")
      ->required()
      ->check(CLI::IsMember(ex::command_names()));
  auto* config_opt = app.add_option("--config", config_path, "JSON config (all keys optional)");
  auto* out_opt = app.add_option("--out", out_dir, "output directory (default: current directory)");
  auto* seed_opt = app.add_option("--seed", seed, "random seed, overrides the config");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = ex::load_config(command, *config_opt ? std::optional(config_path) : std::nullopt,
                                     *out_opt ? std::optional(out_dir) : std::nullopt,
                                     *seed_opt ? std::optional(seed) : std::nullopt);
    const auto result = ex::run_command(cfg);
    ex::print_result(result, std::cout);
    return result.passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "rde " << command << ": " << e.what() << '\n';
    return 2;
  }
}
