// SPDX-License-Identifier: Apache-2.0
#include "experiments.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct SubcommandArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  CLI::Option* seed_option = nullptr;
  CLI::Option* out_option = nullptr;
};

int execute(const std::string& kind, const SubcommandArgs& args) {
  using namespace pld::cli;
  RunOptions options;
  options.threads = args.threads;
  if (*args.seed_option) options.seed = args.seed;
  if (*args.out_option) options.out_dir = args.out_dir;
  try {
    const Json config = parse_config_text(read_file(args.config_path), args.config_path);
    const auto dir = resolve_output_dir(config, options);
    const auto output = run_experiment(kind, config, options);
    write_outputs(dir, output);
    for (const auto& w : output.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "wrote " << output.files.size() + 1 << " files to " << dir.string() << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power-law dynamics experiments"};
  app.set_version_flag("--version", PLD_VERSION);
  app.require_subcommand(1);

  const auto& kinds = pld::cli::experiment_kinds();
  std::vector<SubcommandArgs> args(kinds.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    auto* sub = app.add_subcommand(kinds[i], "Run the " + kinds[i] + " experiment");
    auto& a = args[i];
    sub->add_option("--config", a.config_path, "JSON config file")->required()->check(
        CLI::ExistingFile);
    a.out_option = sub->add_option("--out", a.out_dir, "Output directory");
    a.seed_option = sub->add_option("--seed", a.seed, "Master seed (overrides the config)");
    sub->add_option("--threads", a.threads, "Worker threads, 0 for all cores")
        ->check(CLI::NonNegativeNumber);
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i]->parsed()) return execute(kinds[i], args[i]);
  }
  return kExitConfig;
}
