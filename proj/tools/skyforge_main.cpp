#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "skyforge/commands.hpp"

namespace {

void add_search_flags(CLI::App& cmd, skyforge::CommandOptions& o) {
  auto& ov = o.overrides;
  cmd.add_option("--config", o.config, "Run configuration (JSON)")->required();
  cmd.add_option("--epsilon", ov.epsilon, "Approximation factor");
  cmd.add_option("--max-length", ov.max_length, "Longest operator path");
  cmd.add_option("--budget", ov.budget, "Estimator invocations");
  cmd.add_option("--k", ov.k, "Size of the diversified set");
  cmd.add_option("--alpha", ov.alpha, "Diversity weight of bitmap dissimilarity");
  cmd.add_option("--theta", ov.theta, "Correlation threshold");
  cmd.add_option("--algorithm", ov.algorithm, "apx, bi, nobi or div")
      ->check(CLI::IsMember({"apx", "bi", "nobi", "div"}));
  cmd.add_option("--workers", ov.workers, "Concurrent valuations");
  cmd.add_option("--output-dir", ov.output_dir, "Where results are written");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate skyline datasets for a data-driven model"};
  app.require_subcommand(1);

  skyforge::CommandOptions run_opts, verify_opts;
  auto* run = app.add_subcommand("run", "Search for an approximate skyline set");
  add_search_flags(*run, run_opts);
  auto* verify = app.add_subcommand("verify", "Check a run against exhaustive enumeration");
  add_search_flags(*verify, verify_opts);
  verify->add_flag("--corrupt-grid", verify_opts.corrupt_grid)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : skyforge::kExitInvalidConfig;
  }

  // A command-line output directory is relative to where the tool runs,
  // not to the configuration file.
  for (auto* o : {&run_opts, &verify_opts})
    if (o->overrides.output_dir)
      o->overrides.output_dir = std::filesystem::absolute(*o->overrides.output_dir).string();

  if (run->parsed()) return skyforge::run_command(run_opts, std::cout, std::cerr);
  return skyforge::verify_command(verify_opts, std::cout, std::cerr);
}
