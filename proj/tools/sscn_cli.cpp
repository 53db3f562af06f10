#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sscn/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Stochastic subspace cubic Newton: experiments and verification suites"};
  app.set_version_flag("--version", sscn::version_string());
  app.require_subcommand(1);

  std::string run_config;
  std::string run_output;
  auto* run = app.add_subcommand("run", "run every (algorithm x seed) pair of a config");
  run->add_option("--config", run_config, "experiment JSON")->required();
  run->add_option("--output", run_output, "override output_dir");

  std::string suite;
  std::string verify_config;
  auto* verify = app.add_subcommand("verify", "run a property suite: bounds, solvers, projection, rates");
  verify->add_option("suite", suite, "suite name")->required();
  verify->add_option("--config", verify_config, "experiment JSON supplying the instance");

  std::string ref_config;
  auto* reference = app.add_subcommand("reference", "compute and cache F* and x*");
  reference->add_option("--config", ref_config, "experiment JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : sscn::kExitConfig;
  }

  if (*run) {
    std::optional<std::string> out_dir;
    if (!run_output.empty()) out_dir = run_output;
    return sscn::cmd_run(run_config, out_dir, std::cout, std::cerr);
  }
  if (*verify) {
    std::optional<std::string> cfg;
    if (!verify_config.empty()) cfg = verify_config;
    return sscn::cmd_verify(suite, cfg, std::cout, std::cerr);
  }
  return sscn::cmd_reference(ref_config, std::cout, std::cerr);
}
