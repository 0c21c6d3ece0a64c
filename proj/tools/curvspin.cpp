#include <CLI11.hpp>
#include <iostream>

#include "curvspin/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"curved-surface spin simulator"};
  app.require_subcommand(0, 1);

  std::string config, out, experiment;
  std::uint64_t seed = 0;
  bool si = false;
  app.add_option("--config", config, "config file (key = value, [sections])");
  app.add_option("--out", out, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "random seed");
  app.add_option("--experiment", experiment, "override the configured experiment")
      ->check(CLI::IsMember(curvspin::experiment_names()));
  app.add_flag("--si", si, "convert outputs with the [scale] record");

  auto* cmp = app.add_subcommand("compare", "compare two artifacts of the same experiment");
  std::string a, b;
  double tol = 1e-9;
  cmp->add_option("a", a, "first artifact")->required();
  cmp->add_option("b", b, "second artifact")->required();
  cmp->add_option("--tolerance", tol, "relative tolerance");

  CLI11_PARSE(app, argc, argv);

  if (*cmp) {
    try {
      const auto rep = curvspin::compare_artifacts(a, b, tol);
      std::cout << rep.details.dump(2) << std::endl;
      return rep.passed ? 0 : 1;
    } catch (const std::exception& e) {
      std::cerr << nlohmann::json{{"status", "error"}, {"kind", "compare"}, {"message", e.what()}}.dump()
                << std::endl;
      return 2;
    }
  }

  if (config.empty()) {
    std::cerr << nlohmann::json{{"status", "error"}, {"kind", "usage"}, {"message", "--config is required"}}.dump()
              << std::endl;
    return 2;
  }
  curvspin::RunOptions opt;
  opt.out_dir = out;
  if (*seed_opt) opt.seed = seed;
  if (!experiment.empty()) opt.experiment = experiment;
  opt.si = si;
  return curvspin::run_file(config, opt).exit_code;
}
