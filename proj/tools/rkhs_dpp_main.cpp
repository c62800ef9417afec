#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rkhs_dpp/errors.hpp"
#include "rkhs_dpp/experiment.hpp"

namespace {

constexpr int kExitError = 1;

int run_command(rdpp::ExperimentKind kind, const std::string& config_path,
                const std::optional<std::string>& out, const std::optional<std::uint64_t>& seed) {
  rdpp::ExperimentConfig cfg = rdpp::load_config(config_path);
  if (cfg.experiment != kind) {
    std::cerr << "note: config declares '" << rdpp::to_string(cfg.experiment) << "', running '"
              << rdpp::to_string(kind) << "'\n";
    cfg.experiment = kind;
  }
  if (out) cfg.output = *out;
  if (seed) cfg.seed = *seed;

  const rdpp::RunResult result = rdpp::run(cfg);
  for (const rdpp::CheckResult& c : result.checks) {
    std::cout << (c.passed ? "ok   " : "FAIL ") << c.name << "  " << c.detail << '\n';
  }
  std::cout << "wrote " << (cfg.output / "summary.json").string() << '\n';
  for (const std::string& name : result.failed_names()) {
    std::cerr << "InvariantViolation: " << name << '\n';
  }
  return result.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rkhs-dpp: finite-window experiments for determinantal point processes"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<rdpp::ExperimentKind> chosen;

  for (const char* name : {"variational", "papangelou", "dlr", "sample", "verify"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run a ") + name + " experiment");
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out, "output directory (overrides config)");
    sub->add_option("--seed", seed, "64-bit seed (overrides config)");
    sub->callback([&chosen, name] { chosen = rdpp::experiment_kind_from_string(name); });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    return run_command(*chosen, config_path, out, seed);
  } catch (const rdpp::Error& e) {
    std::cerr << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
}
