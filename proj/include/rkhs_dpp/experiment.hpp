#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rkhs_dpp/operator_spec.hpp"
#include "rkhs_dpp/trace.hpp"
#include "rkhs_dpp/window.hpp"

namespace rdpp {

enum class ExperimentKind { Variational, Papangelou, Dlr, Sample, Verify };

std::string to_string(ExperimentKind k);
/// Throws ConfigParse for unknown names.
ExperimentKind experiment_kind_from_string(const std::string& name);

struct ScheduleParams {
  SiteIndex n_start = 0;
  SiteIndex n_max = 8;
  Growth growth = Growth::Doubling;
  SiteIndex step = 1;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Variational;
  OperatorSpec spec = OperatorSpec::identity();
  SiteIndex x0 = 0;
  /// R1 for variational runs, xi for papangelou and dlr runs.
  SiteRule rule = SiteRule::positive();
  ScheduleParams schedule;
  int ambient_factor = 4;
  std::uint64_t seed = 0;
  std::size_t samples = 1000;
  std::filesystem::path output = "out";

  std::vector<Window> windows() const;
  nlohmann::json to_json() const;
};

/// Parses and validates (nonempty schedule, ambient_factor >= 1, x0 outside the
/// rule and inside the largest window). All failures raise ConfigParse.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunResult {
  nlohmann::json summary;
  std::vector<CheckResult> checks;

  bool all_passed() const;
  /// 0 if every check passed, 2 otherwise.
  int exit_code() const;
  std::vector<std::string> failed_names() const;
};

/// Runs the experiment, writes its artifacts under config.output, and returns
/// the named hard checks.
RunResult run(const ExperimentConfig& config);

enum class HypothesisVerdict { Bounded, Diverging, Inconclusive };
std::string to_string(HypothesisVerdict v);

struct HypothesisReport {
  ConvergenceTrace trace;
  HypothesisVerdict verdict = HypothesisVerdict::Inconclusive;
};

/// Bounded: the last two increments are below 1e-8 relative. Diverging: at
/// least three increments and the last two ratios of successive increments
/// are >= 0.9. Otherwise inconclusive.
HypothesisVerdict classify_growth(const ConvergenceTrace& trace);

/// e_y^T (A_Delta)^{-1} e_y over the schedule.
HypothesisReport verify_hypothesis(const OperatorSpec& spec, SiteIndex y,
                                   const std::vector<Window>& schedule);

/// Thread cap from RKHS_DPP_THREADS (default: hardware concurrency, at least 1).
unsigned thread_cap();

/// Calls fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace rdpp
