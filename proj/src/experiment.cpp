#include "rkhs_dpp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "rkhs_dpp/dpp.hpp"
#include "rkhs_dpp/errors.hpp"
#include "rkhs_dpp/gibbs.hpp"
#include "rkhs_dpp/oracle.hpp"
#include "rkhs_dpp/rng.hpp"
#include "rkhs_dpp/variational.hpp"

namespace rdpp {

namespace {

using nlohmann::json;

constexpr double kMonotoneSlack = 1e-12;
constexpr double kAbTolerance = 1e-10;
constexpr double kSandwichSlack = 1e-10;
constexpr double kNormalizationTolerance = 1e-9;
constexpr std::size_t kEnumerationLimit = 12;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  os << text;
}

void write_trace(const std::filesystem::path& path, const ConvergenceTrace& trace) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  trace.write_csv(os);
}

json trace_json(const ConvergenceTrace& t) {
  json out = json::array();
  for (const TracePoint& p : t.points()) {
    out.push_back({{"window", p.label}, {"n_sites", p.n_sites}, {"value", p.value}});
  }
  return out;
}

/// Relative slack for a trace: kMonotoneSlack times its largest magnitude.
double slack_for(const ConvergenceTrace& t) {
  double m = 0.0;
  for (const TracePoint& p : t.points()) m = std::max(m, std::abs(p.value));
  return kMonotoneSlack * std::max(m, 1.0);
}

CheckResult monotone_check(const std::string& name, const ConvergenceTrace& t, Monotone dir) {
  const double worst = t.worst_step_against(dir);
  return {name, worst <= slack_for(t), "worst step against " + to_string(dir) + ": " +
                                           format_double(worst)};
}

CheckResult bound_check(const std::string& name, double value, double limit, bool upper) {
  const bool ok = upper ? value <= limit : value >= limit;
  return {name, ok, format_double(value) + (upper ? " <= " : " >= ") + format_double(limit)};
}

json checks_json(const std::vector<CheckResult>& checks) {
  json out = json::array();
  for (const CheckResult& c : checks) {
    out.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  return out;
}

SitePredicate complement_rule(const SiteRule& rule, SiteIndex x0) {
  return [rule, x0](SiteIndex s) { return s != x0 && !rule(s); };
}

void run_variational(const ExperimentConfig& cfg, RunResult& r) {
  const auto windows = cfg.windows();
  const SitePredicate r1 = cfg.rule.predicate();
  const SitePredicate r2 = complement_rule(cfg.rule, cfg.x0);
  const LimitCheck limit = alpha_beta_limit_check(cfg.spec, cfg.x0, r1, windows, cfg.ambient_factor);
  const ConvergenceTrace beta_fixed =
      beta_trace(cfg.spec, cfg.x0, r2, windows, cfg.ambient_factor, AmbientMode::Fixed);

  const Window& last = windows.back();
  const KernelMatrix c = materialize(cfg.spec, last);
  const TriplePartition part{cfg.x0, last.filter(r1), last.filter(r2)};
  const double ab = verify_ab(c, part);
  const double leak = a2_support_leak(cfg.spec, cfg.x0, r1, last, cfg.ambient_factor);

  write_trace(cfg.output / "trace.csv", limit.alpha);
  write_trace(cfg.output / "beta_trace.csv", limit.beta);

  r.checks.push_back(monotone_check("alpha_nonincreasing", limit.alpha, Monotone::Decreasing));
  r.checks.push_back(
      monotone_check("beta_fixed_ambient_nonincreasing", beta_fixed, Monotone::Decreasing));
  r.checks.push_back(bound_check("ab_equals_one_matched", ab, kAbTolerance, true));

  r.summary["residuals"] = {{"alpha_beta_product", limit.residual}, {"ab_matched", ab}};
  r.summary["final"] = {{"alpha", limit.alpha.final_value()}, {"beta", limit.beta.final_value()}};
  r.summary["converged"] = {{"alpha", limit.alpha.converged()}, {"beta", limit.beta.converged()}};
  r.summary["monotonicity"] = {{"alpha", to_string(limit.alpha.direction())},
                               {"beta", to_string(limit.beta.direction())},
                               {"beta_fixed_ambient", to_string(beta_fixed.direction())}};
  r.summary["diagnostics"] = {{"a2_support_leak", leak}};
  r.summary["traces"] = {{"alpha", trace_json(limit.alpha)}, {"beta", trace_json(limit.beta)}};
}

void run_papangelou(const ExperimentConfig& cfg, RunResult& r) {
  const auto windows = cfg.windows();
  const PapangelouStudy study =
      papangelou_trace(cfg.spec, cfg.x0, cfg.rule.predicate(), windows, cfg.ambient_factor);
  const ConvergenceTrace gap = study.gap();
  write_trace(cfg.output / "trace.csv", study.papangelou);
  write_trace(cfg.output / "alpha_trace.csv", study.alpha);
  write_trace(cfg.output / "gap_trace.csv", gap);

  r.checks.push_back(monotone_check("alpha_nonincreasing", study.alpha, Monotone::Decreasing));
  r.checks.push_back(
      bound_check("papangelou_below_alpha", study.worst_alpha_sandwich(), -kSandwichSlack, false));
  r.checks.push_back(
      bound_check("beta_bracket_below_beta", study.worst_beta_sandwich(), -kSandwichSlack, false));

  r.summary["residuals"] = {{"final_gap", gap.final_value()}};
  r.summary["final"] = {{"papangelou", study.papangelou.final_value()},
                        {"alpha", study.alpha.final_value()}};
  r.summary["monotonicity"] = {{"papangelou", to_string(study.papangelou.direction())},
                               {"alpha", to_string(study.alpha.direction())},
                               {"gap", to_string(gap.direction())}};
  r.summary["traces"] = {{"papangelou", trace_json(study.papangelou)},
                         {"alpha", trace_json(study.alpha)},
                         {"beta_bracket", trace_json(study.beta_bracket)},
                         {"beta", trace_json(study.beta)}};
}

void run_dlr(const ExperimentConfig& cfg, RunResult& r) {
  const auto windows = cfg.windows();
  const Window& last = windows.back();
  const Configuration xi(last.filter(cfg.rule.predicate()));

  std::vector<DlrReport> reports(windows.size());
  parallel_for(windows.size(), thread_cap(), [&](std::size_t i) {
    reports[i] = dlr_residual(cfg.spec, cfg.x0, xi, windows[i], cfg.ambient_factor);
  });

  ConvergenceTrace residuals;
  json rows = json::array();
  for (const DlrReport& d : reports) {
    residuals.push(d.window.label(), d.window.size(), d.residual);
    rows.push_back({{"window", d.window.label()},
                    {"ambient", d.ambient.label()},
                    {"x0", d.x0},
                    {"xi_rule", cfg.rule.describe()},
                    {"papangelou", d.papangelou},
                    {"boltzmann", d.boltzmann},
                    {"residual", d.residual}});
  }
  write_text(cfg.output / "dlr.json", rows.dump(2) + "\n");
  write_trace(cfg.output / "trace.csv", residuals);

  // Energy of {x0} with the boundary read on growing ambients.
  const BoundaryCondition bc{xi, Window({cfg.x0})};
  const ConvergenceTrace h = energy(cfg.spec, Configuration(Window({cfg.x0})), bc, windows);
  write_trace(cfg.output / "energy_trace.csv", h);
  r.checks.push_back(monotone_check("energy_nondecreasing_in_ambient", h, Monotone::Increasing));

  // Normalization and Papangelou consistency on the largest window the
  // enumeration can afford.
  std::size_t pick = 0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i].size() <= kEnumerationLimit) pick = i;
  }
  const Window& small = windows[pick];
  if (small.size() <= kEnumerationLimit) {
    const DppWindowModel model = build_model(cfg.spec, small, cfg.ambient_factor);
    double total = 0.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << small.size()); ++mask) {
      total += marginal(model, from_bitmask(small, mask));
    }
    r.checks.push_back(
        bound_check("marginals_normalized", std::abs(total - 1.0), kNormalizationTolerance, true));
    const Configuration xs(set_intersection(xi, small));
    const double lhs = marginal(model, Configuration(xs.with(cfg.x0)));
    const double rhs = papangelou(model, cfg.x0, xs) * marginal(model, xs);
    r.checks.push_back(bound_check("papangelou_consistency",
                                   std::abs(lhs - rhs) / std::max(lhs, 1e-300), 1e-10, true));
  }

  r.summary["residuals"] = {{"final", residuals.final_value()}};
  r.summary["monotonicity"] = {{"residual", to_string(residuals.direction())},
                               {"energy", to_string(h.direction())}};
  r.summary["energy"] = {{"final", h.final_value()}, {"last_increment", h.last_increment()}};
  r.summary["dlr"] = rows;
}

void run_sample(const ExperimentConfig& cfg, RunResult& r) {
  const Window window = cfg.windows().back();
  const DppWindowModel model = build_model(cfg.spec, window, cfg.ambient_factor);
  SplitMix64 seeds(cfg.seed);
  std::string lines;
  double mean_count = 0.0;
  bool inside = true;
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    const std::uint64_t s = seeds.next();
    const Configuration draw = sample(model, s);
    inside = inside && draw.is_subset_of(window);
    mean_count += static_cast<double>(draw.size());
    lines += json({{"seed", s}, {"sites", draw.site_vector()}}).dump() + "\n";
  }
  write_text(cfg.output / "samples.jsonl", lines);
  mean_count /= static_cast<double>(std::max<std::size_t>(cfg.samples, 1));

  r.checks.push_back({"samples_inside_window", inside, window.label()});
  json residuals = {{"expected_count", model.k_matrix().trace()}, {"mean_count", mean_count}};
  if (window.size() <= kEnumerationLimit) {
    const oracle::ExactDistribution dist = oracle::enumerate_distribution(model);
    std::ofstream os(cfg.output / "distribution.csv", std::ios::binary);
    dist.write_csv(os);
    double worst = 0.0;
    for (std::uint64_t mask = 0; mask < dist.probs().size(); ++mask) {
      worst = std::max(worst, std::abs(dist.probs()[mask] - marginal(model, from_bitmask(window, mask))));
    }
    residuals["oracle_marginal_max_diff"] = worst;
    r.checks.push_back(bound_check("oracle_matches_marginal", worst, kNormalizationTolerance, true));
  }
  r.summary["residuals"] = residuals;
}

void run_verify(const ExperimentConfig& cfg, RunResult& r) {
  const HypothesisReport rep = verify_hypothesis(cfg.spec, cfg.x0, cfg.windows());
  write_trace(cfg.output / "trace.csv", rep.trace);
  r.checks.push_back(monotone_check("inverse_entry_nondecreasing", rep.trace, Monotone::Increasing));
  r.summary["verdict"] = to_string(rep.verdict);
  r.summary["monotonicity"] = {{"inverse_entry", to_string(rep.trace.direction())}};
  r.summary["residuals"] = {{"last_increment", rep.trace.last_increment()}};
  r.summary["traces"] = {{"inverse_entry", trace_json(rep.trace)}};
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Variational: return "variational";
    case ExperimentKind::Papangelou: return "papangelou";
    case ExperimentKind::Dlr: return "dlr";
    case ExperimentKind::Sample: return "sample";
    case ExperimentKind::Verify: return "verify";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (ExperimentKind k : {ExperimentKind::Variational, ExperimentKind::Papangelou,
                           ExperimentKind::Dlr, ExperimentKind::Sample, ExperimentKind::Verify}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorKind::ConfigParse, "unknown experiment '" + name + "'");
}

std::vector<Window> ExperimentConfig::windows() const {
  return symmetric_schedule(schedule.n_start, schedule.n_max, schedule.growth, schedule.step);
}

json ExperimentConfig::to_json() const {
  return {{"experiment", rdpp::to_string(experiment)},
          {"spec", rdpp::to_json(spec)},
          {"x0", x0},
          {"rule", rule.to_json()},
          {"schedule",
           {{"n_start", schedule.n_start},
            {"n_max", schedule.n_max},
            {"growth", schedule.growth == Growth::Doubling ? "doubling" : "linear"},
            {"step", schedule.step}}},
          {"ambient_factor", ambient_factor},
          {"seed", seed},
          {"samples", samples},
          {"output", output.string()}};
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  try {
    if (!j.is_object()) throw Error(ErrorKind::ConfigParse, "config must be a JSON object");
    cfg.experiment = experiment_kind_from_string(j.at("experiment").get<std::string>());
    cfg.spec = spec_from_json(j.at("spec"));
    cfg.x0 = get_or<SiteIndex>(j, "x0", 0);
    if (j.contains("xi_rule")) {
      cfg.rule = SiteRule::from_json(j.at("xi_rule"));
    } else if (j.contains("partition")) {
      cfg.rule = SiteRule::from_json(j.at("partition").at("r1"));
    }
    if (j.contains("schedule")) {
      const json& s = j.at("schedule");
      cfg.schedule.n_start = get_or<SiteIndex>(s, "n_start", 0);
      cfg.schedule.n_max = get_or<SiteIndex>(s, "n_max", 8);
      cfg.schedule.step = get_or<SiteIndex>(s, "step", 1);
      const std::string growth = get_or<std::string>(s, "growth", "doubling");
      if (growth == "doubling") {
        cfg.schedule.growth = Growth::Doubling;
      } else if (growth == "linear") {
        cfg.schedule.growth = Growth::Linear;
      } else {
        throw Error(ErrorKind::ConfigParse, "growth must be doubling or linear");
      }
    }
    cfg.ambient_factor = get_or<int>(j, "ambient_factor", 4);
    cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
    cfg.samples = get_or<std::size_t>(j, "samples", 1000);
    cfg.output = get_or<std::string>(j, "output", "out");
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigParse) throw;
    throw Error(ErrorKind::ConfigParse, e.what());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigParse, e.what());
  }

  if (cfg.ambient_factor < 1) throw Error(ErrorKind::ConfigParse, "ambient_factor must be >= 1");
  if (cfg.schedule.n_start < 0 || cfg.schedule.n_max < cfg.schedule.n_start ||
      cfg.schedule.step < 1) {
    throw Error(ErrorKind::ConfigParse, "schedule needs 0 <= n_start <= n_max and step >= 1");
  }
  const auto windows = cfg.windows();
  if (windows.empty()) throw Error(ErrorKind::ConfigParse, "schedule is empty");
  if (!windows.back().contains(cfg.x0)) {
    throw Error(ErrorKind::ConfigParse, "x0 lies outside the largest window");
  }
  if (!windows.front().contains(cfg.x0)) {
    throw Error(ErrorKind::ConfigParse, "x0 lies outside the first window");
  }
  const bool uses_rule = cfg.experiment == ExperimentKind::Variational ||
                         cfg.experiment == ExperimentKind::Papangelou ||
                         cfg.experiment == ExperimentKind::Dlr;
  if (uses_rule && cfg.rule(cfg.x0)) {
    throw Error(ErrorKind::ConfigParse, "the site rule must exclude x0");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::ConfigParse, "cannot open " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigParse, path.string() + ": " + e.what());
  }
  return parse_config(j);
}

bool RunResult::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

int RunResult::exit_code() const { return all_passed() ? 0 : 2; }

std::vector<std::string> RunResult::failed_names() const {
  std::vector<std::string> out;
  for (const CheckResult& c : checks) {
    if (!c.passed) out.push_back(c.name);
  }
  return out;
}

RunResult run(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(config.output);
  RunResult r;
  r.summary["experiment"] = to_string(config.experiment);
  r.summary["config"] = config.to_json();
  r.summary["rng"] = {{"algorithm", SplitMix64::kName}, {"seed", config.seed}};
  switch (config.experiment) {
    case ExperimentKind::Variational: run_variational(config, r); break;
    case ExperimentKind::Papangelou: run_papangelou(config, r); break;
    case ExperimentKind::Dlr: run_dlr(config, r); break;
    case ExperimentKind::Sample: run_sample(config, r); break;
    case ExperimentKind::Verify: run_verify(config, r); break;
  }
  r.summary["checks"] = checks_json(r.checks);
  r.summary["passed"] = r.all_passed();
  r.summary["runtime_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text(config.output / "summary.json", r.summary.dump(2) + "\n");
  return r;
}

std::string to_string(HypothesisVerdict v) {
  switch (v) {
    case HypothesisVerdict::Bounded: return "bounded";
    case HypothesisVerdict::Diverging: return "diverging";
    case HypothesisVerdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

HypothesisVerdict classify_growth(const ConvergenceTrace& t) {
  const std::size_t n = t.size();
  if (n < 3) return HypothesisVerdict::Inconclusive;
  auto inc = [&t](std::size_t i) { return t.value(i) - t.value(i - 1); };
  auto rel = [&t, &inc](std::size_t i) {
    return std::abs(inc(i)) / std::max(1.0, std::abs(t.value(i)));
  };
  if (rel(n - 1) < 1e-8 && rel(n - 2) < 1e-8) return HypothesisVerdict::Bounded;
  if (n >= 4) {
    const double d1 = inc(n - 3);
    const double d2 = inc(n - 2);
    const double d3 = inc(n - 1);
    if (d1 > 0.0 && d2 >= 0.9 * d1 && d3 >= 0.9 * d2) return HypothesisVerdict::Diverging;
  }
  return HypothesisVerdict::Inconclusive;
}

HypothesisReport verify_hypothesis(const OperatorSpec& spec, SiteIndex y,
                                   const std::vector<Window>& schedule) {
  const InverseTrace inv = approx_B(spec, Window({y}), schedule);
  HypothesisReport rep;
  for (std::size_t i = 0; i < inv.blocks.size(); ++i) {
    rep.trace.push(inv.ambients[i].label(), inv.ambients[i].size(), inv.blocks[i].at(y, y));
  }
  rep.verdict = classify_growth(rep.trace);
  return rep;
}

unsigned thread_cap() {
  unsigned cap = std::max(1U, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RKHS_DPP_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) cap = static_cast<unsigned>(v);
  }
  return cap;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1U, threads), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace rdpp
