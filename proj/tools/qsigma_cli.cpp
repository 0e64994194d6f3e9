// qsigma: command-line harness for the Q(sigma) experiments.
//
//   qsigma run <config>        one experiment, per-episode CSV
//   qsigma sweep <config>      step-size sweep, one CSV row per alpha
//   qsigma list-envs
//   qsigma list-algorithms
//   qsigma reproduce <name>    randomwalk | windygrid | mountaincliff
//
// Exit codes: 0 ok, 1 usage, 2 config error, 3 acceptance check failed.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qsigma/experiment.hpp"
#include "qsigma/reproduce.hpp"

namespace fs = std::filesystem;
using namespace qsigma;

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kCheckFailed = 3, kRuntime = 4 };

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<std::string> out;
  std::size_t parallel = 0;
};

void apply_overrides(ExperimentConfig& c, const Common& opt) {
  if (opt.seed) c.seed = *opt.seed;
  if (opt.runs) c.runs = *opt.runs;
  c.validate();
}

std::optional<fs::path> output_path(const ExperimentConfig& c, const Common& opt,
                                    const fs::path& config_file) {
  if (opt.out) return fs::path(*opt.out);
  if (c.output.empty()) return std::nullopt;
  const fs::path p(c.output);
  return p.is_absolute() ? p : config_file.parent_path() / p;
}

int cmd_run(const fs::path& file, const Common& opt) {
  ExperimentConfig c = load_config(file);
  apply_overrides(c, opt);
  if (!c.alphas.empty())
    std::cerr << "note: 'alphas' is ignored by run; use sweep\n";
  const RunStatistics stats = run_experiment(c, RunOptions{opt.parallel});
  if (const auto out = output_path(c, opt, file)) {
    emit_csv(stats, *out);
    std::cerr << "wrote " << out->string() << '\n';
  } else {
    std::cout << format_csv(stats);
  }
  return kOk;
}

int cmd_sweep(const fs::path& file, const Common& opt) {
  ExperimentConfig c = load_config(file);
  apply_overrides(c, opt);
  if (c.alphas.empty()) throw ConfigError(file.string() + ": sweep needs an 'alphas' list");
  const auto sweep = sweep_alpha(c, c.alphas, RunOptions{opt.parallel});
  if (const auto out = output_path(c, opt, file)) {
    emit_sweep_csv(sweep, *out);
    std::cerr << "wrote " << out->string() << '\n';
  } else {
    std::cout << format_sweep_csv(sweep);
  }
  return kOk;
}

int cmd_reproduce(const std::string& name, const Common& opt, const std::string& config_dir) {
  const fs::path dir = config_dir.empty() ? default_config_dir() : fs::path(config_dir);
  const fs::path file = plan_path(name, dir);
  if (!fs::exists(file)) throw ConfigError("missing reproduction config '" + file.string() + "'");
  const ReproductionPlan plan = load_plan(file);

  ReproduceOptions ro;
  ro.run.workers = opt.parallel;
  ro.seed = opt.seed;
  ro.runs = opt.runs;
  ro.out_dir = opt.out ? fs::path(*opt.out) : fs::path("results") / name;

  const auto start = std::chrono::steady_clock::now();
  const ReproductionReport report = reproduce(plan, ro);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::cout << plan.name << ": " << plan.description << '\n' << report.summary_table();
  for (const CheckResult& c : report.checks)
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.id << "  " << c.description << "  ["
              << c.detail << "]\n";
  std::printf("%zu variants in %.1f s, CSV files in %s\n", report.variants.size(), secs,
              ro.out_dir->string().c_str());
  return report.passed() ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-step Q(sigma) experiments"};
  app.require_subcommand(1);

  Common opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", opt.seed, "Base seed; run i uses seed + i");
    sub->add_option("--runs", opt.runs, "Override the number of runs")->check(CLI::PositiveNumber);
    sub->add_option("--out", opt.out, "Output CSV file (run, sweep) or directory (reproduce)");
    sub->add_option("--parallel", opt.parallel, "Worker threads (0 = all cores)");
  };

  std::string config;
  auto* run = app.add_subcommand("run", "Run one experiment and write its per-episode CSV");
  run->add_option("config", config, "Experiment config file")->required();
  add_common(run);

  auto* sweep = app.add_subcommand("sweep", "Sweep the step sizes listed under 'alphas'");
  sweep->add_option("config", config, "Experiment config file")->required();
  add_common(sweep);

  app.add_subcommand("list-envs", "Print the environment names");
  app.add_subcommand("list-algorithms", "Print the algorithm names");

  std::string name, config_dir;
  auto* repro = app.add_subcommand("reproduce", "Run a checked-in experiment and check it");
  repro->add_option("name", name, "randomwalk | windygrid | mountaincliff")
      ->required()
      ->check(CLI::IsMember(reproduction_names()));
  repro->add_option("--config-dir", config_dir, "Directory holding reproduce_<name>.json");
  add_common(repro);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (app.got_subcommand("list-envs")) {
      for (const auto& e : environment_names()) std::cout << e << '\n';
      return kOk;
    }
    if (app.got_subcommand("list-algorithms")) {
      for (Algorithm a : all_algorithms()) std::cout << algorithm_name(a) << '\n';
      return kOk;
    }
    if (app.got_subcommand(run)) return cmd_run(config, opt);
    if (app.got_subcommand(sweep)) return cmd_sweep(config, opt);
    if (app.got_subcommand(repro)) return cmd_reproduce(name, opt, config_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ContractViolation& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
