#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsigma/agent.hpp"
#include "qsigma/environments.hpp"

namespace qsigma {

enum class Measurement { rms_per_episode, return_per_episode };

/// Constant sigma, or initial * decay^episode when `decay` is set.
struct SigmaSpec {
  double initial = 1.0;
  std::optional<double> decay;

  SigmaSchedule schedule() const;
  std::string describe() const;
};

/// Declarative description of one multi-run experiment. The JSON schema is
/// documented in docs/config.md.
struct ExperimentConfig {
  std::string label;
  std::string environment;
  Algorithm algorithm = Algorithm::q_sigma;
  std::size_t n = 1;
  double alpha = 0.1;
  double gamma = 1.0;
  Policy::Kind policy = Policy::Kind::epsilon_greedy;
  double epsilon = 0.1;
  SigmaSpec sigma;
  std::size_t episodes = 100;
  std::size_t runs = 100;
  std::uint64_t seed = 0;
  Measurement measurement = Measurement::return_per_episode;
  std::vector<double> alphas;
  std::size_t moving_average_window = 30;
  std::optional<std::size_t> step_cap;
  std::string output;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
/// Reads and validates a config file. Throws ConfigError (including for a
/// missing or unreadable file, with the path in the message).
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json load_json_file(const std::filesystem::path& path);

/// Per-episode measurements of every run, row-major (runs x episodes).
class RunStatistics {
 public:
  RunStatistics(std::size_t runs, std::size_t episodes, std::size_t window = 30);

  std::size_t runs() const { return runs_; }
  std::size_t episodes() const { return episodes_; }
  std::size_t window() const { return window_; }

  double& at(std::size_t run, std::size_t episode) { return values_[run * episodes_ + episode]; }
  double at(std::size_t run, std::size_t episode) const {
    return values_[run * episodes_ + episode];
  }
  const std::vector<double>& values() const { return values_; }

  std::vector<double> mean() const;
  /// Sample standard deviation across runs divided by sqrt(runs).
  std::vector<double> standard_error() const;
  /// Right-aligned moving average of the mean curve: episode e averages
  /// episodes max(0, e - window + 1) .. e.
  std::vector<double> moving_average() const;

  /// Per-run mean over episodes [first, last) (0-based).
  std::vector<double> run_averages(std::size_t first, std::size_t last) const;

  friend bool operator==(const RunStatistics&, const RunStatistics&) = default;

 private:
  std::size_t runs_;
  std::size_t episodes_;
  std::size_t window_;
  std::vector<double> values_;
};

/// Mean and standard error of a sample.
struct Summary {
  double mean = 0.0;
  double std_error = 0.0;
};
Summary summarize(const std::vector<double>& sample);
/// Summary across runs of each run's average over episodes [first, last).
Summary summarize_episodes(const RunStatistics& stats, std::size_t first, std::size_t last);

struct RunOptions {
  /// 0 selects the hardware concurrency.
  std::size_t workers = 0;
};

/// Runs config.runs independent runs (run i seeded with seed + i) and
/// collects the configured measurement after every episode. The result does
/// not depend on the number of workers.
RunStatistics run_experiment(const ExperimentConfig& config, RunOptions options = {});

/// One run on its own; `run_index` selects the seed offset.
std::vector<double> run_single(const ExperimentConfig& config, std::size_t run_index);

struct AlphaSummary {
  double alpha = 0.0;
  Summary summary;
  /// Some run produced a non-finite value; summary is NaN.
  bool diverged = false;
};

/// For every alpha, the mean over runs of the per-run average measurement
/// across all episodes. A step size whose runs diverge is reported as such
/// instead of aborting the sweep.
std::vector<AlphaSummary> sweep_alpha(const ExperimentConfig& config,
                                      const std::vector<double>& alphas, RunOptions options = {});

/// Writes `episode,mean,stderr,moving_avg` rows (episode is 1-based).
void emit_csv(const RunStatistics& stats, const std::filesystem::path& path);
std::string format_csv(const RunStatistics& stats);
void emit_sweep_csv(const std::vector<AlphaSummary>& sweep, const std::filesystem::path& path);
std::string format_sweep_csv(const std::vector<AlphaSummary>& sweep);

/// Builds the environment's action-value representation and the agent for
/// `config` (tabular table or tile-coded linear weights).
QSigmaAgent make_agent(const ExperimentConfig& config, const Environment& env);

}  // namespace qsigma
