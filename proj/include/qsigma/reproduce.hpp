#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qsigma/experiment.hpp"

namespace qsigma {

/// A checked-in experiment: a base configuration plus labelled variants.
struct ReproductionPlan {
  std::string name;
  std::string description;
  std::vector<ExperimentConfig> variants;

  const ExperimentConfig& variant(std::string_view label) const;
};

/// Plan file format: {"name", "description", "base": {...}, "variants": [{...}]}
/// where each variant is merged over `base` and must carry a unique label.
ReproductionPlan load_plan(const std::filesystem::path& path);

const std::vector<std::string>& reproduction_names();
std::filesystem::path default_config_dir();
std::filesystem::path plan_path(std::string_view name,
                                const std::filesystem::path& config_dir = default_config_dir());

struct CheckResult {
  std::string id;
  std::string description;
  bool passed = false;
  std::string detail;
};

struct VariantResult {
  ExperimentConfig config;
  /// Present for plain runs; sweeps keep only per-alpha summaries.
  std::optional<RunStatistics> stats;
  std::vector<AlphaSummary> sweep;

  /// Highest mean across the sweep.
  const AlphaSummary& best() const;
};

struct ReproductionReport {
  std::string name;
  std::vector<VariantResult> variants;
  std::vector<CheckResult> checks;

  bool passed() const;
  const VariantResult& variant(std::string_view label) const;
  std::string summary_table() const;
};

struct ReproduceOptions {
  RunOptions run;
  std::optional<std::size_t> runs;
  std::optional<std::uint64_t> seed;
  /// Restrict to these labels (empty = all variants).
  std::vector<std::string> labels;
  /// When set, one CSV per variant is written here.
  std::optional<std::filesystem::path> out_dir;
};

/// Runs every variant of `plan` and evaluates the acceptance checks that
/// belong to it (by plan name: randomwalk, windygrid, mountaincliff).
ReproductionReport reproduce(const ReproductionPlan& plan, const ReproduceOptions& options = {});

/// The acceptance checks alone, on already computed variants.
std::vector<CheckResult> evaluate_checks(const ReproductionReport& report);

/// File-name-safe version of a variant label.
std::string csv_file_name(std::string_view label);

}  // namespace qsigma
