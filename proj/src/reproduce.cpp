#include "qsigma/reproduce.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace qsigma {

using nlohmann::json;

const ExperimentConfig& ReproductionPlan::variant(std::string_view label) const {
  for (const auto& v : variants)
    if (v.label == label) return v;
  throw ConfigError("plan '" + name + "' has no variant '" + std::string(label) + "'");
}

ReproductionPlan load_plan(const std::filesystem::path& path) {
  const json j = load_json_file(path);
  const std::string where = path.string() + ": ";
  if (!j.is_object()) throw ConfigError(where + "plan must be a JSON object");

  ReproductionPlan plan;
  json base = json::object();
  json variants;
  for (const auto& [key, v] : j.items()) {
    if (key == "name" && v.is_string()) {
      plan.name = v.get<std::string>();
    } else if (key == "description" && v.is_string()) {
      plan.description = v.get<std::string>();
    } else if (key == "base" && v.is_object()) {
      base = v;
    } else if (key == "variants" && v.is_array()) {
      variants = v;
    } else {
      throw ConfigError(where + "unknown or malformed plan key '" + key + "'");
    }
  }
  if (plan.name.empty()) throw ConfigError(where + "plan needs a name");
  if (variants.empty()) throw ConfigError(where + "plan needs a non-empty variants array");

  std::set<std::string> seen;
  for (const json& v : variants) {
    if (!v.is_object()) throw ConfigError(where + "every variant must be an object");
    json merged = base;
    merged.update(v);
    ExperimentConfig c;
    try {
      c = config_from_json(merged);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
    if (c.label.empty()) throw ConfigError(where + "every variant needs a label");
    if (!seen.insert(c.label).second)
      throw ConfigError(where + "duplicate variant label '" + c.label + "'");
    plan.variants.push_back(std::move(c));
  }
  return plan;
}

const std::vector<std::string>& reproduction_names() {
  static const std::vector<std::string> names{"randomwalk", "windygrid", "mountaincliff"};
  return names;
}

std::filesystem::path default_config_dir() {
  return QSIGMA_CONFIG_DIR;
}

std::filesystem::path plan_path(std::string_view name, const std::filesystem::path& config_dir) {
  return config_dir / ("reproduce_" + std::string(name) + ".json");
}

const AlphaSummary& VariantResult::best() const {
  const AlphaSummary* best = nullptr;
  for (const AlphaSummary& a : sweep)
    if (!a.diverged && (best == nullptr || a.summary.mean > best->summary.mean)) best = &a;
  if (best == nullptr)
    throw ContractViolation("best: variant '" + config.label + "' has no converged step size");
  return *best;
}

bool ReproductionReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const VariantResult& ReproductionReport::variant(std::string_view label) const {
  for (const auto& v : variants)
    if (v.config.label == label) return v;
  throw ContractViolation("report '" + name + "' has no variant '" + std::string(label) + "'");
}

std::string ReproductionReport::summary_table() const {
  std::ostringstream os;
  char line[160];
  for (const auto& v : variants) {
    if (!v.sweep.empty()) {
      const AlphaSummary& b = v.best();
      const auto diverged = std::count_if(v.sweep.begin(), v.sweep.end(),
                                          [](const AlphaSummary& a) { return a.diverged; });
      std::snprintf(line, sizeof line,
                    "%-20s best alpha %-6.3g mean %10.4f  se %.4f  diverged alphas %d\n",
                    v.config.label.c_str(), b.alpha, b.summary.mean, b.summary.std_error,
                    static_cast<int>(diverged));
    } else {
      const Summary all = summarize_episodes(*v.stats, 0, v.stats->episodes());
      const std::vector<double> mean = v.stats->mean();
      std::snprintf(line, sizeof line, "%-20s mean %10.4f  se %.4f  final %10.4f\n",
                    v.config.label.c_str(), all.mean, all.std_error, mean.back());
    }
    os << line;
  }
  return os.str();
}

std::string csv_file_name(std::string_view label) {
  std::string out;
  for (char ch : label) {
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_')
      out += ch;
    else if (ch == '.')
      out += 'p';
    else if (!out.empty() && out.back() != '_')
      out += '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out + ".csv";
}

ReproductionReport reproduce(const ReproductionPlan& plan, const ReproduceOptions& options) {
  ReproductionReport report;
  report.name = plan.name;
  if (options.out_dir) std::filesystem::create_directories(*options.out_dir);

  for (const std::string& label : options.labels) (void)plan.variant(label);
  for (ExperimentConfig c : plan.variants) {
    if (!options.labels.empty() &&
        std::find(options.labels.begin(), options.labels.end(), c.label) == options.labels.end())
      continue;
    if (options.runs) c.runs = *options.runs;
    if (options.seed) c.seed = *options.seed;
    c.validate();

    VariantResult result{c, std::nullopt, {}};
    if (!c.alphas.empty()) {
      result.sweep = sweep_alpha(c, c.alphas, options.run);
      if (options.out_dir) emit_sweep_csv(result.sweep, *options.out_dir / csv_file_name(c.label));
    } else {
      result.stats = run_experiment(c, options.run);
      if (options.out_dir) emit_csv(*result.stats, *options.out_dir / csv_file_name(c.label));
    }
    report.variants.push_back(std::move(result));
  }
  report.checks = evaluate_checks(report);
  return report;
}

// ---------------------------------------------------------------------------
// Checks

namespace {

bool has(const ReproductionReport& r, std::string_view label) {
  return std::any_of(r.variants.begin(), r.variants.end(),
                     [&](const VariantResult& v) { return v.config.label == label; });
}

bool has_all(const ReproductionReport& r, std::initializer_list<std::string_view> labels) {
  return std::all_of(labels.begin(), labels.end(), [&](auto l) { return has(r, l); });
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[200];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

double pooled(const Summary& a, const Summary& b) {
  return std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
}

Summary window(const ReproductionReport& r, std::string_view label, std::size_t first,
               std::size_t last) {
  const RunStatistics& s = *r.variant(label).stats;
  return summarize_episodes(s, first, std::min(last, s.episodes()));
}

void random_walk_checks(const ReproductionReport& r, std::vector<CheckResult>& out) {
  if (has_all(r, {"Q(0)", "Q(1)"})) {
    const Summary q0 = window(r, "Q(0)", 0, 10), q1 = window(r, "Q(1)", 0, 10);
    out.push_back({"6a", "episodes 1-10: mean RMS of Q(1) below Q(0)", q1.mean < q0.mean,
                   fmt("Q(1) %.6f vs Q(0) %.6f", q1.mean, q0.mean)});
    const std::size_t e = r.variant("Q(0)").stats->episodes();
    const std::size_t from = e >= 10 ? e - 10 : 0;
    const Summary f0 = window(r, "Q(0)", from, e), f1 = window(r, "Q(1)", from, e);
    out.push_back({"6b", "final 10 episodes: mean RMS of Q(0) below Q(1)", f0.mean < f1.mean,
                   fmt("Q(0) %.6f vs Q(1) %.6f", f0.mean, f1.mean)});
  }
  if (has(r, "dynamic")) {
    const std::size_t e = r.variant("dynamic").stats->episodes();
    const std::size_t from = e >= 10 ? e - 10 : 0;
    const Summary dyn = window(r, "dynamic", from, e);
    bool ok = true;
    std::string detail = fmt("dynamic %.6f (se %.6f)", dyn.mean, dyn.std_error);
    std::size_t compared = 0;
    for (const auto& v : r.variants) {
      if (v.config.label == "dynamic" || v.config.sigma.decay) continue;
      const Summary fixed = window(r, v.config.label, from, e);
      const double bound = fixed.mean + 2.0 * pooled(dyn, fixed);
      ok = ok && dyn.mean <= bound;
      detail += "; " + v.config.label + fmt(" %.6f", fixed.mean);
      ++compared;
    }
    out.push_back({"6c", "final 10 episodes: dynamic sigma within 2 SE of every fixed sigma",
                   ok && compared > 0, detail});
  }
  double worst = 0.0;
  for (const auto& v : r.variants)
    for (double se : v.stats->standard_error()) worst = std::max(worst, se);
  out.push_back({"6d", "every per-episode standard error below 0.006", worst < 0.006,
                 fmt("max se %.6f", worst)});
}

void windy_checks(const ReproductionReport& r, std::vector<CheckResult>& out) {
  bool ok_a = true;
  std::string detail_a;
  std::size_t pairs = 0;
  for (const char* s : {"0", "0.5", "1"}) {
    const std::string one = std::string("sigma=") + s + ",n=1";
    const std::string three = std::string("sigma=") + s + ",n=3";
    if (!has(r, one) || !has(r, three)) continue;
    const double m1 = r.variant(one).best().summary.mean;
    const double m3 = r.variant(three).best().summary.mean;
    ok_a = ok_a && m3 > m1;
    detail_a += (pairs++ ? "; " : "") + std::string("sigma=") + s + fmt(" n=3 %.3f n=1 %.3f", m3, m1);
  }
  if (pairs > 0)
    out.push_back({"7a", "best-alpha return with n=3 above n=1 for sigma 0, 0.5, 1",
                   ok_a && pairs == 3, detail_a});

  if (has_all(r, {"dynamic,n=3", "sigma=0.5,n=3"})) {
    std::vector<std::pair<double, const VariantResult*>> ranked;
    for (const auto& v : r.variants) ranked.emplace_back(v.best().summary.mean, &v);
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    const bool dynamic_first = ranked.front().second->config.label == "dynamic,n=3";
    bool half_close = false;
    std::string detail = "first " + ranked.front().second->config.label;
    if (ranked.size() > 1) {
      const VariantResult& second = *ranked[1].second;
      const Summary s2 = second.best().summary;
      const Summary half = r.variant("sigma=0.5,n=3").best().summary;
      half_close = half.mean >= s2.mean - 2.0 * pooled(half, s2);
      detail += "; second " + second.config.label + fmt(" %.3f; sigma=0.5 %.3f (2 SE %.3f)",
                                                        s2.mean, half.mean,
                                                        2.0 * pooled(half, s2));
    }
    out.push_back({"7b", "dynamic sigma best; sigma=0.5 within 2 SE of second place",
                   dynamic_first && half_close, detail});
  }

  double worst = 0.0;
  std::string where;
  std::size_t over = 0, total = 0;
  for (const auto& v : r.variants) {
    for (const auto& a : v.sweep) {
      if (a.diverged) continue;
      ++total;
      over += a.summary.std_error >= 0.3;
      if (a.summary.std_error > worst) {
        worst = a.summary.std_error;
        where = v.config.label + fmt(" alpha %.2f", a.alpha);
      }
    }
  }
  out.push_back({"7c", "every standard error below 0.3", worst < 0.3,
                 fmt("max se %.4f (", worst) + where +
                     "); " + std::to_string(over) + " of " + std::to_string(total) +
                     " settings at or above 0.3"});
}

void mountain_checks(const ReproductionReport& r, std::vector<CheckResult>& out) {
  if (!has_all(r, {"sarsa", "Q(0.5)", "dynamic"})) return;
  const std::size_t e = r.variant("sarsa").stats->episodes();
  const Summary sarsa = window(r, "sarsa", 0, e), half = window(r, "Q(0.5)", 0, e),
                dyn = window(r, "dynamic", 0, e);
  out.push_back({"8a", "average return: dynamic > Q(0.5) > Sarsa",
                 dyn.mean > half.mean && half.mean > sarsa.mean,
                 fmt("dynamic %.2f, Q(0.5) %.2f, Sarsa %.2f", dyn.mean, half.mean, sarsa.mean)});

  auto within = [](double x, double ref) { return std::abs(x - ref) <= 0.15 * std::abs(ref); };
  out.push_back({"8b", "dynamic within 15% of -163.7 and Q(0.5) within 15% of -167.9",
                 within(dyn.mean, -163.7) && within(half.mean, -167.9),
                 fmt("dynamic %.2f, Q(0.5) %.2f", dyn.mean, half.mean)});

  const Summary s50 = window(r, "sarsa", 0, 50), h50 = window(r, "Q(0.5)", 0, 50),
                d50 = window(r, "dynamic", 0, 50);
  const bool ok = h50.mean - s50.mean >= 2.0 * pooled(h50, s50) &&
                  d50.mean - s50.mean >= 2.0 * pooled(d50, s50);
  out.push_back({"8c", "first 50 episodes: Q(0.5) and dynamic beat Sarsa by 2 pooled SE", ok,
                 fmt("Sarsa %.2f, Q(0.5) %.2f, dynamic %.2f", s50.mean, h50.mean, d50.mean)});
}

}  // namespace

std::vector<CheckResult> evaluate_checks(const ReproductionReport& report) {
  std::vector<CheckResult> out;
  if (report.variants.empty()) return out;
  if (report.name == "randomwalk")
    random_walk_checks(report, out);
  else if (report.name == "windygrid")
    windy_checks(report, out);
  else if (report.name == "mountaincliff")
    mountain_checks(report, out);
  return out;
}

}  // namespace qsigma
