#include "qsigma/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "qsigma/oracle.hpp"
#include "qsigma/tile_coder.hpp"

namespace qsigma {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config

SigmaSchedule SigmaSpec::schedule() const {
  if (decay) return SigmaSchedule::episode_decay(initial, *decay);
  return SigmaSchedule::constant(initial);
}

std::string SigmaSpec::describe() const {
  std::ostringstream os;
  if (decay)
    os << "dynamic(" << initial << "x" << *decay << "^ep)";
  else
    os << initial;
  return os.str();
}

namespace {

const char* measurement_name(Measurement m) {
  return m == Measurement::rms_per_episode ? "rms_per_episode" : "return_per_episode";
}

const char* policy_name(Policy::Kind k) {
  return k == Policy::Kind::equiprobable ? "equiprobable" : "epsilon_greedy";
}

[[noreturn]] void bad_field(const std::string& key, const std::string& why) {
  throw ConfigError("config field '" + key + "': " + why);
}

double real_field(const json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    // Fractions such as "1/6" keep step sizes exact in the config files.
    const std::string text = v.get<std::string>();
    const auto slash = text.find('/');
    try {
      std::size_t used = 0;
      if (slash == std::string::npos) {
        const double x = std::stod(text, &used);
        if (used == text.size()) return x;
      } else {
        const std::string num = text.substr(0, slash), den = text.substr(slash + 1);
        std::size_t used_den = 0;
        const double a = std::stod(num, &used), b = std::stod(den, &used_den);
        if (used == num.size() && used_den == den.size() && b != 0.0) return a / b;
      }
    } catch (const std::exception&) {
    }
  }
  bad_field(key, "expected a number or a fraction string like \"1/6\"");
}

std::uint64_t count_field(const json& v, const std::string& key) {
  // Parsed text gives unsigned integers, json built in code signed ones.
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    bad_field(key, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string string_field(const json& v, const std::string& key) {
  if (!v.is_string()) bad_field(key, "expected a string");
  return v.get<std::string>();
}

}  // namespace

void ExperimentConfig::validate() const {
  std::unique_ptr<Environment> env;
  try {
    env = make_environment(environment);
  } catch (const ConfigError&) {
    bad_field("environment", "unknown environment '" + environment + "'");
  }
  if (n == 0) bad_field("n", "must be positive");
  auto in_step_range = [](double a) { return a > 0.0 && a <= 1.0; };
  if (!in_step_range(alpha)) bad_field("alpha", "must lie in (0, 1]");
  for (double a : alphas)
    if (!in_step_range(a)) bad_field("alphas", "every step size must lie in (0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) bad_field("gamma", "must lie in [0, 1]");
  if (gamma == 1.0 && !env->episodic()) bad_field("gamma", "gamma = 1 requires an episodic task");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) bad_field("epsilon", "must lie in [0, 1]");
  if (!(sigma.initial >= 0.0 && sigma.initial <= 1.0)) bad_field("sigma", "must lie in [0, 1]");
  if (sigma.decay && !(*sigma.decay > 0.0 && *sigma.decay <= 1.0))
    bad_field("sigma", "decay factor must lie in (0, 1]");
  if (episodes == 0) bad_field("episodes", "must be positive");
  if (runs == 0) bad_field("runs", "must be positive");
  if (moving_average_window == 0) bad_field("moving_average_window", "must be positive");
  if (step_cap && *step_cap == 0) bad_field("step_cap", "must be positive");
  if (measurement == Measurement::rms_per_episode) {
    if (!env->is_tabular()) bad_field("measurement", "rms_per_episode needs a tabular environment");
    if (policy != Policy::Kind::equiprobable)
      bad_field("measurement", "rms_per_episode evaluates the equiprobable policy");
  }
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  bool have_env = false, have_algorithm = false;
  for (const auto& [key, v] : j.items()) {
    if (key == "label") {
      c.label = string_field(v, key);
    } else if (key == "environment") {
      c.environment = string_field(v, key);
      have_env = true;
    } else if (key == "algorithm") {
      c.algorithm = parse_algorithm(string_field(v, key));
      have_algorithm = true;
    } else if (key == "n") {
      c.n = count_field(v, key);
    } else if (key == "alpha") {
      c.alpha = real_field(v, key);
    } else if (key == "gamma") {
      c.gamma = real_field(v, key);
    } else if (key == "policy") {
      const std::string p = string_field(v, key);
      if (p == "equiprobable")
        c.policy = Policy::Kind::equiprobable;
      else if (p == "epsilon_greedy")
        c.policy = Policy::Kind::epsilon_greedy;
      else
        bad_field(key, "expected \"equiprobable\" or \"epsilon_greedy\"");
    } else if (key == "epsilon") {
      c.epsilon = real_field(v, key);
    } else if (key == "sigma") {
      if (v.is_object()) {
        for (const auto& [sub, sv] : v.items()) {
          if (sub == "initial")
            c.sigma.initial = real_field(sv, "sigma.initial");
          else if (sub == "decay")
            c.sigma.decay = real_field(sv, "sigma.decay");
          else
            bad_field("sigma." + sub, "unknown key");
        }
      } else {
        c.sigma = SigmaSpec{real_field(v, key), std::nullopt};
      }
    } else if (key == "episodes") {
      c.episodes = count_field(v, key);
    } else if (key == "runs") {
      c.runs = count_field(v, key);
    } else if (key == "seed") {
      c.seed = count_field(v, key);
    } else if (key == "measurement") {
      const std::string m = string_field(v, key);
      if (m == "rms_per_episode")
        c.measurement = Measurement::rms_per_episode;
      else if (m == "return_per_episode")
        c.measurement = Measurement::return_per_episode;
      else
        bad_field(key, "expected \"rms_per_episode\" or \"return_per_episode\"");
    } else if (key == "alphas") {
      if (!v.is_array() || v.empty()) bad_field(key, "expected a non-empty array");
      c.alphas.clear();
      for (const auto& a : v) c.alphas.push_back(real_field(a, key));
    } else if (key == "moving_average_window") {
      c.moving_average_window = count_field(v, key);
    } else if (key == "step_cap") {
      c.step_cap = count_field(v, key);
    } else if (key == "output") {
      c.output = string_field(v, key);
    } else {
      bad_field(key, "unknown key");
    }
  }
  if (!have_env) bad_field("environment", "missing");
  if (!have_algorithm) bad_field("algorithm", "missing");
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  if (!c.label.empty()) j["label"] = c.label;
  j["environment"] = c.environment;
  j["algorithm"] = std::string(algorithm_name(c.algorithm));
  j["n"] = c.n;
  j["alpha"] = c.alpha;
  j["gamma"] = c.gamma;
  j["policy"] = policy_name(c.policy);
  j["epsilon"] = c.epsilon;
  if (c.sigma.decay)
    j["sigma"] = {{"initial", c.sigma.initial}, {"decay", *c.sigma.decay}};
  else
    j["sigma"] = c.sigma.initial;
  j["episodes"] = c.episodes;
  j["runs"] = c.runs;
  j["seed"] = c.seed;
  j["measurement"] = measurement_name(c.measurement);
  if (!c.alphas.empty()) j["alphas"] = c.alphas;
  j["moving_average_window"] = c.moving_average_window;
  if (c.step_cap) j["step_cap"] = *c.step_cap;
  if (!c.output.empty()) j["output"] = c.output;
  return j;
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const json j = load_json_file(path);
  try {
    return config_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Statistics

RunStatistics::RunStatistics(std::size_t runs, std::size_t episodes, std::size_t window)
    : runs_(runs), episodes_(episodes), window_(window), values_(runs * episodes, 0.0) {
  if (runs == 0 || episodes == 0 || window == 0)
    throw ContractViolation("RunStatistics: dimensions must be positive");
}

std::vector<double> RunStatistics::mean() const {
  std::vector<double> m(episodes_, 0.0);
  for (std::size_t e = 0; e < episodes_; ++e) {
    double sum = 0.0;
    for (std::size_t r = 0; r < runs_; ++r) sum += at(r, e);
    m[e] = sum / static_cast<double>(runs_);
  }
  return m;
}

std::vector<double> RunStatistics::standard_error() const {
  std::vector<double> se(episodes_, 0.0);
  if (runs_ < 2) return se;
  const std::vector<double> m = mean();
  for (std::size_t e = 0; e < episodes_; ++e) {
    double ss = 0.0;
    for (std::size_t r = 0; r < runs_; ++r) {
      const double d = at(r, e) - m[e];
      ss += d * d;
    }
    const double var = ss / static_cast<double>(runs_ - 1);
    se[e] = std::sqrt(var / static_cast<double>(runs_));
  }
  return se;
}

std::vector<double> RunStatistics::moving_average() const {
  const std::vector<double> m = mean();
  std::vector<double> ma(episodes_, 0.0);
  for (std::size_t e = 0; e < episodes_; ++e) {
    const std::size_t first = e + 1 >= window_ ? e + 1 - window_ : 0;
    double sum = 0.0;
    for (std::size_t k = first; k <= e; ++k) sum += m[k];
    ma[e] = sum / static_cast<double>(e - first + 1);
  }
  return ma;
}

std::vector<double> RunStatistics::run_averages(std::size_t first, std::size_t last) const {
  if (first >= last || last > episodes_) throw ContractViolation("run_averages: bad episode range");
  std::vector<double> out(runs_, 0.0);
  for (std::size_t r = 0; r < runs_; ++r) {
    double sum = 0.0;
    for (std::size_t e = first; e < last; ++e) sum += at(r, e);
    out[r] = sum / static_cast<double>(last - first);
  }
  return out;
}

Summary summarize(const std::vector<double>& sample) {
  if (sample.empty()) throw ContractViolation("summarize: empty sample");
  double sum = 0.0;
  for (double x : sample) sum += x;
  const double mean = sum / static_cast<double>(sample.size());
  if (sample.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : sample) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(sample.size() - 1);
  return {mean, std::sqrt(var / static_cast<double>(sample.size()))};
}

Summary summarize_episodes(const RunStatistics& stats, std::size_t first, std::size_t last) {
  return summarize(stats.run_averages(first, last));
}

// ---------------------------------------------------------------------------
// Running

QSigmaAgent make_agent(const ExperimentConfig& config, const Environment& env) {
  ActionValues q = [&] {
    if (const auto* tab = dynamic_cast<const TabularEnvironment*>(&env))
      return ActionValues::tabular(tab->num_states(), tab->num_actions());
    return ActionValues::linear(
        std::make_shared<TileCoder>(TileCoder::mountain_cliff(env.num_actions())));
  }();

  AgentParams params;
  params.n = config.n;
  params.alpha = config.alpha;
  params.gamma = config.gamma;
  params.behavior = config.policy == Policy::Kind::equiprobable
                        ? Policy::equiprobable()
                        : Policy::epsilon_greedy(config.epsilon);
  params.sigma = config.sigma.schedule();
  return make_algorithm(config.algorithm, std::move(q), std::move(params));
}

namespace {

struct Evaluation {
  std::vector<double> truth;
  std::vector<bool> skip;
};

Evaluation prepare_evaluation(const ExperimentConfig& config, const Environment& env) {
  Evaluation ev;
  if (config.measurement != Measurement::rms_per_episode) return ev;
  if (dynamic_cast<const RandomWalkEnv*>(&env) != nullptr) {
    ev.truth = random_walk_true_values();
    return ev;
  }
  const TabularMDP mdp = enumerate_mdp(env, config.gamma);
  const auto& tab = dynamic_cast<const TabularEnvironment&>(env);
  ev.truth = policy_evaluation(mdp, Policy::equiprobable(),
                               ActionValues::tabular(tab.num_states(), tab.num_actions()));
  ev.skip = mdp.terminal;
  return ev;
}

std::vector<double> run_with(const ExperimentConfig& config, std::size_t run_index,
                             const Evaluation& evaluation) {
  const auto env = make_environment(config.environment);
  QSigmaAgent agent = make_agent(config, *env);
  RngStream rng(config.seed + run_index);
  const std::size_t cap = config.step_cap.value_or(0);

  std::vector<double> out(config.episodes, 0.0);
  for (std::size_t ep = 0; ep < config.episodes; ++ep) {
    StateRef s = env->reset(rng);
    ActionId a = agent.begin_episode(s, rng);
    double total = 0.0;
    bool finished = false;
    for (std::size_t steps = 1;; ++steps) {
      StepResult res = env->step(s, a, rng);
      total += res.reward;
      const auto next = agent.step(res.reward, res.next, rng);
      if (!next) {
        finished = true;
        break;
      }
      if (cap != 0 && steps >= cap) break;
      s = std::move(res.next);
      a = *next;
    }
    if (finished)
      agent.finish_episode();
    else
      agent.abandon_episode();

    out[ep] = config.measurement == Measurement::rms_per_episode
                  ? rms_state_value_error(agent.q(), agent.target(), evaluation.truth,
                                          evaluation.skip)
                  : total;
  }
  return out;
}

}  // namespace

std::vector<double> run_single(const ExperimentConfig& config, std::size_t run_index) {
  config.validate();
  const auto env = make_environment(config.environment);
  return run_with(config, run_index, prepare_evaluation(config, *env));
}

RunStatistics run_experiment(const ExperimentConfig& config, RunOptions options) {
  config.validate();
  const auto env = make_environment(config.environment);
  const Evaluation evaluation = prepare_evaluation(config, *env);

  RunStatistics stats(config.runs, config.episodes, config.moving_average_window);
  std::size_t workers = options.workers != 0
                            ? options.workers
                            : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  workers = std::min(workers, config.runs);

  std::atomic<std::size_t> next_run{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t r = next_run.fetch_add(1);
      if (r >= config.runs) return;
      try {
        const std::vector<double> row = run_with(config, r, evaluation);
        for (std::size_t e = 0; e < row.size(); ++e) stats.at(r, e) = row[e];
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next_run = config.runs;
        return;
      }
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return stats;
}

std::vector<AlphaSummary> sweep_alpha(const ExperimentConfig& config,
                                      const std::vector<double>& alphas, RunOptions options) {
  if (alphas.empty()) throw ConfigError("sweep_alpha: empty step-size list");
  std::vector<AlphaSummary> out;
  out.reserve(alphas.size());
  for (double alpha : alphas) {
    ExperimentConfig c = config;
    c.alpha = alpha;
    try {
      const RunStatistics stats = run_experiment(c, options);
      out.push_back(AlphaSummary{alpha, summarize_episodes(stats, 0, stats.episodes()), false});
    } catch (const std::domain_error&) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      out.push_back(AlphaSummary{alpha, Summary{nan, nan}, true});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string fmt_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace

std::string format_csv(const RunStatistics& stats) {
  const auto mean = stats.mean();
  const auto se = stats.standard_error();
  const auto ma = stats.moving_average();
  std::string text = "episode,mean,stderr,moving_avg\n";
  for (std::size_t e = 0; e < stats.episodes(); ++e) {
    text += std::to_string(e + 1);
    text += ',' + fmt_real(mean[e]) + ',' + fmt_real(se[e]) + ',' + fmt_real(ma[e]) + '\n';
  }
  return text;
}

void emit_csv(const RunStatistics& stats, const std::filesystem::path& path) {
  write_text(path, format_csv(stats));
}

std::string format_sweep_csv(const std::vector<AlphaSummary>& sweep) {
  std::string text = "alpha,mean,stderr\n";
  for (const AlphaSummary& s : sweep)
    text += fmt_real(s.alpha) + ',' + fmt_real(s.summary.mean) + ',' +
            fmt_real(s.summary.std_error) + '\n';
  return text;
}

void emit_sweep_csv(const std::vector<AlphaSummary>& sweep, const std::filesystem::path& path) {
  write_text(path, format_sweep_csv(sweep));
}

}  // namespace qsigma
