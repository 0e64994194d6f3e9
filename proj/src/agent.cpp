#include "qsigma/agent.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "qsigma/returns.hpp"

namespace qsigma {

namespace {

void validate(const AgentParams& p) {
  if (p.n == 0) throw ContractViolation("backup length n must be positive");
  if (!(p.alpha > 0.0 && p.alpha <= 1.0)) throw ContractViolation("alpha must lie in (0, 1]");
  if (!(p.gamma >= 0.0 && p.gamma <= 1.0)) throw ContractViolation("gamma must lie in [0, 1]");
}

}  // namespace

QSigmaAgent::QSigmaAgent(ActionValues q, AgentParams params)
    : q_(std::move(q)),
      behavior_(params.behavior),
      target_(params.target.value_or(params.behavior)),
      sigma_(std::move(params.sigma)),
      n_(params.n),
      alpha_(params.alpha),
      gamma_(params.gamma),
      expectation_at_end_(params.expectation_at_backup_end) {
  validate(params);
  buffer_.resize(n_ + 1);
  row_.resize(q_.num_actions());
  pi_row_.resize(q_.num_actions());
}

std::size_t QSigmaAgent::pending_updates() const {
  if (!active_) return 0;
  const std::size_t visited = terminal_time_ ? *terminal_time_ : t_ + 1;
  return visited - next_tau_;
}

ActionId QSigmaAgent::begin_episode(const StateRef& s0, RngStream& rng) {
  if (active_) throw ContractViolation("begin_episode: previous episode still in progress");
  require_nonterminal(s0, "begin_episode");

  q_.row(s0, row_);
  const ActionId a0 = behavior_.sample(row_, rng);
  const double pi = target_.prob(row_, a0);
  const double mu = behavior_.prob(row_, a0);

  TransitionRecord& rec = record(0);
  rec = TransitionRecord{};
  rec.s = s0;
  rec.a = a0;
  rec.q_snapshot = row_[a0.index];
  rec.sigma = sigma_.current();
  rec.pi_prob = pi;
  rec.rho = pi / mu;

  active_ = true;
  t_ = 0;
  terminal_time_.reset();
  next_tau_ = 0;
  return a0;
}

std::optional<ActionId> QSigmaAgent::step(double reward, const StateRef& s_next, RngStream& rng) {
  if (!active_ || terminal_time_) throw ContractViolation("step: no episode in progress");
  if (!std::isfinite(reward)) throw std::domain_error("step: non-finite reward");

  TransitionRecord& cur = record(t_);
  std::optional<ActionId> next_action;

  if (s_next.terminal) {
    cur.delta_sigma = reward - cur.q_snapshot;
    cur.delta_expected = cur.delta_sigma;
    terminal_time_ = t_ + 1;
  } else {
    q_.row(s_next, row_);
    const ActionId a_next = behavior_.sample(row_, rng);
    const double sigma = sigma_.next();
    target_.probabilities(row_, pi_row_);
    const double v_next = target_.expectation(row_);

    const double q_next = row_[a_next.index];
    cur.delta_sigma = td_error_sigma(reward, gamma_, sigma, q_next, v_next, cur.q_snapshot);
    cur.delta_expected = td_error_expected_sarsa(reward, gamma_, v_next, cur.q_snapshot);

    TransitionRecord& nxt = record(t_ + 1);
    nxt.s = s_next;
    nxt.a = a_next;
    nxt.q_snapshot = q_next;
    nxt.sigma = sigma;
    nxt.pi_prob = pi_row_[a_next.index];
    nxt.rho = nxt.pi_prob / behavior_.prob(row_, a_next);
    nxt.delta_sigma = 0.0;
    nxt.delta_expected = 0.0;
    next_action = a_next;
  }

  if (t_ + 1 >= n_) apply_nstep_update(t_ + 1 - n_);
  ++t_;
  return next_action;
}

void QSigmaAgent::finish_episode() {
  if (!active_ || !terminal_time_) throw ContractViolation("finish_episode: terminal not observed");
  while (next_tau_ < *terminal_time_) apply_nstep_update(next_tau_);
  active_ = false;
  terminal_time_.reset();
  sigma_.on_episode_end();
}

void QSigmaAgent::abandon_episode() {
  if (!active_) throw ContractViolation("abandon_episode: no episode in progress");
  active_ = false;
  terminal_time_.reset();
  sigma_.on_episode_end();
}

void QSigmaAgent::apply_nstep_update(std::size_t tau) {
  if (tau != next_tau_) throw std::logic_error("apply_nstep_update: updates out of order");
  const std::size_t window_end = tau + n_ - 1;
  const std::size_t end = terminal_time_ ? std::min(window_end, *terminal_time_ - 1) : window_end;
  if (end > t_) throw std::logic_error("apply_nstep_update: missing transition records");

  const TransitionRecord& head = record(tau);
  const double q_before = q_.value(head.s, head.a);
  double g = q_before;
  double weight = 1.0;
  double rho = 1.0;
  for (std::size_t k = tau; k <= end; ++k) {
    const TransitionRecord& rec = record(k);
    const double delta =
        expectation_at_end_ && k == window_end ? rec.delta_expected : rec.delta_sigma;
    g += weight * delta;
    if (k < end) {
      const TransitionRecord& nxt = record(k + 1);
      weight = gamma_ * weight * ((1.0 - nxt.sigma) * nxt.pi_prob + nxt.sigma);
      rho *= 1.0 - nxt.sigma + nxt.sigma * nxt.rho;
    }
  }

  q_.apply_delta(head.s, head.a, alpha_ * rho * (g - q_before));
  ++next_tau_;
  ++updates_applied_;
  if (observer_) observer_(UpdateTrace{tau, q_before, g, rho});
}

void one_step_q_sigma_update(ActionValues& q, const StateRef& s, ActionId a, double r,
                             const StateRef& s_next, ActionId a_next, double sigma, double alpha,
                             double gamma, const Policy& target) {
  if (!(sigma >= 0.0 && sigma <= 1.0)) throw ContractViolation("sigma must lie in [0, 1]");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ContractViolation("alpha must lie in (0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ContractViolation("gamma must lie in [0, 1]");

  const double q_cur = q.value(s, a);
  double delta;
  if (s_next.terminal) {
    delta = r - q_cur;
  } else {
    std::vector<double> row(q.num_actions());
    q.row(s_next, row);
    if (a_next.index >= row.size()) throw ContractViolation("a_next out of range");
    delta = td_error_sigma(r, gamma, sigma, row[a_next.index], target.expectation(row), q_cur);
  }
  const double g = q_cur + 1.0 * delta;
  const double rho = 1.0;
  q.apply_delta(s, a, alpha * rho * (g - q_cur));
}

std::string_view algorithm_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::sarsa: return "sarsa";
    case Algorithm::expected_sarsa: return "expected_sarsa";
    case Algorithm::tree_backup: return "tree_backup";
    case Algorithm::q_learning: return "q_learning";
    case Algorithm::q_sigma: return "q_sigma";
  }
  return "unknown";
}

const std::vector<Algorithm>& all_algorithms() {
  static const std::vector<Algorithm> all{Algorithm::sarsa, Algorithm::expected_sarsa,
                                          Algorithm::tree_backup, Algorithm::q_learning,
                                          Algorithm::q_sigma};
  return all;
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : all_algorithms())
    if (algorithm_name(a) == name) return a;
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

QSigmaAgent make_algorithm(Algorithm algorithm, ActionValues q, AgentParams params) {
  switch (algorithm) {
    case Algorithm::sarsa:
      params.sigma = SigmaSchedule::constant(1.0);
      break;
    case Algorithm::expected_sarsa:
      params.sigma = SigmaSchedule::constant(1.0);
      params.expectation_at_backup_end = true;
      break;
    case Algorithm::tree_backup:
      params.sigma = SigmaSchedule::constant(0.0);
      break;
    case Algorithm::q_learning:
      params.sigma = SigmaSchedule::constant(0.0);
      params.target = Policy::greedy();
      break;
    case Algorithm::q_sigma:
      break;
  }
  return QSigmaAgent(std::move(q), std::move(params));
}

}  // namespace qsigma
