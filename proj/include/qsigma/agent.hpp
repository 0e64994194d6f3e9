#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qsigma/action_values.hpp"
#include "qsigma/policy.hpp"
#include "qsigma/sigma_schedule.hpp"
#include "qsigma/types.hpp"

namespace qsigma {

/// Quantities stored for time step k while it is inside some pending backup.
struct TransitionRecord {
  StateRef s;
  ActionId a;
  double q_snapshot = 0.0;      // Q(S_k, A_k) when A_k was selected
  double sigma = 1.0;           // sigma_k
  double pi_prob = 1.0;         // pi(A_k | S_k)
  double rho = 1.0;             // pi(A_k | S_k) / mu(A_k | S_k)
  double delta_sigma = 0.0;     // TD error of the transition k -> k+1
  double delta_expected = 0.0;  // its pure-expectation counterpart
};

/// What apply_nstep_update computed, reported to an optional observer.
struct UpdateTrace {
  std::size_t tau = 0;
  double q_before = 0.0;
  double g = 0.0;
  double rho = 1.0;
};

struct AgentParams {
  std::size_t n = 1;
  double alpha = 0.1;
  double gamma = 1.0;
  Policy behavior = Policy::equiprobable();
  /// Defaults to the behavior policy (on-policy learning).
  std::optional<Policy> target;
  SigmaSchedule sigma = SigmaSchedule::constant(1.0);
  /// Use a pure expectation for the final step of every backup regardless of
  /// the schedule (n-step Expected Sarsa).
  bool expectation_at_backup_end = false;
};

/// Online n-step Q(sigma) control with behavior policy mu and target pi.
///
/// Per episode: begin_episode, then step() until it returns nothing (terminal
/// observed), then finish_episode(). Each visited (S_t, A_t) receives exactly
/// one n-step update.
class QSigmaAgent {
 public:
  QSigmaAgent(ActionValues q, AgentParams params);

  ActionId begin_episode(const StateRef& s0, RngStream& rng);
  std::optional<ActionId> step(double reward, const StateRef& s_next, RngStream& rng);
  void finish_episode();
  /// Ends an episode cut short before reaching a terminal state. Pending
  /// backups are dropped rather than applied with a truncated return.
  void abandon_episode();

  const ActionValues& q() const { return q_; }
  ActionValues& q() { return q_; }
  const Policy& behavior() const { return behavior_; }
  Policy& behavior() { return behavior_; }
  const Policy& target() const { return target_; }
  Policy& target() { return target_; }
  const SigmaSchedule& sigma_schedule() const { return sigma_; }

  std::size_t n() const { return n_; }
  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }

  bool in_episode() const { return active_; }
  std::size_t pending_updates() const;
  std::size_t updates_applied() const { return updates_applied_; }

  void set_update_observer(std::function<void(const UpdateTrace&)> observer) {
    observer_ = std::move(observer);
  }

 private:
  void apply_nstep_update(std::size_t tau);
  TransitionRecord& record(std::size_t k) { return buffer_[k % buffer_.size()]; }
  const TransitionRecord& record(std::size_t k) const { return buffer_[k % buffer_.size()]; }

  ActionValues q_;
  Policy behavior_;
  Policy target_;
  SigmaSchedule sigma_;
  std::size_t n_;
  double alpha_;
  double gamma_;
  bool expectation_at_end_;

  std::vector<TransitionRecord> buffer_;
  std::vector<double> row_;
  std::vector<double> pi_row_;
  bool active_ = false;
  std::size_t t_ = 0;
  std::optional<std::size_t> terminal_time_;
  std::size_t next_tau_ = 0;
  std::size_t updates_applied_ = 0;
  std::function<void(const UpdateTrace&)> observer_;
};

/// One-step Q(sigma) update on the current estimate:
/// Q(s,a) <- Q(s,a) + alpha [r + gamma (sigma Q(s',a') + (1 - sigma) V(s')) - Q(s,a)].
/// Bootstrap terms vanish when s_next is terminal. Evaluated with the same
/// floating-point operation order as a QSigmaAgent with n = 1.
void one_step_q_sigma_update(ActionValues& q, const StateRef& s, ActionId a, double r,
                             const StateRef& s_next, ActionId a_next, double sigma, double alpha,
                             double gamma, const Policy& target);

enum class Algorithm { sarsa, expected_sarsa, tree_backup, q_learning, q_sigma };

std::string_view algorithm_name(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view name);
const std::vector<Algorithm>& all_algorithms();

/// Builds an agent for one member of the family. The schedule in `params` is
/// only honoured for q_sigma; q_learning replaces the target with the greedy
/// policy.
QSigmaAgent make_algorithm(Algorithm algorithm, ActionValues q, AgentParams params);

}  // namespace qsigma
