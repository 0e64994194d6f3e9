#pragma once

#include <span>
#include <vector>

#include "qsigma/action_values.hpp"
#include "qsigma/policy.hpp"
#include "qsigma/types.hpp"

namespace qsigma {

/// One experienced transition S_k, A_k -> R_{k+1}, S_{k+1}, A_{k+1} as seen
/// inside an n-step backup. Action values and probabilities are the ones in
/// effect when the transition happened. For a terminal S_{k+1} the `next_*`
/// fields are ignored.
struct SegmentStep {
  double reward = 0.0;
  bool terminal = false;
  std::vector<double> next_q;
  std::vector<double> target_probs;
  std::vector<double> behavior_probs;
  ActionId next_action{};
  double next_sigma = 1.0;
};

/// The data of one backup starting at time t and covering steps t..tau.
///
/// `q_lead` is Q(S_t, A_t) at the moment the backup is applied; it seeds the
/// tree-shaped returns and is the update target's reference value.
/// `q_taken` is Q(S_t, A_t) as stored when A_t was selected; it is what the
/// first TD error subtracts. The two coincide unless (S_t, A_t) was updated in
/// the meantime.
struct TrajectorySegment {
  double gamma = 1.0;
  double q_lead = 0.0;
  double q_taken = 0.0;
  std::vector<SegmentStep> steps;

  /// Throws ContractViolation if the segment is malformed.
  void validate() const;
};

double expected_action_value(const ActionValues& q, const Policy& policy, const StateRef& s);

double td_error_sarsa(double r, double gamma, double q_next, double q_cur,
                      bool next_terminal = false);
double td_error_expected_sarsa(double r, double gamma, double v_next, double q_cur,
                               bool next_terminal = false);
double td_error_q_learning(double r, double gamma, std::span<const double> q_next_row,
                           double q_cur, bool next_terminal = false);
double td_error_sigma(double r, double gamma, double sigma, double q_next_sampled, double v_next,
                      double q_cur, bool next_terminal = false);

double nstep_return_sarsa(const TrajectorySegment& seg);
double nstep_return_expected_sarsa(const TrajectorySegment& seg);
double nstep_return_tree_backup(const TrajectorySegment& seg);
double nstep_return_q_sigma(const TrajectorySegment& seg);

/// Product of pi/mu over the actions A_{t+1} .. A_tau.
double importance_ratio(const TrajectorySegment& seg);
/// Product of (sigma_k pi/mu + 1 - sigma_k) over k = t+1 .. tau.
double importance_ratio_sigma(const TrajectorySegment& seg);

}  // namespace qsigma
