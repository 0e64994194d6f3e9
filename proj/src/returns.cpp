#include "qsigma/returns.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qsigma {

namespace {

double dot(std::span<const double> p, std::span<const double> q) {
  double v = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) v += p[a] * q[a];
  return v;
}

double next_expectation(const SegmentStep& step) {
  return step.terminal ? 0.0 : dot(step.target_probs, step.next_q);
}

double next_sampled(const SegmentStep& step) {
  return step.terminal ? 0.0 : step.next_q[step.next_action.index];
}

// Q(S_k, A_k) as stored at selection time, for the k-th step of the segment.
double taken_value(const TrajectorySegment& seg, std::size_t k) {
  return k == 0 ? seg.q_taken : next_sampled(seg.steps[k - 1]);
}

// pi(A_k | S_k) for k >= 1, read from the preceding step.
double taken_target_prob(const TrajectorySegment& seg, std::size_t k) {
  const SegmentStep& prev = seg.steps[k - 1];
  return prev.target_probs[prev.next_action.index];
}

double ratio_at(const TrajectorySegment& seg, std::size_t k) {
  const SegmentStep& prev = seg.steps[k - 1];
  const double mu = prev.behavior_probs[prev.next_action.index];
  if (!(mu > 0.0)) throw ContractViolation("importance ratio: behavior probability is zero");
  return prev.target_probs[prev.next_action.index] / mu;
}

}  // namespace

void TrajectorySegment::validate() const {
  if (steps.empty()) throw ContractViolation("trajectory segment is empty");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ContractViolation("gamma must lie in [0, 1]");
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const SegmentStep& s = steps[k];
    if (s.terminal) {
      if (k + 1 != steps.size())
        throw ContractViolation("terminal transition before the end of the segment");
      continue;
    }
    const std::size_t n = s.next_q.size();
    if (n == 0 || s.target_probs.size() != n || s.behavior_probs.size() != n)
      throw ContractViolation("segment step has inconsistent action rows");
    if (s.next_action.index >= n) throw ContractViolation("segment step action out of range");
    if (!(s.next_sigma >= 0.0 && s.next_sigma <= 1.0))
      throw ContractViolation("segment sigma must lie in [0, 1]");
  }
}

double expected_action_value(const ActionValues& q, const Policy& policy, const StateRef& s) {
  if (s.terminal) return 0.0;
  std::vector<double> row(q.num_actions());
  q.row(s, row);
  return policy.expectation(row);
}

double td_error_sarsa(double r, double gamma, double q_next, double q_cur, bool next_terminal) {
  return r + gamma * (next_terminal ? 0.0 : q_next) - q_cur;
}

double td_error_expected_sarsa(double r, double gamma, double v_next, double q_cur,
                               bool next_terminal) {
  return r + gamma * (next_terminal ? 0.0 : v_next) - q_cur;
}

double td_error_q_learning(double r, double gamma, std::span<const double> q_next_row,
                           double q_cur, bool next_terminal) {
  if (next_terminal) return r - q_cur;
  if (q_next_row.empty()) throw ContractViolation("td_error_q_learning: empty action row");
  return r + gamma * *std::max_element(q_next_row.begin(), q_next_row.end()) - q_cur;
}

double td_error_sigma(double r, double gamma, double sigma, double q_next_sampled, double v_next,
                      double q_cur, bool next_terminal) {
  if (!(sigma >= 0.0 && sigma <= 1.0)) throw ContractViolation("sigma must lie in [0, 1]");
  if (next_terminal) return r - q_cur;
  return r + gamma * (sigma * q_next_sampled + (1.0 - sigma) * v_next) - q_cur;
}

double nstep_return_sarsa(const TrajectorySegment& seg) {
  seg.validate();
  double g = 0.0;
  double discount = 1.0;
  for (const SegmentStep& s : seg.steps) {
    g += discount * s.reward;
    discount *= seg.gamma;
  }
  return g + discount * next_sampled(seg.steps.back());
}

double nstep_return_expected_sarsa(const TrajectorySegment& seg) {
  seg.validate();
  double g = 0.0;
  double discount = 1.0;
  for (const SegmentStep& s : seg.steps) {
    g += discount * s.reward;
    discount *= seg.gamma;
  }
  return g + discount * next_expectation(seg.steps.back());
}

double nstep_return_tree_backup(const TrajectorySegment& seg) {
  seg.validate();
  double g = seg.q_lead;
  double weight = 1.0;
  for (std::size_t k = 0; k < seg.steps.size(); ++k) {
    if (k > 0) weight *= seg.gamma * taken_target_prob(seg, k);
    const SegmentStep& s = seg.steps[k];
    g += weight * td_error_expected_sarsa(s.reward, seg.gamma, next_expectation(s),
                                          taken_value(seg, k), s.terminal);
  }
  return g;
}

double nstep_return_q_sigma(const TrajectorySegment& seg) {
  seg.validate();
  double g = seg.q_lead;
  double weight = 1.0;
  for (std::size_t k = 0; k < seg.steps.size(); ++k) {
    if (k > 0) {
      const double sigma = seg.steps[k - 1].next_sigma;
      weight *= seg.gamma * ((1.0 - sigma) * taken_target_prob(seg, k) + sigma);
    }
    const SegmentStep& s = seg.steps[k];
    g += weight * td_error_sigma(s.reward, seg.gamma, s.next_sigma, next_sampled(s),
                                 next_expectation(s), taken_value(seg, k), s.terminal);
  }
  return g;
}

double importance_ratio(const TrajectorySegment& seg) {
  seg.validate();
  double rho = 1.0;
  for (std::size_t k = 1; k < seg.steps.size(); ++k) rho *= ratio_at(seg, k);
  return rho;
}

double importance_ratio_sigma(const TrajectorySegment& seg) {
  seg.validate();
  double rho = 1.0;
  for (std::size_t k = 1; k < seg.steps.size(); ++k) {
    const double sigma = seg.steps[k - 1].next_sigma;
    rho *= sigma * ratio_at(seg, k) + 1.0 - sigma;
  }
  return rho;
}

}  // namespace qsigma
