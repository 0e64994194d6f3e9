#include "qsigma/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qsigma {

TabularMDP enumerate_mdp(const Environment& env, double gamma) {
  const auto* tab = dynamic_cast<const TabularEnvironment*>(&env);
  if (tab == nullptr)
    throw ContractViolation("enumerate_mdp: '" + std::string(env.name()) + "' is not tabular");
  TabularMDP mdp(tab->num_states(), tab->num_actions(), gamma);
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    mdp.terminal[s] = tab->is_terminal_state(s);
    if (mdp.terminal[s]) continue;
    for (std::size_t a = 0; a < mdp.num_actions; ++a) mdp.outcomes(s, a) = tab->outcomes(s, ActionId{a});
  }
  mdp.validate();
  return mdp;
}

PolicyTable policy_table(const TabularMDP& mdp, const Policy& policy, const ActionValues& q) {
  PolicyTable table(mdp.num_states, std::vector<double>(mdp.num_actions, 0.0));
  std::vector<double> row(mdp.num_actions);
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    if (mdp.terminal[s]) continue;
    q.row(StateRef::tabular(s), row);
    policy.probabilities(row, table[s]);
  }
  return table;
}

PolicyTable greedy_policy_table(const TabularMDP& mdp, const ActionValues& q) {
  return policy_table(mdp, Policy::greedy(), q);
}

namespace {

// Value of an outcome's continuation under a state-value vector.
double continuation(const TabularMDP& mdp, const Outcome& o, std::span<const double> v) {
  if (o.terminal || mdp.terminal[o.next]) return 0.0;
  return v[o.next];
}

}  // namespace

std::vector<double> policy_evaluation(const TabularMDP& mdp, const PolicyTable& pi) {
  mdp.validate();
  const auto n = static_cast<Eigen::Index>(mdp.num_states);
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    if (mdp.terminal[s]) continue;
    const auto i = static_cast<Eigen::Index>(s);
    for (std::size_t act = 0; act < mdp.num_actions; ++act) {
      const double p_act = pi[s][act];
      if (p_act == 0.0) continue;
      for (const Outcome& o : mdp.outcomes(s, act)) {
        const double p = p_act * o.probability;
        b(i) += p * o.reward;
        if (!(o.terminal || mdp.terminal[o.next]))
          a(i, static_cast<Eigen::Index>(o.next)) -= mdp.gamma * p;
      }
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible())
    throw std::runtime_error("policy_evaluation: singular system (policy may never terminate)");
  const Eigen::VectorXd v = lu.solve(b);
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::vector<double> policy_evaluation(const TabularMDP& mdp, const Policy& policy,
                                      const ActionValues& q) {
  return policy_evaluation(mdp, policy_table(mdp, policy, q));
}

double bellman_residual(const TabularMDP& mdp, const ActionValues& q) {
  std::vector<double> v(mdp.num_states, 0.0);
  std::vector<double> row(mdp.num_actions);
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    if (mdp.terminal[s]) continue;
    q.row(StateRef::tabular(s), row);
    v[s] = *std::max_element(row.begin(), row.end());
  }
  double residual = 0.0;
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    if (mdp.terminal[s]) continue;
    for (std::size_t a = 0; a < mdp.num_actions; ++a) {
      double backup = 0.0;
      for (const Outcome& o : mdp.outcomes(s, a))
        backup += o.probability * (o.reward + mdp.gamma * continuation(mdp, o, v));
      residual = std::max(residual, std::abs(backup - q.value(StateRef::tabular(s), ActionId{a})));
    }
  }
  return residual;
}

ActionValues value_iteration(const TabularMDP& mdp, double tolerance, std::size_t max_sweeps) {
  mdp.validate();
  if (!(tolerance > 0.0)) throw ContractViolation("value_iteration: tolerance must be positive");
  const std::size_t ns = mdp.num_states, na = mdp.num_actions;
  std::vector<double> q(ns * na, 0.0);
  std::vector<double> v(ns, 0.0);

  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    for (std::size_t s = 0; s < ns; ++s) {
      if (mdp.terminal[s]) continue;
      double best = -INFINITY;
      for (std::size_t a = 0; a < na; ++a) {
        double backup = 0.0;
        for (const Outcome& o : mdp.outcomes(s, a))
          backup += o.probability * (o.reward + mdp.gamma * continuation(mdp, o, v));
        change = std::max(change, std::abs(backup - q[s * na + a]));
        q[s * na + a] = backup;
        best = std::max(best, backup);
      }
      v[s] = best;
    }
    // Gauss-Seidel changes bound the residual only loosely; confirm directly.
    if (change < tolerance / 4.0) {
      ActionValues out = ActionValues::tabular(ns, na);
      for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t a = 0; a < na; ++a)
          if (!mdp.terminal[s]) out.set(StateRef::tabular(s), ActionId{a}, q[s * na + a]);
      if (bellman_residual(mdp, out) < tolerance) return out;
    }
  }
  throw std::runtime_error("value_iteration: no convergence within " +
                           std::to_string(max_sweeps) + " sweeps");
}

double rms_state_value_error(const ActionValues& q, const Policy& policy,
                             std::span<const double> truth, const std::vector<bool>& skip) {
  if (!q.is_tabular() || truth.size() != q.num_states())
    throw std::invalid_argument("rms_state_value_error: truth length does not match state count");
  if (!skip.empty() && skip.size() != truth.size())
    throw std::invalid_argument("rms_state_value_error: mask length mismatch");
  std::vector<double> row(q.num_actions());
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t s = 0; s < truth.size(); ++s) {
    if (!skip.empty() && skip[s]) continue;
    q.row(StateRef::tabular(s), row);
    const double e = policy.expectation(row) - truth[s];
    sum += e * e;
    ++count;
  }
  return count == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(count));
}

}  // namespace qsigma
