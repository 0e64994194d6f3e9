#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qsigma/action_values.hpp"
#include "qsigma/environments.hpp"
#include "qsigma/mdp.hpp"
#include "qsigma/policy.hpp"

namespace qsigma {

/// pi(a|s) for every state: table[s][a].
using PolicyTable = std::vector<std::vector<double>>;

/// Exact transition model of a tabular environment. Throws ContractViolation
/// for continuous environments.
TabularMDP enumerate_mdp(const Environment& env, double gamma = 1.0);

/// Tabulates `policy` against `q` at every non-terminal state.
PolicyTable policy_table(const TabularMDP& mdp, const Policy& policy, const ActionValues& q);
/// Greedy policy with respect to `q`, ties split equally.
PolicyTable greedy_policy_table(const TabularMDP& mdp, const ActionValues& q);

/// Solves v = r_pi + gamma P_pi v directly. Terminal states have value 0.
/// Throws std::runtime_error when the system is singular (a gamma = 1 policy
/// that can avoid termination forever).
std::vector<double> policy_evaluation(const TabularMDP& mdp, const PolicyTable& pi);
std::vector<double> policy_evaluation(const TabularMDP& mdp, const Policy& policy,
                                      const ActionValues& q);

/// Sup-norm of T Q - Q for the Bellman optimality operator T.
double bellman_residual(const TabularMDP& mdp, const ActionValues& q);

/// Optimal action values by Gauss-Seidel value iteration until the Bellman
/// residual falls below `tolerance`. Throws std::runtime_error if that takes
/// more than `max_sweeps` sweeps.
ActionValues value_iteration(const TabularMDP& mdp, double tolerance,
                             std::size_t max_sweeps = 1'000'000);

/// RMS over states of (sum_a pi(a|s) Q(s,a) - truth[s]). States flagged in
/// `skip` (if given) are left out.
double rms_state_value_error(const ActionValues& q, const Policy& policy,
                             std::span<const double> truth, const std::vector<bool>& skip = {});

}  // namespace qsigma
