#include "qsigma/mdp.hpp"

#include <cmath>
#include <string>

#include "qsigma/types.hpp"

namespace qsigma {

TabularMDP::TabularMDP(std::size_t states, std::size_t actions, double discount)
    : num_states(states),
      num_actions(actions),
      gamma(discount),
      terminal(states, false),
      transitions(states * actions) {}

void TabularMDP::validate(double tolerance) const {
  if (num_states == 0 || num_actions == 0) throw ContractViolation("MDP is empty");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ContractViolation("MDP gamma must lie in [0, 1]");
  if (terminal.size() != num_states || transitions.size() != num_states * num_actions)
    throw ContractViolation("MDP tables have inconsistent sizes");
  for (std::size_t s = 0; s < num_states; ++s) {
    if (terminal[s]) continue;
    for (std::size_t a = 0; a < num_actions; ++a) {
      double total = 0.0;
      for (const Outcome& o : outcomes(s, a)) {
        if (o.next >= num_states || o.probability < 0.0)
          throw ContractViolation("MDP outcome out of range");
        total += o.probability;
      }
      if (std::abs(total - 1.0) > tolerance)
        throw ContractViolation("MDP row (" + std::to_string(s) + ", " + std::to_string(a) +
                                ") does not sum to 1");
    }
  }
}

}  // namespace qsigma
