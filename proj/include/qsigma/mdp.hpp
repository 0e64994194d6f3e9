#pragma once

#include <cstddef>
#include <vector>

namespace qsigma {

/// One possible result of taking an action. A terminal outcome ends the
/// episode; its `next` index carries no value.
struct Outcome {
  std::size_t next = 0;
  double probability = 1.0;
  double reward = 0.0;
  bool terminal = false;
};

/// Explicit finite MDP: p(s'|s,a), rewards, terminal flags and discount.
struct TabularMDP {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  double gamma = 1.0;
  std::vector<bool> terminal;
  std::vector<std::vector<Outcome>> transitions;  // indexed s * num_actions + a

  TabularMDP() = default;
  TabularMDP(std::size_t states, std::size_t actions, double discount);

  std::vector<Outcome>& outcomes(std::size_t s, std::size_t a) {
    return transitions[s * num_actions + a];
  }
  const std::vector<Outcome>& outcomes(std::size_t s, std::size_t a) const {
    return transitions[s * num_actions + a];
  }

  /// Checks that every non-terminal row is a probability distribution.
  void validate(double tolerance = 1e-12) const;
};

}  // namespace qsigma
