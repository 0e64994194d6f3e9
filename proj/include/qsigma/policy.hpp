#pragma once

#include <span>

#include "qsigma/action_values.hpp"
#include "qsigma/types.hpp"

namespace qsigma {

/// Action-selection distribution over a row of action values.
///
/// Ties in the greedy part split the (1 - epsilon) mass equally among all
/// maximizers, and sampling picks uniformly among them. With a freshly zeroed
/// Q every action ties, so the epsilon-greedy policy starts out equiprobable.
class Policy {
 public:
  enum class Kind { equiprobable, epsilon_greedy };

  static Policy equiprobable() { return Policy(Kind::equiprobable, 1.0); }
  static Policy epsilon_greedy(double epsilon);
  static Policy greedy() { return epsilon_greedy(0.0); }

  Kind kind() const { return kind_; }
  double epsilon() const { return epsilon_; }
  void set_epsilon(double epsilon);

  void probabilities(std::span<const double> q_row, std::span<double> out) const;
  double prob(std::span<const double> q_row, ActionId a) const;
  ActionId sample(std::span<const double> q_row, RngStream& rng) const;

  /// Sum over actions of prob(a) * q_row[a].
  double expectation(std::span<const double> q_row) const;

 private:
  Policy(Kind kind, double epsilon) : kind_(kind), epsilon_(epsilon) {}

  Kind kind_;
  double epsilon_;
};

double policy_prob(const Policy& policy, const ActionValues& q, const StateRef& s, ActionId a);
ActionId policy_sample(const Policy& policy, const ActionValues& q, const StateRef& s,
                       RngStream& rng);

}  // namespace qsigma
