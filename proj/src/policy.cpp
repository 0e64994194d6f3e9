#include "qsigma/policy.hpp"

#include <algorithm>
#include <array>
#include <vector>

namespace qsigma {

namespace {

void check_epsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw ContractViolation("epsilon must lie in [0, 1]");
}

double row_max(std::span<const double> q_row) {
  return *std::max_element(q_row.begin(), q_row.end());
}

std::size_t count_maximizers(std::span<const double> q_row, double best) {
  return static_cast<std::size_t>(std::count(q_row.begin(), q_row.end(), best));
}

}  // namespace

Policy Policy::epsilon_greedy(double epsilon) {
  check_epsilon(epsilon);
  return Policy(Kind::epsilon_greedy, epsilon);
}

void Policy::set_epsilon(double epsilon) {
  if (kind_ != Kind::epsilon_greedy) throw ContractViolation("set_epsilon: not epsilon-greedy");
  check_epsilon(epsilon);
  epsilon_ = epsilon;
}

void Policy::probabilities(std::span<const double> q_row, std::span<double> out) const {
  const std::size_t k = q_row.size();
  if (k == 0 || out.size() != k) throw ContractViolation("probabilities: bad row size");
  const double uniform = 1.0 / static_cast<double>(k);
  if (kind_ == Kind::equiprobable) {
    std::fill(out.begin(), out.end(), uniform);
    return;
  }
  const double best = row_max(q_row);
  const double greedy_share = (1.0 - epsilon_) / static_cast<double>(count_maximizers(q_row, best));
  const double explore = epsilon_ * uniform;
  for (std::size_t a = 0; a < k; ++a)
    out[a] = q_row[a] == best ? explore + greedy_share : explore;
}

double Policy::prob(std::span<const double> q_row, ActionId a) const {
  const std::size_t k = q_row.size();
  if (a.index >= k) throw ContractViolation("policy_prob: action out of range");
  if (kind_ == Kind::equiprobable) return 1.0 / static_cast<double>(k);
  const double best = row_max(q_row);
  const double explore = epsilon_ * (1.0 / static_cast<double>(k));
  if (q_row[a.index] != best) return explore;
  return explore + (1.0 - epsilon_) / static_cast<double>(count_maximizers(q_row, best));
}

ActionId Policy::sample(std::span<const double> q_row, RngStream& rng) const {
  const std::size_t k = q_row.size();
  if (k == 0) throw ContractViolation("policy_sample: no actions");
  if (kind_ == Kind::equiprobable || rng.uniform() < epsilon_)
    return ActionId{rng.uniform_index(k)};

  const double best = row_max(q_row);
  const std::size_t ties = count_maximizers(q_row, best);
  std::size_t pick = ties > 1 ? rng.uniform_index(ties) : 0;
  for (std::size_t a = 0; a < k; ++a) {
    if (q_row[a] != best) continue;
    if (pick == 0) return ActionId{a};
    --pick;
  }
  return ActionId{k - 1};  // unreachable
}

double Policy::expectation(std::span<const double> q_row) const {
  const std::size_t k = q_row.size();
  if (k == 0) throw ContractViolation("expectation: no actions");
  if (kind_ == Kind::equiprobable) {
    const double uniform = 1.0 / static_cast<double>(k);
    double v = 0.0;
    for (double q : q_row) v += uniform * q;
    return v;
  }
  const double best = row_max(q_row);
  const double explore = epsilon_ * (1.0 / static_cast<double>(k));
  const double greedy_share = (1.0 - epsilon_) / static_cast<double>(count_maximizers(q_row, best));
  double v = 0.0;
  for (std::size_t a = 0; a < k; ++a)
    v += (q_row[a] == best ? explore + greedy_share : explore) * q_row[a];
  return v;
}

namespace {

template <class F>
auto with_row(const ActionValues& q, const StateRef& s, const char* what, F&& f) {
  require_nonterminal(s, what);
  std::array<double, 16> small{};
  std::vector<double> large;
  std::span<double> row;
  if (q.num_actions() <= small.size()) {
    row = std::span(small.data(), q.num_actions());
  } else {
    large.resize(q.num_actions());
    row = large;
  }
  q.row(s, row);
  return f(std::span<const double>(row));
}

}  // namespace

double policy_prob(const Policy& policy, const ActionValues& q, const StateRef& s, ActionId a) {
  return with_row(q, s, "policy_prob", [&](std::span<const double> row) {
    return policy.prob(row, a);
  });
}

ActionId policy_sample(const Policy& policy, const ActionValues& q, const StateRef& s,
                       RngStream& rng) {
  return with_row(q, s, "policy_sample", [&](std::span<const double> row) {
    return policy.sample(row, rng);
  });
}

}  // namespace qsigma
