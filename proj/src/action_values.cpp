#include "qsigma/action_values.hpp"

#include <array>
#include <cmath>
#include <string>

namespace qsigma {

void OneHotFeaturizer::active_features(const StateRef& s, ActionId a,
                                       std::span<std::size_t> out) const {
  const std::size_t i = s.index();
  if (i >= num_states_ || a.index >= num_actions_)
    throw ContractViolation("OneHotFeaturizer: index out of range");
  out[0] = i * num_actions_ + a.index;
}

ActionValues ActionValues::tabular(std::size_t num_states, std::size_t num_actions) {
  if (num_states == 0 || num_actions == 0)
    throw ContractViolation("ActionValues: empty table");
  ActionValues q;
  q.num_states_ = num_states;
  q.num_actions_ = num_actions;
  q.data_.assign(num_states * num_actions, 0.0);
  return q;
}

ActionValues ActionValues::linear(std::shared_ptr<const Featurizer> featurizer) {
  if (!featurizer) throw ContractViolation("ActionValues: null featurizer");
  if (featurizer->num_active() == 0 || featurizer->num_active() > kMaxActive)
    throw ContractViolation("ActionValues: unsupported active feature count");
  ActionValues q;
  q.num_actions_ = featurizer->num_actions();
  q.data_.assign(featurizer->num_features(), 0.0);
  q.featurizer_ = std::move(featurizer);
  return q;
}

std::size_t ActionValues::table_offset(const StateRef& s, ActionId a) const {
  require_nonterminal(s, "q_value");
  const std::size_t i = s.index();
  if (i >= num_states_ || a.index >= num_actions_)
    throw ContractViolation("q_value: index out of range (state " + std::to_string(i) +
                            ", action " + std::to_string(a.index) + ")");
  return i * num_actions_ + a.index;
}

double ActionValues::value(const StateRef& s, ActionId a) const {
  if (is_tabular()) return data_[table_offset(s, a)];
  require_nonterminal(s, "q_value");
  if (a.index >= num_actions_) throw ContractViolation("q_value: action out of range");
  std::array<std::size_t, kMaxActive> idx{};
  const std::size_t k = featurizer_->num_active();
  featurizer_->active_features(s, a, std::span(idx.data(), k));
  double sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) sum += data_[idx[j]];
  return sum;
}

void ActionValues::row(const StateRef& s, std::span<double> out) const {
  if (out.size() != num_actions_) throw ContractViolation("row: buffer size mismatch");
  if (is_tabular()) {
    const std::size_t base = table_offset(s, ActionId{0});
    for (std::size_t a = 0; a < num_actions_; ++a) out[a] = data_[base + a];
    return;
  }
  for (std::size_t a = 0; a < num_actions_; ++a) out[a] = value(s, ActionId{a});
}

void ActionValues::apply_delta(const StateRef& s, ActionId a, double step) {
  if (!std::isfinite(step)) throw std::domain_error("q_apply_delta: non-finite step");
  if (is_tabular()) {
    data_[table_offset(s, a)] += step;
    return;
  }
  require_nonterminal(s, "q_apply_delta");
  if (a.index >= num_actions_) throw ContractViolation("q_apply_delta: action out of range");
  std::array<std::size_t, kMaxActive> idx{};
  const std::size_t k = featurizer_->num_active();
  featurizer_->active_features(s, a, std::span(idx.data(), k));
  const double per_feature = step / static_cast<double>(k);
  for (std::size_t j = 0; j < k; ++j) data_[idx[j]] += per_feature;
}

void ActionValues::set(const StateRef& s, ActionId a, double v) {
  if (!is_tabular()) throw ContractViolation("set: linear action values");
  data_[table_offset(s, a)] = v;
}

}  // namespace qsigma
