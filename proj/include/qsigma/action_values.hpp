#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "qsigma/types.hpp"

namespace qsigma {

/// Maps a (state, action) pair to a fixed number of active binary features.
class Featurizer {
 public:
  virtual ~Featurizer() = default;

  virtual std::size_t num_features() const = 0;
  virtual std::size_t num_active() const = 0;
  virtual std::size_t num_actions() const = 0;

  /// Writes exactly num_active() feature indices into `out`.
  virtual void active_features(const StateRef& s, ActionId a,
                               std::span<std::size_t> out) const = 0;
};

/// One feature per (state, action); a linear model over it is a lookup table.
class OneHotFeaturizer final : public Featurizer {
 public:
  OneHotFeaturizer(std::size_t num_states, std::size_t num_actions)
      : num_states_(num_states), num_actions_(num_actions) {}

  std::size_t num_features() const override { return num_states_ * num_actions_; }
  std::size_t num_active() const override { return 1; }
  std::size_t num_actions() const override { return num_actions_; }
  void active_features(const StateRef& s, ActionId a,
                       std::span<std::size_t> out) const override;

 private:
  std::size_t num_states_;
  std::size_t num_actions_;
};

/// The action-value estimate Q. Either a |S|x|A| table or a weight vector over
/// a featurizer, where Q(s,a) is the sum of the active weights. Starts at zero.
class ActionValues {
 public:
  static constexpr std::size_t kMaxActive = 64;

  static ActionValues tabular(std::size_t num_states, std::size_t num_actions);
  static ActionValues linear(std::shared_ptr<const Featurizer> featurizer);

  bool is_tabular() const { return featurizer_ == nullptr; }
  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }

  double value(const StateRef& s, ActionId a) const;

  /// Q(s, .) for every action, written into `out` (size num_actions()).
  void row(const StateRef& s, std::span<double> out) const;

  /// Moves Q(s,a) by `step`. The linear form spreads the step evenly over the
  /// active features so that Q(s,a) itself moves by `step`.
  void apply_delta(const StateRef& s, ActionId a, double step);

  /// Direct write of a table entry. Tabular only.
  void set(const StateRef& s, ActionId a, double v);

  std::span<const double> raw() const { return data_; }

 private:
  ActionValues() = default;
  std::size_t table_offset(const StateRef& s, ActionId a) const;

  std::size_t num_states_ = 0;
  std::size_t num_actions_ = 0;
  std::vector<double> data_;
  std::shared_ptr<const Featurizer> featurizer_;
};

}  // namespace qsigma
