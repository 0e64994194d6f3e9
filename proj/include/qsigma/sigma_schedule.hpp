#pragma once

#include <cstddef>
#include <functional>
#include <string>

namespace qsigma {

/// Source of the per-step degree of sampling sigma in [0, 1].
///
/// `constant` and `episode_decay` are the schedules used by the experiments;
/// `custom` draws a value per query and exists for tests that need arbitrary
/// per-step sigma sequences.
class SigmaSchedule {
 public:
  static SigmaSchedule constant(double sigma);
  /// Emits initial * factor^k during episode k (0-indexed).
  static SigmaSchedule episode_decay(double initial, double factor);
  static SigmaSchedule custom(std::function<double()> draw);

  /// Sigma for the next time step.
  double next();
  /// Current value without consuming anything (custom schedules draw anew).
  double current() const { return value_; }
  void on_episode_end();

  std::size_t episodes_completed() const { return episodes_; }
  bool is_constant() const { return kind_ == Kind::constant; }
  std::string describe() const;

 private:
  enum class Kind { constant, episode_decay, custom };
  SigmaSchedule(Kind kind, double value, double factor)
      : kind_(kind), value_(value), initial_(value), factor_(factor) {}

  Kind kind_;
  double value_;
  double initial_;
  double factor_;
  std::size_t episodes_ = 0;
  std::function<double()> draw_;
};

}  // namespace qsigma
