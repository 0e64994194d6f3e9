#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qsigma/mdp.hpp"
#include "qsigma/types.hpp"

namespace qsigma {

struct StepResult {
  double reward = 0.0;
  StateRef next;

  bool terminal() const { return next.terminal; }
};

/// Episodic environment contract. Environments keep no hidden episode state:
/// the caller passes the current state back into step().
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string_view name() const = 0;
  virtual std::size_t num_actions() const = 0;
  virtual bool is_tabular() const { return false; }
  virtual bool episodic() const { return true; }

  virtual StateRef reset(RngStream& rng) const = 0;
  virtual StepResult step(const StateRef& s, ActionId a, RngStream& rng) const = 0;

 protected:
  void check_action(ActionId a) const;
};

/// Environment whose full transition model can be listed.
class TabularEnvironment : public Environment {
 public:
  bool is_tabular() const override { return true; }
  virtual std::size_t num_states() const = 0;
  virtual std::vector<Outcome> outcomes(std::size_t s, ActionId a) const = 0;
  virtual bool is_terminal_state(std::size_t) const { return false; }
};

/// 19 states in a row, start in the middle. Left of state 0 ends with -1,
/// right of state 18 ends with +1; everything else pays 0.
class RandomWalkEnv final : public TabularEnvironment {
 public:
  static constexpr std::size_t kStates = 19;
  static constexpr ActionId kLeft{0};
  static constexpr ActionId kRight{1};

  std::string_view name() const override { return "random_walk_19"; }
  std::size_t num_actions() const override { return 2; }
  std::size_t num_states() const override { return kStates; }
  StateRef reset(RngStream& rng) const override;
  StepResult step(const StateRef& s, ActionId a, RngStream& rng) const override;
  std::vector<Outcome> outcomes(std::size_t s, ActionId a) const override;
};

/// State values of the random walk under the equiprobable policy, gamma = 1,
/// from a direct solve of the Bellman system.
std::vector<double> random_walk_true_values();

/// 10x7 windy gridworld. Row 0 is the top edge; wind pushes toward it.
/// The stochastic variant replaces the move with a uniformly chosen
/// neighbouring cell 10% of the time.
class WindyGridworldEnv final : public TabularEnvironment {
 public:
  static constexpr std::size_t kWidth = 10;
  static constexpr std::size_t kHeight = 7;
  static constexpr std::array<int, kWidth> kWind{0, 0, 0, 1, 1, 1, 2, 2, 1, 0};
  static constexpr std::size_t kStartCol = 0, kStartRow = 3;
  static constexpr std::size_t kGoalCol = 7, kGoalRow = 3;
  static constexpr double kJumpProbability = 0.1;
  enum Move : std::size_t { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

  explicit WindyGridworldEnv(bool stochastic = false) : stochastic_(stochastic) {}

  static std::size_t cell(std::size_t col, std::size_t row) { return row * kWidth + col; }
  static std::size_t col_of(std::size_t index) { return index % kWidth; }
  static std::size_t row_of(std::size_t index) { return index / kWidth; }

  bool stochastic() const { return stochastic_; }
  std::string_view name() const override {
    return stochastic_ ? "windy_gridworld_stochastic" : "windy_gridworld";
  }
  std::size_t num_actions() const override { return 4; }
  std::size_t num_states() const override { return kWidth * kHeight; }
  bool is_terminal_state(std::size_t s) const override { return s == cell(kGoalCol, kGoalRow); }

  StateRef reset(RngStream& rng) const override;
  StepResult step(const StateRef& s, ActionId a, RngStream& rng) const override;
  std::vector<Outcome> outcomes(std::size_t s, ActionId a) const override;

  /// Move plus origin-column wind, clamped to the grid.
  static std::size_t windy_move(std::size_t s, ActionId a);
  /// The k-th (0..7) Moore neighbour of s, clamped to the grid.
  static std::size_t neighbour(std::size_t s, std::size_t k);

 private:
  bool stochastic_;
};

/// Mountain car with a cliff beyond the left hill: crossing x <= -1.2 costs
/// -100 and drops the car back into the valley without ending the episode.
class MountainCliffEnv final : public Environment {
 public:
  static constexpr double kMinPosition = -1.2, kMaxPosition = 0.5;
  static constexpr double kMaxSpeed = 0.07;
  static constexpr double kForce = 0.001, kGravity = 0.0025;
  static constexpr double kStartLow = -0.6, kStartHigh = -0.4;
  static constexpr double kStepReward = -1.0, kCliffReward = -100.0;

  std::string_view name() const override { return "mountain_cliff"; }
  std::size_t num_actions() const override { return 3; }
  StateRef reset(RngStream& rng) const override;
  StepResult step(const StateRef& s, ActionId a, RngStream& rng) const override;
};

/// Samples an explicit TabularMDP. Starts in `start` or, when none is given,
/// in a uniformly drawn non-terminal state.
class MdpEnvironment final : public TabularEnvironment {
 public:
  explicit MdpEnvironment(TabularMDP mdp, std::optional<std::size_t> start = std::nullopt);

  const TabularMDP& mdp() const { return mdp_; }
  std::string_view name() const override { return "tabular_mdp"; }
  std::size_t num_actions() const override { return mdp_.num_actions; }
  std::size_t num_states() const override { return mdp_.num_states; }
  bool is_terminal_state(std::size_t s) const override { return mdp_.terminal[s]; }
  StateRef reset(RngStream& rng) const override;
  StepResult step(const StateRef& s, ActionId a, RngStream& rng) const override;
  std::vector<Outcome> outcomes(std::size_t s, ActionId a) const override;

 private:
  TabularMDP mdp_;
  std::optional<std::size_t> start_;
  std::vector<std::size_t> nonterminal_;
};

const std::vector<std::string>& environment_names();
/// Throws ConfigError for unknown names.
std::unique_ptr<Environment> make_environment(std::string_view name);

}  // namespace qsigma
