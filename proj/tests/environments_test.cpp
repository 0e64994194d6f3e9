#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "qsigma/environments.hpp"
#include "qsigma/oracle.hpp"

using namespace qsigma;

namespace {

using Windy = WindyGridworldEnv;

// Transition table built from the textbook description: move, then the
// origin column's wind pushes up, then clamp.
std::size_t textbook_windy(std::size_t col, std::size_t row, std::size_t action) {
  static const int wind[10] = {0, 0, 0, 1, 1, 1, 2, 2, 1, 0};
  static const int dc[4] = {0, 0, -1, 1};
  static const int dr[4] = {-1, 1, 0, 0};
  const int c = std::clamp(static_cast<int>(col) + dc[action], 0, 9);
  const int r = std::clamp(static_cast<int>(row) + dr[action] - wind[col], 0, 6);
  return static_cast<std::size_t>(r * 10 + c);
}

// Expected absorption time of the symmetric walk from every state,
// t_i = 1 + t_{i-1}/2 + t_{i+1}/2 with t = 0 outside, by Gauss-Seidel.
std::vector<double> expected_walk_lengths(std::size_t n) {
  std::vector<double> t(n, 0.0);
  for (int sweep = 0; sweep < 200'000; ++sweep) {
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double left = i == 0 ? 0.0 : t[i - 1];
      const double right = i + 1 == n ? 0.0 : t[i + 1];
      const double next = 1.0 + 0.5 * (left + right);
      change = std::max(change, std::abs(next - t[i]));
      t[i] = next;
    }
    if (change < 1e-12) break;
  }
  return t;
}

}  // namespace

TEST(RandomWalk, ResetAndExits) {
  const RandomWalkEnv env;
  RngStream rng(1);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(env.reset(rng), StateRef::tabular(9));

  const StepResult right = env.step(StateRef::tabular(18), RandomWalkEnv::kRight, rng);
  EXPECT_EQ(right.reward, 1.0);
  EXPECT_TRUE(right.terminal());
  const StepResult left = env.step(StateRef::tabular(0), RandomWalkEnv::kLeft, rng);
  EXPECT_EQ(left.reward, -1.0);
  EXPECT_TRUE(left.terminal());

  for (std::size_t s = 1; s + 1 < 19; ++s) {
    const StepResult l = env.step(StateRef::tabular(s), RandomWalkEnv::kLeft, rng);
    const StepResult r = env.step(StateRef::tabular(s), RandomWalkEnv::kRight, rng);
    EXPECT_EQ(l.reward, 0.0);
    EXPECT_EQ(r.reward, 0.0);
    EXPECT_EQ(l.next, StateRef::tabular(s - 1));
    EXPECT_EQ(r.next, StateRef::tabular(s + 1));
  }
  EXPECT_THROW(env.step(StateRef::tabular(3), ActionId{2}, rng), ContractViolation);
}

TEST(RandomWalk, TrueValues) {
  const std::vector<double> v = random_walk_true_values();
  ASSERT_EQ(v.size(), 19u);
  for (std::size_t i = 0; i < 19; ++i) EXPECT_NEAR(v[i], (i + 1) / 10.0 - 1.0, 1e-12) << i;
  EXPECT_NEAR(v[9], 0.0, 1e-12);
  EXPECT_NEAR(std::accumulate(v.begin(), v.end(), 0.0), 0.0, 1e-12);
}

TEST(RandomWalk, EpisodeLengthMatchesAbsorptionTime) {
  const double expected = expected_walk_lengths(19)[9];
  EXPECT_NEAR(expected, 100.0, 1e-6);

  const RandomWalkEnv env;
  RngStream rng(2);
  const int episodes = 10'000;
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    StateRef s = env.reset(rng);
    for (;;) {
      const ActionId a{rng.uniform_index(2)};
      const StepResult r = env.step(s, a, rng);
      total += 1.0;
      if (r.terminal()) break;
      s = r.next;
    }
  }
  EXPECT_NEAR(total / episodes, expected, 5.0);
}

TEST(WindyGridworld, TransitionsMatchTextbookTable) {
  const Windy env(false);
  RngStream rng(3);
  EXPECT_EQ(env.reset(rng), StateRef::tabular(Windy::cell(0, 3)));
  for (std::size_t row = 0; row < 7; ++row) {
    for (std::size_t col = 0; col < 10; ++col) {
      const std::size_t s = Windy::cell(col, row);
      if (env.is_terminal_state(s)) continue;
      for (std::size_t a = 0; a < 4; ++a) {
        const StepResult r = env.step(StateRef::tabular(s), ActionId{a}, rng);
        EXPECT_EQ(r.next.index(), textbook_windy(col, row, a)) << col << "," << row << "," << a;
        EXPECT_EQ(r.reward, -1.0);
        EXPECT_EQ(r.terminal(), r.next.index() == Windy::cell(7, 3));
      }
    }
  }
  // A few by hand: wind 2 carries a rightward move two rows up.
  EXPECT_EQ(Windy::windy_move(Windy::cell(6, 3), ActionId{Windy::kRight}), Windy::cell(7, 1));
  EXPECT_EQ(Windy::windy_move(Windy::cell(5, 0), ActionId{Windy::kUp}), Windy::cell(5, 0));
  EXPECT_EQ(Windy::windy_move(Windy::cell(9, 6), ActionId{Windy::kRight}), Windy::cell(9, 6));
}

TEST(WindyGridworld, DeterministicTrajectoriesRepeat) {
  const Windy env(false);
  const std::vector<std::size_t> actions{3, 3, 3, 0, 3, 3, 1, 1, 3, 3, 2, 1, 1, 1};
  std::vector<std::size_t> first, second;
  for (auto* out : {&first, &second}) {
    RngStream rng(out == &first ? 4 : 5);
    StateRef s = env.reset(rng);
    for (std::size_t a : actions) {
      const StepResult r = env.step(s, ActionId{a}, rng);
      out->push_back(r.next.index());
      if (r.terminal()) break;
      s = r.next;
    }
  }
  EXPECT_EQ(first, second);
}

TEST(WindyGridworld, JumpFrequencyAndNeighbourUniformity) {
  const Windy env(true);
  RngStream rng(6);
  // From (6, 5) moving up, the windy move lands three rows up, which is not
  // a neighbour, so every neighbour outcome is a jump.
  const std::size_t from = Windy::cell(6, 5);
  const std::size_t windy = Windy::windy_move(from, ActionId{Windy::kUp});
  ASSERT_EQ(windy, Windy::cell(6, 2));
  std::map<std::size_t, int> jumps;
  const int n = 1'000'000;
  int jumped = 0;
  for (int i = 0; i < n; ++i) {
    const StepResult r = env.step(StateRef::tabular(from), ActionId{Windy::kUp}, rng);
    if (r.next.index() != windy) {
      ++jumped;
      ++jumps[r.next.index()];
    }
  }
  EXPECT_NEAR(static_cast<double>(jumped) / n, 0.10, 0.001);
  ASSERT_EQ(jumps.size(), 8u);
  for (const auto& [cell, count] : jumps) {
    const int dc = static_cast<int>(Windy::col_of(cell)) - 6;
    const int dr = static_cast<int>(Windy::row_of(cell)) - 5;
    EXPECT_LE(std::max(std::abs(dc), std::abs(dr)), 1);
    const double p = static_cast<double>(count) / jumped;
    EXPECT_NEAR(p, 0.125, 4.0 * std::sqrt(0.125 * 0.875 / jumped)) << cell;
  }
}

TEST(WindyGridworld, CornerJumpsAreClamped) {
  const Windy env(true);
  const std::vector<Outcome> row = env.outcomes(Windy::cell(0, 0), ActionId{Windy::kDown});
  double total = 0.0;
  std::map<std::size_t, double> mass;
  for (const Outcome& o : row) {
    total += o.probability;
    mass[o.next] += o.probability;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  // Three of the eight neighbours clamp back onto the corner itself, two
  // onto each of its edge neighbours.
  EXPECT_NEAR(mass[Windy::cell(0, 0)], 3 * 0.1 / 8, 1e-15);
  EXPECT_NEAR(mass[Windy::cell(1, 0)], 2 * 0.1 / 8, 1e-15);
  EXPECT_NEAR(mass[Windy::cell(0, 1)], 0.9 + 2 * 0.1 / 8, 1e-15);
  EXPECT_NEAR(mass[Windy::cell(1, 1)], 0.1 / 8, 1e-15);
}

TEST(MountainCliff, ResetDistribution) {
  const MountainCliffEnv env;
  RngStream rng(7);
  const int n = 100'000;
  std::vector<double> xs(n);
  for (double& x : xs) {
    const StateRef s = env.reset(rng);
    x = s.coords()[0];
    ASSERT_EQ(s.coords()[1], 0.0);
    ASSERT_FALSE(s.terminal);
  }
  std::sort(xs.begin(), xs.end());
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    const double cdf = (xs[i] + 0.6) / 0.2;
    d = std::max({d, std::abs(cdf - static_cast<double>(i) / n),
                  std::abs(cdf - static_cast<double>(i + 1) / n)});
  }
  // Kolmogorov-Smirnov critical value at the 1% level.
  EXPECT_LT(d, 1.628 / std::sqrt(static_cast<double>(n)));
  EXPECT_GE(xs.front(), -0.6);
  EXPECT_LE(xs.back(), -0.4);
}

TEST(MountainCliff, CliffSendsBackToTheValley) {
  const MountainCliffEnv env;
  RngStream rng(8);
  for (int i = 0; i < 1000; ++i) {
    const StepResult r = env.step(StateRef::continuous({-1.19, -0.07}), ActionId{1}, rng);
    EXPECT_EQ(r.reward, -100.0);
    EXPECT_FALSE(r.terminal());
    EXPECT_GE(r.next.coords()[0], -0.6);
    EXPECT_LE(r.next.coords()[0], -0.4);
    EXPECT_EQ(r.next.coords()[1], 0.0);
  }
}

TEST(MountainCliff, DynamicsAndGoal) {
  const MountainCliffEnv env;
  RngStream rng(9);
  const StepResult r = env.step(StateRef::continuous({-0.5, 0.0}), ActionId{2}, rng);
  const double v = 0.001 - 0.0025 * std::cos(-1.5);
  EXPECT_EQ(r.reward, -1.0);
  EXPECT_NEAR(r.next.coords()[1], v, 1e-15);
  EXPECT_NEAR(r.next.coords()[0], -0.5 + v, 1e-15);

  const StepResult goal = env.step(StateRef::continuous({0.49, 0.05}), ActionId{2}, rng);
  EXPECT_EQ(goal.reward, -1.0);
  EXPECT_TRUE(goal.terminal());
  EXPECT_THROW(env.step(goal.next, ActionId{0}, rng), ContractViolation);
  EXPECT_THROW(env.step(StateRef::continuous({-0.5, 0.0}), ActionId{3}, rng), ContractViolation);
}

TEST(MountainCliff, CoastingStaysInBounds) {
  const MountainCliffEnv env;
  RngStream rng(10);
  StateRef s = StateRef::continuous({rng.uniform(-1.1, 0.4), rng.uniform(-0.07, 0.07)});
  int cliffs = 0;
  for (int i = 0; i < 100'000; ++i) {
    const StepResult r = env.step(s, ActionId{1}, rng);
    const auto [x, v] = r.next.coords();
    ASSERT_LE(std::abs(v), 0.07);
    ASSERT_GE(x, -1.2);
    ASSERT_LE(x, 0.5);
    ASSERT_TRUE(r.reward == -1.0 || r.reward == -100.0);
    cliffs += r.reward == -100.0;
    s = r.terminal() ? env.reset(rng) : r.next;
  }
  SUCCEED() << cliffs << " cliff falls";
}

TEST(Environments, ByName) {
  for (const std::string& name : environment_names()) {
    const auto env = make_environment(name);
    ASSERT_NE(env, nullptr);
    EXPECT_EQ(env->name(), name);
  }
  EXPECT_THROW(make_environment("mountain_car"), ConfigError);
}
