#include "qsigma/environments.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace qsigma {

void Environment::check_action(ActionId a) const {
  if (a.index >= num_actions())
    throw ContractViolation(std::string(name()) + ": invalid action " + std::to_string(a.index));
}

// ---------------------------------------------------------------------------
// Random walk

StateRef RandomWalkEnv::reset(RngStream&) const { return StateRef::tabular(kStates / 2); }

std::vector<Outcome> RandomWalkEnv::outcomes(std::size_t s, ActionId a) const {
  check_action(a);
  if (s >= kStates) throw ContractViolation("random walk: state out of range");
  if (a == kLeft) {
    if (s == 0) return {Outcome{s, 1.0, -1.0, true}};
    return {Outcome{s - 1, 1.0, 0.0, false}};
  }
  if (s + 1 == kStates) return {Outcome{s, 1.0, 1.0, true}};
  return {Outcome{s + 1, 1.0, 0.0, false}};
}

StepResult RandomWalkEnv::step(const StateRef& s, ActionId a, RngStream&) const {
  require_nonterminal(s, "random walk step");
  const Outcome o = outcomes(s.index(), a).front();
  return StepResult{o.reward, StateRef::tabular(o.next, o.terminal)};
}

std::vector<double> random_walk_true_values() {
  // v_i - v_{i-1}/2 - v_{i+1}/2 = b_i with exit rewards folded into b;
  // tridiagonal, solved by forward elimination and back substitution.
  constexpr std::size_t n = RandomWalkEnv::kStates;
  std::vector<double> diag(n, 1.0), rhs(n, 0.0), upper(n, -0.5);
  const double lower = -0.5;
  rhs.front() = 0.5 * -1.0;
  rhs.back() = 0.5 * 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double m = lower / diag[i - 1];
    diag[i] -= m * upper[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  std::vector<double> v(n);
  v[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) v[i] = (rhs[i] - upper[i] * v[i + 1]) / diag[i];
  return v;
}

// ---------------------------------------------------------------------------
// Windy gridworld

namespace {

constexpr std::array<std::array<int, 2>, 4> kMoves{{{0, -1}, {0, 1}, {-1, 0}, {1, 0}}};
constexpr std::array<std::array<int, 2>, 8> kNeighbours{
    {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};

std::size_t clamp_to(int v, std::size_t size) {
  return static_cast<std::size_t>(std::clamp(v, 0, static_cast<int>(size) - 1));
}

}  // namespace

std::size_t WindyGridworldEnv::windy_move(std::size_t s, ActionId a) {
  const int col = static_cast<int>(col_of(s));
  const int row = static_cast<int>(row_of(s));
  const auto [dc, dr] = kMoves[a.index];
  return cell(clamp_to(col + dc, kWidth), clamp_to(row + dr - kWind[col_of(s)], kHeight));
}

std::size_t WindyGridworldEnv::neighbour(std::size_t s, std::size_t k) {
  const auto [dc, dr] = kNeighbours[k];
  return cell(clamp_to(static_cast<int>(col_of(s)) + dc, kWidth),
              clamp_to(static_cast<int>(row_of(s)) + dr, kHeight));
}

StateRef WindyGridworldEnv::reset(RngStream&) const {
  return StateRef::tabular(cell(kStartCol, kStartRow));
}

StepResult WindyGridworldEnv::step(const StateRef& s, ActionId a, RngStream& rng) const {
  require_nonterminal(s, "windy gridworld step");
  check_action(a);
  const std::size_t from = s.index();
  if (from >= num_states()) throw ContractViolation("windy gridworld: state out of range");
  std::size_t to;
  if (stochastic_ && rng.uniform() < kJumpProbability)
    to = neighbour(from, rng.uniform_index(kNeighbours.size()));
  else
    to = windy_move(from, a);
  return StepResult{-1.0, StateRef::tabular(to, is_terminal_state(to))};
}

std::vector<Outcome> WindyGridworldEnv::outcomes(std::size_t s, ActionId a) const {
  check_action(a);
  if (s >= num_states()) throw ContractViolation("windy gridworld: state out of range");
  std::map<std::size_t, double> mass;
  mass[windy_move(s, a)] += stochastic_ ? 1.0 - kJumpProbability : 1.0;
  if (stochastic_) {
    const double each = kJumpProbability / static_cast<double>(kNeighbours.size());
    for (std::size_t k = 0; k < kNeighbours.size(); ++k) mass[neighbour(s, k)] += each;
  }
  std::vector<Outcome> out;
  for (const auto& [next, p] : mass) out.push_back(Outcome{next, p, -1.0, is_terminal_state(next)});
  return out;
}

// ---------------------------------------------------------------------------
// Mountain cliff

StateRef MountainCliffEnv::reset(RngStream& rng) const {
  return StateRef::continuous(Coords{rng.uniform(kStartLow, kStartHigh), 0.0});
}

StepResult MountainCliffEnv::step(const StateRef& s, ActionId a, RngStream& rng) const {
  require_nonterminal(s, "mountain cliff step");
  check_action(a);
  const auto [x, v] = s.coords();
  const double throttle = static_cast<double>(a.index) - 1.0;
  const double v_next =
      std::clamp(v + kForce * throttle - kGravity * std::cos(3.0 * x), -kMaxSpeed, kMaxSpeed);
  const double x_next = x + v_next;
  if (x_next >= kMaxPosition)
    return StepResult{kStepReward, StateRef::continuous(Coords{kMaxPosition, v_next}, true)};
  if (x_next <= kMinPosition) return StepResult{kCliffReward, reset(rng)};
  return StepResult{kStepReward, StateRef::continuous(Coords{x_next, v_next})};
}

// ---------------------------------------------------------------------------
// Explicit MDP

MdpEnvironment::MdpEnvironment(TabularMDP mdp, std::optional<std::size_t> start)
    : mdp_(std::move(mdp)), start_(start) {
  mdp_.validate();
  for (std::size_t s = 0; s < mdp_.num_states; ++s)
    if (!mdp_.terminal[s]) nonterminal_.push_back(s);
  if (nonterminal_.empty()) throw ContractViolation("MDP has no non-terminal states");
  if (start_ && (*start_ >= mdp_.num_states || mdp_.terminal[*start_]))
    throw ContractViolation("MDP start state must be a non-terminal state");
}

StateRef MdpEnvironment::reset(RngStream& rng) const {
  if (start_) return StateRef::tabular(*start_);
  return StateRef::tabular(nonterminal_[rng.uniform_index(nonterminal_.size())]);
}

StepResult MdpEnvironment::step(const StateRef& s, ActionId a, RngStream& rng) const {
  require_nonterminal(s, "MDP step");
  check_action(a);
  const auto& row = mdp_.outcomes(s.index(), a.index);
  const double u = rng.uniform();
  double acc = 0.0;
  const Outcome* pick = &row.back();
  for (const Outcome& o : row) {
    acc += o.probability;
    if (u < acc) {
      pick = &o;
      break;
    }
  }
  const bool terminal = pick->terminal || mdp_.terminal[pick->next];
  return StepResult{pick->reward, StateRef::tabular(pick->next, terminal)};
}

std::vector<Outcome> MdpEnvironment::outcomes(std::size_t s, ActionId a) const {
  check_action(a);
  return mdp_.outcomes(s, a.index);
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& environment_names() {
  static const std::vector<std::string> names{"random_walk_19", "windy_gridworld",
                                              "windy_gridworld_stochastic", "mountain_cliff"};
  return names;
}

std::unique_ptr<Environment> make_environment(std::string_view name) {
  if (name == "random_walk_19") return std::make_unique<RandomWalkEnv>();
  if (name == "windy_gridworld") return std::make_unique<WindyGridworldEnv>(false);
  if (name == "windy_gridworld_stochastic") return std::make_unique<WindyGridworldEnv>(true);
  if (name == "mountain_cliff") return std::make_unique<MountainCliffEnv>();
  throw ConfigError("unknown environment '" + std::string(name) + "'");
}

}  // namespace qsigma
