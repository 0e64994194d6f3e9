#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>

namespace qsigma {

/// Raised when a caller breaks an operation's precondition (terminal state
/// passed where a non-terminal one is required, index out of range, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised by configuration loading and validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ActionId {
  std::size_t index = 0;

  friend bool operator==(ActionId, ActionId) = default;
};

/// Continuous states are two-dimensional (position, velocity) in every
/// environment shipped here.
using Coords = std::array<double, 2>;

/// A state observed from an environment. Tabular environments use the index
/// form; continuous ones carry coordinates. Terminal states only ever appear
/// as the result of a transition.
struct StateRef {
  std::variant<std::size_t, Coords> where{std::size_t{0}};
  bool terminal = false;

  static StateRef tabular(std::size_t index, bool terminal = false) {
    return StateRef{index, terminal};
  }
  static StateRef continuous(Coords coords, bool terminal = false) {
    return StateRef{coords, terminal};
  }

  bool is_tabular() const { return std::holds_alternative<std::size_t>(where); }
  std::size_t index() const {
    if (!is_tabular()) throw ContractViolation("state is not tabular");
    return std::get<std::size_t>(where);
  }
  const Coords& coords() const {
    if (is_tabular()) throw ContractViolation("state is not continuous");
    return std::get<Coords>(where);
  }

  friend bool operator==(const StateRef&, const StateRef&) = default;
};

inline void require_nonterminal(const StateRef& s, const char* what) {
  if (s.terminal) throw ContractViolation(std::string(what) + ": terminal state");
}

/// Seeded pseudo-random stream. Each experiment run owns one; identical seeds
/// and call sequences reproduce identical draws on every platform.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw ContractViolation("uniform_index: empty range");
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace qsigma
