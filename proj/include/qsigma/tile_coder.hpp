#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "qsigma/action_values.hpp"
#include "qsigma/types.hpp"

namespace qsigma {

/// Grid tile coder over a 2-D box.
///
/// Each dimension is scaled to [0, tiles_per_dim] tile units. Tiling i is
/// shifted along dimension d by ((2d + 1) * i mod num_tilings) / num_tilings
/// tile units, so every tiling needs tiles_per_dim + 1 cells per dimension.
/// Indices are laid out action-major, then tiling, then grid cell, which is
/// collision free by construction; `capacity` is the per-action block size.
class TileCoder final : public Featurizer {
 public:
  struct Range {
    double low;
    double high;
  };

  TileCoder(std::array<Range, 2> ranges, std::size_t num_actions, std::size_t num_tilings = 8,
            std::size_t tiles_per_dim = 8, std::size_t capacity = 4096);

  /// The configuration used for mountain cliff.
  static TileCoder mountain_cliff(std::size_t num_actions = 3);

  std::size_t num_tilings() const { return num_tilings_; }
  std::size_t tiles_per_dim() const { return tiles_per_dim_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t cells_per_tiling() const { return cells_per_dim_ * cells_per_dim_; }

  std::size_t num_features() const override { return capacity_ * num_actions_; }
  std::size_t num_active() const override { return num_tilings_; }
  std::size_t num_actions() const override { return num_actions_; }
  void active_features(const StateRef& s, ActionId a, std::span<std::size_t> out) const override;

  /// Indices for raw coordinates; coordinates outside the ranges are clamped.
  void active_tiles(const Coords& coords, ActionId a, std::span<std::size_t> out) const;
  std::vector<std::size_t> active_tiles(const Coords& coords, ActionId a) const;

 private:
  std::array<Range, 2> ranges_;
  std::size_t num_actions_;
  std::size_t num_tilings_;
  std::size_t tiles_per_dim_;
  std::size_t cells_per_dim_;
  std::size_t capacity_;
};

}  // namespace qsigma
