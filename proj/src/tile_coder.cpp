#include "qsigma/tile_coder.hpp"

#include <algorithm>
#include <cmath>

#include "qsigma/environments.hpp"

namespace qsigma {

TileCoder::TileCoder(std::array<Range, 2> ranges, std::size_t num_actions, std::size_t num_tilings,
                     std::size_t tiles_per_dim, std::size_t capacity)
    : ranges_(ranges),
      num_actions_(num_actions),
      num_tilings_(num_tilings),
      tiles_per_dim_(tiles_per_dim),
      cells_per_dim_(tiles_per_dim + 1),
      capacity_(capacity) {
  if (num_actions == 0 || num_tilings == 0 || tiles_per_dim == 0)
    throw ContractViolation("TileCoder: sizes must be positive");
  for (const Range& r : ranges_)
    if (!(r.high > r.low)) throw ContractViolation("TileCoder: empty range");
  if (num_tilings_ * cells_per_tiling() > capacity_)
    throw ContractViolation("TileCoder: capacity too small for collision-free indexing");
}

TileCoder TileCoder::mountain_cliff(std::size_t num_actions) {
  return TileCoder({Range{MountainCliffEnv::kMinPosition, MountainCliffEnv::kMaxPosition},
                    Range{-MountainCliffEnv::kMaxSpeed, MountainCliffEnv::kMaxSpeed}},
                   num_actions);
}

void TileCoder::active_tiles(const Coords& coords, ActionId a, std::span<std::size_t> out) const {
  if (a.index >= num_actions_) throw ContractViolation("TileCoder: action out of range");
  if (out.size() < num_tilings_) throw ContractViolation("TileCoder: output buffer too small");

  std::array<double, 2> units{};
  for (std::size_t d = 0; d < 2; ++d) {
    const Range& r = ranges_[d];
    const double x = std::clamp(coords[d], r.low, r.high);
    units[d] = (x - r.low) / (r.high - r.low) * static_cast<double>(tiles_per_dim_);
  }

  const std::size_t base = a.index * capacity_;
  const auto tilings = static_cast<double>(num_tilings_);
  for (std::size_t i = 0; i < num_tilings_; ++i) {
    std::size_t cell = 0;
    for (std::size_t d = 0; d < 2; ++d) {
      const std::size_t shift = ((2 * d + 1) * i) % num_tilings_;
      auto c = static_cast<std::size_t>(std::floor(units[d] + static_cast<double>(shift) / tilings));
      c = std::min(c, cells_per_dim_ - 1);
      cell = cell * cells_per_dim_ + c;
    }
    out[i] = base + i * cells_per_tiling() + cell;
  }
}

std::vector<std::size_t> TileCoder::active_tiles(const Coords& coords, ActionId a) const {
  std::vector<std::size_t> out(num_tilings_);
  active_tiles(coords, a, out);
  return out;
}

void TileCoder::active_features(const StateRef& s, ActionId a, std::span<std::size_t> out) const {
  active_tiles(s.coords(), a, out);
}

}  // namespace qsigma
