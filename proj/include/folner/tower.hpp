#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "folner/odometer.hpp"

namespace folner {

// Shape S in G plus clopen base V; the levels sV must be pairwise
// disjoint. Shapes are shared so castles with thousands of towers of one
// common shape stay small.
class Tower {
 public:
  Tower() = default;
  Tower(FiniteSubset shape, ClopenSet base)
      : shape_(std::make_shared<const FiniteSubset>(std::move(shape))),
        base_(std::move(base)) {}
  Tower(std::shared_ptr<const FiniteSubset> shape, ClopenSet base)
      : shape_(std::move(shape)), base_(std::move(base)) {}

  const FiniteSubset& shape() const {
    static const FiniteSubset kEmpty;
    return shape_ ? *shape_ : kEmpty;
  }
  const std::shared_ptr<const FiniteSubset>& shape_ptr() const { return shape_; }
  const ClopenSet& base() const { return base_; }

 private:
  std::shared_ptr<const FiniteSubset> shape_;
  ClopenSet base_;
};

struct Castle {
  std::vector<Tower> towers;
};

// Exact pairwise disjointness of the levels sV.
bool check_tower(const OdometerSpace& space, const GroupContext& ctx,
                 const Tower& tower);

// Every tower valid and footprints S_i V_i pairwise disjoint, decided by
// painting cells at the common refinement depth.
bool check_castle(const OdometerSpace& space, const GroupContext& ctx,
                  const Castle& castle);

// Union of the tower's levels (small instances; enumeration-capped).
ClopenSet tower_footprint(const OdometerSpace& space, const GroupContext& ctx,
                          const Tower& tower);

// For each w in the window, the index of the tower whose base contains
// w*x, if any. Bases are assumed disjoint (castle invariant).
std::vector<std::optional<std::size_t>> locate_patch(const OdometerSpace& space,
                                                     const GroupContext& ctx,
                                                     const Point& x,
                                                     const FiniteSubset& window,
                                                     const Castle& castle);

struct InitialCastleOptions {
  int min_h_depth = 1;
  int min_z_depth = 0;
  // Refusal threshold for the shape box; deeper shapes are unusable
  // downstream anyway.
  std::int64_t max_shape_cells = 1 << 24;
};

struct InitialCastleResult {
  Castle castle;
  int h_depth = 0;
  int z_depth = 0;
};

// Full-footprint Rokhlin castle for the H-subaction: the shape is the
// residue box mod p^m with m raised until (inv_K, inv_delta)-invariance
// holds, bases are the cylinders {x_H = 0 mod p^m} split in the Z-factor
// (one tower per z-residue) to the least depth making
// (freeness_window * S, V) a tower. Footprint is the whole space.
InitialCastleResult build_initial_castle(const OdometerSpace& space,
                                         const GroupContext& ctx,
                                         const FiniteSubset& inv_K,
                                         const Rational& inv_delta,
                                         const FiniteSubset& freeness_window,
                                         const InitialCastleOptions& opts = {});

}  // namespace folner
