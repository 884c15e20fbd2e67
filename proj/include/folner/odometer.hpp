#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "folner/group.hpp"
#include "folner/rational.hpp"

namespace folner {

// Product of a rank-d p-adic odometer (the H-factor) and, for semidirect
// contexts, a separate rank-1 q-adic odometer (the Z-factor). H acts by
// translation on the H-factor; g acts by alpha on the H-factor and by +1
// on the Z-factor. Every group element has integer coordinates, so it
// maps depth-m cylinders to depth-m cylinders bijectively; the whole
// clopen algebra is exact at a fixed depth.
struct OdometerSpace {
  int h_rank = 1;
  Coord h_prime = 2;
  bool has_z = false;
  Coord z_prime = 2;
  int max_h_depth = 24;
  int max_z_depth = 24;

  static OdometerSpace for_context(const GroupContext& ctx, Coord h_prime,
                                   Coord z_prime);

  // p^depth / q^depth with overflow checks.
  Coord h_mod(int depth) const;
  Coord z_mod(int depth) const;
  // Total number of cells at the given depths; fits in __int128 by the
  // depth caps.
  __int128 cell_count(int h_depth, int z_depth) const;

  bool operator==(const OdometerSpace&) const = default;
};

// One cylinder at a fixed pair of depths: h holds d residues mod p^mh,
// z a residue mod q^mz (z = 0 when the space has no Z-factor).
struct Cell {
  Vec h;
  Coord z = 0;

  bool operator==(const Cell&) const = default;
  bool operator<(const Cell& o) const {
    if (h != o.h) return h < o.h;
    return z < o.z;
  }
};

// A point known to finite depth: its residue tower truncated at
// (h_depth, z_depth).
struct Point {
  Vec h;
  Coord z = 0;
  int h_depth = 0;
  int z_depth = 0;

  bool operator==(const Point&) const = default;
};

// Finite union of depth-(h_depth, z_depth) cylinders, stored as sorted
// distinct cells.
class ClopenSet {
 public:
  ClopenSet() = default;

  static ClopenSet empty(int h_depth, int z_depth);
  static ClopenSet whole(const OdometerSpace& space, int h_depth, int z_depth);
  static ClopenSet from_cells(const OdometerSpace& space, int h_depth,
                              int z_depth, std::vector<Cell> cells);
  // Cells already sorted, distinct and range-checked by the caller.
  static ClopenSet from_sorted_cells(int h_depth, int z_depth,
                                     std::vector<Cell> cells);

  int h_depth() const { return h_depth_; }
  int z_depth() const { return z_depth_; }
  const std::vector<Cell>& cells() const { return cells_; }
  std::int64_t cell_size() const { return (std::int64_t)cells_.size(); }
  bool is_empty() const { return cells_.empty(); }
  bool contains_cell(const Cell& c) const;

  bool operator==(const ClopenSet&) const = default;

 private:
  int h_depth_ = 0;
  int z_depth_ = 0;
  std::vector<Cell> cells_;
};

// Exact refinement to deeper depths; each cell splits into
// p^(dh * d) * q^(dz) subcells.
ClopenSet refine(const OdometerSpace& space, const ClopenSet& a, int h_depth,
                 int z_depth);

ClopenSet clopen_union(const OdometerSpace& space, const ClopenSet& a,
                       const ClopenSet& b);
ClopenSet clopen_intersection(const OdometerSpace& space, const ClopenSet& a,
                              const ClopenSet& b);
ClopenSet clopen_difference(const OdometerSpace& space, const ClopenSet& a,
                            const ClopenSet& b);
ClopenSet clopen_complement(const OdometerSpace& space, const ClopenSet& a);
bool clopen_subset(const OdometerSpace& space, const ClopenSet& a,
                   const ClopenSet& b);
bool clopen_disjoint(const OdometerSpace& space, const ClopenSet& a,
                     const ClopenSet& b);

// Exact measure: cells / total cells at the set's depth.
Rational clopen_measure(const OdometerSpace& space, const ClopenSet& a);

// The translate a*A at the same depth (exact; the action permutes cells).
ClopenSet clopen_translate(const OdometerSpace& space, const GroupContext& ctx,
                           const GroupElement& a, const ClopenSet& A);

// Image of one cell under a group element, at the cell's depths.
Cell act_cell(const OdometerSpace& space, const GroupContext& ctx,
              const GroupElement& a, const Cell& c, int h_depth, int z_depth);

// Exact action on a finite-depth point.
Point act(const OdometerSpace& space, const GroupContext& ctx,
          const GroupElement& a, const Point& x);

// Membership of a point in a clopen set; needs point depth >= set depth.
bool point_in(const OdometerSpace& space, const ClopenSet& A, const Point& x);

}  // namespace folner
