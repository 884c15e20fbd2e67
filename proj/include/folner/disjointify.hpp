#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "folner/errors.hpp"
#include "folner/group.hpp"
#include "folner/quasitile.hpp"
#include "folner/rational.hpp"

namespace folner {

// One tileable set together with the certificate exhibiting its tiling.
struct TiledSet {
  FiniteSubset set;
  TilingCertificate cert;
};

// Ambient set S, n rows of pairwise disjoint tileable sets B_{i,j},
// window K and tolerance delta. The implicit collection behind the
// hypotheses is the family of distinct tile shapes appearing in the
// certificates.
struct DisjointificationInstance {
  FiniteSubset s;
  std::vector<std::vector<TiledSet>> rows;
  FiniteSubset k;
  Rational delta{0, 1};
};

struct HypothesisClause {
  std::string name;
  bool holds = false;
  std::string detail;
};

struct HypothesisReport {
  std::vector<HypothesisClause> clauses;
  bool all_hold = false;
};

// An intersection pattern: the rows covering an element and, per such
// row, which member it lies in. Sorted by row index.
using PiecePattern = std::vector<std::pair<int, int>>;

struct Piece {
  PiecePattern pattern;
  FiniteSubset set;
  InvarianceResult invariance;  // w.r.t. (K, delta)
  bool in_omega0 = false;
};

struct PiecePartition {
  std::vector<Piece> pieces;  // nonempty, pairwise disjoint, union = S
  FiniteSubset k;
  Rational delta{0, 1};
  std::int64_t omega0_total = 0;  // |union of the non-invariant pieces|
  bool bound_holds = false;       // omega0_total <= delta |S|
  HypothesisReport hypotheses;
};

// Splits S along the realized intersection patterns of the rows:
// B_omega = (S meet the chosen members) minus every set of the
// unchosen rows. Pieces are flagged non-invariant via check_invariance
// and the total flagged mass is compared against delta|S| exactly.
// Strict mode throws HypothesisViolation on the first failed
// hypothesis clause and ContractViolation if the certified bound
// fails; Audit mode records both and keeps going.
PiecePartition disjointify(const GroupContext& ctx,
                           const DisjointificationInstance& inst,
                           CheckMode mode = CheckMode::Strict);

// A tile occurrence F_{i,j,t} t from row i, member j.
struct TileUse {
  int row = 0;
  int member = 0;
  FiniteSubset tile;
  GroupElement translate;
};

// Intersection piece built from one inner tile per chosen row.
struct GammaPiece {
  std::vector<TileUse> tiles;  // one per chosen row, sorted by row
  FiniteSubset set;
  int owner = -1;  // index of the partition piece containing this one
};

struct GammaRefinement {
  PiecePartition partition;
  FiniteSubset d_set;    // D = (union of shapes)(union of shapes)^-1
  FiniteSubset s_inner;  // S minus its D-boundary
  // Tiles lying inside S (the T' tiles), across all rows and members.
  std::vector<TileUse> t_prime;
  std::vector<GammaPiece> pieces;  // nonempty, pairwise disjoint
};

// Refines the partition along individual tiles: for each element of
// s_inner whose covering tiles all lie inside s_inner, the piece is
// keyed by those tile occurrences. Exposes the T' tiles so the
// boundary and multiplicity inequalities of the underlying argument
// can be property-tested.
GammaRefinement gamma_refinement(const GroupContext& ctx,
                                 const DisjointificationInstance& inst,
                                 CheckMode mode = CheckMode::Strict);

struct BoundReport {
  bool partition_ok = false;   // pieces disjoint and union = S
  bool flags_ok = false;       // omega0 flags match recomputation
  bool bound_holds = false;    // flagged mass <= delta |S|
  std::int64_t omega0_total = 0;
};

// Recomputes the partition property, the invariance flags and the
// flagged-mass bound from scratch.
BoundReport verify_bound(const GroupContext& ctx,
                         const PiecePartition& partition,
                         const Rational& delta, const FiniteSubset& s);

}  // namespace folner
