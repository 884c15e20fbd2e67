#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "folner/errors.hpp"
#include "folner/group.hpp"
#include "folner/rational.hpp"

namespace folner {

// Nested window sets F_1 <= ... <= F_m with e in F_1. Each F_k is
// (F_{k-1}, eps/8)-invariant. `full` records whether the sequence
// reached the required length m before hitting a size cap.
struct TowerSequence {
  std::vector<FiniteSubset> levels;
  Rational epsilon{0, 1};
  int required_m = 0;
  bool full = false;
};

// Least m >= 1 with (1 - eps/2)^m < eps, computed exactly.
// Requires 0 < eps < 1/2.
int required_levels(const Rational& epsilon);

struct FoelnerOptions {
  Coord base_radius = 1;
  std::int64_t max_level_cells = std::int64_t(1) << 22;
  int max_levels = 64;
  // Throw instead of truncating when a cap cuts the sequence short.
  bool require_full = false;
};

// Nested boxes in the free-abelian part of the context, each level
// (previous level, eps/8)-invariant, decided exactly. Truncates at the
// configured caps unless require_full is set.
TowerSequence build_foelner_sequence(const GroupContext& ctx,
                                     const Rational& epsilon,
                                     const FoelnerOptions& opts = {});

// One placed tile: `tile` is the still-uncovered part of
// levels[level] * center at acceptance time.
struct Placement {
  GroupElement center;
  FiniteSubset tile;
};

struct QuasiTiling {
  std::vector<std::vector<Placement>> per_level;  // parallel to seq.levels
  std::int64_t covered = 0;
  std::int64_t target_size = 0;  // |E|
  bool precondition_ok = true;   // E was (F_m, eps/4)-invariant
};

// Greedy quasitiling of E by the sequence windows, largest level first.
// Every accepted center c has levels[i]*c contained in E; each kept
// tile retains at least a (1-eps) fraction of its window and the kept
// tiles are pairwise disjoint, covering at least (1-eps)|E|. All of
// that is verified exactly before returning. Strict mode additionally
// requires the (F_m, eps/4)-invariance of E.
QuasiTiling quasitile(const GroupContext& ctx, const FiniteSubset& e_set,
                      const TowerSequence& seq,
                      CheckMode mode = CheckMode::Strict);

// Translates of finite sets that partition a stated target set.
struct TilingCertificate {
  std::vector<std::pair<FiniteSubset, GroupElement>> tiles;
};

// Exact check that the certificate's translates are pairwise disjoint
// and union to precisely A.
bool verify_tiling(const GroupContext& ctx, const FiniteSubset& a_set,
                   const TilingCertificate& cert);

// Implicit finite collection of (K, delta)-invariant sets: F belongs
// iff F is contained in some level F_j with |F| >= (1-eps)|F_j|.
struct TilingCollection {
  TowerSequence seq;
  FiniteSubset k;
  Rational delta{0, 1};
  Rational epsilon{0, 1};
  // K-invariance target the levels were built to. When strong enough
  // (delta*(1-eps) - |K|*eps > 0) every member is (K, delta)-invariant
  // by construction; otherwise the levels only meet delta themselves.
  Rational level_target{0, 1};
  bool members_invariant_by_construction = false;

  bool contains(const GroupContext& ctx, const FiniteSubset& f) const;
  const FiniteSubset& top() const { return seq.levels.back(); }
};

TilingCollection tiling_collection(const GroupContext& ctx,
                                   const FiniteSubset& k,
                                   const Rational& delta,
                                   const Rational& epsilon,
                                   const FoelnerOptions& opts = {});

struct ExtractResult {
  FiniteSubset e_prime;
  TilingCertificate cert;
  QuasiTiling tiling;
};

// Collection-tileable subset E' of E with |E'| >= (1-eps)|E|: the
// disjoint kept tiles of the greedy quasitiling. The certificate is
// re-verified and every tile is checked against the membership
// predicate before returning.
ExtractResult extract_tileable(const GroupContext& ctx,
                               const FiniteSubset& e_set,
                               const TilingCollection& collection,
                               CheckMode mode = CheckMode::Strict);

}  // namespace folner
