#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "folner/disjointify.hpp"
#include "folner/group.hpp"
#include "folner/odometer.hpp"
#include "folner/quasitile.hpp"
#include "folner/rational.hpp"
#include "folner/tower.hpp"

namespace folner {

// Derived constants of one castle run over a semidirect context.
// r is the least radius with 2 <= delta * floor(delta * r); the dispatch
// thresholds, the pattern windows and the drop budget beta all derive
// from it. k_prime and k_second are the alpha-spread closures of K over
// the near and wide windows.
struct CastleParameters {
  FiniteSubset k;  // window in H
  Rational delta{0, 1};
  Rational epsilon{0, 1};
  Coord r = 0;
  Coord dr = 0;    // floor(delta * r)
  Coord plus = 0;  // r + ceil(3 delta r), radius of the extended column A+
  Rational beta{0, 1};
  Rational eta{0, 1};
  Rational tile_target{0, 1};  // invariance target passed to the tile collection
  FiniteSubset k_prime;        // union of alpha^i(K) over |i| <= 2r
  FiniteSubset k_second;       // union of alpha^i(K) over |i| <= 6r
};

// Requires a semidirect context, K a nonempty subset of H and
// 0 < delta < 1/12.
CastleParameters setup_parameters(const GroupContext& ctx,
                                  const FiniteSubset& k, const Rational& delta,
                                  const Rational& epsilon);

// One marker tower: clopen base, core B in H (a tileable subset of the
// initial shape) and the certificate that tiled it. The cert may be
// null; the lemma audit is then skipped for the tower's class.
struct CastleTowerInput {
  ClopenSet base;
  std::shared_ptr<const FiniteSubset> core;
  std::shared_ptr<const TilingCertificate> cert;
};

struct CastleInputs {
  int h_depth = 0;
  int z_depth = 0;
  std::vector<CastleTowerInput> towers;
};

struct CastleBuildOptions {
  std::optional<Rational> tile_target_override;
  std::optional<Rational> eta_override;
  FoelnerOptions foelner;
  InitialCastleOptions initial;
  // Cap on the total member mass of a lemma audit instance; classes
  // whose instance would exceed it skip the audit (recorded, not fatal).
  std::int64_t audit_budget = std::int64_t(1) << 22;
  bool trace = false;
};

// Tile collection, initial castle and the trimmed marker towers the
// recursion consumes. All towers share one core and certificate.
struct PreparedInputs {
  TilingCollection collection;
  InitialCastleResult initial;
  CastleInputs inputs;
};

PreparedInputs prepare_inputs(const OdometerSpace& space,
                              const GroupContext& ctx,
                              const CastleParameters& params,
                              const CastleBuildOptions& options = {});

// Translate sets of the visit relation over the piece window: the
// triples (i, j, t) with |i| <= 4r, g^i t x in V_j and B_k meeting
// alpha^-i(B_j) t, for x in the base of tower k. Cylinder bases make
// the data base-point independent; this is asserted.
struct TranslateSet {
  Coord offset = 0;
  int tower = -1;
  std::vector<GroupElement> translates;  // sorted, in H
};

struct TSets {
  int tower = -1;
  Coord window = 0;  // offsets range over [-window, window]
  std::vector<TranslateSet> sets;  // nonempty ones, sorted by (offset, tower)
};

TSets compute_T_sets(const OdometerSpace& space, const GroupContext& ctx,
                     const CastleParameters& params, const CastleInputs& inputs,
                     int tower);

// Interval of g-exponents; empty iff hi < lo.
struct GInterval {
  Coord lo = 0;
  Coord hi = -1;

  bool empty() const { return hi < lo; }
  Coord length() const { return empty() ? 0 : hi - lo + 1; }
  bool operator==(const GInterval&) const = default;
};

// Coverage signatures of the cores, grouped by base class. A profile is
// the full wide-window signature of a core element: per offset, which
// tower visit covers it and by which translate. Its restriction to the
// piece window keys the recursion's intervals ("pattern"); the further
// restriction to the near window keys the dispatch ("group"). Towers of
// one rotation class share everything up to a shift of tower labels.
struct PatternTable {
  // Covering pair at one offset; tower_rel < 0 means uncovered there.
  struct CoverEntry {
    int tower_rel = -1;
    Vec translate;

    bool operator==(const CoverEntry&) const = default;
  };

  struct Profile {
    std::vector<CoverEntry> cover;  // size 2*wide+1, index offset+wide
    std::vector<int> members;       // indices into the class core, ascending
    int pattern = -1;
    int group = -1;
  };

  struct Pattern {
    std::vector<CoverEntry> cover;  // size 2*piece+1
    FiniteSubset members;           // core elements carrying this pattern
    std::vector<int> profiles;
    int group = -1;
    bool invariant = false;  // set by select_invariant_patterns
  };

  struct Group {
    std::vector<CoverEntry> cover;  // size 2*near+1
    std::vector<int> patterns;
    std::vector<int> profiles;
  };

  struct BaseClass {
    std::vector<int> towers;  // ascending
    int representative = -1;
    // Towers are the full z-rotation orbit of the representative; labels
    // seen from tower j are the representative's shifted by j - rep.
    bool rotation_orbit = false;
    std::vector<Profile> profiles;
    std::vector<Pattern> patterns;
    std::vector<Group> groups;
    // Pattern of each core element, parallel to the core's element order.
    std::vector<int> element_pattern;
  };

  Coord near = 0;   // 2r
  Coord piece = 0;  // 4r
  Coord wide = 0;   // 6r
  std::vector<int> class_of;  // tower -> class index
  std::vector<BaseClass> classes;

  // Absolute tower label behind a cover entry as seen from `tower`.
  int tower_seen_by(int tower, int tower_rel) const;
};

PatternTable compute_patterns(const OdometerSpace& space,
                              const GroupContext& ctx,
                              const CastleParameters& params,
                              const CastleInputs& inputs);

// Flags the (k_prime, delta)-invariant patterns, audits each class
// against the disjointification lemma when the instance fits the budget
// (cross-checking that the lemma's realized pieces are exactly the
// pattern masses) and asserts that at most a beta share of each core is
// dropped.
struct SelectionReport {
  struct ClassAudit {
    int representative = -1;
    bool audit_ran = false;
    HypothesisReport hypotheses;  // meaningful when audit_ran
    bool pieces_match = false;    // audit pieces == pattern masses
    std::int64_t kept = 0;        // core mass of the invariant patterns
    std::int64_t total = 0;
  };
  std::vector<ClassAudit> classes;
  Rational dropped_share{0, 1};  // over all towers, <= beta
};

SelectionReport select_invariant_patterns(const OdometerSpace& space,
                                          const GroupContext& ctx,
                                          const CastleParameters& params,
                                          const CastleInputs& inputs,
                                          PatternTable& table,
                                          std::int64_t audit_budget);

// Interval of each (tower, pattern) piece in tower-local g-coordinates.
struct IntervalAssignment {
  std::vector<std::vector<GInterval>> pieces;  // [tower][pattern]
};

enum class StageCase {
  Start,      // first tower, every pattern gets the full column
  Disjoint,   // no earlier claims, full column
  Contained,  // earlier claims cover the column, empty piece
  Filling,    // the gap is wide enough to stand alone
  DonateLeft,  // gap handed to the left neighbor piece
  AnnexLeft,   // gap widened by seizing a strip from the left neighbor
  SyncLeft,    // neighbor chains uniformized first, then donate or annex
  DonateRight,
  AnnexRight,
  SyncRight,
};
inline constexpr int kStageCaseCount = 10;

struct StageRecord {
  int stage = 0;  // 1-based
  int tower = 0;
  int group = 0;
  StageCase action = StageCase::Start;
  Coord p = 0, q = 0;  // the uncovered gap, when one exists
  int claims = 0;      // earlier-tower offsets in the near window
};

struct RecursionResult {
  IntervalAssignment assignment;
  std::vector<StageRecord> trace;  // filled when tracing is on
  std::vector<std::int64_t> case_counts;  // indexed by StageCase
  // Covered share of the worst z-fiber after the final stage, over all
  // patterns (before the invariance drop).
  Rational fiber_floor{0, 1};
};

RecursionResult interval_recursion(const OdometerSpace& space,
                                   const GroupContext& ctx,
                                   const CastleParameters& params,
                                   const CastleInputs& inputs,
                                   const PatternTable& table,
                                   bool trace = false);

// Synchronization of the neighbor chains feeding one gap: chains hold,
// per extension, the absolute spans of the ladder pieces. The returned
// chains agree from the split on, ending in a common provisional tail
// adjacent to the gap. Pure on the span data; every structural claim is
// asserted.
struct SyncChains {
  int stage = -1, tower = -1;  // diagnostics
  Coord p = 0;                 // left end of the uncovered gap
  Coord cover_lo = 0;          // chains cover [cover_lo, p-1]
  std::vector<std::vector<GInterval>> chains;
};

struct SyncResult {
  int chosen = -1;       // reference chain
  int anchor_link = -1;  // its link holding the anchor column
  std::vector<std::vector<GInterval>> chains;  // uniformized spans
  int tail_link = -1;    // common final link, right end p-1
  GInterval tail;
};

SyncResult synchronize_chains(const CastleParameters& params,
                              const SyncChains& in);

// Marker towers of the kept patterns: one tower per (input tower,
// invariant pattern) with nonempty span, shape = g-interval times the
// pattern mass. Shapes are materialized once per distinct span/mass
// pair and shared.
struct AssembledCastle {
  Castle castle;

  struct TowerMeta {
    int input_tower = -1;
    int klass = -1;
    int pattern = -1;
    GInterval span;
    int shape_index = -1;
  };
  std::vector<TowerMeta> meta;  // parallel to castle.towers
  std::vector<std::shared_ptr<const FiniteSubset>> shapes;  // distinct
  std::vector<InvarianceResult> shape_invariance;  // w.r.t. (K, delta)
};

AssembledCastle assemble_castle(const OdometerSpace& space,
                                const GroupContext& ctx,
                                const CastleParameters& params,
                                const CastleInputs& inputs,
                                const PatternTable& table,
                                const IntervalAssignment& assignment);

// From-scratch checks of the assembled castle: exact footprint density,
// the dropped mass against beta, span and shape conditions. Throws
// CastleAssertion if the assignment's pieces collide; all other
// shortfalls are reported, not thrown.
struct CastleReport {
  Rational density{0, 1};  // exact footprint measure
  bool meets_target = false;  // density >= 1 - 3 epsilon
  Rational w0_measure{0, 1};  // mass under the dropped patterns
  Rational w0_bound{0, 1};    // beta
  bool w0_within_bound = false;
  std::int64_t towers = 0;
  std::int64_t distinct_shapes = 0;
  bool disjoint_ok = false;   // piece cells pairwise free, recomputed
  bool spans_ok = false;      // every span empty or >= dr, inside [-plus, plus]
  bool shapes_invariant = false;
};

CastleReport verify_output(const OdometerSpace& space, const GroupContext& ctx,
                           const CastleParameters& params,
                           const CastleInputs& inputs,
                           const PatternTable& table,
                           const IntervalAssignment& assignment,
                           const AssembledCastle& assembled);

// End-to-end: parameters, inputs, patterns, selection, recursion,
// assembly, verification.
struct CastleBuildResult {
  CastleParameters params;
  PreparedInputs prepared;
  PatternTable table;
  SelectionReport selection;
  RecursionResult recursion;
  AssembledCastle assembled;
  CastleReport report;
};

CastleBuildResult build_castle(const OdometerSpace& space,
                               const GroupContext& ctx, const FiniteSubset& k,
                               const Rational& delta, const Rational& epsilon,
                               const CastleBuildOptions& options = {});

}  // namespace folner
