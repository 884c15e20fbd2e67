#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "folner/castle.hpp"
#include "folner/errors.hpp"

namespace folner {

namespace {

std::string istr(Coord i) { return std::to_string((long long)i); }

Vec sub_vec(const Vec& a, const Vec& b) {
  Vec r = a;
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = detail::checked_sub(r[i], b[i]);
  }
  return r;
}

// Dense per-fiber bitboards over the H-cells, one board per z-residue.
// Every paint asserts the target bits free, every unpaint asserts them
// set, so piece collisions surface at the first offending cell.
class FiberBoard {
 public:
  FiberBoard(std::int64_t hcells, Coord zm)
      : hcells_(hcells), words_((std::size_t)((hcells + 63) / 64)) {
    rows_.assign((std::size_t)zm, std::vector<std::uint64_t>(words_, 0));
  }

  using Mask = std::vector<std::uint64_t>;

  void paint(Coord z, const Mask& m, int stage, int tower) {
    auto& row = rows_[(std::size_t)z];
    for (std::size_t w = 0; w < words_; ++w) {
      if (row[w] & m[w]) {
        throw CastleAssertion(stage, tower, "pieces-overlap",
                              "cell already painted in fiber " + istr(z));
      }
      row[w] |= m[w];
    }
  }

  void unpaint(Coord z, const Mask& m, int stage, int tower) {
    auto& row = rows_[(std::size_t)z];
    for (std::size_t w = 0; w < words_; ++w) {
      if ((row[w] & m[w]) != m[w]) {
        throw CastleAssertion(stage, tower, "pieces-missing",
                              "cell not painted in fiber " + istr(z));
      }
      row[w] &= ~m[w];
    }
  }

  bool covers(Coord z, const Mask& m) const {
    const auto& row = rows_[(std::size_t)z];
    for (std::size_t w = 0; w < words_; ++w) {
      if ((row[w] & m[w]) != m[w]) return false;
    }
    return true;
  }

  bool misses(Coord z, const Mask& m) const {
    const auto& row = rows_[(std::size_t)z];
    for (std::size_t w = 0; w < words_; ++w) {
      if (row[w] & m[w]) return false;
    }
    return true;
  }

  std::int64_t popcount(Coord z) const {
    std::int64_t n = 0;
    for (std::uint64_t w : rows_[(std::size_t)z]) n += __builtin_popcountll(w);
    return n;
  }

  std::size_t words() const { return words_; }
  std::int64_t hcells() const { return hcells_; }

 private:
  std::int64_t hcells_;
  std::size_t words_;
  std::vector<std::vector<std::uint64_t>> rows_;
};

// Reflection frame: the right-hand cases run the left-hand logic on
// negated coordinates. pt and iv are involutions.
struct Frame {
  int sign = 1;

  Coord pt(Coord a) const { return sign > 0 ? a : -a; }
  GInterval iv(GInterval s) const {
    if (sign > 0 || s.empty()) return s;
    return {-s.hi, -s.lo};
  }
};

struct MaskKey {
  int tower;
  int cell;
  int pattern;
  Coord a;

  bool operator==(const MaskKey&) const = default;
};

struct MaskKeyHash {
  std::size_t operator()(const MaskKey& k) const {
    std::size_t h = (std::size_t)k.tower * 1000003u + (std::size_t)k.cell;
    h = h * 1000003u + (std::size_t)k.pattern;
    h = h * 1000003u + (std::size_t)(k.a + (1 << 20));
    return h;
  }
};

using PieceRef = std::pair<int, int>;  // (tower, pattern)

struct PieceRefHash {
  std::size_t operator()(const PieceRef& p) const {
    return (std::size_t)p.first * 1000003u + (std::size_t)p.second;
  }
};

class Engine {
 public:
  Engine(const OdometerSpace& space, const GroupContext& ctx,
         const CastleParameters& params, const CastleInputs& inputs,
         const PatternTable& table, bool trace)
      : ctx_(ctx),
        prm_(params),
        in_(inputs),
        tab_(table),
        trace_(trace),
        hm_(space.h_mod(inputs.h_depth)),
        zm_(space.z_mod(inputs.z_depth)),
        board_(checked_hcells(space, inputs), space.z_mod(inputs.z_depth)) {
    if ((int)tab_.class_of.size() != (int)in_.towers.size()) {
      throw PreconditionError("pattern table does not match the inputs");
    }
    two_delta_ = prm_.delta * Rational(2, 1);
    floor3dr_ = (prm_.delta * Rational(3, 1)).floor_times(prm_.r);
    result_.case_counts.assign(kStageCaseCount, 0);
    result_.assignment.pieces.resize(in_.towers.size());
    for (std::size_t j = 0; j < in_.towers.size(); ++j) {
      const auto& cls = tab_.classes[(std::size_t)tab_.class_of[j]];
      result_.assignment.pieces[j].assign(cls.patterns.size(), GInterval{});
    }
  }

  RecursionResult run() {
    int n = (int)in_.towers.size();
    for (int cur = 0; cur < n; ++cur) {
      stage_ = cur + 1;
      const auto& cls = tab_.classes[(std::size_t)tab_.class_of[(std::size_t)cur]];
      for (int gi = 0; gi < (int)cls.groups.size(); ++gi) {
        process_group(cur, cls, gi);
      }
      sweep_conditions(cur);
    }

    Rational floor(1, 1);
    bool first = true;
    for (Coord z = 0; z < zm_; ++z) {
      Rational share(board_.popcount(z), board_.hcells());
      if (first || share < floor) floor = share;
      first = false;
    }
    result_.fiber_floor = floor;
    return std::move(result_);
  }

 private:
  static std::int64_t checked_hcells(const OdometerSpace& space,
                                     const CastleInputs& inputs) {
    __int128 cells = space.cell_count(inputs.h_depth, inputs.z_depth);
    if (cells > (__int128)1 << 31) {
      throw PreconditionError("cell count too large for the fiber boards");
    }
    Coord hm = space.h_mod(inputs.h_depth);
    std::int64_t hcells = 1;
    for (int i = 0; i < space.h_rank; ++i) {
      hcells = detail::checked_mul(hcells, hm);
    }
    return hcells;
  }

  GInterval& piece(int tower, int pat) {
    return result_.assignment.pieces[(std::size_t)tower][(std::size_t)pat];
  }

  std::int64_t cell_index(const Vec& v) const {
    std::int64_t idx = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      Coord c = v[i] % hm_;
      if (c < 0) c += hm_;
      idx = idx * hm_ + c;
    }
    return idx;
  }

  const FiberBoard::Mask& mask(int tower, int cell_idx, int pat, Coord a) {
    MaskKey key{tower, cell_idx, pat, ctx_.alpha_is_identity() ? 0 : a};
    auto it = masks_.find(key);
    if (it != masks_.end()) return it->second;

    const auto& cls = tab_.classes[(std::size_t)tab_.class_of[(std::size_t)tower]];
    const auto& members = cls.patterns[(std::size_t)pat].members;
    const Cell& cell =
        in_.towers[(std::size_t)tower].base.cells()[(std::size_t)cell_idx];
    FiberBoard::Mask m(board_.words(), 0);
    for (const GroupElement& b : members) {
      Vec v = b.h;
      for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = detail::checked_add(v[i], cell.h[i]);
      }
      if (!ctx_.alpha_is_identity()) v = ctx_.alpha_apply(key.a, v);
      std::int64_t idx = cell_index(v);
      m[(std::size_t)(idx >> 6)] |= std::uint64_t(1) << (idx & 63);
    }
    return masks_.emplace(key, std::move(m)).first->second;
  }

  Coord fiber_of(const Cell& cell, Coord a) const {
    Coord z = (cell.z + a) % zm_;
    if (z < 0) z += zm_;
    return z;
  }

  // Paint or clear the rows a in [lo, hi] of one piece.
  void apply_rows(int tower, int pat, Coord lo, Coord hi, bool on) {
    if (lo > hi) return;
    const auto& cells = in_.towers[(std::size_t)tower].base.cells();
    for (int ci = 0; ci < (int)cells.size(); ++ci) {
      for (Coord a = lo; a <= hi; ++a) {
        const auto& m = mask(tower, ci, pat, a);
        if (on) {
          board_.paint(fiber_of(cells[(std::size_t)ci], a), m, stage_, tower);
        } else {
          board_.unpaint(fiber_of(cells[(std::size_t)ci], a), m, stage_, tower);
        }
      }
    }
  }

  // Replace a piece span, adjusting the board by the difference.
  void move_piece(int tower, int pat, GInterval next) {
    GInterval cur = piece(tower, pat);
    if (cur == next) return;
    if (!cur.empty()) apply_rows(tower, pat, cur.lo, cur.hi, false);
    if (!next.empty()) apply_rows(tower, pat, next.lo, next.hi, true);
    piece(tower, pat) = next;
  }

  // Extend a piece that keeps its old rows (donations): only the new
  // rows are painted.
  void grow_piece(int tower, int pat, GInterval next) {
    GInterval cur = piece(tower, pat);
    if (cur.empty()) {
      move_piece(tower, pat, next);
      return;
    }
    if (next.lo > cur.lo || next.hi < cur.hi) {
      throw CastleAssertion(stage_, tower, "grow-shrinks",
                            "extension drops rows of the piece");
    }
    apply_rows(tower, pat, next.lo, cur.lo - 1, true);
    apply_rows(tower, pat, cur.hi + 1, next.hi, true);
    piece(tower, pat) = next;
  }

  void shrink_piece(int tower, int pat, GInterval next) {
    GInterval cur = piece(tower, pat);
    if (next.empty()) {
      move_piece(tower, pat, next);
      return;
    }
    if (next.lo < cur.lo || next.hi > cur.hi) {
      throw CastleAssertion(stage_, tower, "shrink-grows",
                            "cut extends the piece");
    }
    apply_rows(tower, pat, cur.lo, next.lo - 1, false);
    apply_rows(tower, pat, next.hi + 1, cur.hi, false);
    piece(tower, pat) = next;
  }

  void record(int cur, int gi, StageCase action, Coord p, Coord q,
              int claims) {
    ++result_.case_counts[(std::size_t)action];
    if (trace_) {
      result_.trace.push_back({stage_, cur, gi, action, p, q, claims});
    }
  }

  // Rows of the patch column that must already be covered or still
  // free for every pattern of the group.
  void check_patch(int cur, const PatternTable::Group& grp, Coord free_lo,
                   Coord free_hi, const char* claim) {
    const auto& cells = in_.towers[(std::size_t)cur].base.cells();
    for (int pat : grp.patterns) {
      for (int ci = 0; ci < (int)cells.size(); ++ci) {
        for (Coord a = -prm_.r; a <= prm_.r; ++a) {
          const auto& m = mask(cur, ci, pat, a);
          Coord z = fiber_of(cells[(std::size_t)ci], a);
          bool want_free = a >= free_lo && a <= free_hi;
          if (want_free ? !board_.misses(z, m) : !board_.covers(z, m)) {
            throw CastleAssertion(
                stage_, cur, claim,
                "row " + istr(a) + " of pattern " + std::to_string(pat) +
                    (want_free ? " is not free" : " is not covered"));
          }
        }
      }
    }
  }

  void check_patch_covered(int cur, const PatternTable::Group& grp) {
    check_patch(cur, grp, 1, 0, "patch-covered");
  }

  // Assign the same span to every pattern of the group and paint it.
  void assign_group(int cur, const PatternTable::Group& grp, GInterval span) {
    for (int pat : grp.patterns) {
      piece(cur, pat) = span;
      if (!span.empty()) apply_rows(cur, pat, span.lo, span.hi, true);
    }
  }

  // The neighbor piece of one profile: the claim whose piece ends right
  // at the gap. Exactly one claim qualifies.
  struct Neighbor {
    Coord view_i = 0;  // claim offset in view coordinates
    Coord true_i = 0;
    int tower = -1;
    int pattern = -1;
    GInterval view_span;  // piece span in view coordinates, gap-adjacent
  };

  std::pair<int, int> resolve_piece(int cur, const PatternTable::Profile& prof,
                                    Coord i_v) {
    const PatternTable::CoverEntry& e =
        prof.cover[(std::size_t)(i_v + tab_.wide)];
    if (e.tower_rel < 0) {
      throw CastleAssertion(stage_, -1, "claim-uncovered",
                            "profile lacks the group's claim at offset " +
                                istr(i_v));
    }
    int tower_v = tab_.tower_seen_by(cur, e.tower_rel);
    const FiniteSubset& own_core = *in_.towers[(std::size_t)cur].core;
    const GroupElement& b =
        own_core.elements()[(std::size_t)prof.members[0]];
    Vec image = ctx_.alpha_apply(i_v, sub_vec(b.h, e.translate));
    const FiniteSubset& tcore = *in_.towers[(std::size_t)tower_v].core;
    GroupElement probe{image, 0};
    auto it = std::lower_bound(tcore.elements().begin(),
                               tcore.elements().end(), probe);
    if (it == tcore.elements().end() || !(*it == probe)) {
      throw CastleAssertion(stage_, tower_v, "rebase-member",
                            "transferred element missing from the core at "
                            "offset " +
                                istr(i_v));
    }
    const auto& tcls =
        tab_.classes[(std::size_t)tab_.class_of[(std::size_t)tower_v]];
    int idx = (int)(it - tcore.elements().begin());
    return {tower_v, tcls.element_pattern[(std::size_t)idx]};
  }

  // Full agreement between the neighbor's pattern and the shifted own
  // profile over the neighbor's piece window.
  void assert_rebase_exact(int cur, const PatternTable::Profile& prof,
                           Coord i_v, int tower_v, int pat_v) {
    const auto& tcls =
        tab_.classes[(std::size_t)tab_.class_of[(std::size_t)tower_v]];
    const auto& target = tcls.patterns[(std::size_t)pat_v];
    const Vec& t_v = prof.cover[(std::size_t)(i_v + tab_.wide)].translate;
    for (Coord o = -tab_.piece; o <= tab_.piece; ++o) {
      const PatternTable::CoverEntry& own =
          prof.cover[(std::size_t)(o + i_v + tab_.wide)];
      const PatternTable::CoverEntry& tgt =
          target.cover[(std::size_t)(o + tab_.piece)];
      bool own_cov = own.tower_rel >= 0;
      bool tgt_cov = tgt.tower_rel >= 0;
      if (own_cov != tgt_cov) {
        throw CastleAssertion(stage_, tower_v, "rebase-exact",
                              "coverage mismatch at offset " + istr(o));
      }
      if (!own_cov) continue;
      if (tab_.tower_seen_by(cur, own.tower_rel) !=
          tab_.tower_seen_by(tower_v, tgt.tower_rel)) {
        throw CastleAssertion(stage_, tower_v, "rebase-exact",
                              "tower mismatch at offset " + istr(o));
      }
      if (!(tgt.translate ==
            ctx_.alpha_apply(i_v, sub_vec(own.translate, t_v)))) {
        throw CastleAssertion(stage_, tower_v, "rebase-exact",
                              "translate mismatch at offset " + istr(o));
      }
    }
  }

  GInterval view_span(const Frame& fr, int tower, int pat, Coord true_i) {
    GInterval own = piece(tower, pat);
    if (own.empty()) return own;
    return fr.iv(GInterval{own.lo + true_i, own.hi + true_i});
  }

  GInterval own_span(const Frame& fr, GInterval view, Coord true_i) {
    if (view.empty()) return view;
    GInterval abs = fr.iv(view);
    return {abs.lo - true_i, abs.hi - true_i};
  }

  void process_group(int cur, const PatternTable::BaseClass& cls, int gi) {
    const PatternTable::Group& grp = cls.groups[(std::size_t)gi];

    std::vector<Coord> claims;
    for (Coord i = -tab_.near; i <= tab_.near; ++i) {
      const PatternTable::CoverEntry& e =
          grp.cover[(std::size_t)(i + tab_.near)];
      if (e.tower_rel < 0 || i == 0) continue;
      if (tab_.tower_seen_by(cur, e.tower_rel) < cur) claims.push_back(i);
    }

    if (claims.empty()) {
      check_patch(cur, grp, -prm_.r, prm_.r, "patch-free");
      assign_group(cur, grp, {-prm_.r, prm_.r});
      record(cur, gi, cur == 0 ? StageCase::Start : StageCase::Disjoint,
             0, 0, 0);
      check_patch_covered(cur, grp);
      return;
    }

    // Components of the column left uncovered by the claims.
    std::vector<GInterval> comps;
    Coord cursor = -prm_.r;
    for (Coord i : claims) {
      if (i - prm_.r > cursor) comps.push_back({cursor, i - prm_.r - 1});
      cursor = std::max(cursor, i + prm_.r + 1);
    }
    if (cursor <= prm_.r) comps.push_back({cursor, prm_.r});

    if (comps.size() > 1) {
      throw CastleAssertion(stage_, cur, "gap-interval",
                            "uncovered part of the column is not an interval");
    }

    if (comps.empty()) {
      check_patch(cur, grp, 1, 0, "patch-covered");
      assign_group(cur, grp, GInterval{});
      record(cur, gi, StageCase::Contained, 0, 0, (int)claims.size());
      return;
    }

    Coord p = comps[0].lo, q = comps[0].hi;
    Coord i1 = claims.front(), id = claims.back();
    if (i1 > 0) {
      if (p != -prm_.r || q != i1 - prm_.r - 1) {
        throw CastleAssertion(stage_, cur, "gap-shape",
                              "left tail gap off its endpoints");
      }
    } else if (id < 0) {
      if (p != id + prm_.r + 1 || q != prm_.r) {
        throw CastleAssertion(stage_, cur, "gap-shape",
                              "right tail gap off its endpoints");
      }
    } else {
      bool matched = false;
      for (std::size_t v = 0; v + 1 < claims.size(); ++v) {
        if (claims[v + 1] - claims[v] > 2 * prm_.r + 1) {
          if (matched || p != claims[v] + prm_.r + 1 ||
              q != claims[v + 1] - prm_.r - 1) {
            throw CastleAssertion(stage_, cur, "gap-shape",
                                  "inner gap off its endpoints");
          }
          matched = true;
        }
      }
      if (!matched) {
        throw CastleAssertion(stage_, cur, "gap-shape", "inner gap missing");
      }
    }

    check_patch(cur, grp, p, q, "patch-edges");

    if (!prm_.delta.lt_times(q - p, prm_.r)) {
      assign_group(cur, grp, {p, q});
      record(cur, gi, StageCase::Filling, p, q, (int)claims.size());
      check_patch_covered(cur, grp);
      return;
    }

    Frame fr;
    if (prm_.delta.lt_times(-p, prm_.r)) {
      fr.sign = 1;
    } else {
      if (!prm_.delta.lt_times(q, prm_.r)) {
        throw CastleAssertion(stage_, cur, "gap-shape",
                              "narrow gap pinned at neither end");
      }
      fr.sign = -1;
    }
    narrow_gap(cur, cls, grp, gi, claims, p, q, fr);
    check_patch_covered(cur, grp);
  }

  // The narrow-gap game in view coordinates (sign -1 mirrors the column).
  void narrow_gap(int cur, const PatternTable::BaseClass& cls,
                  const PatternTable::Group& grp, int gi,
                  const std::vector<Coord>& true_claims, Coord true_p,
                  Coord true_q, const Frame& fr) {
    Coord vp = fr.sign > 0 ? true_p : -true_q;
    Coord vq = fr.sign > 0 ? true_q : -true_p;
    std::vector<Coord> claims(true_claims.size());
    for (std::size_t v = 0; v < true_claims.size(); ++v) {
      claims[v] = fr.pt(true_claims[fr.sign > 0
                                        ? v
                                        : true_claims.size() - 1 - v]);
    }

    std::vector<Neighbor> nbs(grp.profiles.size());
    bool all_short = true, all_long = true;
    for (std::size_t pi = 0; pi < grp.profiles.size(); ++pi) {
      const auto& prof = cls.profiles[(std::size_t)grp.profiles[pi]];
      Neighbor nb;
      int hits = 0;
      for (Coord vi : claims) {
        Coord ti = fr.pt(vi);
        auto [tower_v, pat_v] = resolve_piece(cur, prof, ti);
        GInterval span = view_span(fr, tower_v, pat_v, ti);
        if (span.empty() || span.hi != vp - 1) continue;
        ++hits;
        nb = {vi, ti, tower_v, pat_v, span};
      }
      if (hits != 1) {
        throw CastleAssertion(stage_, cur, "neighbor-unique",
                              std::to_string(hits) +
                                  " gap-adjacent claims for one profile");
      }
      if (nb.view_i < vp - 1 - prm_.plus) {
        throw CastleAssertion(stage_, cur, "neighbor-range",
                              "adjacent claim too far at view offset " +
                                  istr(nb.view_i));
      }
      if (nb.view_span.lo > prm_.r || nb.view_span.hi < -prm_.r) {
        throw CastleAssertion(stage_, cur, "neighbor-meets-A",
                              "adjacent piece outside the column");
      }
      assert_rebase_exact(cur, prof, nb.true_i, nb.tower, nb.pattern);
      if (two_delta_.lt_times(nb.view_span.length(), prm_.r)) {
        all_long = false;
      } else {
        all_short = false;
      }
      nbs[pi] = nb;
    }

    if (all_long) {
      // Annex: widen the gap by a dr strip cut from every neighbor.
      std::unordered_map<PieceRef, GInterval, PieceRefHash> cuts;
      for (const Neighbor& nb : nbs) {
        GInterval next = own_span(
            fr, GInterval{nb.view_span.lo, vp - prm_.dr - 1}, nb.true_i);
        auto [it, fresh] = cuts.try_emplace({nb.tower, nb.pattern}, next);
        if (!fresh && !(it->second == next)) {
          throw CastleAssertion(stage_, cur, "update-conflict",
                                "neighbor cut differs between profiles");
        }
      }
      for (const auto& [ref, next] : cuts) {
        shrink_piece(ref.first, ref.second, next);
      }
      assign_group(cur, grp, fr.iv(GInterval{vp - prm_.dr, vq}));
      record(cur, gi,
             fr.sign > 0 ? StageCase::AnnexLeft : StageCase::AnnexRight,
             true_p, true_q, (int)claims.size());
      return;
    }

    if (all_short) {
      donate(cur, grp, gi, nbs, vq, fr, true_p, true_q,
             fr.sign > 0 ? StageCase::DonateLeft : StageCase::DonateRight,
             (int)claims.size());
      return;
    }

    synchronize(cur, cls, grp, gi, claims, vp, vq, fr, true_p, true_q);
  }

  void donate(int cur, const PatternTable::Group& grp, int gi,
              const std::vector<Neighbor>& nbs, Coord vq, const Frame& fr,
              Coord true_p, Coord true_q, StageCase action,
              int claim_count) {
    std::unordered_map<PieceRef, GInterval, PieceRefHash> grows;
    for (const Neighbor& nb : nbs) {
      GInterval next =
          own_span(fr, GInterval{nb.view_span.lo, vq}, nb.true_i);
      auto [it, fresh] = grows.try_emplace({nb.tower, nb.pattern}, next);
      if (!fresh && !(it->second == next)) {
        throw CastleAssertion(stage_, cur, "update-conflict",
                              "donation differs between profiles");
      }
    }
    for (const auto& [ref, next] : grows) {
      grow_piece(ref.first, ref.second, next);
    }
    assign_group(cur, grp, GInterval{});
    record(cur, gi, action, true_p, true_q, claim_count);
  }

  void synchronize(int cur, const PatternTable::BaseClass& cls,
                   const PatternTable::Group& grp, int gi,
                   const std::vector<Coord>& claims, Coord vp, Coord vq,
                   const Frame& fr, Coord true_p, Coord true_q) {
    if (!(prm_.delta < Rational(1, 32))) {
      throw PreconditionError(
          "synchronization requires delta below 1/32");
    }

    // Ladder preliminaries on the claims feeding the gap.
    std::size_t w_idx = claims.size();
    for (std::size_t v = 0; v < claims.size(); ++v) {
      if (claims[v] == vp - prm_.r - 1) w_idx = v;
    }
    if (w_idx == claims.size()) {
      throw CastleAssertion(stage_, cur, "sync-w-claim",
                            "no claim ends at the gap");
    }
    if (!two_delta_.lt_times(claims[0] + 2 * prm_.r, prm_.r)) {
      throw CastleAssertion(stage_, cur, "sync-left-anchor",
                            "first claim too far from the column edge");
    }
    for (std::size_t v = 0; v < w_idx; ++v) {
      if (!two_delta_.lt_times(claims[v + 1] - claims[v], prm_.r)) {
        throw CastleAssertion(stage_, cur, "sync-gaps",
                              "claims too sparse before the gap");
      }
    }

    // Minima ladder over tower labels.
    std::vector<int> labels(w_idx + 1);
    for (std::size_t v = 0; v <= w_idx; ++v) {
      const PatternTable::CoverEntry& e =
          grp.cover[(std::size_t)(fr.pt(claims[v]) + tab_.near)];
      labels[v] = tab_.tower_seen_by(cur, e.tower_rel);
    }
    std::vector<std::size_t> ladder;
    std::size_t from = 0;
    while (true) {
      std::size_t best = from;
      for (std::size_t v = from + 1; v <= w_idx; ++v) {
        if (labels[v] < labels[best]) best = v;
      }
      if (!ladder.empty() && labels[best] <= labels[ladder.back()]) {
        throw CastleAssertion(stage_, cur, "sync-ladder",
                              "tower labels not strictly increasing");
      }
      ladder.push_back(best);
      if (best == w_idx) break;
      from = best + 1;
    }

    // Chains: per profile, the spans of the ladder pieces.
    std::vector<std::vector<PieceRef>> refs(grp.profiles.size());
    SyncChains sc;
    sc.stage = stage_;
    sc.tower = cur;
    sc.p = vp;
    sc.cover_lo = claims[0] + prm_.r + floor3dr_ + 1;
    sc.chains.resize(grp.profiles.size());
    for (std::size_t pi = 0; pi < grp.profiles.size(); ++pi) {
      const auto& prof = cls.profiles[(std::size_t)grp.profiles[pi]];
      for (std::size_t k = 0; k < ladder.size(); ++k) {
        Coord ti = fr.pt(claims[ladder[k]]);
        auto [tower_v, pat_v] = resolve_piece(cur, prof, ti);
        refs[pi].push_back({tower_v, pat_v});
        sc.chains[pi].push_back(view_span(fr, tower_v, pat_v, ti));
      }
    }

    SyncResult res = synchronize_chains(prm_, sc);

    std::unordered_map<PieceRef, GInterval, PieceRefHash> moves;
    for (std::size_t pi = 0; pi < refs.size(); ++pi) {
      for (std::size_t k = 0; k < ladder.size(); ++k) {
        Coord ti = fr.pt(claims[ladder[k]]);
        GInterval next = own_span(fr, res.chains[pi][k], ti);
        auto [it, fresh] = moves.try_emplace(refs[pi][k], next);
        if (!fresh && !(it->second == next)) {
          throw CastleAssertion(stage_, cur, "update-conflict",
                                "synchronized spans differ between profiles");
        }
      }
    }
    for (const auto& [ref, next] : moves) {
      move_piece(ref.first, ref.second, next);
    }

    // The common tail now plays the neighbor for every profile.
    std::vector<Neighbor> tails(grp.profiles.size());
    Coord tail_ti = fr.pt(claims[ladder[(std::size_t)res.tail_link]]);
    for (std::size_t pi = 0; pi < refs.size(); ++pi) {
      Neighbor nb;
      nb.view_i = claims[ladder[(std::size_t)res.tail_link]];
      nb.true_i = tail_ti;
      nb.tower = refs[pi][(std::size_t)res.tail_link].first;
      nb.pattern = refs[pi][(std::size_t)res.tail_link].second;
      nb.view_span = res.tail;
      tails[pi] = nb;
    }

    StageCase action =
        fr.sign > 0 ? StageCase::SyncLeft : StageCase::SyncRight;
    if (two_delta_.lt_times(res.tail.length(), prm_.r)) {
      donate(cur, grp, gi, tails, vq, fr, true_p, true_q, action,
             (int)claims.size());
      return;
    }
    std::unordered_map<PieceRef, GInterval, PieceRefHash> cuts;
    for (const Neighbor& nb : tails) {
      GInterval next = own_span(
          fr, GInterval{nb.view_span.lo, vp - prm_.dr - 1}, nb.true_i);
      auto [it, fresh] = cuts.try_emplace({nb.tower, nb.pattern}, next);
      if (!fresh && !(it->second == next)) {
        throw CastleAssertion(stage_, cur, "update-conflict",
                              "tail cut differs between profiles");
      }
    }
    for (const auto& [ref, next] : cuts) {
      shrink_piece(ref.first, ref.second, next);
    }
    assign_group(cur, grp, fr.iv(GInterval{vp - prm_.dr, vq}));
    record(cur, gi, action, true_p, true_q, (int)claims.size());
  }

  // Every assigned piece is empty or at least dr long and lies in the
  // extended column.
  void sweep_conditions(int upto) {
    for (int j = 0; j <= upto; ++j) {
      const auto& spans = result_.assignment.pieces[(std::size_t)j];
      for (std::size_t pat = 0; pat < spans.size(); ++pat) {
        const GInterval& s = spans[pat];
        if (s.empty()) continue;
        if (s.length() < prm_.dr) {
          throw CastleAssertion(stage_, j, "piece-short",
                                "pattern " + std::to_string(pat) +
                                    " has length " + istr(s.length()));
        }
        if (s.lo < -prm_.plus || s.hi > prm_.plus) {
          throw CastleAssertion(stage_, j, "piece-range",
                                "pattern " + std::to_string(pat) +
                                    " leaves the extended column");
        }
      }
    }
  }

  const GroupContext& ctx_;
  const CastleParameters& prm_;
  const CastleInputs& in_;
  const PatternTable& tab_;
  bool trace_;
  Coord hm_, zm_;
  FiberBoard board_;
  Rational two_delta_{0, 1};
  Coord floor3dr_ = 0;
  int stage_ = 0;
  RecursionResult result_;
  std::unordered_map<MaskKey, FiberBoard::Mask, MaskKeyHash> masks_;
};

}  // namespace

SyncResult synchronize_chains(const CastleParameters& prm,
                              const SyncChains& in) {
  if (in.chains.empty() || in.chains[0].empty()) {
    throw PreconditionError("synchronize_chains needs nonempty chains");
  }
  std::size_t width = in.chains[0].size();
  for (const auto& chain : in.chains) {
    if (chain.size() != width) {
      throw PreconditionError("chains of unequal length");
    }
  }
  Rational two_delta = prm.delta * Rational(2, 1);
  Coord anchor = -((prm.r + 3) / 4);  // floor(-r/4)

  // Per-chain structural checks and the anchor link.
  std::vector<int> anchor_link(in.chains.size(), -1);
  for (std::size_t g = 0; g < in.chains.size(); ++g) {
    const auto& chain = in.chains[g];
    std::vector<GInterval> body;  // links beyond the first
    for (std::size_t k = 1; k < width; ++k) {
      if (!chain[k].empty()) body.push_back(chain[k]);
    }
    std::sort(body.begin(), body.end(),
              [](const GInterval& a, const GInterval& b) { return a.lo < b.lo; });
    Coord cursor = in.cover_lo;
    Coord rightmost = in.cover_lo - 1;
    for (const GInterval& s : body) {
      if (!two_delta.le_times(s.length(), prm.r)) {
        throw CastleAssertion(in.stage, in.tower, "sync-link-long",
                              "ladder piece longer than the cut bound");
      }
      if (s.hi < in.cover_lo || s.lo > in.p - 1) {
        throw CastleAssertion(in.stage, in.tower, "sync-link-outside",
                              "ladder piece misses the covered stretch");
      }
      if (s.lo > cursor) {
        throw CastleAssertion(in.stage, in.tower, "sync-cover",
                              "ladder pieces leave a hole at " + istr(cursor));
      }
      if (s.lo <= rightmost) {
        throw CastleAssertion(in.stage, in.tower, "sync-disjoint",
                              "ladder pieces overlap at " + istr(s.lo));
      }
      rightmost = s.hi;
      cursor = std::max(cursor, s.hi + 1);
    }
    if (cursor <= in.p - 1) {
      throw CastleAssertion(in.stage, in.tower, "sync-cover",
                            "ladder pieces stop before the gap");
    }
    if (rightmost != in.p - 1) {
      throw CastleAssertion(in.stage, in.tower, "sync-tail-adjacent",
                            "last ladder piece not flush with the gap");
    }
    if (!body.empty() && body.back().lo > prm.r) {
      throw CastleAssertion(in.stage, in.tower, "sync-rightmost",
                            "last ladder piece misses the column");
    }
    for (std::size_t k = width; k-- > 0;) {
      if (!chain[k].empty() && chain[k].lo <= anchor &&
          anchor <= chain[k].hi) {
        anchor_link[g] = (int)k;
        break;
      }
    }
    if (anchor_link[g] < 0) {
      throw CastleAssertion(in.stage, in.tower, "sync-anchor",
                            "no ladder piece holds the anchor column");
    }
  }

  // Reference chain: maximal anchor link, then leftmost anchor piece.
  std::size_t chosen = 0;
  for (std::size_t g = 1; g < in.chains.size(); ++g) {
    if (anchor_link[g] > anchor_link[chosen]) {
      chosen = g;
    } else if (anchor_link[g] == anchor_link[chosen] &&
               in.chains[g][(std::size_t)anchor_link[g]].lo <
                   in.chains[chosen][(std::size_t)anchor_link[chosen]].lo) {
      chosen = g;
    }
  }
  int k1 = anchor_link[chosen];
  GInterval ref_link = in.chains[chosen][(std::size_t)k1];
  Coord n_end = ref_link.hi, l1 = ref_link.lo;

  SyncResult res;
  res.chosen = (int)chosen;
  res.anchor_link = k1;
  res.chains = in.chains;

  for (std::size_t g = 0; g < in.chains.size(); ++g) {
    const auto& chain = in.chains[g];
    int k0 = -1;
    for (std::size_t k = 0; k < width; ++k) {
      if (!chain[k].empty() && chain[k].lo <= l1 && l1 <= chain[k].hi) {
        k0 = (int)k;
        break;
      }
    }
    if (k0 < 0) {
      throw CastleAssertion(in.stage, in.tower, "sync-start",
                            "no ladder piece holds the reference edge");
    }
    if (k0 > k1) {
      throw CastleAssertion(in.stage, in.tower, "sync-start",
                            "reference edge sits beyond the anchor link");
    }
    Coord m = chain[(std::size_t)k0].lo;
    GInterval a0{m, n_end};

    auto& out = res.chains[g];
    if (two_delta.le_times(a0.length(), prm.r)) {
      for (int k = k0; k < k1; ++k) out[(std::size_t)k] = GInterval{};
      out[(std::size_t)k1] = a0;
    } else {
      if (k0 == k1) {
        throw CastleAssertion(in.stage, in.tower, "sync-split",
                              "oversize stretch inside a single link");
      }
      Coord r0 = chain[(std::size_t)k0].hi;
      Coord lo_i = std::max({m + prm.dr - 1,
                             n_end - two_delta.floor_times(prm.r), l1 - 1});
      Coord hi_i = std::min({m - 1 + two_delta.floor_times(prm.r),
                             n_end - prm.dr, r0});
      if (lo_i > hi_i) {
        throw CastleAssertion(in.stage, in.tower, "sync-split",
                              "no admissible split point");
      }
      Coord split = lo_i + (hi_i - lo_i) / 2;
      out[(std::size_t)k0] = {m, split};
      out[(std::size_t)k1] = {split + 1, n_end};
      for (int k = k0 + 1; k < k1; ++k) out[(std::size_t)k] = GInterval{};
    }
    for (std::size_t k = (std::size_t)k1 + 1; k < width; ++k) {
      out[k] = in.chains[chosen][k];
    }
  }

  // Common tail past the anchor link.
  int tail = -1;
  for (std::size_t k = (std::size_t)k1 + 1; k < width; ++k) {
    if (!res.chains[chosen][k].empty()) tail = (int)k;
  }
  if (tail < 0) {
    throw CastleAssertion(in.stage, in.tower, "sync-tail",
                          "no common link beyond the anchor");
  }
  res.tail_link = tail;
  res.tail = res.chains[chosen][(std::size_t)tail];
  for (const auto& chain : res.chains) {
    if (!(chain[(std::size_t)tail] == res.tail)) {
      throw CastleAssertion(in.stage, in.tower, "sync-tail",
                            "tail links differ between chains");
    }
  }
  if (res.tail.hi != in.p - 1) {
    throw CastleAssertion(in.stage, in.tower, "sync-tail-adjacent",
                          "common tail not flush with the gap");
  }
  if (res.tail.lo > prm.r) {
    throw CastleAssertion(in.stage, in.tower, "sync-tail",
                          "common tail misses the column");
  }
  return res;
}

RecursionResult interval_recursion(const OdometerSpace& space,
                                   const GroupContext& ctx,
                                   const CastleParameters& params,
                                   const CastleInputs& inputs,
                                   const PatternTable& table, bool trace) {
  Engine engine(space, ctx, params, inputs, table, trace);
  return engine.run();
}

}  // namespace folner
