#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "folner/castle.hpp"
#include "folner/errors.hpp"

namespace folner {

namespace {

std::string offset_str(Coord i) { return std::to_string((long long)i); }

struct VecHash {
  std::size_t operator()(const Vec& v) const {
    std::size_t h = 1469598103934665603ULL;
    for (Coord c : v) {
      h ^= (std::size_t)c;
      h *= 1099511628211ULL;
    }
    return h;
  }
};

Vec mod_vec(Vec v, Coord m) {
  for (Coord& c : v) {
    c %= m;
    if (c < 0) c += m;
  }
  return v;
}

Vec sub_vec(const Vec& a, const Vec& b) {
  Vec r = a;
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = detail::checked_sub(r[i], b[i]);
  }
  return r;
}

void validate_inputs(const OdometerSpace& space, const GroupContext& ctx,
                     const CastleInputs& inputs) {
  if (ctx.kind() != GroupKind::Semidirect) {
    throw PreconditionError("castle inputs need a semidirect context");
  }
  if (!space.has_z) throw PreconditionError("castle inputs need a Z factor");
  if (inputs.towers.empty()) throw PreconditionError("no input towers");
  if (inputs.h_depth < 1 || inputs.h_depth > space.max_h_depth ||
      inputs.z_depth < 0 || inputs.z_depth > space.max_z_depth) {
    throw PreconditionError("input depths out of range");
  }
  std::vector<Cell> all_cells;
  for (const CastleTowerInput& t : inputs.towers) {
    if (t.base.is_empty()) throw PreconditionError("input tower with empty base");
    if (t.base.h_depth() != inputs.h_depth ||
        t.base.z_depth() != inputs.z_depth) {
      throw PreconditionError("input base at the wrong depth");
    }
    if (!t.core || t.core->empty()) {
      throw PreconditionError("input tower without a core");
    }
    for (const GroupElement& b : *t.core) {
      if (b.z != 0) throw PreconditionError("core element outside H");
    }
    all_cells.insert(all_cells.end(), t.base.cells().begin(),
                     t.base.cells().end());
  }
  std::sort(all_cells.begin(), all_cells.end());
  if (std::adjacent_find(all_cells.begin(), all_cells.end()) !=
      all_cells.end()) {
    throw PreconditionError("input bases overlap");
  }
}

// Index from z-residue to the base cells carrying it.
struct BaseIndex {
  struct Ref {
    int tower;
    const Cell* cell;
  };
  std::vector<std::vector<Ref>> by_z;

  BaseIndex(const OdometerSpace& space, const CastleInputs& inputs) {
    Coord zm = space.z_mod(inputs.z_depth);
    by_z.resize((std::size_t)zm);
    for (int j = 0; j < (int)inputs.towers.size(); ++j) {
      for (const Cell& c : inputs.towers[j].base.cells()) {
        by_z[(std::size_t)c.z].push_back({j, &c});
      }
    }
  }
};

// Visit candidates of one tower cell at one offset: the target tower,
// the forced translate residue and a lookup from the residue of
// alpha^-i(b') to the core positions b'.
struct OffsetCandidate {
  int tower = -1;
  Vec t0;  // reduced mod hm
  const FiniteSubset* core = nullptr;
  std::unordered_map<Vec, std::vector<int>, VecHash> lookup;
};

std::vector<OffsetCandidate> candidates_at(const OdometerSpace& space,
                                           const GroupContext& ctx,
                                           const CastleInputs& inputs,
                                           const BaseIndex& index,
                                           const Cell& own, Coord i) {
  Coord hm = space.h_mod(inputs.h_depth);
  Coord zm = space.z_mod(inputs.z_depth);
  Coord zt = (own.z + i) % zm;
  if (zt < 0) zt += zm;

  std::vector<OffsetCandidate> out;
  for (const BaseIndex::Ref& ref : index.by_z[(std::size_t)zt]) {
    OffsetCandidate cand;
    cand.tower = ref.tower;
    cand.t0 = mod_vec(sub_vec(ctx.alpha_apply(-i, ref.cell->h), own.h), hm);
    cand.core = inputs.towers[(std::size_t)ref.tower].core.get();
    // Two cells of one base can force the same residue; merging them
    // changes nothing downstream, so keep duplicates apart only by
    // (tower, t0).
    bool dup = false;
    for (const OffsetCandidate& prev : out) {
      if (prev.tower == cand.tower && prev.t0 == cand.t0) {
        dup = true;
        break;
      }
    }
    if (dup) continue;
    cand.lookup.reserve((std::size_t)cand.core->size() * 2);
    int pos = 0;
    for (const GroupElement& b2 : *cand.core) {
      Vec key = ctx.alpha_is_identity() ? mod_vec(b2.h, hm)
                                        : mod_vec(ctx.alpha_apply(-i, b2.h), hm);
      cand.lookup[key].push_back(pos++);
    }
    out.push_back(std::move(cand));
  }
  return out;
}

// The unique cover of core element b at this offset, or tower_rel = -1.
// Several hits violate the disjointness of the translated cores.
PatternTable::CoverEntry cover_of(const GroupContext& ctx,
                                  const std::vector<OffsetCandidate>& cands,
                                  Coord hm, const GroupElement& b, Coord i,
                                  int tower, int b_pos) {
  PatternTable::CoverEntry entry;
  for (const OffsetCandidate& cand : cands) {
    Vec key = mod_vec(sub_vec(b.h, cand.t0), hm);
    auto it = cand.lookup.find(key);
    if (it == cand.lookup.end()) continue;
    for (int pos : it->second) {
      const GroupElement& b2 = cand.core->elements()[(std::size_t)pos];
      Vec image = ctx.alpha_is_identity() ? b2.h : ctx.alpha_apply(-i, b2.h);
      Vec t = sub_vec(b.h, image);
      if (entry.tower_rel >= 0) {
        throw CastleAssertion(0, tower, "cover-unique",
                              "core position " + std::to_string(b_pos) +
                                  " has two covers at offset " + offset_str(i));
      }
      entry.tower_rel = cand.tower;
      entry.translate = std::move(t);
    }
  }
  return entry;
}

struct ClassPlan {
  std::vector<int> towers;
  int representative = 0;
  bool rotation_orbit = false;
};

// One class when the towers are the g-translate orbit of the first
// (single-cell bases, shared core and certificate); otherwise one class
// per tower.
std::vector<ClassPlan> plan_classes(const OdometerSpace& space,
                                    const GroupContext& ctx,
                                    const CastleInputs& inputs) {
  int n = (int)inputs.towers.size();
  bool orbit = n > 1;
  for (int j = 0; orbit && j < n; ++j) {
    const CastleTowerInput& t = inputs.towers[(std::size_t)j];
    if (t.base.cell_size() != 1) orbit = false;
    if (t.core != inputs.towers[0].core) orbit = false;
    if (t.cert != inputs.towers[0].cert) orbit = false;
  }
  if (orbit) {
    GroupElement g = ctx.element(Vec((std::size_t)ctx.rank(), 0), 1);
    const Cell& c0 = inputs.towers[0].base.cells()[0];
    Cell walk = c0;
    for (int j = 1; orbit && j < n; ++j) {
      walk = act_cell(space, ctx, g, walk, inputs.h_depth, inputs.z_depth);
      if (!(inputs.towers[(std::size_t)j].base.cells()[0] == walk)) {
        orbit = false;
      }
    }
  }
  if (orbit) {
    ClassPlan plan;
    plan.towers.resize((std::size_t)n);
    for (int j = 0; j < n; ++j) plan.towers[(std::size_t)j] = j;
    plan.rotation_orbit = true;
    return {plan};
  }
  std::vector<ClassPlan> plans;
  for (int j = 0; j < n; ++j) {
    ClassPlan plan;
    plan.towers = {j};
    plan.representative = j;
    plans.push_back(plan);
  }
  return plans;
}

using CoverRow = std::vector<PatternTable::CoverEntry>;

struct CoverRowHash {
  std::size_t operator()(const CoverRow& row) const {
    std::size_t h = 1469598103934665603ULL;
    VecHash vh;
    for (const PatternTable::CoverEntry& e : row) {
      h ^= (std::size_t)(e.tower_rel + 1);
      h *= 1099511628211ULL;
      h ^= vh(e.translate);
      h *= 1099511628211ULL;
    }
    return h;
  }
};

}  // namespace

int PatternTable::tower_seen_by(int tower, int tower_rel) const {
  if (tower_rel < 0) return -1;
  const BaseClass& c = classes[(std::size_t)class_of[(std::size_t)tower]];
  if (!c.rotation_orbit) return tower_rel;
  int n = (int)class_of.size();
  int shifted = (tower_rel + tower - c.representative) % n;
  if (shifted < 0) shifted += n;
  return shifted;
}

TSets compute_T_sets(const OdometerSpace& space, const GroupContext& ctx,
                     const CastleParameters& params, const CastleInputs& inputs,
                     int tower) {
  validate_inputs(space, ctx, inputs);
  if (tower < 0 || tower >= (int)inputs.towers.size()) {
    throw PreconditionError("tower index out of range");
  }
  BaseIndex index(space, inputs);
  Coord hm = space.h_mod(inputs.h_depth);
  Coord window = 4 * params.r;
  const CastleTowerInput& own = inputs.towers[(std::size_t)tower];

  TSets result;
  result.tower = tower;
  result.window = window;

  bool first_cell = true;
  for (const Cell& cell : own.base.cells()) {
    std::vector<TranslateSet> sets;
    for (Coord i = -window; i <= window; ++i) {
      auto cands = candidates_at(space, ctx, inputs, index, cell, i);
      std::unordered_set<Vec, VecHash> painted;
      for (const OffsetCandidate& cand : cands) {
        std::unordered_set<Vec, VecHash> seen;
        std::vector<GroupElement> ts;
        for (const GroupElement& b : *own.core) {
          Vec key = mod_vec(sub_vec(b.h, cand.t0), hm);
          auto it = cand.lookup.find(key);
          if (it == cand.lookup.end()) continue;
          for (int pos : it->second) {
            const GroupElement& b2 = cand.core->elements()[(std::size_t)pos];
            Vec t = sub_vec(b.h, ctx.alpha_apply(-i, b2.h));
            if (seen.insert(t).second) ts.push_back(ctx.element(t, 0));
          }
        }
        if (ts.empty()) continue;
        std::sort(ts.begin(), ts.end());
        // The translated cores at one offset must be pairwise disjoint.
        for (const GroupElement& t : ts) {
          for (const GroupElement& b2 : *cand.core) {
            Vec image = ctx.alpha_apply(-i, b2.h);
            for (std::size_t c = 0; c < image.size(); ++c) {
              image[c] = detail::checked_add(image[c], t.h[c]);
            }
            if (!painted.insert(image).second) {
              throw CastleAssertion(
                  0, tower, "translate-overlap",
                  "translated cores collide at offset " + offset_str(i));
            }
          }
        }
        sets.push_back({i, cand.tower, std::move(ts)});
      }
    }

    // At offset zero the only visit is the tower itself by the identity.
    for (const TranslateSet& s : sets) {
      if (s.offset != 0) continue;
      bool own_visit = s.tower == tower && s.translates.size() == 1 &&
                       s.translates[0] == ctx.identity();
      if (!own_visit) {
        throw CastleAssertion(0, tower, "zero-offset",
                              "offset 0 must carry only the identity visit");
      }
    }
    bool has_zero = false;
    for (const TranslateSet& s : sets) has_zero = has_zero || s.offset == 0;
    if (!has_zero) {
      throw CastleAssertion(0, tower, "zero-offset",
                            "offset 0 visit missing");
    }

    if (first_cell) {
      result.sets = std::move(sets);
      first_cell = false;
    } else if (!(result.sets.size() == sets.size() &&
                 std::equal(result.sets.begin(), result.sets.end(),
                            sets.begin(), [](const TranslateSet& a,
                                             const TranslateSet& b) {
                              return a.offset == b.offset &&
                                     a.tower == b.tower &&
                                     a.translates == b.translates;
                            }))) {
      throw CastleAssertion(0, tower, "base-point-dependence",
                            "translate sets differ between base cells");
    }
  }
  return result;
}

PatternTable compute_patterns(const OdometerSpace& space,
                              const GroupContext& ctx,
                              const CastleParameters& params,
                              const CastleInputs& inputs) {
  validate_inputs(space, ctx, inputs);
  BaseIndex index(space, inputs);
  Coord hm = space.h_mod(inputs.h_depth);

  PatternTable table;
  table.near = 2 * params.r;
  table.piece = 4 * params.r;
  table.wide = 6 * params.r;
  table.class_of.assign(inputs.towers.size(), -1);

  for (const ClassPlan& plan : plan_classes(space, ctx, inputs)) {
    int rep = plan.representative;
    const CastleTowerInput& own = inputs.towers[(std::size_t)rep];
    const FiniteSubset& core = *own.core;
    int nb = (int)core.size();

    PatternTable::BaseClass cls;
    cls.towers = plan.towers;
    cls.representative = rep;
    cls.rotation_orbit = plan.rotation_orbit;

    // Profiles by progressive refinement: one group of all core
    // elements, split at each offset by the cover entry. Groups never
    // merge, so the final groups are exactly the realized profiles.
    std::vector<std::vector<int>> groups(1);
    groups[0].resize((std::size_t)nb);
    for (int b = 0; b < nb; ++b) groups[0][(std::size_t)b] = b;
    std::vector<CoverRow> covers(1);

    std::int64_t window_len = 2 * table.wide + 1;
    std::vector<PatternTable::CoverEntry> row((std::size_t)nb);
    const Cell& cell = own.base.cells()[0];

    for (Coord i = -table.wide; i <= table.wide; ++i) {
      auto cands = candidates_at(space, ctx, inputs, index, cell, i);
      for (int b = 0; b < nb; ++b) {
        row[(std::size_t)b] = cover_of(ctx, cands, hm,
                                       core.elements()[(std::size_t)b], i, rep,
                                       b);
      }
      for (std::size_t ci = 1; ci < own.base.cells().size(); ++ci) {
        auto cands2 =
            candidates_at(space, ctx, inputs, index, own.base.cells()[ci], i);
        for (int b = 0; b < nb; ++b) {
          if (!(cover_of(ctx, cands2, hm, core.elements()[(std::size_t)b], i,
                         rep, b) == row[(std::size_t)b])) {
            throw CastleAssertion(0, rep, "base-point-dependence",
                                  "covers differ between base cells at offset " +
                                      offset_str(i));
          }
        }
      }
      if (i == 0) {
        for (int b = 0; b < nb; ++b) {
          const PatternTable::CoverEntry& e = row[(std::size_t)b];
          if (e.tower_rel != rep || !(e.translate == Vec((std::size_t)ctx.rank(), 0))) {
            throw CastleAssertion(0, rep, "zero-offset",
                                  "core element not covered by its own tower");
          }
        }
      }

      std::size_t before = groups.size();
      for (std::size_t gi = 0; gi < before; ++gi) {
        const PatternTable::CoverEntry& lead = row[(std::size_t)groups[gi][0]];
        bool uniform = true;
        for (int b : groups[gi]) {
          if (!(row[(std::size_t)b] == lead)) {
            uniform = false;
            break;
          }
        }
        if (uniform) {
          covers[gi].push_back(lead);
          continue;
        }
        std::vector<int> keep;
        std::vector<std::pair<std::vector<int>, PatternTable::CoverEntry>>
            children;
        for (int b : groups[gi]) {
          const PatternTable::CoverEntry& e = row[(std::size_t)b];
          if (e == lead) {
            keep.push_back(b);
            continue;
          }
          bool placed = false;
          for (auto& child : children) {
            if (child.second == e) {
              child.first.push_back(b);
              placed = true;
              break;
            }
          }
          if (!placed) children.push_back({{b}, e});
        }
        groups[gi] = std::move(keep);
        covers[gi].push_back(lead);
        for (auto& child : children) {
          CoverRow prefix = covers[gi];
          prefix.back() = child.second;
          groups.push_back(std::move(child.first));
          covers.push_back(std::move(prefix));
          if ((std::int64_t)groups.size() * window_len >
              (std::int64_t(1) << 24)) {
            throw PreconditionError("profile table too large");
          }
        }
      }
    }

    // Stable order: by least member.
    std::vector<std::size_t> order(groups.size());
    for (std::size_t g = 0; g < order.size(); ++g) order[g] = g;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return groups[a][0] < groups[b][0];
    });

    for (std::size_t g : order) {
      PatternTable::Profile prof;
      prof.cover = std::move(covers[g]);
      prof.members = std::move(groups[g]);
      cls.profiles.push_back(std::move(prof));
    }

    // Piece patterns and dispatch groups by restriction.
    std::unordered_map<CoverRow, int, CoverRowHash> pattern_of, group_of;
    for (std::size_t pi = 0; pi < cls.profiles.size(); ++pi) {
      PatternTable::Profile& prof = cls.profiles[pi];
      CoverRow piece_row(prof.cover.begin() + (table.wide - table.piece),
                         prof.cover.begin() + (table.wide + table.piece + 1));
      auto [it, fresh] =
          pattern_of.try_emplace(piece_row, (int)cls.patterns.size());
      if (fresh) {
        PatternTable::Pattern pat;
        pat.cover = piece_row;
        cls.patterns.push_back(std::move(pat));
      }
      prof.pattern = it->second;
      cls.patterns[(std::size_t)it->second].profiles.push_back((int)pi);

      CoverRow near_row(prof.cover.begin() + (table.wide - table.near),
                        prof.cover.begin() + (table.wide + table.near + 1));
      auto [git, gfresh] =
          group_of.try_emplace(near_row, (int)cls.groups.size());
      if (gfresh) {
        PatternTable::Group grp;
        grp.cover = near_row;
        cls.groups.push_back(std::move(grp));
      }
      prof.group = git->second;
      cls.groups[(std::size_t)git->second].profiles.push_back((int)pi);
    }
    for (std::size_t qi = 0; qi < cls.patterns.size(); ++qi) {
      PatternTable::Pattern& pat = cls.patterns[qi];
      CoverRow near_row(pat.cover.begin() + (table.piece - table.near),
                        pat.cover.begin() + (table.piece + table.near + 1));
      auto git = group_of.find(near_row);
      pat.group = git->second;
      cls.groups[(std::size_t)pat.group].patterns.push_back((int)qi);
    }

    // Pattern masses and the element index.
    cls.element_pattern.assign((std::size_t)nb, -1);
    for (std::size_t qi = 0; qi < cls.patterns.size(); ++qi) {
      PatternTable::Pattern& pat = cls.patterns[qi];
      std::vector<int> members;
      for (int pi : pat.profiles) {
        members.insert(members.end(), cls.profiles[(std::size_t)pi].members.begin(),
                       cls.profiles[(std::size_t)pi].members.end());
      }
      std::sort(members.begin(), members.end());
      std::vector<GroupElement> elems;
      elems.reserve(members.size());
      for (int b : members) {
        elems.push_back(core.elements()[(std::size_t)b]);
        cls.element_pattern[(std::size_t)b] = (int)qi;
      }
      pat.members = FiniteSubset::from_sorted(std::move(elems));
    }

    // Spacing and multiplicity of the visit labels per pattern.
    for (std::size_t qi = 0; qi < cls.patterns.size(); ++qi) {
      const PatternTable::Pattern& pat = cls.patterns[qi];
      std::vector<std::pair<Coord, int>> visits;  // (offset, tower_rel)
      for (Coord i = -table.piece; i <= table.piece; ++i) {
        const PatternTable::CoverEntry& e =
            pat.cover[(std::size_t)(i + table.piece)];
        if (e.tower_rel >= 0) visits.push_back({i, e.tower_rel});
      }
      std::unordered_map<int, int> counts;
      int own_near = 0;
      for (auto [i, label] : visits) {
        ++counts[label];
        if (label == rep && i >= -table.near && i <= table.near) {
          ++own_near;
          if (i != 0) {
            throw CastleAssertion(0, rep, "pattern-own-visit",
                                  "own tower revisited at offset " +
                                      offset_str(i));
          }
        }
      }
      if (own_near != 1) {
        throw CastleAssertion(0, rep, "pattern-own-visit",
                              "own visit count " + std::to_string(own_near));
      }
      for (auto [label, count] : counts) {
        if (count > 4) {
          throw CastleAssertion(0, rep, "pattern-multiplicity",
                                "tower " + std::to_string(label) + " visited " +
                                    std::to_string(count) + " times");
        }
      }
      for (std::size_t a = 0; a + 1 < visits.size(); ++a) {
        for (std::size_t b = a + 1; b < visits.size(); ++b) {
          if (visits[a].second == visits[b].second &&
              visits[b].first - visits[a].first <= 2 * params.r + 1) {
            throw CastleAssertion(
                0, rep, "pattern-spacing",
                "tower " + std::to_string(visits[a].second) +
                    " revisited within the spacing window at offsets " +
                    offset_str(visits[a].first) + " and " +
                    offset_str(visits[b].first));
          }
        }
      }
    }

    int cls_index = (int)table.classes.size();
    for (int j : plan.towers) table.class_of[(std::size_t)j] = cls_index;
    table.classes.push_back(std::move(cls));
  }
  return table;
}

SelectionReport select_invariant_patterns(const OdometerSpace& space,
                                          const GroupContext& ctx,
                                          const CastleParameters& params,
                                          const CastleInputs& inputs,
                                          PatternTable& table,
                                          std::int64_t audit_budget) {
  SelectionReport report;
  std::int64_t dropped_weighted = 0, total_weighted = 0;

  for (PatternTable::BaseClass& cls : table.classes) {
    SelectionReport::ClassAudit audit;
    audit.representative = cls.representative;

    for (PatternTable::Pattern& pat : cls.patterns) {
      auto inv = check_invariance(ctx, params.k_prime, params.delta,
                                  pat.members);
      pat.invariant = inv.invariant;
      audit.total += pat.members.size();
      if (pat.invariant) audit.kept += pat.members.size();
    }
    Rational keep_share(1, 1);
    keep_share = keep_share - params.beta;
    if (keep_share.lt_times(audit.kept, audit.total)) {
      throw CastleAssertion(0, cls.representative, "invariant-mass",
                            "kept " + std::to_string(audit.kept) + " of " +
                                std::to_string(audit.total) +
                                " misses the 1 - beta share");
    }

    const CastleTowerInput& own =
        inputs.towers[(std::size_t)cls.representative];
    if (own.cert) {
      TSets tsets = compute_T_sets(space, ctx, params, inputs,
                                   cls.representative);
      std::int64_t mass = 0;
      for (const TranslateSet& s : tsets.sets) {
        mass += (std::int64_t)s.translates.size() *
                inputs.towers[(std::size_t)s.tower].core->size();
      }
      if (2 * mass <= audit_budget) {
        DisjointificationInstance inst;
        inst.s = *own.core;
        inst.k = params.k_prime;
        inst.delta = params.beta;
        inst.rows.resize((std::size_t)(2 * tsets.window + 1));
        for (const TranslateSet& s : tsets.sets) {
          const FiniteSubset& target_core =
              *inputs.towers[(std::size_t)s.tower].core;
          const TilingCertificate& target_cert =
              *inputs.towers[(std::size_t)s.tower].cert;
          for (const GroupElement& t : s.translates) {
            TiledSet member;
            member.set = translate_right(
                ctx, apply_alpha_power(ctx, -s.offset, target_core), t);
            for (const auto& [tile, c] : target_cert.tiles) {
              member.cert.tiles.push_back(
                  {apply_alpha_power(ctx, -s.offset, tile),
                   ctx.compose(ctx.element(ctx.alpha_apply(-s.offset, c.h), 0),
                               t)});
            }
            inst.rows[(std::size_t)(s.offset + tsets.window)]
                .push_back(std::move(member));
          }
        }

        PiecePartition part = disjointify(ctx, inst, CheckMode::Audit);
        audit.audit_ran = true;
        audit.hypotheses = part.hypotheses;
        for (const HypothesisClause& c : part.hypotheses.clauses) {
          if ((c.name == "rows_disjoint" || c.name == "certs_valid") &&
              !c.holds) {
            throw CastleAssertion(0, cls.representative, "audit-" + c.name,
                                  c.detail);
          }
        }

        // The lemma pieces must be exactly the pattern masses.
        audit.pieces_match =
            part.pieces.size() == cls.patterns.size();
        for (const Piece& piece : part.pieces) {
          bool found = false;
          for (const PatternTable::Pattern& pat : cls.patterns) {
            if (piece.set == pat.members) {
              found = true;
              break;
            }
          }
          if (!found) {
            audit.pieces_match = false;
            break;
          }
        }
        if (!audit.pieces_match) {
          throw CastleAssertion(0, cls.representative, "audit-pieces",
                                "lemma pieces differ from the pattern masses");
        }
      }
    }

    std::int64_t weight = (std::int64_t)cls.towers.size();
    dropped_weighted += weight * (audit.total - audit.kept);
    total_weighted += weight * audit.total;
    report.classes.push_back(std::move(audit));
  }

  report.dropped_share = Rational(dropped_weighted, total_weighted);
  return report;
}

}  // namespace folner
