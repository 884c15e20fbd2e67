#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "folner/castle.hpp"
#include "folner/errors.hpp"

namespace folner {

namespace {

std::int64_t h_cell_count(const OdometerSpace& space, int h_depth,
                          int h_rank) {
  Coord hm = space.h_mod(h_depth);
  std::int64_t n = 1;
  for (int i = 0; i < h_rank; ++i) n = detail::checked_mul(n, hm);
  return n;
}

}  // namespace

PreparedInputs prepare_inputs(const OdometerSpace& space,
                              const GroupContext& ctx,
                              const CastleParameters& params,
                              const CastleBuildOptions& options) {
  TilingCollection collection = tiling_collection(
      ctx, params.k_second,
      options.tile_target_override.value_or(params.tile_target),
      params.epsilon, options.foelner);

  FiniteSubset levels_union;
  for (const FiniteSubset& level : collection.seq.levels) {
    levels_union = set_union(levels_union, level);
  }
  FiniteSubset spread =
      product_set(ctx, levels_union, inverse_set(ctx, levels_union));
  spread = product_set(ctx, spread, spread);

  Rational inv_delta = options.eta_override.value_or(params.eta);
  FiniteSubset freeness = g_interval(ctx, -3 * params.r, 3 * params.r);
  InitialCastleResult initial = build_initial_castle(
      space, ctx, spread, inv_delta, freeness, options.initial);

  if (initial.castle.towers.empty()) {
    throw PreconditionError("initial castle has no towers");
  }
  const auto& shape0 = initial.castle.towers[0].shape_ptr();
  for (const Tower& t : initial.castle.towers) {
    if (t.shape_ptr() != shape0) {
      throw CastleAssertion(0, 0, "initial-shared-shape",
                            "initial towers do not share one shape");
    }
  }

  ExtractResult extracted = extract_tileable(ctx, *shape0, collection);
  auto core =
      std::make_shared<const FiniteSubset>(std::move(extracted.e_prime));
  auto cert =
      std::make_shared<const TilingCertificate>(std::move(extracted.cert));

  PreparedInputs out{std::move(collection), std::move(initial), {}};
  out.inputs.h_depth = out.initial.h_depth;
  out.inputs.z_depth = out.initial.z_depth;
  out.inputs.towers.reserve(out.initial.castle.towers.size());
  for (const Tower& t : out.initial.castle.towers) {
    out.inputs.towers.push_back({t.base(), core, cert});
  }
  return out;
}

AssembledCastle assemble_castle(const OdometerSpace& space,
                                const GroupContext& ctx,
                                const CastleParameters& params,
                                const CastleInputs& inputs,
                                const PatternTable& table,
                                const IntervalAssignment& assignment) {
  (void)space;
  if (assignment.pieces.size() != inputs.towers.size()) {
    throw PreconditionError("assignment does not match the inputs");
  }
  AssembledCastle out;
  std::map<std::tuple<int, int, Coord, Coord>, int> shape_of;
  for (int j = 0; j < (int)inputs.towers.size(); ++j) {
    int ci = table.class_of[(std::size_t)j];
    const auto& cls = table.classes[(std::size_t)ci];
    const auto& spans = assignment.pieces[(std::size_t)j];
    if (spans.size() != cls.patterns.size()) {
      throw PreconditionError("assignment does not match the pattern table");
    }
    for (int pat = 0; pat < (int)spans.size(); ++pat) {
      if (!cls.patterns[(std::size_t)pat].invariant) continue;
      const GInterval& s = spans[(std::size_t)pat];
      if (s.empty()) continue;
      if (!params.delta.le_times(2, s.length())) {
        throw CastleAssertion(0, j, "span-convention",
                              "span too short for the invariance convention");
      }
      auto key = std::make_tuple(ci, pat, s.lo, s.hi);
      auto it = shape_of.find(key);
      int idx;
      if (it != shape_of.end()) {
        idx = it->second;
      } else {
        const FiniteSubset& members = cls.patterns[(std::size_t)pat].members;
        FiniteSubset shape =
            product_set(ctx, g_interval(ctx, s.lo, s.hi), members);
        std::int64_t row_sum = 0;
        if (ctx.alpha_is_identity()) {
          row_sum = detail::checked_mul(
              s.length(), k_boundary_size(ctx, params.k, members));
        } else {
          for (Coord a = s.lo; a <= s.hi; ++a) {
            row_sum = detail::checked_add(
                row_sum,
                k_boundary_size(ctx, apply_alpha_power(ctx, -a, params.k),
                                members));
          }
        }
        InvarianceResult inv =
            check_invariance(ctx, params.k, params.delta, shape);
        if (inv.boundary_size != row_sum) {
          throw CastleAssertion(0, j, "shape-boundary",
                                "shape boundary differs from the row sum");
        }
        idx = (int)out.shapes.size();
        out.shapes.push_back(
            std::make_shared<const FiniteSubset>(std::move(shape)));
        out.shape_invariance.push_back(inv);
        shape_of.emplace(key, idx);
      }
      out.castle.towers.emplace_back(out.shapes[(std::size_t)idx],
                                     inputs.towers[(std::size_t)j].base);
      out.meta.push_back({j, ci, pat, s, idx});
    }
  }
  return out;
}

CastleReport verify_output(const OdometerSpace& space, const GroupContext& ctx,
                           const CastleParameters& params,
                           const CastleInputs& inputs,
                           const PatternTable& table,
                           const IntervalAssignment& assignment,
                           const AssembledCastle& assembled) {
  if (assignment.pieces.size() != inputs.towers.size()) {
    throw PreconditionError("assignment does not match the inputs");
  }
  Coord hm = space.h_mod(inputs.h_depth);
  Coord zm = space.z_mod(inputs.z_depth);
  if (space.cell_count(inputs.h_depth, inputs.z_depth) > (__int128)1 << 31) {
    throw PreconditionError("cell count too large for the verifier");
  }
  std::int64_t hcells = h_cell_count(space, inputs.h_depth, space.h_rank);
  std::size_t words = (std::size_t)((hcells + 63) / 64);
  std::vector<std::vector<std::uint64_t>> pieces_board(
      (std::size_t)zm, std::vector<std::uint64_t>(words, 0));
  auto kept_board = pieces_board;
  auto castle_board = pieces_board;

  auto cell_index = [&](const Vec& v) {
    std::int64_t idx = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      Coord c = v[i] % hm;
      if (c < 0) c += hm;
      idx = idx * hm + c;
    }
    return idx;
  };

  CastleReport rep;
  rep.spans_ok = true;

  // Repaint every piece from the assignment, rechecking disjointness.
  for (int j = 0; j < (int)inputs.towers.size(); ++j) {
    const auto& cls = table.classes[(std::size_t)table.class_of[(std::size_t)j]];
    const auto& base_cells = inputs.towers[(std::size_t)j].base.cells();
    const auto& spans = assignment.pieces[(std::size_t)j];
    for (int pat = 0; pat < (int)spans.size(); ++pat) {
      const GInterval& s = spans[(std::size_t)pat];
      if (s.empty()) continue;
      if (s.length() < params.dr || s.lo < -params.plus ||
          s.hi > params.plus) {
        rep.spans_ok = false;
      }
      bool kept = cls.patterns[(std::size_t)pat].invariant;
      for (const Cell& cell : base_cells) {
        for (Coord a = s.lo; a <= s.hi; ++a) {
          Coord z = (cell.z + a) % zm;
          if (z < 0) z += zm;
          for (const GroupElement& b :
               cls.patterns[(std::size_t)pat].members) {
            Vec v = b.h;
            for (std::size_t i = 0; i < v.size(); ++i) {
              v[i] = detail::checked_add(v[i], cell.h[i]);
            }
            if (!ctx.alpha_is_identity()) v = ctx.alpha_apply(a, v);
            std::int64_t idx = cell_index(v);
            std::uint64_t bit = std::uint64_t(1) << (idx & 63);
            auto& word = pieces_board[(std::size_t)z][(std::size_t)(idx >> 6)];
            if (word & bit) {
              throw CastleAssertion(0, j, "pieces-overlap",
                                    "piece cells collide in fiber " +
                                        std::to_string((long long)z));
            }
            word |= bit;
            if (kept) {
              kept_board[(std::size_t)z][(std::size_t)(idx >> 6)] |= bit;
            }
          }
        }
      }
    }
  }
  rep.disjoint_ok = true;

  // Repaint the assembled castle from its towers alone.
  std::int64_t painted = 0;
  for (const Tower& t : assembled.castle.towers) {
    for (const Cell& cell : t.base().cells()) {
      for (const GroupElement& s : t.shape()) {
        Vec v = ctx.alpha_apply(s.z, cell.h);
        for (std::size_t i = 0; i < v.size(); ++i) {
          v[i] = detail::checked_add(v[i], s.h[i]);
        }
        Coord z = (s.z + cell.z) % zm;
        if (z < 0) z += zm;
        std::int64_t idx = cell_index(v);
        castle_board[(std::size_t)z][(std::size_t)(idx >> 6)] |=
            std::uint64_t(1) << (idx & 63);
        ++painted;
      }
    }
  }
  std::int64_t covered = 0;
  for (const auto& row : castle_board) {
    for (std::uint64_t w : row) covered += __builtin_popcountll(w);
  }
  if (painted != covered) {
    throw CastleAssertion(0, -1, "assembled-overlap",
                          "assembled levels cover a cell twice");
  }
  if (kept_board != castle_board) {
    throw CastleAssertion(0, -1, "final-union-equality",
                          "assembled footprint differs from the kept pieces");
  }

  std::int64_t total = detail::checked_mul(hcells, (std::int64_t)zm);
  rep.density = Rational(covered, total);
  rep.meets_target =
      !(rep.density < Rational(1, 1) - Rational(3, 1) * params.epsilon);

  Rational w0(0, 1);
  for (int j = 0; j < (int)inputs.towers.size(); ++j) {
    const auto& cls = table.classes[(std::size_t)table.class_of[(std::size_t)j]];
    std::int64_t dropped = 0;
    for (const auto& pattern : cls.patterns) {
      if (!pattern.invariant) dropped += pattern.members.size();
    }
    if (dropped == 0) continue;
    w0 = w0 + clopen_measure(space, inputs.towers[(std::size_t)j].base) *
                  Rational(dropped, 1);
  }
  rep.w0_measure = w0;
  rep.w0_bound = params.beta;
  rep.w0_within_bound = !(params.beta < w0);

  rep.towers = (std::int64_t)assembled.castle.towers.size();
  rep.distinct_shapes = (std::int64_t)assembled.shapes.size();
  rep.shapes_invariant = true;
  for (const InvarianceResult& inv : assembled.shape_invariance) {
    if (!inv.invariant) rep.shapes_invariant = false;
  }
  return rep;
}

CastleBuildResult build_castle(const OdometerSpace& space,
                               const GroupContext& ctx, const FiniteSubset& k,
                               const Rational& delta, const Rational& epsilon,
                               const CastleBuildOptions& options) {
  CastleBuildResult res;
  res.params = setup_parameters(ctx, k, delta, epsilon);
  res.prepared = prepare_inputs(space, ctx, res.params, options);
  res.table = compute_patterns(space, ctx, res.params, res.prepared.inputs);
  res.selection =
      select_invariant_patterns(space, ctx, res.params, res.prepared.inputs,
                                res.table, options.audit_budget);
  res.recursion = interval_recursion(space, ctx, res.params,
                                     res.prepared.inputs, res.table,
                                     options.trace);
  res.assembled = assemble_castle(space, ctx, res.params, res.prepared.inputs,
                                  res.table, res.recursion.assignment);
  res.report = verify_output(space, ctx, res.params, res.prepared.inputs,
                             res.table, res.recursion.assignment,
                             res.assembled);
  return res;
}

}  // namespace folner
