#include <doctest.h>

#include <map>
#include <memory>
#include <vector>

#include "folner/castle.hpp"
#include "folner/errors.hpp"
#include "folner/tower.hpp"
#include "test_util.hpp"

using namespace folner;
using namespace folner::testutil;

namespace {

CastleParameters micro(const GroupContext& ctx, FiniteSubset k, Coord r,
                       Rational delta, Rational beta) {
  CastleParameters p;
  p.k = k;
  p.delta = delta;
  p.epsilon = Rational(1, 10);
  p.r = r;
  p.dr = delta.floor_times(r);
  p.plus = r + (delta * Rational(3, 1)).ceil_times(r);
  p.beta = beta;
  p.eta = Rational(1, 2);
  p.tile_target = Rational(1, 2);
  p.k_prime = k;
  p.k_second = k;
  if (!ctx.alpha_is_identity()) {
    for (Coord i = -2 * r; i <= 2 * r; ++i) {
      p.k_prime = set_union(p.k_prime, apply_alpha_power(ctx, i, k));
    }
    for (Coord i = -6 * r; i <= 6 * r; ++i) {
      p.k_second = set_union(p.k_second, apply_alpha_power(ctx, i, k));
    }
  }
  return p;
}

ClopenSet z_cylinder(const OdometerSpace& space, int h_depth, int z_depth,
                     Coord z) {
  Cell c;
  c.h.assign((std::size_t)space.h_rank, 0);
  c.z = z;
  return ClopenSet::from_cells(space, h_depth, z_depth, {c});
}

std::int64_t count_of(const RecursionResult& res, StageCase c) {
  return res.case_counts[(std::size_t)c];
}

GInterval iv(Coord lo, Coord hi) { return {lo, hi}; }

// Piece lengths of the nonempty assigned intervals, length -> count.
std::map<Coord, int> length_counts(const IntervalAssignment& a) {
  std::map<Coord, int> out;
  for (const auto& tower : a.pieces)
    for (const auto& s : tower)
      if (!s.empty()) ++out[s.length()];
  return out;
}

}  // namespace

TEST_CASE("the sheared micro castle assembles and verifies") {
  auto ctx = GroupContext::semidirect(2, shear2());
  auto space = OdometerSpace::for_context(ctx, 2, 2);
  FiniteSubset k{sel({1, 0}, 0), sel({-1, 0}, 0)};
  auto params = micro(ctx, k, 8, Rational(1, 2), Rational(1, 2));
  REQUIRE(params.dr == 4);
  REQUIRE(params.k_prime == k);  // the alpha orbit fixes the first axis

  // 32 towers on the z-residues share one core, a row the twist fixes.
  CastleInputs inputs;
  inputs.h_depth = 4;
  inputs.z_depth = 5;
  std::vector<GroupElement> row;
  for (Coord x = 0; x <= 8; ++x) row.push_back(sel({x, 0}, 0));
  auto core = std::make_shared<const FiniteSubset>(
      FiniteSubset::from_sorted(std::move(row)));
  for (Coord z = 0; z < 32; ++z) {
    inputs.towers.push_back({z_cylinder(space, 4, 5, z), core, nullptr});
  }

  auto table = compute_patterns(space, ctx, params, inputs);
  REQUIRE(table.classes.size() == 1);
  CHECK(table.classes[0].rotation_orbit);
  REQUIRE(table.classes[0].patterns.size() == 1);

  auto selection =
      select_invariant_patterns(space, ctx, params, inputs, table, 1 << 22);
  CHECK(table.classes[0].patterns[0].invariant);
  CHECK_FALSE(selection.classes[0].audit_ran);  // no certificate
  CHECK(selection.classes[0].kept == 9);
  CHECK(selection.classes[0].total == 9);
  CHECK(selection.dropped_share == Rational(0, 1));

  auto rec = interval_recursion(space, ctx, params, inputs, table, true);
  CHECK(count_of(rec, StageCase::Start) == 1);
  CHECK(count_of(rec, StageCase::AnnexLeft) == 4);
  CHECK(count_of(rec, StageCase::DonateLeft) == 11);
  CHECK(count_of(rec, StageCase::Contained) == 16);
  CHECK(rec.trace[1].action == StageCase::AnnexLeft);
  CHECK(rec.trace[1].p == 8);
  CHECK(rec.trace[1].q == 8);
  CHECK(rec.trace[2].action == StageCase::DonateLeft);

  // The donation rounds stretch each cut piece back toward the gap; the
  // annexes at 1, 5, 9 and 13 trim their neighbor to four columns.
  CHECK(rec.assignment.pieces[0][0] == iv(-8, 4));
  CHECK(rec.assignment.pieces[1][0] == iv(4, 7));
  CHECK(rec.assignment.pieces[5][0] == iv(4, 7));
  CHECK(rec.assignment.pieces[9][0] == iv(4, 7));
  CHECK(rec.assignment.pieces[13][0] == iv(4, 10));
  for (int j : {2, 3, 4, 6, 7, 8, 10, 11, 12}) {
    CHECK(rec.assignment.pieces[(std::size_t)j][0].empty());
  }
  for (int j = 14; j < 32; ++j) {
    CHECK(rec.assignment.pieces[(std::size_t)j][0].empty());
  }
  CHECK(rec.fiber_floor == Rational(9, 256));

  auto assembled = assemble_castle(space, ctx, params, inputs, table,
                                   rec.assignment);
  REQUIRE(assembled.meta.size() == 5);
  CHECK(assembled.castle.towers.size() == 5);
  CHECK(assembled.shapes.size() == 3);
  CHECK(assembled.meta[0].input_tower == 0);
  CHECK(assembled.meta[0].span == iv(-8, 4));
  CHECK(assembled.meta[1].shape_index == assembled.meta[2].shape_index);
  CHECK(assembled.meta[2].shape_index == assembled.meta[3].shape_index);
  CHECK(assembled.shapes[(std::size_t)assembled.meta[1].shape_index]->size() ==
        4 * 9);
  CHECK(assembled.shapes[(std::size_t)assembled.meta[0].shape_index]->size() ==
        13 * 9);
  CHECK(check_castle(space, ctx, assembled.castle));

  auto report = verify_output(space, ctx, params, inputs, table,
                              rec.assignment, assembled);
  CHECK(report.density == Rational(9, 256));
  CHECK_FALSE(report.meets_target);
  CHECK(report.w0_measure == Rational(0, 1));
  CHECK(report.w0_within_bound);
  CHECK(report.disjoint_ok);
  CHECK(report.spans_ok);
  CHECK(report.shapes_invariant);
  CHECK(report.towers == 5);
  CHECK(report.distinct_shapes == 3);
}

TEST_CASE("the reference build reproduces the frozen recursion") {
  auto ctx = GroupContext::semidirect(1, Matrix::identity(1));
  auto space = OdometerSpace::for_context(ctx, 2, 2);
  FiniteSubset k{sel({1}, 0), sel({-1}, 0)};

  CastleBuildOptions opts;
  opts.tile_target_override = Rational(1, 8);
  opts.eta_override = Rational(1, 16);
  opts.foelner.base_radius = 16;
  opts.foelner.max_level_cells = 64;

  auto res = build_castle(space, ctx, k, Rational(1, 16), Rational(1, 10),
                          opts);

  CHECK(res.params.r == 512);
  CHECK(res.params.dr == 32);
  CHECK(res.params.plus == 608);
  CHECK(res.params.beta == Rational(1, 20490));

  // Box depth 12 is the least with a 1/16-invariant residue box under
  // the squared level spread, and 4096 rotations separate [-3r, 3r].
  CHECK(res.prepared.initial.h_depth == 12);
  CHECK(res.prepared.initial.z_depth == 12);
  REQUIRE(res.prepared.inputs.towers.size() == 4096);
  REQUIRE(res.prepared.inputs.towers[0].core != nullptr);
  CHECK(res.prepared.inputs.towers[0].core->size() == 4092);
  CHECK(res.prepared.inputs.towers[0].cert != nullptr);

  REQUIRE(res.table.classes.size() == 1);
  CHECK(res.table.classes[0].rotation_orbit);
  CHECK(res.table.classes[0].towers.size() == 4096);
  REQUIRE(res.table.classes[0].patterns.size() == 1);

  // The audit instance mass is above the default budget, so the class
  // is selected without it.
  REQUIRE(res.selection.classes.size() == 1);
  CHECK_FALSE(res.selection.classes[0].audit_ran);
  CHECK(res.selection.classes[0].kept == 4092);
  CHECK(res.selection.classes[0].total == 4092);
  CHECK(res.selection.dropped_share == Rational(0, 1));

  CHECK(count_of(res.recursion, StageCase::Start) == 1);
  CHECK(count_of(res.recursion, StageCase::AnnexLeft) == 96);
  CHECK(count_of(res.recursion, StageCase::DonateLeft) == 2975);
  CHECK(count_of(res.recursion, StageCase::Contained) == 1024);
  CHECK(count_of(res.recursion, StageCase::Filling) == 0);
  CHECK(count_of(res.recursion, StageCase::SyncLeft) == 0);

  const auto& pieces = res.recursion.assignment.pieces;
  CHECK(pieces[0][0] == iv(-512, 480));
  CHECK(pieces[1][0] == iv(480, 511));
  CHECK(pieces[33][0] == iv(480, 511));
  CHECK(pieces[3041][0] == iv(480, 542));
  CHECK(pieces[2][0].empty());
  CHECK(pieces[3042][0].empty());
  CHECK(pieces[4095][0].empty());

  auto lens = length_counts(res.recursion.assignment);
  CHECK(lens == std::map<Coord, int>{{993, 1}, {32, 95}, {63, 1}});
  CHECK(res.recursion.fiber_floor == Rational(1023, 1024));

  CHECK(res.assembled.meta.size() == 97);
  CHECK(res.report.towers == 97);
  CHECK(res.report.distinct_shapes == 3);
  CHECK(res.report.density == Rational(1023, 1024));
  CHECK(res.report.meets_target);
  CHECK(res.report.w0_measure == Rational(0, 1));
  CHECK(res.report.w0_within_bound);
  CHECK(res.report.disjoint_ok);
  CHECK(res.report.spans_ok);
  CHECK(res.report.shapes_invariant);
}

TEST_CASE("a relaxed build runs the lemma audit and stays dense") {
  auto ctx = GroupContext::semidirect(1, Matrix::identity(1));
  auto space = OdometerSpace::for_context(ctx, 2, 2);
  FiniteSubset k{sel({1}, 0), sel({-1}, 0)};

  CastleBuildOptions opts;
  opts.tile_target_override = Rational(1, 2);
  opts.eta_override = Rational(1, 16);
  opts.foelner.base_radius = 4;
  opts.foelner.max_level_cells = 32;
  opts.audit_budget = std::int64_t(1) << 24;

  auto res = build_castle(space, ctx, k, Rational(1, 13), Rational(1, 10),
                          opts);

  CHECK(res.params.r == 338);
  CHECK(res.params.dr == 26);
  CHECK(res.params.beta == Rational(1, 13530));

  // One level of radius 8: its squared spread needs a 2048-cell box at
  // eta 1/16, and 120 bricks of 17 tile all but eight residues.
  CHECK(res.prepared.initial.h_depth == 11);
  CHECK(res.prepared.initial.z_depth == 11);
  REQUIRE(res.prepared.inputs.towers.size() == 2048);
  CHECK(res.prepared.inputs.towers[0].core->size() == 2040);

  // The instance fits the raised budget here, so the audit runs for real.
  // Disjointness and the tiling certificates check out, while the two
  // asymptotic invariance clauses honestly fail at this toy scale.
  REQUIRE(res.selection.classes.size() == 1);
  const auto& audit = res.selection.classes[0];
  CHECK(audit.audit_ran);
  REQUIRE(audit.hypotheses.clauses.size() == 4);
  CHECK(audit.hypotheses.clauses[0].name == "rows_disjoint");
  CHECK(audit.hypotheses.clauses[0].holds);
  CHECK(audit.hypotheses.clauses[1].name == "certs_valid");
  CHECK(audit.hypotheses.clauses[1].holds);
  CHECK(audit.hypotheses.clauses[2].name == "tiles_invariant");
  CHECK_FALSE(audit.hypotheses.clauses[2].holds);
  CHECK(audit.hypotheses.clauses[3].name == "s_invariant");
  CHECK_FALSE(audit.hypotheses.clauses[3].holds);
  CHECK_FALSE(audit.hypotheses.all_hold);
  CHECK(audit.pieces_match);
  CHECK(audit.kept == 2040);
  CHECK(res.selection.dropped_share == Rational(0, 1));

  CHECK(count_of(res.recursion, StageCase::Start) == 1);
  CHECK(count_of(res.recursion, StageCase::AnnexLeft) == 53);
  CHECK(count_of(res.recursion, StageCase::DonateLeft) == 1318);
  CHECK(count_of(res.recursion, StageCase::Contained) == 676);

  const auto& pieces = res.recursion.assignment.pieces;
  CHECK(pieces[0][0] == iv(-338, 312));
  CHECK(pieces[1][0] == iv(312, 337));
  CHECK(pieces[27][0] == iv(312, 337));
  CHECK(pieces[1353][0] == iv(312, 356));

  auto lens = length_counts(res.recursion.assignment);
  CHECK(lens == std::map<Coord, int>{{651, 1}, {26, 52}, {45, 1}});

  CHECK(res.report.towers == 54);
  CHECK(res.report.distinct_shapes == 3);
  CHECK(res.recursion.fiber_floor == Rational(255, 256));
  CHECK(res.report.density == Rational(255, 256));
  CHECK(res.report.meets_target);
  CHECK(res.report.shapes_invariant);
  CHECK(res.report.spans_ok);
  CHECK(res.report.disjoint_ok);
}
