#include <doctest.h>

#include <memory>
#include <vector>

#include "folner/castle.hpp"
#include "folner/errors.hpp"
#include "test_util.hpp"

using namespace folner;
using namespace folner::testutil;

namespace {

GroupContext zxz() { return GroupContext::semidirect(1, Matrix::identity(1)); }

FiniteSubset k_pm1() { return FiniteSubset{sel({1}, 0), sel({-1}, 0)}; }

CastleParameters micro(FiniteSubset k, Coord r, Rational delta,
                       Rational beta) {
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
  return p;
}

FiniteSubset h_interval(Coord lo, Coord hi) {
  std::vector<GroupElement> v;
  for (Coord x = lo; x <= hi; ++x) v.push_back(sel({x}, 0));
  return FiniteSubset::from_sorted(std::move(v));
}

ClopenSet z_cylinder(const OdometerSpace& space, int h_depth, int z_depth,
                     Coord z) {
  Cell c;
  c.h.assign((std::size_t)space.h_rank, 0);
  c.z = z;
  return ClopenSet::from_cells(space, h_depth, z_depth, {c});
}

// Towers with zero h-residue at the given z-residues, one shared core.
CastleInputs towers_at(const OdometerSpace& space, const FiniteSubset& core,
                       const std::vector<Coord>& zs) {
  CastleInputs in;
  in.h_depth = 4;
  in.z_depth = 4;
  auto core_ptr = std::make_shared<const FiniteSubset>(core);
  for (Coord z : zs) {
    in.towers.push_back({z_cylinder(space, 4, 4, z), core_ptr, nullptr});
  }
  return in;
}

std::int64_t count_of(const RecursionResult& res, StageCase c) {
  return res.case_counts[(std::size_t)c];
}

GInterval iv(Coord lo, Coord hi) { return {lo, hi}; }
GInterval none() { return {}; }

}  // namespace

TEST_CASE("chain synchronization splits against the reference chain") {
  auto ctx = zxz();
  auto params = micro(k_pm1(), 64, Rational(1, 4), Rational(1, 9));
  // dr = 16, cut bound 2*delta*r = 32, anchor column floor(-r/4) = -16.

  SyncChains in;
  in.stage = 7;
  in.tower = 6;
  in.p = 2;
  in.cover_lo = -45;
  in.chains = {
      {iv(-70, -50), iv(-45, -36), iv(-35, -16), iv(-15, 1)},
      {iv(-60, -28), iv(-45, -30), iv(-29, -4), iv(-3, 1)},
      {iv(-38, -20), iv(-45, -35), iv(-34, -10), iv(-9, 1)},
  };

  auto res = synchronize_chains(params, in);

  // Chains 0, 1 and 2 hold the anchor in their third link; the tie goes
  // to chain 0 by the smaller left endpoint (-35 vs -29 and -34).
  CHECK(res.chosen == 0);
  CHECK(res.anchor_link == 2);

  // The reference chain is already aligned.
  CHECK(res.chains[0] ==
        std::vector<GInterval>{iv(-70, -50), iv(-45, -36), iv(-35, -16),
                               iv(-15, 1)});

  // Chain 1 reaches -35 in its first link, so the stretch [-60, -16] is
  // too long and splits: the admissible split points are [-36, -32] and
  // the midpoint -34 is taken. The middle link empties.
  CHECK(res.chains[1] ==
        std::vector<GInterval>{iv(-60, -34), none(), iv(-33, -16),
                               iv(-15, 1)});

  // Chain 2 reaches -35 in its first link too, but [-38, -16] fits the
  // cut bound, so the anchor link absorbs it whole.
  CHECK(res.chains[2] ==
        std::vector<GInterval>{none(), none(), iv(-38, -16), iv(-15, 1)});

  // Everything past the anchor link is copied from the reference.
  CHECK(res.tail_link == 3);
  CHECK(res.tail == iv(-15, 1));
}

TEST_CASE("chain synchronization rejects malformed chains") {
  auto ctx = zxz();
  auto params = micro(k_pm1(), 64, Rational(1, 4), Rational(1, 9));

  SUBCASE("a hole in the covered stretch") {
    SyncChains in;
    in.p = 2;
    in.cover_lo = -45;
    in.chains = {{iv(-70, -50), iv(-45, -30), iv(-28, -10), iv(-9, 1)}};
    try {
      synchronize_chains(params, in);
      FAIL("hole accepted");
    } catch (const CastleAssertion& e) {
      CHECK(e.claim() == "sync-cover");
    }
  }

  SUBCASE("no link holds the anchor column") {
    SyncChains in;
    in.p = 2;
    in.cover_lo = -10;
    in.chains = {{iv(-70, -50), iv(-10, 1)}};
    try {
      synchronize_chains(params, in);
      FAIL("missing anchor accepted");
    } catch (const CastleAssertion& e) {
      CHECK(e.claim() == "sync-anchor");
    }
  }

  SUBCASE("no common link past the anchor") {
    SyncChains in;
    in.p = -15;
    in.cover_lo = -35;
    in.chains = {{iv(-70, -50), iv(-35, -16)}};
    try {
      synchronize_chains(params, in);
      FAIL("missing tail accepted");
    } catch (const CastleAssertion& e) {
      CHECK(e.claim() == "sync-tail");
    }
  }
}

TEST_CASE("recursion alternates donations and cuts around the rotation") {
  auto ctx = zxz();
  auto space = OdometerSpace::for_context(ctx, 2, 2);
  auto params = micro(k_pm1(), 4, Rational(1, 2), Rational(1, 9));
  // dr = 2, cut bound 4, extended column [-10, 10].

  std::vector<Coord> zs;
  for (Coord z = 0; z < 16; ++z) zs.push_back(z);
  auto inputs = towers_at(space, h_interval(0, 8), zs);
  auto table = compute_patterns(space, ctx, params, inputs);
  REQUIRE(table.classes.size() == 1);
  REQUIRE(table.classes[0].rotation_orbit);

  auto res = interval_recursion(space, ctx, params, inputs, table, true);

  CHECK(count_of(res, StageCase::Start) == 1);
  CHECK(count_of(res, StageCase::AnnexLeft) == 4);
  CHECK(count_of(res, StageCase::DonateLeft) == 3);
  CHECK(count_of(res, StageCase::Contained) == 8);
  CHECK(count_of(res, StageCase::Filling) == 0);
  CHECK(res.trace.size() == 16);
  CHECK(res.trace[2].action == StageCase::DonateLeft);
  CHECK(res.trace[2].p == 4);
  CHECK(res.trace[2].q == 4);

  std::vector<GInterval> expected = {
      iv(-4, 2), iv(2, 3), none(), iv(2, 3), none(),   iv(2, 3),
      none(),    iv(2, 4), none(), none(),   none(),   none(),
      none(),    none(),   none(), none()};
  REQUIRE(res.assignment.pieces.size() == 16);
  for (int j = 0; j < 16; ++j) {
    CAPTURE(j);
    REQUIRE(res.assignment.pieces[(std::size_t)j].size() == 1);
    CHECK(res.assignment.pieces[(std::size_t)j][0] == expected[(std::size_t)j]);
  }

  // The pieces partition every fiber, so each carries the core's share.
  CHECK(res.fiber_floor == Rational(9, 16));
}

TEST_CASE("a wide hole between the neighbors is filled directly") {
  auto ctx = zxz();
  auto space = OdometerSpace::for_context(ctx, 2, 2);
  auto params = micro(k_pm1(), 4, Rational(1, 2), Rational(1, 9));

  auto inputs = towers_at(space, h_interval(0, 8), {0, 8});
  auto table = compute_patterns(space, ctx, params, inputs);
  auto res = interval_recursion(space, ctx, params, inputs, table);

  CHECK(count_of(res, StageCase::Start) == 1);
  CHECK(count_of(res, StageCase::Filling) == 1);
  CHECK(res.assignment.pieces[0][0] == iv(-4, 4));
  CHECK(res.assignment.pieces[1][0] == iv(-3, 3));
  CHECK(res.fiber_floor == Rational(9, 16));
}

TEST_CASE("gaps pinned at the left edge run the mirrored game") {
  auto ctx = zxz();
  auto space = OdometerSpace::for_context(ctx, 2, 2);
  auto params = micro(k_pm1(), 4, Rational(1, 2), Rational(1, 9));

  auto inputs = towers_at(space, h_interval(0, 8), {2, 0, 14, 13, 11});
  auto table = compute_patterns(space, ctx, params, inputs);
  auto res = interval_recursion(space, ctx, params, inputs, table, true);

  CHECK(count_of(res, StageCase::Start) == 1);
  CHECK(count_of(res, StageCase::AnnexRight) == 3);
  CHECK(count_of(res, StageCase::DonateRight) == 1);
  CHECK(res.trace[4].action == StageCase::DonateRight);
  CHECK(res.trace[4].p == -4);
  CHECK(res.trace[4].q == -3);

  CHECK(res.assignment.pieces[0][0] == iv(-2, 4));
  CHECK(res.assignment.pieces[1][0] == iv(-2, -1));
  CHECK(res.assignment.pieces[2][0] == iv(-2, -1));
  CHECK(res.assignment.pieces[3][0] == iv(-6, -2));
  CHECK(res.assignment.pieces[4][0].empty());
  CHECK(res.fiber_floor == Rational(9, 16));
}
