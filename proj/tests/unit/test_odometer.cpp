#include <doctest.h>

#include <random>

#include "folner/density.hpp"
#include "folner/odometer.hpp"
#include "test_util.hpp"

using namespace folner;
using namespace folner::testutil;

namespace {

OdometerSpace z_2adic() { return OdometerSpace::for_context(GroupContext::zd(1), 2, 2); }

ClopenSet residue_mod(const OdometerSpace& space, int depth, Coord r) {
  Cell c;
  c.h.push_back(r);
  return ClopenSet::from_cells(space, depth, 0, {c});
}

}  // namespace

TEST_CASE("odometer action adds with carry on residues") {
  auto ctx = GroupContext::zd(1);
  auto space = z_2adic();
  Point x;
  x.h.push_back(3);
  x.h_depth = 2;
  Point y = act(space, ctx, el1(1), x);
  CHECK(y.h[0] == 0);  // 3 + 1 = 0 mod 4
  CHECK(act(space, ctx, el1(-1), y) == x);
  CHECK(act(space, ctx, ctx.identity(), x) == x);
}

TEST_CASE("twisted action applies alpha then increments the Z-factor") {
  auto ctx = GroupContext::semidirect(2, shear2());
  auto space = OdometerSpace::for_context(ctx, 2, 2);
  Point x;
  x.h = {0, 1};
  x.z = 0;
  x.h_depth = 1;
  x.z_depth = 1;
  auto g = sel({0, 0}, 1);
  Point y = act(space, ctx, g, x);
  CHECK(y.h[0] == 1);
  CHECK(y.h[1] == 1);
  CHECK(y.z == 1);
}

TEST_CASE("action respects the group law on randomized inputs") {
  auto ctx = GroupContext::semidirect(2, shear2());
  auto space = OdometerSpace::for_context(ctx, 2, 3);
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<Coord> coord(-9, 9);
  std::uniform_int_distribution<Coord> res(0, 7);
  for (int it = 0; it < 60; ++it) {
    auto a = sel({coord(rng), coord(rng)}, coord(rng) % 3);
    auto b = sel({coord(rng), coord(rng)}, coord(rng) % 3);
    Point x;
    x.h = {res(rng), res(rng)};
    x.z = res(rng) % 9;
    x.h_depth = 3;
    x.z_depth = 2;
    CHECK(act(space, ctx, a, act(space, ctx, b, x)) ==
          act(space, ctx, ctx.compose(a, b), x));
  }
}

TEST_CASE("clopen algebra is exact and commutes with refinement") {
  auto ctx = GroupContext::zd(1);
  auto space = z_2adic();
  auto a = residue_mod(space, 2, 1);
  CHECK(clopen_measure(space, a) == Rational(1, 4));
  auto comp = clopen_complement(space, a);
  CHECK(clopen_measure(space, comp) == Rational(3, 4));
  CHECK(clopen_union(space, a, comp) == ClopenSet::whole(space, 2, 0));
  CHECK(clopen_intersection(space, a, comp).is_empty());

  // measure(single residue mod p^m in rank-d factor) = p^(-m d)
  auto ctx2 = GroupContext::zd(2);
  auto space2 = OdometerSpace::for_context(ctx2, 2, 2);
  Cell c;
  c.h = {1, 2};
  auto single = ClopenSet::from_cells(space2, 2, 0, {c});
  CHECK(clopen_measure(space2, single) == Rational(1, 16));

  // Union at depth 2 then refinement to 4 equals refinement then union.
  auto b = residue_mod(space, 2, 3);
  auto u = clopen_union(space, a, b);
  CHECK(refine(space, u, 4, 0) ==
        clopen_union(space, refine(space, a, 4, 0), refine(space, b, 4, 0)));
  CHECK(clopen_measure(space, refine(space, u, 4, 0)) == clopen_measure(space, u));
}

TEST_CASE("translation is a residue bijection preserving measure") {
  auto ctx = GroupContext::semidirect(2, shear2());
  auto space = OdometerSpace::for_context(ctx, 2, 2);
  std::mt19937_64 rng(29);
  std::uniform_int_distribution<Coord> res(0, 3);
  std::uniform_int_distribution<Coord> coord(-5, 5);
  for (int it = 0; it < 25; ++it) {
    std::vector<Cell> cells;
    for (int i = 0; i < 6; ++i) {
      Cell c;
      c.h = {res(rng), res(rng)};
      c.z = res(rng) % 2;
      cells.push_back(c);
    }
    auto A = ClopenSet::from_cells(space, 2, 1, cells);
    auto gelt = sel({coord(rng), coord(rng)}, coord(rng));
    auto gA = clopen_translate(space, ctx, gelt, A);
    CHECK(clopen_measure(space, gA) == clopen_measure(space, A));
    auto back = clopen_translate(space, ctx, ctx.inverse(gelt), gA);
    CHECK(back == A);
  }
}

TEST_CASE("point membership respects depth requirements") {
  auto ctx = GroupContext::zd(1);
  auto space = z_2adic();
  auto a = residue_mod(space, 3, 5);
  Point deep;
  deep.h.push_back(13);  // 13 = 5 mod 8
  deep.h_depth = 4;
  CHECK(point_in(space, a, deep));
  Point shallow;
  shallow.h.push_back(1);
  shallow.h_depth = 2;
  CHECK_THROWS_AS(point_in(space, a, shallow), DepthExhausted);
}

TEST_CASE("exact density examples") {
  auto ctx = GroupContext::zd(1);
  auto space = z_2adic();
  CHECK(exact_density(space, ClopenSet::whole(space, 3, 0)) == Rational(1, 1));
  CHECK(exact_density(space, residue_mod(space, 3, 0)) == Rational(1, 8));
  auto u = clopen_union(space, residue_mod(space, 3, 0), residue_mod(space, 3, 5));
  CHECK(exact_density(space, u) == Rational(1, 4));
}

TEST_CASE("empirical density of an aligned box is exact at every point") {
  auto ctx = GroupContext::zd(1);
  auto space = z_2adic();
  auto A = residue_mod(space, 2, 0);
  std::vector<Point> pts;
  for (Coord r = 0; r < 16; ++r) {
    Point x;
    x.h.push_back(r);
    x.h_depth = 4;
    pts.push_back(x);
  }
  auto est = empirical_density(space, ctx, A, interval1(0, 3), pts);
  CHECK(est.lo == Rational(1, 4));
  CHECK(est.hi == Rational(1, 4));
  auto whole = ClopenSet::whole(space, 1, 0);
  auto est2 = empirical_density(space, ctx, whole, interval1(0, 6), pts);
  CHECK(est2.lo == Rational(1, 1));
  CHECK(est2.hi == Rational(1, 1));
  CHECK_THROWS_AS(empirical_density(space, ctx, A, FiniteSubset{}, pts),
                  PreconditionError);
}

TEST_CASE("density of clopen sets is invariant under the g-shift") {
  auto ctx = GroupContext::semidirect(2, shear2());
  auto space = OdometerSpace::for_context(ctx, 2, 2);
  CHECK(shift_invariance_check(space, ctx, ClopenSet::empty(2, 1)));
  CHECK(shift_invariance_check(space, ctx, ClopenSet::whole(space, 2, 1)));
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<Coord> res(0, 7);
  for (int it = 0; it < 30; ++it) {
    std::vector<Cell> cells;
    for (int i = 0; i < 10; ++i) {
      Cell c;
      c.h = {res(rng), res(rng)};
      c.z = res(rng) % 4;
      cells.push_back(c);
    }
    CHECK(shift_invariance_check(space, ctx,
                                 ClopenSet::from_cells(space, 3, 2, cells)));
  }
  CHECK_THROWS_AS(
      shift_invariance_check(z_2adic(), GroupContext::zd(1), ClopenSet::empty(1, 0)),
      PreconditionError);
}
