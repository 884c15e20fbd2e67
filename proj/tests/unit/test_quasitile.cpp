#include <doctest.h>

#include <random>

#include "folner/quasitile.hpp"
#include "test_util.hpp"

using namespace folner;
using namespace folner::testutil;

namespace {

TowerSequence single_level(FiniteSubset f, Rational eps) {
  TowerSequence seq;
  seq.levels.push_back(std::move(f));
  seq.epsilon = eps;
  seq.required_m = required_levels(eps);
  seq.full = seq.required_m <= 1;
  return seq;
}

}  // namespace

TEST_CASE("required level count is the least m with (1-eps/2)^m < eps") {
  CHECK(required_levels(Rational(1, 4)) == 11);
  CHECK(required_levels(Rational(1, 3)) == 7);
  CHECK(required_levels(Rational(1, 10)) == 45);
  CHECK(required_levels(Rational(1, 16)) == 88);
  CHECK_THROWS_AS(required_levels(Rational(1, 2)), PreconditionError);
  CHECK_THROWS_AS(required_levels(Rational(0, 1)), PreconditionError);
  CHECK_THROWS_AS(required_levels(Rational(3, 4)), PreconditionError);
}

TEST_CASE("window sequence on Z grows by exact invariance thresholds") {
  auto ctx = GroupContext::zd(1);
  FoelnerOptions opts;
  opts.max_level_cells = 1000;
  auto seq = build_foelner_sequence(ctx, Rational(1, 4), opts);
  // 4a <= (1/32)(2L+1) forces L = 64 after the radius-1 base; the next
  // level would need radius 4096 and is cut off by the cap.
  REQUIRE(seq.levels.size() == 2);
  CHECK(seq.levels[0] == interval1(-1, 1));
  CHECK(seq.levels[1] == interval1(-64, 64));
  CHECK(seq.required_m == 11);
  CHECK_FALSE(seq.full);
  CHECK(check_invariance(ctx, seq.levels[0], Rational(1, 32), seq.levels[1])
            .invariant);
  CHECK_FALSE(
      check_invariance(ctx, seq.levels[0], Rational(1, 32), interval1(-63, 63))
          .invariant);

  opts.require_full = true;
  CHECK_THROWS_AS(build_foelner_sequence(ctx, Rational(1, 4), opts),
                  DepthExhausted);

  FoelnerOptions wide;
  auto longer = build_foelner_sequence(ctx, Rational(1, 4), wide);
  REQUIRE(longer.levels.size() == 4);
  CHECK(longer.levels[2] == interval1(-4096, 4096));
  CHECK(longer.levels[3].size() == 2 * 262144 + 1);
  CHECK_FALSE(longer.full);
}

TEST_CASE("window sequence on Z^2") {
  auto ctx = GroupContext::zd(2);
  auto seq = build_foelner_sequence(ctx, Rational(1, 4), {});
  // Boundary of the radius-b box against the radius-1 box is
  // (2b+3)^2 - (2b-1)^2 = 8(2b+1), so the threshold needs 2b+1 >= 256.
  REQUIRE(seq.levels.size() >= 2);
  CHECK(seq.levels[0] == box2(-1, 1, -1, 1));
  CHECK(seq.levels[1] == box2(-128, 128, -128, 128));
  CHECK_FALSE(seq.full);
}

TEST_CASE("greedy tiles a commensurate interval exactly") {
  auto ctx = GroupContext::zd(1);
  auto seq = single_level(interval1(0, 9), Rational(1, 4));
  auto e_set = interval1(0, 99);
  CHECK_THROWS_AS(quasitile(ctx, e_set, seq, CheckMode::Strict),
                  PreconditionError);
  auto qt = quasitile(ctx, e_set, seq, CheckMode::Audit);
  CHECK_FALSE(qt.precondition_ok);
  REQUIRE(qt.per_level.size() == 1);
  REQUIRE(qt.per_level[0].size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(qt.per_level[0][i].center == el1(10 * (Coord)i));
    CHECK(qt.per_level[0][i].tile == seq.levels[0]);
  }
  CHECK(qt.covered == 100);
}

TEST_CASE("a set tiles itself with the identity center") {
  auto ctx = GroupContext::zd(1);
  auto seq = single_level(interval1(-1, 1), Rational(1, 4));
  auto qt = quasitile(ctx, interval1(-1, 1), seq, CheckMode::Audit);
  REQUIRE(qt.per_level[0].size() == 1);
  CHECK(qt.per_level[0][0].center == ctx.identity());
  CHECK(qt.covered == 3);
}

TEST_CASE("greedy tiles a 30x30 box by 3x3 blocks exactly") {
  auto ctx = GroupContext::zd(2);
  auto seq = single_level(box2(-1, 1, -1, 1), Rational(1, 4));
  auto qt = quasitile(ctx, box2(0, 29, 0, 29), seq, CheckMode::Audit);
  REQUIRE(qt.per_level[0].size() == 100);
  CHECK(qt.covered == 900);
  CHECK(qt.per_level[0].front().center == el2(1, 1));
  CHECK(qt.per_level[0].back().center == el2(28, 28));
  for (const auto& pl : qt.per_level[0]) CHECK(pl.tile.size() == 9);
}

TEST_CASE("two-level strict run on a long interval") {
  auto ctx = GroupContext::zd(1);
  FoelnerOptions opts;
  opts.max_level_cells = 1000;
  auto seq = build_foelner_sequence(ctx, Rational(1, 4), opts);
  auto e_set = interval1(0, 4999);
  auto qt = quasitile(ctx, e_set, seq, CheckMode::Strict);
  CHECK(qt.precondition_ok);
  // 38 full radius-64 tiles stride 129 from center 64, one partial of
  // size 97 at 4934, nothing for the radius-1 level; 4999 covered.
  REQUIRE(qt.per_level[1].size() == 39);
  CHECK(qt.per_level[0].empty());
  for (std::size_t k = 0; k < 38; ++k) {
    CHECK(qt.per_level[1][k].center == el1(64 + 129 * (Coord)k));
    CHECK(qt.per_level[1][k].tile.size() == 129);
  }
  CHECK(qt.per_level[1][38].center == el1(4934));
  CHECK(qt.per_level[1][38].tile.size() == 97);
  CHECK(qt.per_level[1][38].tile == interval1(-32, 64));
  CHECK(qt.covered == 4999);

  auto again = quasitile(ctx, e_set, seq, CheckMode::Strict);
  REQUIRE(again.per_level[1].size() == 39);
  for (std::size_t k = 0; k < 39; ++k)
    CHECK(again.per_level[1][k].center == qt.per_level[1][k].center);
}

TEST_CASE("greedy falls back to the generic path off the z = 0 fiber") {
  auto ctx = GroupContext::semidirect(1, Matrix::identity(1));
  std::vector<GroupElement> block, target;
  for (Coord h = 0; h <= 1; ++h)
    for (Coord z = 0; z <= 1; ++z) block.push_back(sel({h}, z));
  for (Coord h = 0; h <= 9; ++h)
    for (Coord z = 0; z <= 9; ++z) target.push_back(sel({h}, z));
  auto seq =
      single_level(FiniteSubset(std::move(block)), Rational(1, 4));
  auto qt =
      quasitile(ctx, FiniteSubset(std::move(target)), seq, CheckMode::Audit);
  CHECK(qt.per_level[0].size() == 25);
  CHECK(qt.covered == 100);
  for (const auto& pl : qt.per_level[0]) {
    CHECK(pl.center.h[0] % 2 == 0);
    CHECK(pl.center.z % 2 == 0);
  }
}

TEST_CASE("strict quasitiling of unions of long intervals") {
  auto ctx = GroupContext::zd(1);
  FoelnerOptions opts;
  opts.max_level_cells = 1000;
  auto seq = build_foelner_sequence(ctx, Rational(1, 4), opts);
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<Coord> len(4096, 6000);
  for (int it = 0; it < 5; ++it) {
    std::vector<GroupElement> elems;
    Coord base = 0;
    for (int part = 0; part < 3; ++part) {
      Coord l = len(rng);
      for (Coord x = base; x < base + l; ++x) elems.push_back(el1(x));
      base += l + 20000;
    }
    FiniteSubset e_set(std::move(elems));
    auto qt = quasitile(ctx, e_set, seq, CheckMode::Strict);
    CHECK(qt.precondition_ok);
    CHECK(Rational(1, 4).le_times(e_set.size() - qt.covered, e_set.size()));
  }
}

TEST_CASE("sequence handed to the greedy must be sane") {
  auto ctx = GroupContext::zd(1);
  TowerSequence bad;
  bad.epsilon = Rational(1, 4);
  bad.required_m = 11;
  CHECK_THROWS_AS(quasitile(ctx, interval1(0, 9), bad, CheckMode::Audit),
                  PreconditionError);
  bad.levels.push_back(interval1(1, 3));  // identity missing
  CHECK_THROWS_AS(quasitile(ctx, interval1(0, 9), bad, CheckMode::Audit),
                  PreconditionError);
  TowerSequence unnested;
  unnested.epsilon = Rational(1, 4);
  unnested.required_m = 11;
  unnested.levels.push_back(interval1(-2, 2));
  unnested.levels.push_back(interval1(-1, 4));
  CHECK_THROWS_AS(quasitile(ctx, interval1(0, 9), unnested, CheckMode::Audit),
                  PreconditionError);
}

TEST_CASE("tiling certificates verify exactly") {
  auto ctx = GroupContext::zd(1);
  TilingCertificate cert;
  cert.tiles.emplace_back(interval1(0, 9), el1(0));
  cert.tiles.emplace_back(interval1(0, 9), el1(10));
  CHECK(verify_tiling(ctx, interval1(0, 19), cert));

  TilingCertificate overlap;
  overlap.tiles.emplace_back(interval1(0, 9), el1(0));
  overlap.tiles.emplace_back(interval1(0, 9), el1(5));
  CHECK_FALSE(verify_tiling(ctx, interval1(0, 14), overlap));

  CHECK_FALSE(verify_tiling(ctx, interval1(0, 20), cert));
  CHECK_FALSE(verify_tiling(ctx, interval1(0, 18), cert));

  TilingCertificate empty;
  CHECK(verify_tiling(ctx, FiniteSubset{}, empty));
  CHECK_FALSE(verify_tiling(ctx, interval1(0, 0), empty));
}

TEST_CASE("tiling collection membership and construction") {
  auto ctx = GroupContext::zd(1);
  FoelnerOptions opts;
  opts.max_level_cells = 1000;
  auto col = tiling_collection(ctx, interval1(-1, 1), Rational(1, 4),
                               Rational(1, 16), opts);
  CHECK(col.members_invariant_by_construction);
  CHECK(col.level_target == Rational(3, 64));
  // 4 <= (3/64)(2L+1) forces the radius up to 43; the second level
  // would need radius 11008 and is cut off.
  REQUIRE(col.seq.levels.size() == 1);
  CHECK(col.seq.levels[0] == interval1(-43, 43));
  CHECK(col.seq.required_m == 88);

  CHECK(col.contains(ctx, col.seq.levels[0]));
  CHECK(col.contains(ctx, interval1(-43, 38)));   // dropped 5 of 87
  CHECK_FALSE(col.contains(ctx, interval1(-43, 37)));  // dropped 6
  CHECK_FALSE(col.contains(ctx, FiniteSubset{el1(100)}));
  CHECK_FALSE(col.contains(ctx, FiniteSubset{}));
  CHECK(col.top() == col.seq.levels.back());

  // Members really are (K, delta)-invariant, including ragged ones.
  std::vector<GroupElement> ragged;
  for (Coord x = -43; x <= 43; ++x)
    if (x != -43 && x != -20 && x != 0 && x != 20 && x != 43)
      ragged.push_back(el1(x));
  FiniteSubset member(std::move(ragged));
  CHECK(col.contains(ctx, member));
  CHECK(check_invariance(ctx, col.k, col.delta, member).invariant);

  auto weak = tiling_collection(ctx, interval1(-1, 1), Rational(1, 4),
                                Rational(1, 4), opts);
  CHECK_FALSE(weak.members_invariant_by_construction);
  CHECK(weak.level_target == Rational(1, 4));
}

TEST_CASE("extracting a tileable subset") {
  auto ctx = GroupContext::zd(1);
  FoelnerOptions opts;
  opts.max_level_cells = 1000;

  SUBCASE("exactly tileable target") {
    auto col = tiling_collection(ctx, interval1(-1, 1), Rational(1, 4),
                                 Rational(1, 16), opts);
    auto res = extract_tileable(ctx, interval1(0, 260), col,
                                CheckMode::Audit);
    CHECK(res.e_prime == interval1(0, 260));
    REQUIRE(res.cert.tiles.size() == 3);
    CHECK(res.cert.tiles[0].second == el1(43));
    CHECK(res.cert.tiles[1].second == el1(130));
    CHECK(res.cert.tiles[2].second == el1(217));
    CHECK(verify_tiling(ctx, res.e_prime, res.cert));
  }

  SUBCASE("target equal to a single window") {
    auto col = tiling_collection(ctx, interval1(-1, 1), Rational(1, 4),
                                 Rational(1, 16), opts);
    auto res = extract_tileable(ctx, interval1(-43, 43), col,
                                CheckMode::Audit);
    CHECK(res.e_prime == interval1(-43, 43));
    REQUIRE(res.cert.tiles.size() == 1);
    CHECK(res.cert.tiles[0].second == ctx.identity());
  }

  SUBCASE("ragged ends stay within the epsilon budget") {
    auto col = tiling_collection(ctx, interval1(0, 1), Rational(1, 4),
                                 Rational(1, 4), opts);
    REQUIRE(col.seq.levels.size() == 2);
    CHECK(col.seq.levels[0] == interval1(-4, 4));
    CHECK(col.seq.levels[1] == interval1(-256, 256));
    auto res = extract_tileable(ctx, interval1(0, 19999), col);
    CHECK(res.e_prime.size() == 19996);
    for (const auto& [tile, t] : res.cert.tiles)
      CHECK(col.contains(ctx, tile));
    CHECK(Rational(1, 4).le_times(20000 - res.e_prime.size(), 20000));
  }

  SUBCASE("strict mode rejects non-invariant targets") {
    auto col = tiling_collection(ctx, interval1(0, 1), Rational(1, 4),
                                 Rational(1, 4), opts);
    CHECK_THROWS_AS(extract_tileable(ctx, interval1(0, 9999), col),
                    PreconditionError);
  }
}
