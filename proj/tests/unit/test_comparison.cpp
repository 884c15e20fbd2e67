#include <doctest.h>

#include <vector>

#include "folner/comparison.hpp"
#include "test_util.hpp"

using namespace folner;
using namespace folner::testutil;

namespace {

OdometerSpace z_2adic() {
  return OdometerSpace::for_context(GroupContext::zd(1), 2, 2);
}

ClopenSet residue_mod(const OdometerSpace& space, int depth, Coord r) {
  Cell c;
  c.h.push_back(r);
  return ClopenSet::from_cells(space, depth, 0, {c});
}

Matrix mat2(Coord a00, Coord a01, Coord a10, Coord a11) {
  Matrix m = Matrix::identity(2);
  m.at(0, 0) = a00;
  m.at(0, 1) = a01;
  m.at(1, 0) = a10;
  m.at(1, 1) = a11;
  return m;
}

Matrix mat1(Coord a) {
  Matrix m = Matrix::identity(1);
  m.at(0, 0) = a;
  return m;
}

FiniteSubset even_interval(Coord lo, Coord hi) {
  std::vector<GroupElement> out;
  for (Coord x = lo; x <= hi; x += 2) out.push_back(el1(x));
  return FiniteSubset(std::move(out));
}

}  // namespace

TEST_CASE("subgroup membership") {
  auto ctx = GroupContext::zd(1);
  auto whole = SubgroupH::whole();
  CHECK(whole.contains(ctx, el1(17)));
  CHECK(whole.contains(ctx, el1(0)));

  auto evens = SubgroupH::lattice(mat1(2));
  CHECK(evens.contains(ctx, el1(-4)));
  CHECK(evens.contains(ctx, el1(0)));
  CHECK_FALSE(evens.contains(ctx, el1(7)));

  auto ctx2 = GroupContext::zd(2);
  // columns (1,0) and (1,2) span exactly the points with even h[1]
  auto slanted = SubgroupH::lattice(mat2(1, 1, 0, 2));
  CHECK(slanted.contains(ctx2, el2(3, 4)));
  CHECK_FALSE(slanted.contains(ctx2, el2(0, 1)));
  CHECK_THROWS_AS(slanted.contains(ctx, el1(2)), ContextMismatch);
  CHECK_THROWS_AS(SubgroupH::lattice(mat2(1, 1, 1, 1)), PreconditionError);
  CHECK_THROWS_AS(SubgroupH::lattice(mat1(0)), PreconditionError);

  auto twisted = GroupContext::semidirect(1, Matrix::identity(1));
  auto fiber = SubgroupH::z_fiber();
  CHECK(fiber.contains(twisted, sel({5}, 0)));
  CHECK_FALSE(fiber.contains(twisted, sel({0}, 1)));
  CHECK_FALSE(SubgroupH::lattice(mat1(2)).contains(twisted, sel({2}, 1)));
}

TEST_CASE("subequivalence certificates verify exactly") {
  auto ctx = GroupContext::zd(1);
  auto space = z_2adic();

  SubequivalenceCertificate shift;
  shift.source = residue_mod(space, 1, 1);
  shift.target = residue_mod(space, 1, 0);
  shift.pieces.push_back({shift.source, el1(1), 0});
  CHECK(check_subequivalence(space, ctx, shift));

  // image {0 mod 2} escapes the smaller target
  shift.target = residue_mod(space, 2, 0);
  CHECK_FALSE(check_subequivalence(space, ctx, shift));

  SubequivalenceCertificate split;
  split.source = residue_mod(space, 1, 0);
  split.target = residue_mod(space, 2, 1);
  split.pieces.push_back({residue_mod(space, 2, 0), el1(1), 0});
  split.pieces.push_back({residue_mod(space, 2, 2), el1(3), 0});
  // both images are {1 mod 4}: fine in separate classes only
  CHECK_FALSE(check_subequivalence(space, ctx, split));
  split.num_classes = 2;
  split.pieces[1].class_label = 1;
  CHECK(check_subequivalence(space, ctx, split));

  SubequivalenceCertificate gap;
  gap.source = residue_mod(space, 1, 0);
  gap.target = residue_mod(space, 1, 0);
  gap.pieces.push_back({residue_mod(space, 2, 0), ctx.identity(), 0});
  CHECK_FALSE(check_subequivalence(space, ctx, gap));  // misses {2 mod 4}

  SubequivalenceCertificate empty;
  empty.source = ClopenSet::empty(1, 0);
  empty.target = residue_mod(space, 1, 0);
  CHECK(check_subequivalence(space, ctx, empty));

  SubequivalenceCertificate bad = shift;
  bad.target = residue_mod(space, 1, 0);
  bad.pieces[0].class_label = 1;  // out of range for one class
  CHECK_FALSE(check_subequivalence(space, ctx, bad));
  bad.pieces[0].class_label = -1;
  CHECK_FALSE(check_subequivalence(space, ctx, bad));
  bad.pieces[0].class_label = 0;
  bad.num_classes = 0;
  CHECK_FALSE(check_subequivalence(space, ctx, bad));
}

TEST_CASE("combinator over the trivial coset list relabels") {
  auto ctx = GroupContext::zd(1);
  auto space = z_2adic();

  FiniteExtensionInput input;
  input.covers = {residue_mod(space, 2, 0), residue_mod(space, 2, 1)};
  input.source = clopen_union(space, input.covers[0], input.covers[1]);
  input.target = residue_mod(space, 1, 0);
  input.coset_reps = {el1(0)};
  input.subgroup = SubgroupH::whole();

  SubequivalenceCertificate c0;
  c0.source = input.covers[0];
  c0.target = input.target;
  c0.pieces.push_back({input.covers[0], el1(0), 0});
  SubequivalenceCertificate c1;
  c1.source = input.covers[1];
  c1.target = input.target;
  c1.pieces.push_back({input.covers[1], el1(3), 0});
  input.h_certs = {c0, c1};

  auto out = finite_extension_combinator(space, ctx, input);
  CHECK(out.num_classes == 2);
  REQUIRE(out.pieces.size() == 2);
  CHECK(out.pieces[0].part == input.covers[0]);
  CHECK(out.pieces[0].mover == el1(0));
  CHECK(out.pieces[0].class_label == 0);
  CHECK(out.pieces[1].part == input.covers[1]);
  CHECK(out.pieces[1].mover == el1(3));
  CHECK(out.pieces[1].class_label == 1);
  CHECK(check_subequivalence(space, ctx, out));
}

TEST_CASE("combinator stitches index-two subgroup certificates") {
  auto ctx = GroupContext::zd(1);
  auto space = z_2adic();

  FiniteExtensionInput input;
  input.source = residue_mod(space, 2, 2);
  input.target = residue_mod(space, 2, 0);
  input.coset_reps = {el1(0), el1(1)};
  input.subgroup = SubgroupH::lattice(mat1(2));
  input.covers = {residue_mod(space, 3, 2), residue_mod(space, 4, 6),
                  residue_mod(space, 4, 14)};

  ClopenSet gb = clopen_union(
      space, input.target, clopen_translate(space, ctx, el1(1), input.target));

  SubequivalenceCertificate c0;
  c0.source = input.covers[0];
  c0.target = gb;
  c0.pieces.push_back({residue_mod(space, 4, 2), el1(-2), 0});
  c0.pieces.push_back({residue_mod(space, 4, 10), el1(-2), 0});
  SubequivalenceCertificate c1;
  c1.source = input.covers[1];
  c1.target = gb;
  c1.pieces.push_back({input.covers[1], el1(-6), 0});
  SubequivalenceCertificate c2;
  c2.source = input.covers[2];
  c2.target = gb;
  c2.pieces.push_back({input.covers[2], el1(-10), 0});
  input.h_certs = {c0, c1, c2};

  auto out = finite_extension_combinator(space, ctx, input);
  CHECK(out.num_classes == 6);
  REQUIRE(out.pieces.size() == 8);
  CHECK(check_subequivalence(space, ctx, out));
  // within each (cover, coset) class the odd coset contributes nothing
  int empty_parts = 0;
  std::vector<int> label_seen(6, 0);
  for (const auto& piece : out.pieces) {
    if (piece.part.is_empty()) ++empty_parts;
    REQUIRE(piece.class_label >= 0);
    REQUIRE(piece.class_label < 6);
    ++label_seen[(std::size_t)piece.class_label];
  }
  CHECK(empty_parts == 4);
  for (int count : label_seen) CHECK(count >= 1);
  // the surviving parts are exactly the original covering pieces
  CHECK(out.pieces[0].part == residue_mod(space, 4, 2));
  CHECK(out.pieces[0].mover == el1(-2));

  SUBCASE("movers must come from the subgroup") {
    auto odd = input;
    odd.h_certs[1].pieces[0].mover = el1(-5);
    CHECK_THROWS_AS(finite_extension_combinator(space, ctx, odd),
                    PreconditionError);
  }
  SUBCASE("input certificates must pass their own check") {
    auto broken = input;
    broken.h_certs[0].pieces[1].part = residue_mod(space, 4, 2);
    CHECK_THROWS_AS(finite_extension_combinator(space, ctx, broken),
                    PreconditionError);
  }
  SUBCASE("cover list must match the coset count") {
    auto fewer = input;
    fewer.covers.pop_back();
    fewer.h_certs.pop_back();
    CHECK_THROWS_AS(finite_extension_combinator(space, ctx, fewer),
                    PreconditionError);
  }
  SUBCASE("first representative must be the identity") {
    auto swapped = input;
    std::swap(swapped.coset_reps[0], swapped.coset_reps[1]);
    CHECK_THROWS_AS(finite_extension_combinator(space, ctx, swapped),
                    PreconditionError);
  }
  SUBCASE("certificates must target the union of translates") {
    auto narrow = input;
    narrow.h_certs[0].target = input.target;
    CHECK_THROWS_AS(finite_extension_combinator(space, ctx, narrow),
                    PreconditionError);
  }
  SUBCASE("input certificates must be single-class") {
    auto multi = input;
    multi.h_certs[0].num_classes = 2;
    CHECK_THROWS_AS(finite_extension_combinator(space, ctx, multi),
                    PreconditionError);
  }
  SUBCASE("covers must cover the source") {
    auto sparse = input;
    sparse.covers[0] = residue_mod(space, 4, 2);
    sparse.h_certs[0].source = sparse.covers[0];
    sparse.h_certs[0].pieces.pop_back();
    CHECK_THROWS_AS(finite_extension_combinator(space, ctx, sparse),
                    PreconditionError);
  }
}

TEST_CASE("shrinking shapes keeps the smallest slice of every coset") {
  auto ctx = GroupContext::zd(1);
  auto h8 = SubgroupH::lattice(mat1(8));
  std::vector<GroupElement> reps;
  for (Coord r = 0; r < 8; ++r) reps.push_back(el1(r));
  std::vector<GroupElement> kp;
  for (Coord k = -10; k <= 10; ++k) kp.push_back(el1(8 * k));
  FiniteSubset k_prime(std::move(kp));
  Rational delta(1, 20);

  // ceil((1/20)/(19/20) * 800) = ceil(800/19) = 43 per coset
  CHECK((delta / (Rational(1, 1) - delta)).ceil_times(100) == 6);

  auto shrunk =
      shrink_shapes(ctx, {interval1(0, 6399)}, reps, h8, k_prime, delta);
  REQUIRE(shrunk.size() == 1);
  CHECK(shrunk[0] == interval1(0, 343));
  CHECK(Rational(3, 20).le_times(shrunk[0].size(), 6400));

  // empty shapes pass through untouched
  auto with_empty = shrink_shapes(ctx, {FiniteSubset{}, interval1(0, 6399)},
                                  reps, h8, k_prime, delta);
  REQUIRE(with_empty.size() == 2);
  CHECK(with_empty[0].empty());
  CHECK(with_empty[1] == interval1(0, 343));
}

TEST_CASE("shrinking preconditions") {
  auto ctx = GroupContext::zd(1);
  auto h8 = SubgroupH::lattice(mat1(8));
  std::vector<GroupElement> reps;
  for (Coord r = 0; r < 8; ++r) reps.push_back(el1(r));
  auto shape = interval1(0, 6399);

  std::vector<GroupElement> kp;
  for (Coord k = -10; k <= 10; ++k) kp.push_back(el1(8 * k));
  FiniteSubset k_prime(kp);

  CHECK_THROWS_AS(
      shrink_shapes(ctx, {shape}, reps, h8, k_prime, Rational(1, 2)),
      PreconditionError);
  CHECK_THROWS_AS(
      shrink_shapes(ctx, {shape}, reps, h8, k_prime, Rational(0, 1)),
      PreconditionError);

  // |K'| = 20 makes delta |K'| = 1, just short of the strict bound
  std::vector<GroupElement> small(kp.begin(), kp.end() - 1);
  CHECK_THROWS_AS(shrink_shapes(ctx, {shape}, reps, h8, FiniteSubset(small),
                                Rational(1, 20)),
                  PreconditionError);

  std::vector<GroupElement> off;
  for (Coord k = 1; k <= 21; ++k) off.push_back(el1(8 * k));
  CHECK_THROWS_AS(shrink_shapes(ctx, {shape}, reps, h8, FiniteSubset(off),
                                Rational(1, 20)),
                  PreconditionError);  // identity missing

  CHECK_THROWS_AS(shrink_shapes(ctx, {shape}, reps, h8, interval1(-10, 10),
                                Rational(1, 20)),
                  PreconditionError);  // K' not inside H

  CHECK_THROWS_AS(shrink_shapes(ctx, {interval1(0, 799)}, reps, h8, k_prime,
                                Rational(1, 20)),
                  PreconditionError);  // shape not (K', delta)-invariant

  auto evens = SubgroupH::lattice(mat1(2));
  std::vector<GroupElement> k2{el1(-2), el1(0), el1(2)};
  std::vector<GroupElement> odd_elems;
  for (Coord k = 0; k < 100; ++k) odd_elems.push_back(el1(2 * k + 1));
  CHECK_THROWS_AS(shrink_shapes(ctx, {FiniteSubset(odd_elems)}, {el1(0)},
                                evens, FiniteSubset(k2), Rational(2, 5)),
                  PreconditionError);  // elements lie in no listed coset

  CHECK_THROWS_AS(shrink_shapes(ctx, {even_interval(0, 198)},
                                {el1(0), el1(2)}, evens, FiniteSubset(k2),
                                Rational(2, 5)),
                  PreconditionError);  // reps collide modulo H
}

TEST_CASE("shrinking a castle shrinks its tower shapes") {
  auto ctx = GroupContext::zd(1);
  auto space = z_2adic();
  auto evens = SubgroupH::lattice(mat1(2));
  FiniteSubset k2{el1(-2), el1(0), el1(2)};

  Castle castle;
  castle.towers.emplace_back(even_interval(0, 198), residue_mod(space, 2, 0));
  auto shrunk = shrink_shapes(ctx, castle, {el1(0)}, evens, k2, Rational(2, 5));
  REQUIRE(shrunk.size() == 1);
  // ceil((2/5)/(3/5) * 100) = 67 smallest elements survive
  CHECK(shrunk[0] == even_interval(0, 132));
}
