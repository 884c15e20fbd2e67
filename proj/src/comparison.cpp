#include "folner/comparison.hpp"

#include <algorithm>
#include <map>

namespace folner {

namespace {

__int128 minor_det(const Matrix& m, std::vector<int> rows,
                   std::vector<int> cols) {
  if (rows.size() == 1) return m.at(rows[0], cols[0]);
  __int128 acc = 0;
  std::vector<int> sub_rows(rows.begin() + 1, rows.end());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    std::vector<int> sub_cols;
    for (std::size_t cc = 0; cc < cols.size(); ++cc)
      if (cc != c) sub_cols.push_back(cols[cc]);
    __int128 term =
        (__int128)m.at(rows[0], cols[c]) * minor_det(m, sub_rows, sub_cols);
    acc += (c % 2 == 0) ? term : -term;
  }
  return acc;
}

__int128 det(const Matrix& m) {
  std::vector<int> idx;
  for (int i = 0; i < m.d; ++i) idx.push_back(i);
  return minor_det(m, idx, idx);
}

}  // namespace

SubgroupH SubgroupH::whole() { return SubgroupH{}; }

SubgroupH SubgroupH::z_fiber() {
  SubgroupH h;
  h.kind_ = Kind::ZFiber;
  return h;
}

SubgroupH SubgroupH::lattice(Matrix basis) {
  if (det(basis) == 0)
    throw PreconditionError("lattice basis must be nonsingular");
  SubgroupH h;
  h.kind_ = Kind::Lattice;
  h.basis_ = std::move(basis);
  return h;
}

bool SubgroupH::contains(const GroupContext& ctx, const GroupElement& el) const {
  switch (kind_) {
    case Kind::Whole:
      return true;
    case Kind::ZFiber:
      return el.z == 0;
    case Kind::Lattice: {
      if (el.z != 0) return false;
      if (basis_.d != ctx.rank())
        throw ContextMismatch("lattice basis rank differs from the context");
      // Cramer: basis * x = h has an integer solution iff every
      // det(basis with column i replaced by h) is divisible by det.
      __int128 d0 = det(basis_);
      for (int i = 0; i < basis_.d; ++i) {
        Matrix m = basis_;
        for (int r = 0; r < basis_.d; ++r)
          m.at(r, i) = el.h[(std::size_t)r];
        if (det(m) % d0 != 0) return false;
      }
      return true;
    }
  }
  return false;
}

bool check_subequivalence(const OdometerSpace& space, const GroupContext& ctx,
                          const SubequivalenceCertificate& cert) {
  if (cert.num_classes < 1) return false;
  for (const auto& piece : cert.pieces)
    if (piece.class_label < 0 || piece.class_label >= cert.num_classes)
      return false;

  ClopenSet cover = ClopenSet::empty(0, 0);
  for (const auto& piece : cert.pieces)
    cover = clopen_union(space, cover, piece.part);
  if (!clopen_subset(space, cert.source, cover)) return false;

  std::map<int, std::vector<ClopenSet>> moved;
  for (const auto& piece : cert.pieces) {
    ClopenSet img = clopen_translate(space, ctx, piece.mover, piece.part);
    if (!clopen_subset(space, img, cert.target)) return false;
    moved[piece.class_label].push_back(std::move(img));
  }
  for (const auto& [label, imgs] : moved)
    for (std::size_t a = 0; a < imgs.size(); ++a)
      for (std::size_t b = a + 1; b < imgs.size(); ++b)
        if (!clopen_disjoint(space, imgs[a], imgs[b])) return false;
  return true;
}

SubequivalenceCertificate finite_extension_combinator(
    const OdometerSpace& space, const GroupContext& ctx,
    const FiniteExtensionInput& input) {
  std::size_t n = input.coset_reps.size();
  if (n == 0) throw PreconditionError("need at least one coset representative");
  if (!(input.coset_reps.front() == ctx.identity()))
    throw PreconditionError("first coset representative must be the identity");
  if (input.covers.size() != n + 1)
    throw PreconditionError("expected " + std::to_string(n + 1) + " covers, got " +
                            std::to_string(input.covers.size()));
  if (input.h_certs.size() != input.covers.size())
    throw PreconditionError("one certificate per cover is required");

  ClopenSet cover_union = ClopenSet::empty(0, 0);
  for (const auto& c : input.covers)
    cover_union = clopen_union(space, cover_union, c);
  if (!clopen_subset(space, input.source, cover_union))
    throw PreconditionError("covers do not cover the source");

  ClopenSet gb_union = ClopenSet::empty(0, 0);
  for (const auto& g : input.coset_reps)
    gb_union = clopen_union(
        space, gb_union, clopen_translate(space, ctx, g, input.target));

  for (std::size_t i = 0; i < input.h_certs.size(); ++i) {
    const auto& cert = input.h_certs[i];
    if (!(cert.source == input.covers[i]))
      throw PreconditionError("certificate " + std::to_string(i) +
                              " does not have its cover as source");
    if (!(cert.target == gb_union))
      throw PreconditionError("certificate " + std::to_string(i) +
                              " does not target the union of translates");
    if (cert.num_classes != 1)
      throw PreconditionError("input certificates must be single-class");
    for (const auto& piece : cert.pieces)
      if (!input.subgroup.contains(ctx, piece.mover))
        throw PreconditionError("certificate " + std::to_string(i) +
                                " moves by an element outside the subgroup");
    if (!check_subequivalence(space, ctx, cert))
      throw PreconditionError("certificate " + std::to_string(i) +
                              " fails its own check");
  }

  SubequivalenceCertificate out;
  out.source = input.source;
  out.target = input.target;
  out.num_classes = (int)(n * (n + 1));
  for (std::size_t i = 0; i < input.h_certs.size(); ++i)
    for (const auto& piece : input.h_certs[i].pieces) {
      // piece.part = h U, piece.mover = h^-1, so this recovers U.
      ClopenSet u = clopen_translate(space, ctx, piece.mover, piece.part);
      GroupElement h = ctx.inverse(piece.mover);
      for (std::size_t j = 0; j < n; ++j) {
        const GroupElement& gj = input.coset_reps[j];
        ClopenSet gjb = clopen_translate(space, ctx, gj, input.target);
        ClopenSet w = clopen_translate(space, ctx, ctx.inverse(gj),
                                       clopen_intersection(space, gjb, u));
        GroupElement hg = ctx.compose(h, gj);
        CertPiece p;
        p.part = clopen_translate(space, ctx, hg, w);
        p.mover = ctx.inverse(hg);
        p.class_label = (int)(i * n + j);
        out.pieces.push_back(std::move(p));
      }
    }
  if (!check_subequivalence(space, ctx, out))
    throw ContractViolation("combined certificate fails verification");
  return out;
}

std::vector<FiniteSubset> shrink_shapes(
    const GroupContext& ctx, const std::vector<FiniteSubset>& shapes,
    const std::vector<GroupElement>& coset_reps, const SubgroupH& subgroup,
    const FiniteSubset& k_prime, const Rational& delta) {
  if (!(Rational(0, 1) < delta && delta < Rational(1, 2)))
    throw PreconditionError("delta must lie in (0, 1/2)");
  if (!k_prime.contains(ctx.identity()))
    throw PreconditionError("K' must contain the identity");
  for (const auto& el : k_prime)
    if (!subgroup.contains(ctx, el))
      throw PreconditionError("K' must lie in the subgroup");
  if (!(Rational(1, 1) < delta * Rational(k_prime.size(), 1)))
    throw PreconditionError("need |K'| > 1/delta");

  Rational keep = delta / (Rational(1, 1) - delta);
  std::vector<FiniteSubset> out;
  out.reserve(shapes.size());
  for (std::size_t idx = 0; idx < shapes.size(); ++idx) {
    const FiniteSubset& shape = shapes[idx];
    if (shape.empty()) {
      out.emplace_back();
      continue;
    }
    if (!check_invariance(ctx, k_prime, delta, shape).invariant)
      throw PreconditionError("shape " + std::to_string(idx) +
                              " is not (K', delta)-invariant");
    // Decompose across the listed cosets: s = b g with b in H.
    std::map<std::size_t, std::vector<GroupElement>> per_coset;
    for (const auto& s : shape) {
      std::size_t hits = 0, where = 0;
      for (std::size_t gi = 0; gi < coset_reps.size(); ++gi)
        if (subgroup.contains(ctx,
                              ctx.compose(s, ctx.inverse(coset_reps[gi])))) {
          ++hits;
          where = gi;
        }
      if (hits == 0)
        throw PreconditionError("shape element lies in no listed coset");
      if (hits > 1)
        throw PreconditionError(
            "coset representatives are not distinct modulo the subgroup");
      per_coset[where].push_back(
          ctx.compose(s, ctx.inverse(coset_reps[where])));
    }
    std::vector<GroupElement> kept;
    for (auto& [gi, b] : per_coset) {
      std::sort(b.begin(), b.end());
      std::int64_t take = keep.ceil_times((std::int64_t)b.size());
      for (std::int64_t t = 0; t < take; ++t)
        kept.push_back(ctx.compose(b[(std::size_t)t], coset_reps[gi]));
    }
    std::sort(kept.begin(), kept.end());
    FiniteSubset shrunk = FiniteSubset::from_sorted(std::move(kept));
    if (!is_subset(shrunk, shape))
      throw ContractViolation("shrunk shape escapes the original");
    if (!(Rational(3, 1) * delta).le_times(shrunk.size(), shape.size()))
      throw ContractViolation("shrunk shape exceeds 3 delta of the original");
    out.push_back(std::move(shrunk));
  }
  return out;
}

std::vector<FiniteSubset> shrink_shapes(
    const GroupContext& ctx, const Castle& castle,
    const std::vector<GroupElement>& coset_reps, const SubgroupH& subgroup,
    const FiniteSubset& k_prime, const Rational& delta) {
  std::vector<FiniteSubset> shapes;
  shapes.reserve(castle.towers.size());
  for (const auto& tower : castle.towers) shapes.push_back(tower.shape());
  return shrink_shapes(ctx, shapes, coset_reps, subgroup, k_prime, delta);
}

}  // namespace folner
