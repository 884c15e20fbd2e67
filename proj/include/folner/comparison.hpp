#pragma once

#include <vector>

#include "folner/errors.hpp"
#include "folner/group.hpp"
#include "folner/odometer.hpp"
#include "folner/rational.hpp"
#include "folner/tower.hpp"

namespace folner {

// Membership test for a distinguished subgroup H of the acting group.
// z_fiber is the z = 0 part of a semidirect product; lattice(L) is the
// image of L acting on the free-abelian part (columns generate).
class SubgroupH {
 public:
  static SubgroupH whole();
  static SubgroupH z_fiber();
  static SubgroupH lattice(Matrix basis);

  bool contains(const GroupContext& ctx, const GroupElement& el) const;

 private:
  enum class Kind { Whole, ZFiber, Lattice };
  Kind kind_ = Kind::Whole;
  Matrix basis_;
};

// One covering piece: `part` covers a portion of the source and
// mover * part must stay inside the target, disjointly within each
// class.
struct CertPiece {
  ClopenSet part;
  GroupElement mover;
  int class_label = 0;
};

struct SubequivalenceCertificate {
  ClopenSet source;
  ClopenSet target;
  std::vector<CertPiece> pieces;
  int num_classes = 1;
};

// Exact verification: the parts cover the source, and within each
// class the moved parts are pairwise disjoint and contained in the
// target.
bool check_subequivalence(const OdometerSpace& space, const GroupContext& ctx,
                          const SubequivalenceCertificate& cert);

// Inputs for stitching per-coset subgroup certificates into one
// certificate over the whole group: covers C_1..C_{n+1} of the source
// with per-cover certificates into the union of the g_j-translates of
// the target, and coset representatives g_1 = e, g_2, ..., g_n.
struct FiniteExtensionInput {
  ClopenSet source;
  std::vector<ClopenSet> covers;
  std::vector<SubequivalenceCertificate> h_certs;
  std::vector<GroupElement> coset_reps;
  ClopenSet target;
  SubgroupH subgroup;
};

// Emits the combined certificate with pieces h_{i,k} g_j W_{i,j,k},
// W_{i,j,k} = g_j^-1(g_j B meet U_{i,k}), where U_{i,k} is the moved
// image of the k-th piece of the i-th input certificate. Class labels
// are indexed by (i, j), giving n(n+1) classes. Inputs are validated
// (each certificate must pass its own check, use subgroup movers only,
// and target the union of translates); the output is re-checked before
// returning.
SubequivalenceCertificate finite_extension_combinator(
    const OdometerSpace& space, const GroupContext& ctx,
    const FiniteExtensionInput& input);

// Shrinks each shape S_i = union of B_{i,g} g over the coset
// representatives down to S'_i = union of B'_{i,g} g, where B'_{i,g}
// keeps the smallest ceil(delta/(1-delta) |B_{i,g}|) elements in
// canonical order. Requires 0 < delta < 1/2, |K'| > 1/delta with
// e in K' contained in H, and each S_i (K', delta)-invariant; the
// conclusion |S'_i| <= 3 delta |S_i| is asserted.
std::vector<FiniteSubset> shrink_shapes(
    const GroupContext& ctx, const std::vector<FiniteSubset>& shapes,
    const std::vector<GroupElement>& coset_reps, const SubgroupH& subgroup,
    const FiniteSubset& k_prime, const Rational& delta);

std::vector<FiniteSubset> shrink_shapes(
    const GroupContext& ctx, const Castle& castle,
    const std::vector<GroupElement>& coset_reps, const SubgroupH& subgroup,
    const FiniteSubset& k_prime, const Rational& delta);

}  // namespace folner
