#pragma once

#include <boost/container/small_vector.hpp>
#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "folner/errors.hpp"
#include "folner/rational.hpp"

namespace folner {

using Coord = std::int64_t;
// H-coordinates. Inline storage covers every rank used in practice.
using Vec = boost::container::small_vector<Coord, 4>;

// Row-major square integer matrix.
struct Matrix {
  int d = 0;
  std::vector<Coord> a;

  static Matrix identity(int d);
  Coord at(int r, int c) const { return a[(std::size_t)r * d + c]; }
  Coord& at(int r, int c) { return a[(std::size_t)r * d + c]; }
  bool is_identity() const;
  bool operator==(const Matrix&) const = default;
};

Matrix mat_mul(const Matrix& x, const Matrix& y);
Vec mat_apply(const Matrix& m, const Vec& v);
Coord mat_det(const Matrix& m);
// Inverse of a determinant-+-1 integer matrix, again over the integers.
Matrix mat_inverse_unimodular(const Matrix& m);

enum class GroupKind { Zd, Finite, Semidirect };

// Canonical coordinates for h*g^z. Free-abelian contexts keep z = 0;
// finite-table contexts store the element index as h = {index}, z = 0.
struct GroupElement {
  Vec h;
  Coord z = 0;

  bool operator==(const GroupElement&) const = default;
  bool operator<(const GroupElement& o) const {
    if (h != o.h) return h < o.h;
    return z < o.z;
  }
};

struct ElementHash {
  std::size_t operator()(const GroupElement& e) const;
};

// One of: Z^d, a finite group given by its multiplication table, or
// Z^d x| Z where the generator g of the Z factor acts on Z^d by a
// unimodular matrix alpha (g t g^-1 = alpha(t)).
class GroupContext {
 public:
  static GroupContext zd(int d);
  static GroupContext finite(std::vector<std::vector<int>> table);
  static GroupContext semidirect(int d, Matrix alpha);

  GroupKind kind() const { return kind_; }
  int rank() const { return d_; }
  bool has_z() const { return kind_ == GroupKind::Semidirect; }
  bool alpha_is_identity() const { return alpha_identity_; }
  const Matrix& alpha_matrix() const;
  const std::vector<std::vector<int>>& table() const;
  int order() const;  // finite contexts only

  GroupElement identity() const;
  // Validates arity and range; the only sanctioned way to build elements
  // from raw coordinates.
  GroupElement element(Vec h, Coord z = 0) const;

  GroupElement compose(const GroupElement& a, const GroupElement& b) const;
  GroupElement inverse(const GroupElement& a) const;

  const Matrix& alpha_power(Coord i) const;
  Vec alpha_apply(Coord i, const Vec& h) const;

  bool operator==(const GroupContext& o) const;
  bool operator!=(const GroupContext& o) const { return !(*this == o); }

 private:
  GroupContext() = default;

  GroupKind kind_ = GroupKind::Zd;
  int d_ = 0;
  Matrix alpha_, alpha_inv_;
  bool alpha_identity_ = true;
  std::vector<std::vector<int>> table_;
  std::vector<int> inv_table_;
  int e_index_ = 0;
  mutable std::map<Coord, Matrix> power_cache_;
};

// Deduplicated sorted set of elements from one context.
class FiniteSubset {
 public:
  FiniteSubset() = default;
  explicit FiniteSubset(std::vector<GroupElement> elems);
  FiniteSubset(std::initializer_list<GroupElement> elems);
  // Caller guarantees the vector is sorted and duplicate-free.
  static FiniteSubset from_sorted(std::vector<GroupElement> elems);

  const std::vector<GroupElement>& elements() const { return elems_; }
  std::int64_t size() const { return (std::int64_t)elems_.size(); }
  bool empty() const { return elems_.empty(); }
  bool contains(const GroupElement& e) const;
  auto begin() const { return elems_.begin(); }
  auto end() const { return elems_.end(); }
  bool operator==(const FiniteSubset&) const = default;

 private:
  std::vector<GroupElement> elems_;
};

FiniteSubset set_union(const FiniteSubset& a, const FiniteSubset& b);
FiniteSubset set_intersection(const FiniteSubset& a, const FiniteSubset& b);
FiniteSubset set_difference(const FiniteSubset& a, const FiniteSubset& b);
bool is_subset(const FiniteSubset& a, const FiniteSubset& b);
bool are_disjoint(const FiniteSubset& a, const FiniteSubset& b);

// All pairwise products a*b.
FiniteSubset product_set(const GroupContext& ctx, const FiniteSubset& A,
                         const FiniteSubset& B);
FiniteSubset inverse_set(const GroupContext& ctx, const FiniteSubset& A);
FiniteSubset translate_left(const GroupContext& ctx, const GroupElement& a,
                            const FiniteSubset& F);
FiniteSubset translate_right(const GroupContext& ctx, const FiniteSubset& F,
                             const GroupElement& s);
// alpha^i applied elementwise; requires a semidirect context and F inside H.
FiniteSubset apply_alpha_power(const GroupContext& ctx, Coord i,
                               const FiniteSubset& F);

// All h in [lo, hi] coordinatewise, z = 0.
FiniteSubset h_box(const GroupContext& ctx, const Vec& lo, const Vec& hi);
// {g^z : z in [zlo, zhi]} in a semidirect context.
FiniteSubset g_interval(const GroupContext& ctx, Coord zlo, Coord zhi);

// Elements t with Kt meeting both F and its complement. Contained in
// K^-1 F, so the search is finite.
FiniteSubset k_boundary(const GroupContext& ctx, const FiniteSubset& K,
                        const FiniteSubset& F);
std::int64_t k_boundary_size(const GroupContext& ctx, const FiniteSubset& K,
                             const FiniteSubset& F);

struct InvarianceResult {
  std::int64_t boundary_size = 0;
  std::int64_t set_size = 0;
  bool invariant = false;
  Rational ratio() const { return Rational(boundary_size, set_size); }
};

// |boundary| <= delta * |F|, decided exactly. F must be nonempty.
InvarianceResult check_invariance(const GroupContext& ctx,
                                  const FiniteSubset& K, const Rational& delta,
                                  const FiniteSubset& F);

}  // namespace folner
