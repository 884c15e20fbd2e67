#pragma once

#include <random>

#include "folner/group.hpp"

namespace folner::testutil {

inline GroupElement el1(Coord x) {
  GroupElement e;
  e.h.push_back(x);
  return e;
}

inline GroupElement el2(Coord x, Coord y) {
  GroupElement e;
  e.h.push_back(x);
  e.h.push_back(y);
  return e;
}

inline GroupElement sel(std::initializer_list<Coord> h, Coord z) {
  GroupElement e;
  for (Coord c : h) e.h.push_back(c);
  e.z = z;
  return e;
}

inline FiniteSubset interval1(Coord lo, Coord hi) {
  std::vector<GroupElement> v;
  for (Coord x = lo; x <= hi; ++x) v.push_back(el1(x));
  return FiniteSubset::from_sorted(std::move(v));
}

inline FiniteSubset box2(Coord x0, Coord x1, Coord y0, Coord y1) {
  std::vector<GroupElement> v;
  for (Coord x = x0; x <= x1; ++x)
    for (Coord y = y0; y <= y1; ++y) v.push_back(el2(x, y));
  return FiniteSubset::from_sorted(std::move(v));
}

inline Matrix shear2() {
  Matrix m;
  m.d = 2;
  m.a = {1, 1, 0, 1};
  return m;
}

// Direct evaluation of the boundary definition over a coordinate window
// that must contain K^-1 F.
inline FiniteSubset brute_boundary(const GroupContext& ctx, const FiniteSubset& K,
                                   const FiniteSubset& F,
                                   const FiniteSubset& window) {
  std::vector<GroupElement> out;
  for (const auto& t : window) {
    bool meets_f = false, meets_c = false;
    for (const auto& k : K) {
      GroupElement kt = ctx.compose(k, t);
      if (F.contains(kt))
        meets_f = true;
      else
        meets_c = true;
      if (meets_f && meets_c) break;
    }
    if (meets_f && meets_c) out.push_back(t);
  }
  return FiniteSubset(std::move(out));
}

}  // namespace folner::testutil
