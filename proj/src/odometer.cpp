#include "folner/odometer.hpp"

#include <algorithm>

namespace folner {

using detail::checked_add;
using detail::checked_mul;

OdometerSpace OdometerSpace::for_context(const GroupContext& ctx, Coord h_prime,
                                         Coord z_prime) {
  if (ctx.kind() == GroupKind::Finite)
    throw PreconditionError("odometer spaces model free-abelian H only");
  if (h_prime < 2 || z_prime < 2) throw ParseError("odometer base must be at least 2");
  OdometerSpace s;
  s.h_rank = ctx.rank();
  s.h_prime = h_prime;
  s.has_z = ctx.has_z();
  s.z_prime = z_prime;
  return s;
}

Coord OdometerSpace::h_mod(int depth) const {
  if (depth < 0 || depth > max_h_depth) throw DepthExhausted("h-depth out of range");
  Coord m = 1;
  for (int i = 0; i < depth; ++i) m = checked_mul(m, h_prime);
  return m;
}

Coord OdometerSpace::z_mod(int depth) const {
  if (!has_z) return 1;
  if (depth < 0 || depth > max_z_depth) throw DepthExhausted("z-depth out of range");
  Coord m = 1;
  for (int i = 0; i < depth; ++i) m = checked_mul(m, z_prime);
  return m;
}

__int128 OdometerSpace::cell_count(int h_depth, int z_depth) const {
  __int128 total = 1;
  Coord hm = h_mod(h_depth);
  for (int i = 0; i < h_rank; ++i) {
    total *= hm;
    if (total > (__int128)1 << 100) throw OverflowError("cell count too large");
  }
  total *= z_mod(z_depth);
  if (total > (__int128)1 << 100) throw OverflowError("cell count too large");
  return total;
}

namespace {

Coord pos_mod(Coord v, Coord m) {
  Coord r = v % m;
  return r < 0 ? r + m : r;
}

void check_depths(const OdometerSpace& space, int h_depth, int z_depth) {
  if (h_depth < 0 || h_depth > space.max_h_depth)
    throw DepthExhausted("h-depth out of range");
  if (space.has_z && (z_depth < 0 || z_depth > space.max_z_depth))
    throw DepthExhausted("z-depth out of range");
  if (!space.has_z && z_depth != 0)
    throw ParseError("space has no Z-factor");
}

constexpr std::int64_t kEnumerationCap = 1 << 23;

}  // namespace

ClopenSet ClopenSet::empty(int h_depth, int z_depth) {
  ClopenSet s;
  s.h_depth_ = h_depth;
  s.z_depth_ = z_depth;
  return s;
}

ClopenSet ClopenSet::whole(const OdometerSpace& space, int h_depth, int z_depth) {
  check_depths(space, h_depth, z_depth);
  __int128 total = space.cell_count(h_depth, z_depth);
  if (total > kEnumerationCap) throw OverflowError("clopen enumeration too large");
  Coord hm = space.h_mod(h_depth);
  Coord zm = space.z_mod(z_depth);
  std::vector<Cell> cells;
  cells.reserve((std::size_t)total);
  Cell cur;
  cur.h.assign(space.h_rank, 0);
  cur.z = 0;
  while (true) {
    for (Coord z = 0; z < zm; ++z) {
      Cell c = cur;
      c.z = z;
      cells.push_back(std::move(c));
    }
    int axis = space.h_rank - 1;
    while (axis >= 0) {
      if (cur.h[axis] < hm - 1) {
        ++cur.h[axis];
        break;
      }
      cur.h[axis] = 0;
      --axis;
    }
    if (axis < 0) break;
  }
  return from_sorted_cells(h_depth, z_depth, std::move(cells));
}

ClopenSet ClopenSet::from_cells(const OdometerSpace& space, int h_depth,
                                int z_depth, std::vector<Cell> cells) {
  check_depths(space, h_depth, z_depth);
  Coord hm = space.h_mod(h_depth);
  Coord zm = space.z_mod(z_depth);
  for (const auto& c : cells) {
    if ((int)c.h.size() != space.h_rank) throw ParseError("cell has wrong rank");
    for (Coord v : c.h)
      if (v < 0 || v >= hm) throw ParseError("cell residue out of range");
    if (c.z < 0 || c.z >= zm) throw ParseError("cell residue out of range");
  }
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  return from_sorted_cells(h_depth, z_depth, std::move(cells));
}

ClopenSet ClopenSet::from_sorted_cells(int h_depth, int z_depth,
                                       std::vector<Cell> cells) {
  ClopenSet s;
  s.h_depth_ = h_depth;
  s.z_depth_ = z_depth;
  s.cells_ = std::move(cells);
  return s;
}

bool ClopenSet::contains_cell(const Cell& c) const {
  return std::binary_search(cells_.begin(), cells_.end(), c);
}

ClopenSet refine(const OdometerSpace& space, const ClopenSet& a, int h_depth,
                 int z_depth) {
  if (h_depth < a.h_depth() || z_depth < a.z_depth())
    throw PreconditionError("refinement must not lose depth");
  check_depths(space, h_depth, z_depth);
  if (h_depth == a.h_depth() && z_depth == a.z_depth()) return a;
  Coord hm_old = space.h_mod(a.h_depth());
  Coord zm_old = space.z_mod(a.z_depth());
  Coord hstep = space.h_mod(h_depth) / hm_old;
  Coord zstep = space.z_mod(z_depth) / zm_old;
  __int128 per_cell = 1;
  for (int i = 0; i < space.h_rank; ++i) per_cell *= hstep;
  per_cell *= zstep;
  __int128 total = per_cell * (__int128)a.cell_size();
  if (total > kEnumerationCap) throw OverflowError("clopen enumeration too large");
  std::vector<Cell> out;
  out.reserve((std::size_t)total);
  // Subcell residues: old + k * p^old_depth for each coordinate.
  for (const auto& c : a.cells()) {
    Cell cur;
    cur.h.assign(space.h_rank, 0);
    std::vector<Coord> mult(space.h_rank, 0);
    while (true) {
      Cell sub;
      sub.h.resize(space.h_rank);
      for (int i = 0; i < space.h_rank; ++i) sub.h[i] = c.h[i] + mult[i] * hm_old;
      for (Coord kz = 0; kz < zstep; ++kz) {
        sub.z = c.z + kz * zm_old;
        out.push_back(sub);
      }
      int axis = space.h_rank - 1;
      while (axis >= 0) {
        if (mult[axis] < hstep - 1) {
          ++mult[axis];
          break;
        }
        mult[axis] = 0;
        --axis;
      }
      if (axis < 0) break;
    }
  }
  std::sort(out.begin(), out.end());
  return ClopenSet::from_sorted_cells(h_depth, z_depth, std::move(out));
}

namespace {

std::pair<ClopenSet, ClopenSet> align(const OdometerSpace& space, const ClopenSet& a,
                                      const ClopenSet& b) {
  int mh = std::max(a.h_depth(), b.h_depth());
  int mz = std::max(a.z_depth(), b.z_depth());
  return {refine(space, a, mh, mz), refine(space, b, mh, mz)};
}

}  // namespace

ClopenSet clopen_union(const OdometerSpace& space, const ClopenSet& a,
                       const ClopenSet& b) {
  auto [x, y] = align(space, a, b);
  std::vector<Cell> out;
  out.reserve(x.cells().size() + y.cells().size());
  std::set_union(x.cells().begin(), x.cells().end(), y.cells().begin(),
                 y.cells().end(), std::back_inserter(out));
  return ClopenSet::from_sorted_cells(x.h_depth(), x.z_depth(), std::move(out));
}

ClopenSet clopen_intersection(const OdometerSpace& space, const ClopenSet& a,
                              const ClopenSet& b) {
  auto [x, y] = align(space, a, b);
  std::vector<Cell> out;
  std::set_intersection(x.cells().begin(), x.cells().end(), y.cells().begin(),
                        y.cells().end(), std::back_inserter(out));
  return ClopenSet::from_sorted_cells(x.h_depth(), x.z_depth(), std::move(out));
}

ClopenSet clopen_difference(const OdometerSpace& space, const ClopenSet& a,
                            const ClopenSet& b) {
  auto [x, y] = align(space, a, b);
  std::vector<Cell> out;
  std::set_difference(x.cells().begin(), x.cells().end(), y.cells().begin(),
                      y.cells().end(), std::back_inserter(out));
  return ClopenSet::from_sorted_cells(x.h_depth(), x.z_depth(), std::move(out));
}

ClopenSet clopen_complement(const OdometerSpace& space, const ClopenSet& a) {
  return clopen_difference(space, ClopenSet::whole(space, a.h_depth(), a.z_depth()),
                           a);
}

bool clopen_subset(const OdometerSpace& space, const ClopenSet& a,
                   const ClopenSet& b) {
  auto [x, y] = align(space, a, b);
  return std::includes(y.cells().begin(), y.cells().end(), x.cells().begin(),
                       x.cells().end());
}

bool clopen_disjoint(const OdometerSpace& space, const ClopenSet& a,
                     const ClopenSet& b) {
  auto [x, y] = align(space, a, b);
  auto ia = x.cells().begin();
  auto ib = y.cells().begin();
  while (ia != x.cells().end() && ib != y.cells().end()) {
    if (*ia < *ib)
      ++ia;
    else if (*ib < *ia)
      ++ib;
    else
      return false;
  }
  return true;
}

Rational clopen_measure(const OdometerSpace& space, const ClopenSet& a) {
  __int128 total = space.cell_count(a.h_depth(), a.z_depth());
  if (total > INT64_MAX) throw OverflowError("cell count exceeds int64");
  return Rational(a.cell_size(), (Coord)total);
}

Cell act_cell(const OdometerSpace& space, const GroupContext& ctx,
              const GroupElement& a, const Cell& c, int h_depth, int z_depth) {
  Coord hm = space.h_mod(h_depth);
  Coord zm = space.z_mod(z_depth);
  Cell out;
  if (ctx.has_z() && a.z != 0 && !ctx.alpha_is_identity()) {
    out.h = ctx.alpha_apply(a.z, c.h);
  } else {
    out.h = c.h;
  }
  for (int i = 0; i < space.h_rank; ++i)
    out.h[i] = pos_mod(checked_add(out.h[i], a.h[i]), hm);
  out.z = space.has_z ? pos_mod(checked_add(c.z, a.z), zm) : 0;
  return out;
}

ClopenSet clopen_translate(const OdometerSpace& space, const GroupContext& ctx,
                           const GroupElement& a, const ClopenSet& A) {
  std::vector<Cell> out;
  out.reserve(A.cells().size());
  for (const auto& c : A.cells())
    out.push_back(act_cell(space, ctx, a, c, A.h_depth(), A.z_depth()));
  std::sort(out.begin(), out.end());
  // The action permutes depth-m cells, so no two cells may collide.
  if (std::adjacent_find(out.begin(), out.end()) != out.end())
    throw ContractViolation("translate collapsed cells");
  return ClopenSet::from_sorted_cells(A.h_depth(), A.z_depth(), std::move(out));
}

Point act(const OdometerSpace& space, const GroupContext& ctx,
          const GroupElement& a, const Point& x) {
  if ((int)x.h.size() != space.h_rank) throw ParseError("point has wrong rank");
  Coord hm = space.h_mod(x.h_depth);
  Coord zm = space.z_mod(x.z_depth);
  Point out;
  out.h_depth = x.h_depth;
  out.z_depth = x.z_depth;
  if (ctx.has_z() && a.z != 0 && !ctx.alpha_is_identity()) {
    out.h = ctx.alpha_apply(a.z, x.h);
  } else {
    out.h = x.h;
  }
  for (int i = 0; i < space.h_rank; ++i)
    out.h[i] = pos_mod(checked_add(out.h[i], a.h[i]), hm);
  out.z = space.has_z ? pos_mod(checked_add(x.z, a.z), zm) : 0;
  return out;
}

bool point_in(const OdometerSpace& space, const ClopenSet& A, const Point& x) {
  if (x.h_depth < A.h_depth() || (space.has_z && x.z_depth < A.z_depth()))
    throw DepthExhausted("point is too shallow for the set");
  Coord hm = space.h_mod(A.h_depth());
  Coord zm = space.z_mod(A.z_depth());
  Cell c;
  c.h.resize(space.h_rank);
  for (int i = 0; i < space.h_rank; ++i) c.h[i] = pos_mod(x.h[i], hm);
  c.z = space.has_z ? pos_mod(x.z, zm) : 0;
  return A.contains_cell(c);
}

}  // namespace folner
