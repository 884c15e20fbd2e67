#include "folner/tower.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace folner {

namespace {

constexpr std::int64_t kPaintCap = 1ll << 27;

struct CellEncoder {
  Coord hm = 1, zm = 1;
  int rank = 1;

  CellEncoder(const OdometerSpace& space, int h_depth, int z_depth)
      : hm(space.h_mod(h_depth)), zm(space.z_mod(z_depth)), rank(space.h_rank) {}

  std::uint64_t encode(const Cell& c) const {
    __int128 idx = 0;
    for (int i = 0; i < rank; ++i) idx = idx * hm + c.h[i];
    idx = idx * zm + c.z;
    return (std::uint64_t)idx;
  }
};

// Collision-detecting cell marker; dense bitmap when the space is small
// enough, hash set otherwise.
class CellPainter {
 public:
  explicit CellPainter(__int128 total_cells) {
    if (total_cells <= (__int128)1 << 31) {
      bitmap_.assign((std::size_t)((total_cells + 63) / 64), 0);
      use_bitmap_ = true;
    }
  }

  bool paint(std::uint64_t idx) {
    if (use_bitmap_) {
      std::uint64_t w = idx >> 6, b = 1ull << (idx & 63);
      if (bitmap_[w] & b) return false;
      bitmap_[w] |= b;
      return true;
    }
    return seen_.insert(idx).second;
  }

 private:
  bool use_bitmap_ = false;
  std::vector<std::uint64_t> bitmap_;
  std::unordered_set<std::uint64_t> seen_;
};

}  // namespace

bool check_tower(const OdometerSpace& space, const GroupContext& ctx,
                 const Tower& tower) {
  const auto& S = tower.shape();
  const auto& V = tower.base();
  if (S.size() * std::max<std::int64_t>(V.cell_size(), 1) > kPaintCap)
    throw OverflowError("tower check too large");
  CellPainter painter(space.cell_count(V.h_depth(), V.z_depth()));
  CellEncoder enc(space, V.h_depth(), V.z_depth());
  for (const auto& s : S)
    for (const auto& c : V.cells()) {
      Cell image = act_cell(space, ctx, s, c, V.h_depth(), V.z_depth());
      if (!painter.paint(enc.encode(image))) return false;
    }
  return true;
}

bool check_castle(const OdometerSpace& space, const GroupContext& ctx,
                  const Castle& castle) {
  if (castle.towers.empty()) return true;
  int mh = 0, mz = 0;
  std::int64_t paints = 0;
  for (const auto& t : castle.towers) {
    mh = std::max(mh, t.base().h_depth());
    mz = std::max(mz, t.base().z_depth());
  }
  CellPainter painter(space.cell_count(mh, mz));
  CellEncoder enc(space, mh, mz);
  for (const auto& t : castle.towers) {
    ClopenSet base = refine(space, t.base(), mh, mz);
    paints += t.shape().size() * base.cell_size();
    if (paints > kPaintCap) throw OverflowError("castle check too large");
    for (const auto& s : t.shape())
      for (const auto& c : base.cells()) {
        Cell image = act_cell(space, ctx, s, c, mh, mz);
        if (!painter.paint(enc.encode(image))) return false;
      }
  }
  return true;
}

ClopenSet tower_footprint(const OdometerSpace& space, const GroupContext& ctx,
                          const Tower& tower) {
  const auto& V = tower.base();
  if (tower.shape().size() * std::max<std::int64_t>(V.cell_size(), 1) > (1 << 23))
    throw OverflowError("footprint enumeration too large");
  std::vector<Cell> cells;
  cells.reserve((std::size_t)(tower.shape().size() * V.cell_size()));
  for (const auto& s : tower.shape())
    for (const auto& c : V.cells())
      cells.push_back(act_cell(space, ctx, s, c, V.h_depth(), V.z_depth()));
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  return ClopenSet::from_sorted_cells(V.h_depth(), V.z_depth(), std::move(cells));
}

std::vector<std::optional<std::size_t>> locate_patch(const OdometerSpace& space,
                                                     const GroupContext& ctx,
                                                     const Point& x,
                                                     const FiniteSubset& window,
                                                     const Castle& castle) {
  std::vector<std::optional<std::size_t>> out(window.elements().size());
  if (castle.towers.empty() || window.empty()) return out;

  bool uniform = true;
  int mh = castle.towers.front().base().h_depth();
  int mz = castle.towers.front().base().z_depth();
  for (const auto& t : castle.towers)
    uniform = uniform && t.base().h_depth() == mh && t.base().z_depth() == mz;

  std::size_t idx = 0;
  if (uniform) {
    CellEncoder enc(space, mh, mz);
    std::unordered_map<std::uint64_t, std::size_t> owner;
    for (std::size_t j = 0; j < castle.towers.size(); ++j)
      for (const auto& c : castle.towers[j].base().cells())
        owner.emplace(enc.encode(c), j);
    Coord hm = space.h_mod(mh), zm = space.z_mod(mz);
    for (const auto& w : window) {
      Point y = act(space, ctx, w, x);
      if (y.h_depth < mh || (space.has_z && y.z_depth < mz))
        throw DepthExhausted("point is too shallow for the castle bases");
      Cell c;
      c.h.resize(space.h_rank);
      for (int i = 0; i < space.h_rank; ++i) c.h[i] = y.h[i] % hm;
      c.z = space.has_z ? y.z % zm : 0;
      auto it = owner.find(enc.encode(c));
      if (it != owner.end()) out[idx] = it->second;
      ++idx;
    }
    return out;
  }

  for (const auto& w : window) {
    Point y = act(space, ctx, w, x);
    for (std::size_t j = 0; j < castle.towers.size(); ++j) {
      if (point_in(space, castle.towers[j].base(), y)) {
        if (out[idx]) throw ContractViolation("castle bases overlap");
        out[idx] = j;
      }
    }
    ++idx;
  }
  return out;
}

namespace {

// Tower check for (W*S, V_0) with V_0 the cylinder (h=0, z=0) and S the
// full residue box: paints the level cells directly. Valid whenever W*S
// has no duplicate products, which holds for W inside <g>.
bool ws_tower_cells_distinct(const OdometerSpace& space, const GroupContext& ctx,
                             const FiniteSubset& W, const FiniteSubset& S, int mh,
                             int mz) {
  if (W.size() * S.size() > kPaintCap) throw OverflowError("tower check too large");
  CellPainter painter(space.cell_count(mh, mz));
  CellEncoder enc(space, mh, mz);
  Coord hm = space.h_mod(mh);
  Coord zm = space.z_mod(mz);
  Cell image;
  image.h.resize(space.h_rank);
  for (const auto& w : W) {
    for (const auto& s : S) {
      Vec twisted = ctx.has_z() ? ctx.alpha_apply(w.z, s.h) : s.h;
      for (int i = 0; i < space.h_rank; ++i) {
        Coord v = detail::checked_add(twisted[i], w.h[i]) % hm;
        image.h[i] = v < 0 ? v + hm : v;
      }
      Coord z = space.has_z ? w.z % zm : 0;
      image.z = z < 0 ? z + zm : z;
      if (!painter.paint(enc.encode(image))) return false;
    }
  }
  return true;
}

bool pure_g_window(const FiniteSubset& W) {
  for (const auto& w : W)
    for (Coord c : w.h)
      if (c != 0) return false;
  return true;
}

}  // namespace

InitialCastleResult build_initial_castle(const OdometerSpace& space,
                                         const GroupContext& ctx,
                                         const FiniteSubset& inv_K,
                                         const Rational& inv_delta,
                                         const FiniteSubset& freeness_window,
                                         const InitialCastleOptions& opts) {
  if (ctx.kind() == GroupKind::Finite)
    throw PreconditionError("initial castles need a free-abelian H");
  if (space.h_rank != ctx.rank() || space.has_z != ctx.has_z())
    throw ContextMismatch("space does not model this context");

  int mh = -1;
  FiniteSubset shape;
  for (int m = std::max(1, opts.min_h_depth); m <= space.max_h_depth; ++m) {
    Coord hm = space.h_mod(m);
    __int128 cells = 1;
    for (int i = 0; i < space.h_rank; ++i) cells *= hm;
    if (cells > opts.max_shape_cells)
      throw DepthExhausted("invariance target unreachable at configured maximum depth");
    Vec lo((std::size_t)space.h_rank, 0), hi((std::size_t)space.h_rank, hm - 1);
    shape = h_box(ctx, lo, hi);
    if (inv_K.empty() || check_invariance(ctx, inv_K, inv_delta, shape).invariant) {
      mh = m;
      break;
    }
  }
  if (mh < 0)
    throw DepthExhausted("invariance target unreachable at configured maximum depth");

  auto shape_ptr = std::make_shared<const FiniteSubset>(std::move(shape));
  bool trivial_window =
      freeness_window.empty() ||
      freeness_window == FiniteSubset{ctx.identity()};

  if (!space.has_z) {
    std::vector<Cell> base_cells(1);
    base_cells[0].h.assign((std::size_t)space.h_rank, 0);
    ClopenSet base = ClopenSet::from_sorted_cells(mh, 0, std::move(base_cells));
    if (!trivial_window) {
      bool ok = pure_g_window(freeness_window)
                    ? ws_tower_cells_distinct(space, ctx, freeness_window,
                                              *shape_ptr, mh, 0)
                    : check_tower(space, ctx,
                                  Tower(product_set(ctx, freeness_window, *shape_ptr),
                                        base));
      if (!ok)
        throw DepthExhausted("freeness window does not separate at any depth");
    }
    InitialCastleResult res;
    res.castle.towers.emplace_back(shape_ptr, std::move(base));
    res.h_depth = mh;
    res.z_depth = 0;
    return res;
  }

  for (int mz = std::max(0, opts.min_z_depth); mz <= space.max_z_depth; ++mz) {
    bool ok;
    if (trivial_window) {
      ok = true;
    } else if (pure_g_window(freeness_window)) {
      ok = ws_tower_cells_distinct(space, ctx, freeness_window, *shape_ptr, mh, mz);
    } else {
      std::vector<Cell> c0(1);
      c0[0].h.assign((std::size_t)space.h_rank, 0);
      ClopenSet base0 = ClopenSet::from_sorted_cells(mh, mz, std::move(c0));
      ok = check_tower(space, ctx,
                       Tower(product_set(ctx, freeness_window, *shape_ptr), base0));
    }
    if (!ok) continue;
    // All bases are g^j-translates of the j=0 cylinder; the level cells
    // (w_h + alpha^i(s), i + j) only shift in z with j, so the tower
    // property at j = 0 transfers to every j.
    InitialCastleResult res;
    Coord zm = space.z_mod(mz);
    res.castle.towers.reserve((std::size_t)zm);
    for (Coord j = 0; j < zm; ++j) {
      std::vector<Cell> cells(1);
      cells[0].h.assign((std::size_t)space.h_rank, 0);
      cells[0].z = j;
      res.castle.towers.emplace_back(
          shape_ptr, ClopenSet::from_sorted_cells(mh, mz, std::move(cells)));
    }
    res.h_depth = mh;
    res.z_depth = mz;
    return res;
  }
  throw DepthExhausted("freeness window unreachable at configured maximum z-depth");
}

}  // namespace folner
