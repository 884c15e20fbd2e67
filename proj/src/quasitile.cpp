#include "folner/quasitile.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <unordered_set>

#include <boost/multiprecision/cpp_int.hpp>

namespace folner {

namespace {

using boost::multiprecision::cpp_int;

FiniteSubset box_of_radius(const GroupContext& ctx, Coord r) {
  Vec lo((std::size_t)ctx.rank(), -r);
  Vec hi((std::size_t)ctx.rank(), r);
  return h_box(ctx, lo, hi);
}

std::int64_t box_cells(int d, Coord r) {
  std::int64_t side = detail::checked_add(detail::checked_mul(2, r), 1);
  std::int64_t n = 1;
  for (int i = 0; i < d; ++i) n = detail::checked_mul(n, side);
  return n;
}

void validate_epsilon(const Rational& eps) {
  if (!(Rational(0, 1) < eps && eps < Rational(1, 2)))
    throw PreconditionError("epsilon must lie in (0, 1/2), got " + eps.str());
}

void validate_box_context(const GroupContext& ctx) {
  if (ctx.kind() == GroupKind::Finite)
    throw PreconditionError("window sequences need a free-abelian part");
}

// Least radius >= start whose box passes pred, or nullopt once the box
// would exceed the cell cap. pred is re-evaluated exactly at the radius
// returned, so a non-monotone pred can only cost minimality, never
// validity.
std::optional<Coord> least_radius(
    const GroupContext& ctx, Coord start, std::int64_t max_cells,
    const std::function<bool(const FiniteSubset&)>& pred) {
  int d = ctx.rank();
  if (box_cells(d, start) > max_cells) return std::nullopt;
  if (pred(box_of_radius(ctx, start))) return start;
  Coord lo = start, hi = start;
  for (;;) {
    Coord next = detail::checked_add(detail::checked_mul(hi, 2), 1);
    if (box_cells(d, next) > max_cells) return std::nullopt;
    hi = next;
    if (pred(box_of_radius(ctx, hi))) break;
    lo = hi;
  }
  while (lo + 1 < hi) {
    Coord mid = lo + (hi - lo) / 2;
    if (pred(box_of_radius(ctx, mid)))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

TowerSequence build_nested_boxes(const GroupContext& ctx, const Rational& eps,
                                 const FoelnerOptions& opts,
                                 const FiniteSubset* extra_window,
                                 const Rational& extra_target) {
  validate_epsilon(eps);
  validate_box_context(ctx);
  if (opts.base_radius < 0)
    throw PreconditionError("base radius must be nonnegative");
  TowerSequence seq;
  seq.epsilon = eps;
  seq.required_m = required_levels(eps);
  Rational step = eps / Rational(8, 1);
  int want = std::min(seq.required_m, opts.max_levels);
  Coord prev_r = 0;
  bool truncated = seq.required_m > opts.max_levels;
  for (int k = 0; k < want; ++k) {
    Coord start = k == 0 ? opts.base_radius : prev_r + 1;
    const FiniteSubset* prev = k == 0 ? nullptr : &seq.levels.back();
    auto pred = [&](const FiniteSubset& box) {
      if (prev && !check_invariance(ctx, *prev, step, box).invariant)
        return false;
      if (extra_window &&
          !check_invariance(ctx, *extra_window, extra_target, box).invariant)
        return false;
      return true;
    };
    auto r = least_radius(ctx, start, opts.max_level_cells, pred);
    if (!r) {
      truncated = true;
      break;
    }
    seq.levels.push_back(box_of_radius(ctx, *r));
    prev_r = *r;
  }
  seq.full = !truncated && (int)seq.levels.size() == seq.required_m;
  if (opts.require_full && !seq.full)
    throw DepthExhausted(
        "window sequence unreachable at the configured size cap (" +
        std::to_string(seq.levels.size()) + " of " +
        std::to_string(seq.required_m) + " levels)");
  if (seq.levels.empty())
    throw DepthExhausted("no window fits under the configured size cap");
  return seq;
}

void validate_sequence(const GroupContext& ctx, const TowerSequence& seq) {
  validate_epsilon(seq.epsilon);
  if (seq.levels.empty())
    throw PreconditionError("window sequence has no levels");
  if (!seq.levels.front().contains(ctx.identity()))
    throw PreconditionError("first window must contain the identity");
  for (std::size_t i = 1; i < seq.levels.size(); ++i)
    if (!is_subset(seq.levels[i - 1], seq.levels[i]))
      throw PreconditionError("windows must be nested");
}

using ElementSet = std::unordered_set<GroupElement, ElementHash>;

// Row-major bitmaps over the bounding box of E, for targets and
// windows living in the z = 0 fiber. Points outside the box are simply
// absent from E.
struct FlatGrid {
  int d = 0;
  Vec lo, hi;
  std::vector<std::int64_t> stride;
  std::vector<std::uint8_t> in_e, in_u;

  std::int64_t index(const Vec& h) const {
    std::int64_t idx = 0;
    for (int i = 0; i < d; ++i) {
      if (h[(std::size_t)i] < lo[(std::size_t)i] ||
          h[(std::size_t)i] > hi[(std::size_t)i])
        return -1;
      idx += (h[(std::size_t)i] - lo[(std::size_t)i]) * stride[(std::size_t)i];
    }
    return idx;
  }
};

constexpr std::int64_t kFlatVolumeCap = std::int64_t(1) << 26;

bool all_pure_h(const FiniteSubset& s) {
  for (const auto& el : s)
    if (el.z != 0) return false;
  return true;
}

std::optional<FlatGrid> make_grid(const GroupContext& ctx,
                                  const FiniteSubset& e_set,
                                  const TowerSequence& seq) {
  if (e_set.empty()) return std::nullopt;
  if (!all_pure_h(e_set)) return std::nullopt;
  for (const auto& lvl : seq.levels)
    if (!all_pure_h(lvl)) return std::nullopt;
  FlatGrid g;
  g.d = ctx.rank();
  g.lo = e_set.elements().front().h;
  g.hi = g.lo;
  for (const auto& el : e_set)
    for (int i = 0; i < g.d; ++i) {
      g.lo[(std::size_t)i] = std::min(g.lo[(std::size_t)i], el.h[(std::size_t)i]);
      g.hi[(std::size_t)i] = std::max(g.hi[(std::size_t)i], el.h[(std::size_t)i]);
    }
  std::int64_t vol = 1;
  g.stride.assign((std::size_t)g.d, 1);
  for (int i = g.d - 1; i >= 0; --i) {
    g.stride[(std::size_t)i] = vol;
    std::int64_t side = g.hi[(std::size_t)i] - g.lo[(std::size_t)i] + 1;
    vol = detail::checked_mul(vol, side);
    if (vol > kFlatVolumeCap) return std::nullopt;
  }
  g.in_e.assign((std::size_t)vol, 0);
  g.in_u.assign((std::size_t)vol, 0);
  for (const auto& el : e_set) {
    auto idx = g.index(el.h);
    g.in_e[(std::size_t)idx] = 1;
    g.in_u[(std::size_t)idx] = 1;
  }
  return g;
}

void greedy_level_flat(FlatGrid& g, const FiniteSubset& e_set,
                       const FiniteSubset& window, const Rational& eps,
                       std::vector<Placement>& out) {
  std::int64_t fsize = window.size();
  std::vector<Vec> offs;
  offs.reserve((std::size_t)fsize);
  for (const auto& f : window) offs.push_back(f.h);
  Vec p((std::size_t)g.d, 0);
  auto point_index = [&](const Vec& c, const Vec& f) {
    for (int i = 0; i < g.d; ++i)
      p[(std::size_t)i] = c[(std::size_t)i] + f[(std::size_t)i];
    return g.index(p);
  };
  for (int phase = 0; phase < 2; ++phase) {
    for (const auto& c : e_set) {
      std::int64_t cnt = 0;
      bool inside = true;
      for (const auto& f : offs) {
        auto idx = point_index(c.h, f);
        if (idx < 0 || !g.in_e[(std::size_t)idx]) {
          inside = false;
          break;
        }
        if (g.in_u[(std::size_t)idx])
          ++cnt;
        else if (phase == 0)
          break;
      }
      if (!inside) continue;
      if (phase == 0 && cnt != fsize) continue;
      if (cnt == 0 || !eps.le_times(fsize - cnt, fsize)) continue;
      std::vector<GroupElement> kept;
      kept.reserve((std::size_t)cnt);
      for (const auto& f : window) {
        auto idx = point_index(c.h, f.h);
        if (g.in_u[(std::size_t)idx]) {
          kept.push_back(f);
          g.in_u[(std::size_t)idx] = 0;
        }
      }
      out.push_back({c, FiniteSubset::from_sorted(std::move(kept))});
    }
  }
}

void greedy_level_generic(const GroupContext& ctx, const ElementSet& in_e,
                          ElementSet& in_u, const FiniteSubset& e_set,
                          const FiniteSubset& window, const Rational& eps,
                          std::vector<Placement>& out) {
  std::int64_t fsize = window.size();
  for (int phase = 0; phase < 2; ++phase) {
    for (const auto& c : e_set) {
      std::int64_t cnt = 0;
      bool inside = true;
      for (const auto& f : window) {
        GroupElement pt = ctx.compose(f, c);
        if (!in_e.count(pt)) {
          inside = false;
          break;
        }
        if (in_u.count(pt))
          ++cnt;
        else if (phase == 0)
          break;
      }
      if (!inside) continue;
      if (phase == 0 && cnt != fsize) continue;
      if (cnt == 0 || !eps.le_times(fsize - cnt, fsize)) continue;
      std::vector<GroupElement> kept;
      kept.reserve((std::size_t)cnt);
      for (const auto& f : window) {
        GroupElement pt = ctx.compose(f, c);
        auto it = in_u.find(pt);
        if (it != in_u.end()) {
          kept.push_back(f);
          in_u.erase(it);
        }
      }
      out.push_back({c, FiniteSubset::from_sorted(std::move(kept))});
    }
  }
}

void verify_quasitiling(const GroupContext& ctx, const FiniteSubset& e_set,
                        const TowerSequence& seq, QuasiTiling& qt) {
  ElementSet in_e(e_set.begin(), e_set.end());
  ElementSet kept_points;
  ElementSet window_points;
  std::int64_t covered = 0;
  for (std::size_t li = 0; li < seq.levels.size(); ++li) {
    const FiniteSubset& window = seq.levels[li];
    for (const auto& pl : qt.per_level[li]) {
      if (!is_subset(pl.tile, window))
        throw ContractViolation("kept tile is not a subset of its window");
      if (!seq.epsilon.le_times(window.size() - pl.tile.size(), window.size()))
        throw ContractViolation("kept tile lost more than an epsilon fraction");
      for (const auto& f : pl.tile) {
        if (!kept_points.insert(ctx.compose(f, pl.center)).second)
          throw ContractViolation("kept tiles overlap");
        ++covered;
      }
      for (const auto& f : window) {
        GroupElement pt = ctx.compose(f, pl.center);
        if (!in_e.count(pt))
          throw ContractViolation("window translate leaves the target set");
        window_points.insert(pt);
      }
    }
  }
  if ((std::int64_t)window_points.size() != covered)
    throw ContractViolation("window union and kept union disagree");
  if (!seq.epsilon.le_times(e_set.size() - covered, e_set.size()))
    throw ContractViolation("covered less than a (1-epsilon) fraction");
  qt.covered = covered;
}

}  // namespace

int required_levels(const Rational& epsilon) {
  validate_epsilon(epsilon);
  Rational base = Rational(1, 1) - epsilon / Rational(2, 1);
  cpp_int p(base.num()), q(base.den());
  cpp_int a(epsilon.num()), b(epsilon.den());
  cpp_int pm = p, qm = q;
  for (int m = 1; m <= 1000000; ++m) {
    if (b * pm < a * qm) return m;
    pm *= p;
    qm *= q;
  }
  throw PreconditionError("required level count exceeds supported range");
}

TowerSequence build_foelner_sequence(const GroupContext& ctx,
                                     const Rational& epsilon,
                                     const FoelnerOptions& opts) {
  return build_nested_boxes(ctx, epsilon, opts, nullptr, Rational(0, 1));
}

QuasiTiling quasitile(const GroupContext& ctx, const FiniteSubset& e_set,
                      const TowerSequence& seq, CheckMode mode) {
  validate_sequence(ctx, seq);
  QuasiTiling qt;
  qt.target_size = e_set.size();
  qt.per_level.assign(seq.levels.size(), {});
  bool inv_ok =
      e_set.empty() ||
      check_invariance(ctx, seq.levels.back(), seq.epsilon / Rational(4, 1),
                       e_set)
          .invariant;
  qt.precondition_ok = inv_ok;
  if (mode == CheckMode::Strict && !inv_ok)
    throw PreconditionError(
        "target set is not (F_m, eps/4)-invariant for the top window");
  auto grid = make_grid(ctx, e_set, seq);
  ElementSet in_e, in_u;
  if (!grid) {
    in_e.insert(e_set.begin(), e_set.end());
    in_u = in_e;
  }
  for (std::size_t li = seq.levels.size(); li-- > 0;) {
    if (grid)
      greedy_level_flat(*grid, e_set, seq.levels[li], seq.epsilon,
                        qt.per_level[li]);
    else
      greedy_level_generic(ctx, in_e, in_u, e_set, seq.levels[li], seq.epsilon,
                           qt.per_level[li]);
  }
  verify_quasitiling(ctx, e_set, seq, qt);
  return qt;
}

bool verify_tiling(const GroupContext& ctx, const FiniteSubset& a_set,
                   const TilingCertificate& cert) {
  ElementSet painted;
  std::int64_t total = 0;
  for (const auto& [tile, t] : cert.tiles)
    for (const auto& f : tile) {
      if (!painted.insert(ctx.compose(f, t)).second) return false;
      ++total;
    }
  if (total != a_set.size()) return false;
  for (const auto& el : a_set)
    if (!painted.count(el)) return false;
  return true;
}

bool TilingCollection::contains(const GroupContext& ctx,
                                const FiniteSubset& f) const {
  for (const auto& level : seq.levels)
    if (is_subset(f, level))
      return epsilon.le_times(level.size() - f.size(), level.size());
  return false;
}

TilingCollection tiling_collection(const GroupContext& ctx,
                                   const FiniteSubset& k,
                                   const Rational& delta,
                                   const Rational& epsilon,
                                   const FoelnerOptions& opts) {
  if (k.empty()) throw PreconditionError("window K must be nonempty");
  if (!(Rational(0, 1) < delta))
    throw PreconditionError("delta must be positive");
  TilingCollection col;
  col.k = k;
  col.delta = delta;
  col.epsilon = epsilon;
  // A member F drops at most eps|F_j| elements R from its level, and
  // boundary(F_j \ R) <= boundary(F_j) + |K||R|, so levels built to
  // delta(1-eps) - |K|eps make every member (K, delta)-invariant. When
  // that target is not positive the levels only meet delta themselves.
  Rational strong =
      delta * (Rational(1, 1) - epsilon) - Rational(k.size(), 1) * epsilon;
  col.members_invariant_by_construction = Rational(0, 1) < strong;
  col.level_target = col.members_invariant_by_construction ? strong : delta;
  col.seq = build_nested_boxes(ctx, epsilon, opts, &k, col.level_target);
  return col;
}

ExtractResult extract_tileable(const GroupContext& ctx,
                               const FiniteSubset& e_set,
                               const TilingCollection& collection,
                               CheckMode mode) {
  ExtractResult res;
  res.tiling = quasitile(ctx, e_set, collection.seq, mode);
  std::vector<GroupElement> members;
  members.reserve((std::size_t)res.tiling.covered);
  for (std::size_t li = 0; li < res.tiling.per_level.size(); ++li)
    for (const auto& pl : res.tiling.per_level[li]) {
      res.cert.tiles.emplace_back(pl.tile, pl.center);
      for (const auto& f : pl.tile)
        members.push_back(ctx.compose(f, pl.center));
    }
  std::sort(members.begin(), members.end());
  res.e_prime = FiniteSubset::from_sorted(std::move(members));
  if (!verify_tiling(ctx, res.e_prime, res.cert))
    throw ContractViolation("extracted certificate does not tile its set");
  for (const auto& [tile, t] : res.cert.tiles)
    if (!collection.contains(ctx, tile))
      throw ContractViolation("extracted tile is outside the collection");
  return res;
}

}  // namespace folner
