#include "folner/disjointify.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace folner {

namespace {

using ElementSet = std::unordered_set<GroupElement, ElementHash>;

void validate_instance(const DisjointificationInstance& inst) {
  if (inst.s.empty()) throw PreconditionError("ambient set S must be nonempty");
  if (inst.rows.empty())
    throw PreconditionError("instance needs at least one row");
  if (inst.k.empty()) throw PreconditionError("window K must be nonempty");
  if (!(Rational(0, 1) < inst.delta))
    throw PreconditionError("delta must be positive");
}

// Distinct nonempty tile shapes across all certificates.
std::vector<FiniteSubset> distinct_shapes(
    const DisjointificationInstance& inst) {
  std::set<std::vector<GroupElement>> seen;
  std::vector<FiniteSubset> shapes;
  for (const auto& row : inst.rows)
    for (const auto& member : row)
      for (const auto& [tile, t] : member.cert.tiles) {
        if (tile.empty()) continue;
        if (seen.insert(tile.elements()).second) shapes.push_back(tile);
      }
  return shapes;
}

void add_clause(HypothesisReport& rep, CheckMode mode, std::string name,
                bool holds, std::string detail) {
  if (!holds && mode == CheckMode::Strict)
    throw HypothesisViolation(name, detail);
  rep.clauses.push_back({std::move(name), holds, std::move(detail)});
}

HypothesisReport check_hypotheses(const GroupContext& ctx,
                                  const DisjointificationInstance& inst,
                                  const std::vector<FiniteSubset>& shapes,
                                  CheckMode mode) {
  HypothesisReport rep;
  std::int64_t n = (std::int64_t)inst.rows.size();

  bool disj = true;
  std::string disj_detail = "every row is internally disjoint";
  for (std::size_t i = 0; i < inst.rows.size() && disj; ++i) {
    ElementSet seen;
    for (std::size_t j = 0; j < inst.rows[i].size() && disj; ++j)
      for (const auto& el : inst.rows[i][j].set)
        if (!seen.insert(el).second) {
          disj = false;
          disj_detail = "row " + std::to_string(i) + " member " +
                        std::to_string(j) + " overlaps an earlier member";
          break;
        }
  }
  add_clause(rep, mode, "rows_disjoint", disj, disj_detail);

  bool certs = true;
  std::string cert_detail = "every member certificate tiles its set";
  for (std::size_t i = 0; i < inst.rows.size() && certs; ++i)
    for (std::size_t j = 0; j < inst.rows[i].size(); ++j)
      if (!verify_tiling(ctx, inst.rows[i][j].set, inst.rows[i][j].cert)) {
        certs = false;
        cert_detail = "row " + std::to_string(i) + " member " +
                      std::to_string(j) + " certificate does not tile the set";
        break;
      }
  add_clause(rep, mode, "certs_valid", certs, cert_detail);

  std::int64_t k2n = detail::checked_mul(
      8, detail::checked_mul(detail::checked_mul(inst.k.size(), inst.k.size()),
                             n));
  Rational tile_target =
      inst.delta * inst.delta * inst.delta / Rational(k2n, 1);
  bool tiles_ok = true;
  std::string tile_detail =
      "all tile shapes meet target " + tile_target.str();
  for (const auto& shape : shapes) {
    auto inv = check_invariance(ctx, inst.k, tile_target, shape);
    if (!inv.invariant) {
      tiles_ok = false;
      tile_detail = "a tile shape of size " + std::to_string(shape.size()) +
                    " has boundary ratio " + inv.ratio().str() +
                    " above target " + tile_target.str();
      break;
    }
  }
  add_clause(rep, mode, "tiles_invariant", tiles_ok, tile_detail);

  FiniteSubset shape_union;
  for (const auto& shape : shapes) shape_union = set_union(shape_union, shape);
  FiniteSubset d_set = product_set(ctx, shape_union, inverse_set(ctx, shape_union));
  FiniteSubset d2 = product_set(ctx, d_set, d_set);
  Rational s_target = inst.delta * inst.delta /
                      Rational(detail::checked_mul(4, inst.k.size()), 1);
  auto s_inv = check_invariance(ctx, d2, s_target, inst.s);
  add_clause(rep, mode, "s_invariant", s_inv.invariant,
             "D^2 boundary ratio of S is " + s_inv.ratio().str() +
                 " against target " + s_target.str());

  rep.all_hold = true;
  for (const auto& c : rep.clauses) rep.all_hold = rep.all_hold && c.holds;
  return rep;
}

using PatternMap =
    std::unordered_map<GroupElement, PiecePattern, ElementHash>;

PatternMap realized_patterns(const DisjointificationInstance& inst) {
  PatternMap pat;
  pat.reserve((std::size_t)inst.s.size() * 2);
  for (const auto& el : inst.s) pat.emplace(el, PiecePattern{});
  for (std::size_t i = 0; i < inst.rows.size(); ++i)
    for (std::size_t j = 0; j < inst.rows[i].size(); ++j)
      for (const auto& el : inst.rows[i][j].set) {
        auto it = pat.find(el);
        if (it != pat.end()) it->second.emplace_back((int)i, (int)j);
      }
  return pat;
}

PiecePartition build_partition(const GroupContext& ctx,
                               const DisjointificationInstance& inst,
                               const PatternMap& pat, CheckMode mode,
                               HypothesisReport hypotheses) {
  std::map<PiecePattern, std::vector<GroupElement>> groups;
  for (const auto& el : inst.s) groups[pat.at(el)].push_back(el);
  PiecePartition part;
  part.k = inst.k;
  part.delta = inst.delta;
  part.hypotheses = std::move(hypotheses);
  for (auto& [pattern, elems] : groups) {
    Piece piece;
    piece.pattern = pattern;
    piece.set = FiniteSubset::from_sorted(std::move(elems));
    piece.invariance = check_invariance(ctx, inst.k, inst.delta, piece.set);
    piece.in_omega0 = !piece.invariance.invariant;
    if (piece.in_omega0)
      part.omega0_total =
          detail::checked_add(part.omega0_total, piece.set.size());
    part.pieces.push_back(std::move(piece));
  }
  part.bound_holds = inst.delta.le_times(part.omega0_total, inst.s.size());
  if (mode == CheckMode::Strict && !part.bound_holds)
    throw ContractViolation("non-invariant pieces total " +
                            std::to_string(part.omega0_total) +
                            ", above delta |S|");
  return part;
}

}  // namespace

PiecePartition disjointify(const GroupContext& ctx,
                           const DisjointificationInstance& inst,
                           CheckMode mode) {
  validate_instance(inst);
  auto shapes = distinct_shapes(inst);
  auto hyp = check_hypotheses(ctx, inst, shapes, mode);
  auto pat = realized_patterns(inst);
  return build_partition(ctx, inst, pat, mode, std::move(hyp));
}

GammaRefinement gamma_refinement(const GroupContext& ctx,
                                 const DisjointificationInstance& inst,
                                 CheckMode mode) {
  validate_instance(inst);
  auto shapes = distinct_shapes(inst);
  auto hyp = check_hypotheses(ctx, inst, shapes, mode);
  auto pat = realized_patterns(inst);

  GammaRefinement ref;
  ref.partition = build_partition(ctx, inst, pat, mode, std::move(hyp));

  FiniteSubset shape_union;
  for (const auto& shape : shapes) shape_union = set_union(shape_union, shape);
  ref.d_set = product_set(ctx, shape_union, inverse_set(ctx, shape_union));
  ref.s_inner = set_difference(inst.s, k_boundary(ctx, ref.d_set, inst.s));

  ElementSet in_s(inst.s.begin(), inst.s.end());
  ElementSet in_inner(ref.s_inner.begin(), ref.s_inner.end());

  // Per row: tiles inside s_inner, with a point -> tile index map.
  std::vector<std::vector<TileUse>> inner_tiles(inst.rows.size());
  std::vector<std::unordered_map<GroupElement, int, ElementHash>> inner_cover(
      inst.rows.size());
  for (std::size_t i = 0; i < inst.rows.size(); ++i)
    for (std::size_t j = 0; j < inst.rows[i].size(); ++j)
      for (const auto& [tile, t] : inst.rows[i][j].cert.tiles) {
        if (tile.empty()) continue;
        bool sub_s = true, sub_inner = true;
        for (const auto& f : tile) {
          GroupElement p = ctx.compose(f, t);
          if (!in_s.count(p)) {
            sub_s = false;
            sub_inner = false;
            break;
          }
          if (!in_inner.count(p)) sub_inner = false;
        }
        if (sub_s) ref.t_prime.push_back({(int)i, (int)j, tile, t});
        if (sub_inner) {
          int idx = (int)inner_tiles[i].size();
          inner_tiles[i].push_back({(int)i, (int)j, tile, t});
          for (const auto& f : tile)
            inner_cover[i].emplace(ctx.compose(f, t), idx);
        }
      }

  std::map<PiecePattern, int> owner_of;
  for (std::size_t p = 0; p < ref.partition.pieces.size(); ++p)
    owner_of.emplace(ref.partition.pieces[p].pattern, (int)p);

  // Key: per chosen row, the index of the inner tile covering the
  // element. Elements covered in some row by a tile that is not inner
  // belong to no refined piece.
  std::map<std::vector<std::pair<int, int>>, std::vector<GroupElement>> groups;
  for (const auto& el : ref.s_inner) {
    const PiecePattern& pattern = pat.at(el);
    std::vector<std::pair<int, int>> key;
    key.reserve(pattern.size());
    bool assigned = true;
    for (const auto& [i, j] : pattern) {
      auto it = inner_cover[(std::size_t)i].find(el);
      if (it == inner_cover[(std::size_t)i].end()) {
        assigned = false;
        break;
      }
      key.emplace_back(i, it->second);
    }
    if (assigned) groups[std::move(key)].push_back(el);
  }

  for (auto& [key, elems] : groups) {
    GammaPiece piece;
    PiecePattern pattern;
    for (const auto& [i, idx] : key) {
      piece.tiles.push_back(inner_tiles[(std::size_t)i][(std::size_t)idx]);
      pattern.emplace_back(i, piece.tiles.back().member);
    }
    piece.set = FiniteSubset::from_sorted(std::move(elems));
    auto it = owner_of.find(pattern);
    if (it == owner_of.end())
      throw ContractViolation("refined piece has no owning partition piece");
    piece.owner = it->second;
    ref.pieces.push_back(std::move(piece));
  }
  return ref;
}

BoundReport verify_bound(const GroupContext& ctx,
                         const PiecePartition& partition,
                         const Rational& delta, const FiniteSubset& s) {
  BoundReport rep;
  ElementSet seen;
  bool disjoint = true;
  std::int64_t total = 0;
  for (const auto& piece : partition.pieces)
    for (const auto& el : piece.set) {
      if (!s.contains(el) || !seen.insert(el).second) disjoint = false;
      ++total;
    }
  rep.partition_ok = disjoint && total == s.size();

  rep.flags_ok = true;
  for (const auto& piece : partition.pieces) {
    bool flagged = piece.set.empty()
                       ? false
                       : !check_invariance(ctx, partition.k, delta, piece.set)
                              .invariant;
    if (flagged != piece.in_omega0) rep.flags_ok = false;
    if (flagged)
      rep.omega0_total = detail::checked_add(rep.omega0_total, piece.set.size());
  }
  rep.bound_holds = delta.le_times(rep.omega0_total, s.size());
  return rep;
}

}  // namespace folner
