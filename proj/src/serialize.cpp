#include "folner/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <memory>
#include <tuple>
#include <unordered_map>
#include <utility>

namespace folner {

namespace {

[[noreturn]] void fail(const char* what, const std::string& detail) {
  throw ParseError(std::string(what) + ": " + detail);
}

const Json& field(const Json& j, const char* key, const char* what) {
  if (!j.is_object()) fail(what, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(what, std::string("missing key \"") + key + "\"");
  return *it;
}

void expect_array(const Json& j, const char* what) {
  if (!j.is_array()) fail(what, "expected an array");
}

bool bool_from(const Json& j, const char* what) {
  if (!j.is_boolean()) fail(what, "expected a boolean");
  return j.get<bool>();
}

std::string string_from(const Json& j, const char* what) {
  if (!j.is_string()) fail(what, "expected a string");
  return j.get<std::string>();
}

int narrow_int(std::int64_t v, const char* what) {
  if (v < INT32_MIN || v > INT32_MAX) fail(what, "value out of range");
  return (int)v;
}

Vec vec_from_json(const Json& j, const char* what) {
  expect_array(j, what);
  Vec h;
  for (const Json& c : j) h.push_back(int_from_json(c, what));
  return h;
}

Json vec_to_json(const Vec& h) {
  Json a = Json::array();
  for (Coord c : h) a.push_back(int_to_string(c));
  return a;
}

Json cell_to_json(const Cell& c) {
  return Json::array({vec_to_json(c.h), int_to_string(c.z)});
}

Cell cell_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) fail(what, "expected an [h, z] pair");
  return Cell{vec_from_json(j[0], what), int_from_json(j[1], what)};
}

}  // namespace

std::string int_to_string(std::int64_t v) { return std::to_string(v); }

std::int64_t int_from_json(const Json& j, const char* what) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (!j.is_string()) fail(what, "expected a decimal string");
  const std::string s = j.get<std::string>();
  std::int64_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    fail(what, "bad integer literal \"" + s + "\"");
  return v;
}

Json to_json(const Rational& r) { return r.str(); }

Rational rational_from_json(const Json& j, const char* what) {
  if (j.is_number_integer())
    return Rational::integer(j.get<std::int64_t>());
  return Rational::parse(string_from(j, what));
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (int r = 0; r < m.d; ++r) {
    Json row = Json::array();
    for (int c = 0; c < m.d; ++c) row.push_back(m.at(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  expect_array(j, "matrix");
  Matrix m;
  m.d = (int)j.size();
  if (m.d == 0) fail("matrix", "empty matrix");
  for (const Json& row : j) {
    if (!row.is_array() || (int)row.size() != m.d)
      fail("matrix", "rows must be square");
    for (const Json& c : row)
      m.a.push_back(int_from_json(c, "matrix entry"));
  }
  return m;
}

Json to_json(const GroupContext& ctx) {
  Json j;
  switch (ctx.kind()) {
    case GroupKind::Zd:
      j["kind"] = "zd";
      j["d"] = ctx.rank();
      break;
    case GroupKind::Semidirect:
      j["kind"] = "semidirect";
      j["d"] = ctx.rank();
      j["alpha"] = to_json(ctx.alpha_matrix());
      break;
    case GroupKind::Finite:
      j["kind"] = "finite";
      j["table"] = ctx.table();
      break;
  }
  return j;
}

GroupContext context_from_json(const Json& j) {
  const std::string kind = string_from(field(j, "kind", "group"), "group.kind");
  if (kind == "zd") {
    return GroupContext::zd(
        narrow_int(int_from_json(field(j, "d", "group"), "group.d"), "group.d"));
  }
  if (kind == "semidirect") {
    return GroupContext::semidirect(
        narrow_int(int_from_json(field(j, "d", "group"), "group.d"), "group.d"),
        matrix_from_json(field(j, "alpha", "group")));
  }
  if (kind == "finite") {
    const Json& tj = field(j, "table", "group");
    expect_array(tj, "group.table");
    std::vector<std::vector<int>> table;
    for (const Json& row : tj) {
      expect_array(row, "group.table");
      std::vector<int> r;
      for (const Json& c : row)
        r.push_back(narrow_int(int_from_json(c, "group.table"), "group.table"));
      table.push_back(std::move(r));
    }
    return GroupContext::finite(std::move(table));
  }
  fail("group.kind", "unknown kind \"" + kind + "\"");
}

Json to_json(const GroupContext& ctx, const GroupElement& el) {
  (void)ctx;
  return Json::array({vec_to_json(el.h), int_to_string(el.z)});
}

GroupElement element_from_json(const GroupContext& ctx, const Json& j) {
  if (!j.is_array() || j.size() != 2)
    fail("element", "expected an [h, z] pair");
  return ctx.element(vec_from_json(j[0], "element"),
                     int_from_json(j[1], "element"));
}

Json to_json(const GroupContext& ctx, const FiniteSubset& f) {
  Json a = Json::array();
  for (const GroupElement& el : f) a.push_back(to_json(ctx, el));
  return a;
}

FiniteSubset subset_from_json(const GroupContext& ctx, const Json& j) {
  expect_array(j, "subset");
  std::vector<GroupElement> elems;
  elems.reserve(j.size());
  for (const Json& e : j) elems.push_back(element_from_json(ctx, e));
  return FiniteSubset(std::move(elems));
}

Json to_json(const OdometerSpace& space) {
  Json j;
  j["h_rank"] = int_to_string(space.h_rank);
  j["h_prime"] = int_to_string(space.h_prime);
  j["has_z"] = space.has_z;
  j["z_prime"] = int_to_string(space.z_prime);
  j["max_h_depth"] = int_to_string(space.max_h_depth);
  j["max_z_depth"] = int_to_string(space.max_z_depth);
  return j;
}

OdometerSpace space_from_json(const Json& j) {
  OdometerSpace s;
  s.h_rank = narrow_int(int_from_json(field(j, "h_rank", "space"), "space.h_rank"),
                        "space.h_rank");
  s.h_prime = int_from_json(field(j, "h_prime", "space"), "space.h_prime");
  if (j.contains("has_z")) s.has_z = bool_from(j["has_z"], "space.has_z");
  if (j.contains("z_prime"))
    s.z_prime = int_from_json(j["z_prime"], "space.z_prime");
  if (j.contains("max_h_depth"))
    s.max_h_depth = narrow_int(
        int_from_json(j["max_h_depth"], "space.max_h_depth"), "space.max_h_depth");
  if (j.contains("max_z_depth"))
    s.max_z_depth = narrow_int(
        int_from_json(j["max_z_depth"], "space.max_z_depth"), "space.max_z_depth");
  if (s.h_rank < 1 || s.h_prime < 2 || s.z_prime < 2)
    fail("space", "rank must be positive and primes at least 2");
  return s;
}

Json to_json(const Point& x) {
  Json j;
  j["h"] = vec_to_json(x.h);
  j["z"] = int_to_string(x.z);
  j["h_depth"] = int_to_string(x.h_depth);
  j["z_depth"] = int_to_string(x.z_depth);
  return j;
}

Point point_from_json(const Json& j) {
  Point x;
  x.h = vec_from_json(field(j, "h", "point"), "point.h");
  x.z = int_from_json(field(j, "z", "point"), "point.z");
  x.h_depth = narrow_int(int_from_json(field(j, "h_depth", "point"), "point"),
                         "point.h_depth");
  x.z_depth = narrow_int(int_from_json(field(j, "z_depth", "point"), "point"),
                         "point.z_depth");
  return x;
}

Json to_json(const OdometerSpace& space, const ClopenSet& a) {
  (void)space;
  Json j;
  j["h_depth"] = int_to_string(a.h_depth());
  j["z_depth"] = int_to_string(a.z_depth());
  Json cells = Json::array();
  for (const Cell& c : a.cells()) cells.push_back(cell_to_json(c));
  j["cells"] = std::move(cells);
  return j;
}

ClopenSet clopen_from_json(const OdometerSpace& space, const Json& j) {
  int hd = narrow_int(int_from_json(field(j, "h_depth", "clopen set"), "clopen set"),
                      "clopen set h_depth");
  int zd = narrow_int(int_from_json(field(j, "z_depth", "clopen set"), "clopen set"),
                      "clopen set z_depth");
  const Json& cj = field(j, "cells", "clopen set");
  expect_array(cj, "clopen set cells");
  std::vector<Cell> cells;
  cells.reserve(cj.size());
  for (const Json& c : cj) cells.push_back(cell_from_json(c, "clopen set cell"));
  return ClopenSet::from_cells(space, hd, zd, std::move(cells));
}

Json to_json(const GroupContext& ctx, const TilingCertificate& cert) {
  Json a = Json::array();
  for (const auto& [tile, translate] : cert.tiles)
    a.push_back(Json::array({to_json(ctx, tile), to_json(ctx, translate)}));
  return a;
}

TilingCertificate certificate_from_json(const GroupContext& ctx,
                                        const Json& j) {
  expect_array(j, "certificate");
  TilingCertificate cert;
  for (const Json& p : j) {
    if (!p.is_array() || p.size() != 2)
      fail("certificate", "expected [tile, translate] pairs");
    cert.tiles.emplace_back(subset_from_json(ctx, p[0]),
                            element_from_json(ctx, p[1]));
  }
  return cert;
}

Json to_json(const GroupContext& ctx, const QuasiTiling& tiling) {
  Json levels = Json::array();
  for (const auto& level : tiling.per_level) {
    Json placed = Json::array();
    for (const Placement& p : level) {
      Json e;
      e["center"] = to_json(ctx, p.center);
      e["tile"] = to_json(ctx, p.tile);
      placed.push_back(std::move(e));
    }
    levels.push_back(std::move(placed));
  }
  Json j;
  j["per_level"] = std::move(levels);
  j["covered"] = int_to_string(tiling.covered);
  j["target_size"] = int_to_string(tiling.target_size);
  j["precondition_ok"] = tiling.precondition_ok;
  return j;
}

Json to_json(const InvarianceResult& inv) {
  Json j;
  j["boundary_size"] = int_to_string(inv.boundary_size);
  j["set_size"] = int_to_string(inv.set_size);
  j["invariant"] = inv.invariant;
  return j;
}

InvarianceResult invariance_from_json(const Json& j) {
  InvarianceResult inv;
  inv.boundary_size =
      int_from_json(field(j, "boundary_size", "invariance"), "invariance");
  inv.set_size = int_from_json(field(j, "set_size", "invariance"), "invariance");
  inv.invariant = bool_from(field(j, "invariant", "invariance"), "invariance");
  return inv;
}

Json to_json(const HypothesisReport& rep) {
  Json clauses = Json::array();
  for (const HypothesisClause& c : rep.clauses) {
    Json e;
    e["name"] = c.name;
    e["holds"] = c.holds;
    e["detail"] = c.detail;
    clauses.push_back(std::move(e));
  }
  Json j;
  j["clauses"] = std::move(clauses);
  j["all_hold"] = rep.all_hold;
  return j;
}

HypothesisReport hypothesis_report_from_json(const Json& j) {
  HypothesisReport rep;
  const Json& cj = field(j, "clauses", "hypotheses");
  expect_array(cj, "hypotheses.clauses");
  for (const Json& c : cj) {
    HypothesisClause cl;
    cl.name = string_from(field(c, "name", "hypothesis clause"), "clause name");
    cl.holds = bool_from(field(c, "holds", "hypothesis clause"), "clause holds");
    cl.detail =
        string_from(field(c, "detail", "hypothesis clause"), "clause detail");
    rep.clauses.push_back(std::move(cl));
  }
  rep.all_hold = bool_from(field(j, "all_hold", "hypotheses"), "all_hold");
  return rep;
}

Json to_json(const GroupContext& ctx, const DisjointificationInstance& inst) {
  Json rows = Json::array();
  for (const auto& row : inst.rows) {
    Json r = Json::array();
    for (const TiledSet& ts : row) {
      Json e;
      e["set"] = to_json(ctx, ts.set);
      e["cert"] = to_json(ctx, ts.cert);
      r.push_back(std::move(e));
    }
    rows.push_back(std::move(r));
  }
  Json j;
  j["s"] = to_json(ctx, inst.s);
  j["rows"] = std::move(rows);
  j["k"] = to_json(ctx, inst.k);
  j["delta"] = to_json(inst.delta);
  return j;
}

DisjointificationInstance instance_from_json(const GroupContext& ctx,
                                             const Json& j) {
  DisjointificationInstance inst;
  inst.s = subset_from_json(ctx, field(j, "s", "instance"));
  const Json& rows = field(j, "rows", "instance");
  expect_array(rows, "instance.rows");
  for (const Json& row : rows) {
    expect_array(row, "instance row");
    std::vector<TiledSet> r;
    for (const Json& e : row) {
      TiledSet ts;
      ts.set = subset_from_json(ctx, field(e, "set", "tiled set"));
      ts.cert = certificate_from_json(ctx, field(e, "cert", "tiled set"));
      r.push_back(std::move(ts));
    }
    inst.rows.push_back(std::move(r));
  }
  inst.k = subset_from_json(ctx, field(j, "k", "instance"));
  inst.delta = rational_from_json(field(j, "delta", "instance"), "instance.delta");
  return inst;
}

Json to_json(const GroupContext& ctx, const PiecePartition& part) {
  Json pieces = Json::array();
  for (const Piece& p : part.pieces) {
    Json pattern = Json::array();
    for (const auto& [row, member] : p.pattern)
      pattern.push_back(
          Json::array({int_to_string(row), int_to_string(member)}));
    Json e;
    e["pattern"] = std::move(pattern);
    e["set"] = to_json(ctx, p.set);
    e["invariance"] = to_json(p.invariance);
    e["in_omega0"] = p.in_omega0;
    pieces.push_back(std::move(e));
  }
  Json j;
  j["pieces"] = std::move(pieces);
  j["k"] = to_json(ctx, part.k);
  j["delta"] = to_json(part.delta);
  j["omega0_total"] = int_to_string(part.omega0_total);
  j["bound_holds"] = part.bound_holds;
  j["hypotheses"] = to_json(part.hypotheses);
  return j;
}

PiecePartition partition_from_json(const GroupContext& ctx, const Json& j) {
  PiecePartition part;
  const Json& pj = field(j, "pieces", "partition");
  expect_array(pj, "partition.pieces");
  for (const Json& e : pj) {
    Piece p;
    const Json& pat = field(e, "pattern", "piece");
    expect_array(pat, "piece.pattern");
    for (const Json& rm : pat) {
      if (!rm.is_array() || rm.size() != 2)
        fail("piece.pattern", "expected [row, member] pairs");
      p.pattern.emplace_back(
          narrow_int(int_from_json(rm[0], "piece.pattern"), "piece.pattern"),
          narrow_int(int_from_json(rm[1], "piece.pattern"), "piece.pattern"));
    }
    p.set = subset_from_json(ctx, field(e, "set", "piece"));
    p.invariance = invariance_from_json(field(e, "invariance", "piece"));
    p.in_omega0 = bool_from(field(e, "in_omega0", "piece"), "piece.in_omega0");
    part.pieces.push_back(std::move(p));
  }
  part.k = subset_from_json(ctx, field(j, "k", "partition"));
  part.delta =
      rational_from_json(field(j, "delta", "partition"), "partition.delta");
  part.omega0_total =
      int_from_json(field(j, "omega0_total", "partition"), "omega0_total");
  part.bound_holds =
      bool_from(field(j, "bound_holds", "partition"), "bound_holds");
  part.hypotheses =
      hypothesis_report_from_json(field(j, "hypotheses", "partition"));
  return part;
}

Json to_json(const OdometerSpace& space, const GroupContext& ctx,
             const SubequivalenceCertificate& cert) {
  Json pieces = Json::array();
  for (const CertPiece& p : cert.pieces) {
    Json e;
    e["part"] = to_json(space, p.part);
    e["mover"] = to_json(ctx, p.mover);
    e["class_label"] = int_to_string(p.class_label);
    pieces.push_back(std::move(e));
  }
  Json j;
  j["source"] = to_json(space, cert.source);
  j["target"] = to_json(space, cert.target);
  j["num_classes"] = int_to_string(cert.num_classes);
  j["pieces"] = std::move(pieces);
  return j;
}

SubequivalenceCertificate subequivalence_from_json(const OdometerSpace& space,
                                                   const GroupContext& ctx,
                                                   const Json& j) {
  SubequivalenceCertificate cert;
  cert.source = clopen_from_json(space, field(j, "source", "certificate"));
  cert.target = clopen_from_json(space, field(j, "target", "certificate"));
  cert.num_classes =
      narrow_int(int_from_json(field(j, "num_classes", "certificate"),
                               "num_classes"),
                 "num_classes");
  const Json& pj = field(j, "pieces", "certificate");
  expect_array(pj, "certificate.pieces");
  for (const Json& e : pj) {
    CertPiece p;
    p.part = clopen_from_json(space, field(e, "part", "certificate piece"));
    p.mover = element_from_json(ctx, field(e, "mover", "certificate piece"));
    p.class_label = narrow_int(
        int_from_json(field(e, "class_label", "certificate piece"),
                      "class_label"),
        "class_label");
    cert.pieces.push_back(std::move(p));
  }
  return cert;
}

namespace {

// Writes b for the z = lo slice satisfying shape = g^[lo,hi] * core, or
// an empty set when no factorization exists.
FiniteSubset product_core(const GroupContext& ctx, const FiniteSubset& shape,
                          Coord lo, Coord hi) {
  std::vector<GroupElement> base;
  for (const GroupElement& el : shape) {
    if (el.z == lo) base.push_back(ctx.element(ctx.alpha_apply(-lo, el.h), 0));
  }
  FiniteSubset core(std::move(base));
  if (core.size() * (hi - lo + 1) != shape.size()) return {};
  if (product_set(ctx, g_interval(ctx, lo, hi), core) != shape) return {};
  return core;
}

}  // namespace

Json castle_to_json(const OdometerSpace& space, const GroupContext& ctx,
                    const Castle& castle) {
  std::vector<std::shared_ptr<const FiniteSubset>> uniq;
  std::unordered_map<const FiniteSubset*, int> by_ptr;
  std::vector<int> tower_shape;
  tower_shape.reserve(castle.towers.size());
  for (const Tower& t : castle.towers) {
    const FiniteSubset* ptr = t.shape_ptr() ? t.shape_ptr().get() : nullptr;
    auto it = ptr ? by_ptr.find(ptr) : by_ptr.end();
    if (it != by_ptr.end()) {
      tower_shape.push_back(it->second);
      continue;
    }
    int idx = -1;
    for (int i = 0; i < (int)uniq.size(); ++i) {
      if (*uniq[i] == t.shape()) {
        idx = i;
        break;
      }
    }
    if (idx < 0) {
      idx = (int)uniq.size();
      uniq.push_back(t.shape_ptr()
                         ? t.shape_ptr()
                         : std::make_shared<const FiniteSubset>());
    }
    if (ptr) by_ptr.emplace(ptr, idx);
    tower_shape.push_back(idx);
  }

  std::vector<FiniteSubset> cores;
  Json shapes = Json::array();
  for (const auto& shape : uniq) {
    Json entry;
    bool factored = false;
    if (ctx.has_z() && !shape->empty()) {
      Coord lo = shape->elements().front().z, hi = lo;
      for (const GroupElement& el : *shape) {
        lo = std::min(lo, el.z);
        hi = std::max(hi, el.z);
      }
      if (hi > lo) {
        FiniteSubset core = product_core(ctx, *shape, lo, hi);
        if (!core.empty()) {
          int ci = -1;
          for (int i = 0; i < (int)cores.size(); ++i) {
            if (cores[i] == core) {
              ci = i;
              break;
            }
          }
          if (ci < 0) {
            ci = (int)cores.size();
            cores.push_back(std::move(core));
          }
          Json prod;
          prod["g_lo"] = int_to_string(lo);
          prod["g_hi"] = int_to_string(hi);
          prod["core"] = int_to_string(ci);
          entry["product"] = std::move(prod);
          factored = true;
        }
      }
    }
    if (!factored) entry["elements"] = to_json(ctx, *shape);
    shapes.push_back(std::move(entry));
  }

  Json towers = Json::array();
  for (std::size_t i = 0; i < castle.towers.size(); ++i) {
    Json t;
    t["shape"] = int_to_string(tower_shape[i]);
    t["base"] = to_json(space, castle.towers[i].base());
    towers.push_back(std::move(t));
  }

  Json j;
  j["shapes"] = std::move(shapes);
  if (!cores.empty()) {
    Json cj = Json::array();
    for (const FiniteSubset& c : cores) cj.push_back(to_json(ctx, c));
    j["cores"] = std::move(cj);
  }
  j["towers"] = std::move(towers);
  return j;
}

Castle castle_from_json(const OdometerSpace& space, const GroupContext& ctx,
                        const Json& j) {
  std::vector<FiniteSubset> cores;
  if (j.contains("cores")) {
    const Json& cj = j["cores"];
    expect_array(cj, "castle.cores");
    for (const Json& c : cj) cores.push_back(subset_from_json(ctx, c));
  }

  const Json& sj = field(j, "shapes", "castle");
  expect_array(sj, "castle.shapes");
  std::vector<std::shared_ptr<const FiniteSubset>> shapes;
  for (const Json& e : sj) {
    if (e.contains("product")) {
      const Json& p = e["product"];
      Coord lo = int_from_json(field(p, "g_lo", "shape product"), "g_lo");
      Coord hi = int_from_json(field(p, "g_hi", "shape product"), "g_hi");
      std::size_t ci = (std::size_t)int_from_json(
          field(p, "core", "shape product"), "shape core index");
      if (ci >= cores.size()) fail("shape product", "core index out of range");
      if (hi < lo) fail("shape product", "empty interval");
      shapes.push_back(std::make_shared<const FiniteSubset>(
          product_set(ctx, g_interval(ctx, lo, hi), cores[ci])));
    } else {
      shapes.push_back(std::make_shared<const FiniteSubset>(
          subset_from_json(ctx, field(e, "elements", "shape"))));
    }
  }

  const Json& tj = field(j, "towers", "castle");
  expect_array(tj, "castle.towers");
  Castle castle;
  for (const Json& e : tj) {
    std::size_t si = (std::size_t)int_from_json(field(e, "shape", "tower"),
                                                "tower shape index");
    if (si >= shapes.size()) fail("tower", "shape index out of range");
    castle.towers.emplace_back(shapes[si],
                               clopen_from_json(space, field(e, "base", "tower")));
  }
  return castle;
}

Json to_json(const GInterval& iv) {
  return Json::array({int_to_string(iv.lo), int_to_string(iv.hi)});
}

GInterval ginterval_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2)
    fail("interval", "expected a [lo, hi] pair");
  return GInterval{int_from_json(j[0], "interval"),
                   int_from_json(j[1], "interval")};
}

Json to_json(const GroupContext& ctx, const CastleParameters& params) {
  Json j;
  j["k"] = to_json(ctx, params.k);
  j["delta"] = to_json(params.delta);
  j["epsilon"] = to_json(params.epsilon);
  j["r"] = int_to_string(params.r);
  j["dr"] = int_to_string(params.dr);
  j["plus"] = int_to_string(params.plus);
  j["beta"] = to_json(params.beta);
  j["eta"] = to_json(params.eta);
  j["tile_target"] = to_json(params.tile_target);
  j["k_prime_size"] = int_to_string(params.k_prime.size());
  j["k_second_size"] = int_to_string(params.k_second.size());
  return j;
}

Json to_json(const SelectionReport& sel) {
  Json classes = Json::array();
  for (const auto& cls : sel.classes) {
    Json e;
    e["representative"] = int_to_string(cls.representative);
    e["audit_ran"] = cls.audit_ran;
    if (cls.audit_ran) e["hypotheses"] = to_json(cls.hypotheses);
    e["pieces_match"] = cls.pieces_match;
    e["kept"] = int_to_string(cls.kept);
    e["total"] = int_to_string(cls.total);
    classes.push_back(std::move(e));
  }
  Json j;
  j["classes"] = std::move(classes);
  j["dropped_share"] = to_json(sel.dropped_share);
  return j;
}

Json to_json(const RecursionResult& rec) {
  Json counts;
  for (int c = 0; c < kStageCaseCount; ++c) {
    counts[stage_case_name((StageCase)c)] =
        int_to_string(c < (int)rec.case_counts.size() ? rec.case_counts[c] : 0);
  }
  Json j;
  j["case_counts"] = std::move(counts);
  j["fiber_floor"] = to_json(rec.fiber_floor);
  return j;
}

Json trace_to_json(const std::vector<StageRecord>& trace) {
  Json a = Json::array();
  for (const StageRecord& rec : trace) {
    Json e;
    e["stage"] = int_to_string(rec.stage);
    e["tower"] = int_to_string(rec.tower);
    e["group"] = int_to_string(rec.group);
    e["action"] = stage_case_name(rec.action);
    e["p"] = int_to_string(rec.p);
    e["q"] = int_to_string(rec.q);
    e["claims"] = int_to_string(rec.claims);
    a.push_back(std::move(e));
  }
  return a;
}

Json to_json(const CastleReport& rep) {
  Json j;
  j["density"] = to_json(rep.density);
  j["meets_target"] = rep.meets_target;
  j["w0_measure"] = to_json(rep.w0_measure);
  j["w0_bound"] = to_json(rep.w0_bound);
  j["w0_within_bound"] = rep.w0_within_bound;
  j["towers"] = int_to_string(rep.towers);
  j["distinct_shapes"] = int_to_string(rep.distinct_shapes);
  j["disjoint_ok"] = rep.disjoint_ok;
  j["spans_ok"] = rep.spans_ok;
  j["shapes_invariant"] = rep.shapes_invariant;
  return j;
}

Json to_json(const OdometerSpace& space, const GroupContext& ctx,
             const AssembledCastle& assembled) {
  Json meta = Json::array();
  for (const auto& m : assembled.meta) {
    Json e;
    e["input_tower"] = int_to_string(m.input_tower);
    e["class"] = int_to_string(m.klass);
    e["pattern"] = int_to_string(m.pattern);
    e["span"] = to_json(m.span);
    e["shape_index"] = int_to_string(m.shape_index);
    meta.push_back(std::move(e));
  }
  Json inv = Json::array();
  for (const InvarianceResult& r : assembled.shape_invariance)
    inv.push_back(to_json(r));
  Json j;
  j["castle"] = castle_to_json(space, ctx, assembled.castle);
  j["meta"] = std::move(meta);
  j["shape_invariance"] = std::move(inv);
  return j;
}

Json to_json(const DensityEstimate& est) {
  Json j;
  j["lo"] = to_json(est.lo);
  j["hi"] = to_json(est.hi);
  j["foelner_size"] = int_to_string(est.foelner_size);
  j["samples"] = int_to_string(est.samples);
  return j;
}

const char* stage_case_name(StageCase c) {
  switch (c) {
    case StageCase::Start: return "Start";
    case StageCase::Disjoint: return "Disjoint";
    case StageCase::Contained: return "Contained";
    case StageCase::Filling: return "Filling";
    case StageCase::DonateLeft: return "DonateLeft";
    case StageCase::AnnexLeft: return "AnnexLeft";
    case StageCase::SyncLeft: return "SyncLeft";
    case StageCase::DonateRight: return "DonateRight";
    case StageCase::AnnexRight: return "AnnexRight";
    case StageCase::SyncRight: return "SyncRight";
  }
  return "Unknown";
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[(std::size_t)i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace folner
