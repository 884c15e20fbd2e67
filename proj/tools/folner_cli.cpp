#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "folner/castle.hpp"
#include "folner/comparison.hpp"
#include "folner/density.hpp"
#include "folner/disjointify.hpp"
#include "folner/group.hpp"
#include "folner/odometer.hpp"
#include "folner/quasitile.hpp"
#include "folner/serialize.hpp"
#include "folner/tower.hpp"
#include "folner/version.hpp"

using namespace folner;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

const Json& field(const Json& cfg, const char* key) {
  if (!cfg.is_object() || !cfg.contains(key))
    throw ParseError(std::string("config: missing key \"") + key + "\"");
  return cfg[key];
}

Json envelope(const char* command, const Json& cfg, const std::string& hash) {
  Json tool;
  tool["name"] = "folner";
  tool["version"] = kVersion;
  tool["config_hash"] = hash;
  Json j;
  j["tool"] = std::move(tool);
  j["command"] = command;
  j["config"] = cfg;
  return j;
}

GroupContext context_of(const Json& cfg) {
  return context_from_json(field(cfg, "group"));
}

// {"h_prime","z_prime","max_h_depth"?,"max_z_depth"?}; rank and the
// presence of the Z-factor come from the group.
OdometerSpace space_of(const GroupContext& ctx, const Json& cfg) {
  const Json& sj = field(cfg, "space");
  Coord hp = int_from_json(field(sj, "h_prime"), "space.h_prime");
  Coord zp = sj.contains("z_prime")
                 ? int_from_json(sj["z_prime"], "space.z_prime")
                 : 2;
  OdometerSpace space = OdometerSpace::for_context(ctx, hp, zp);
  if (sj.contains("max_h_depth"))
    space.max_h_depth =
        (int)int_from_json(sj["max_h_depth"], "space.max_h_depth");
  if (sj.contains("max_z_depth"))
    space.max_z_depth =
        (int)int_from_json(sj["max_z_depth"], "space.max_z_depth");
  return space;
}

CheckMode mode_of(const Json& cfg) {
  if (!cfg.contains("mode")) return CheckMode::Strict;
  const std::string m = cfg["mode"].get<std::string>();
  if (m == "strict") return CheckMode::Strict;
  if (m == "audit") return CheckMode::Audit;
  throw ParseError("config: mode must be \"strict\" or \"audit\"");
}

FoelnerOptions foelner_of(const Json& cfg) {
  FoelnerOptions opts;
  if (!cfg.contains("foelner")) return opts;
  const Json& f = cfg["foelner"];
  if (f.contains("base_radius"))
    opts.base_radius = int_from_json(f["base_radius"], "foelner.base_radius");
  if (f.contains("max_level_cells"))
    opts.max_level_cells =
        int_from_json(f["max_level_cells"], "foelner.max_level_cells");
  if (f.contains("max_levels"))
    opts.max_levels = (int)int_from_json(f["max_levels"], "foelner.max_levels");
  if (f.contains("require_full"))
    opts.require_full = f["require_full"].get<bool>();
  return opts;
}

// Definition-level replay of the greedy with plain ordered containers,
// bypassing the library's grid fast path.
QuasiTiling oracle_quasitile(const GroupContext& ctx, const FiniteSubset& e,
                             const TowerSequence& seq) {
  std::set<GroupElement> uncovered(e.begin(), e.end());
  QuasiTiling qt;
  qt.per_level.assign(seq.levels.size(), {});
  qt.target_size = e.size();
  qt.precondition_ok =
      e.empty() ||
      check_invariance(ctx, seq.levels.back(), seq.epsilon / Rational(4, 1), e)
          .invariant;
  std::int64_t covered = 0;
  for (std::size_t li = seq.levels.size(); li-- > 0;) {
    const FiniteSubset& f = seq.levels[li];
    for (int phase = 0; phase < 2; ++phase) {
      for (const GroupElement& c : e) {
        bool inside = true;
        std::int64_t cnt = 0;
        for (const GroupElement& off : f) {
          GroupElement pt = ctx.compose(off, c);
          if (!e.contains(pt)) {
            inside = false;
            break;
          }
          if (uncovered.count(pt)) ++cnt;
        }
        if (!inside || cnt == 0) continue;
        if (phase == 0 && cnt != f.size()) continue;
        if (!seq.epsilon.le_times(f.size() - cnt, f.size())) continue;
        std::vector<GroupElement> kept;
        kept.reserve((std::size_t)cnt);
        for (const GroupElement& off : f) {
          auto it = uncovered.find(ctx.compose(off, c));
          if (it != uncovered.end()) {
            kept.push_back(off);
            uncovered.erase(it);
          }
        }
        covered += (std::int64_t)kept.size();
        qt.per_level[li].push_back({c, FiniteSubset::from_sorted(std::move(kept))});
      }
    }
  }
  qt.covered = covered;
  return qt;
}

Json diff_quasitilings(const QuasiTiling& got, const QuasiTiling& want) {
  bool agrees = got.covered == want.covered &&
                got.per_level.size() == want.per_level.size();
  std::int64_t placements = 0;
  for (std::size_t li = 0; agrees && li < got.per_level.size(); ++li) {
    if (got.per_level[li].size() != want.per_level[li].size()) {
      agrees = false;
      break;
    }
    placements += (std::int64_t)got.per_level[li].size();
    for (std::size_t i = 0; i < got.per_level[li].size(); ++i) {
      const Placement &a = got.per_level[li][i], &b = want.per_level[li][i];
      if (!(a.center == b.center) || !(a.tile == b.tile)) {
        agrees = false;
        break;
      }
    }
  }
  Json j;
  j["agrees"] = agrees;
  j["placements"] = int_to_string(placements);
  j["covered"] = int_to_string(want.covered);
  return j;
}

// Quadratic recomputation of the realized patterns, one element at a
// time, plus independent flag and bound checks.
Json oracle_disjointify(const GroupContext& ctx,
                        const DisjointificationInstance& inst,
                        const PiecePartition& part) {
  std::map<PiecePattern, std::vector<GroupElement>> groups;
  for (const GroupElement& el : inst.s) {
    PiecePattern pat;
    for (int i = 0; i < (int)inst.rows.size(); ++i)
      for (int j = 0; j < (int)inst.rows[i].size(); ++j)
        if (inst.rows[i][j].set.contains(el)) pat.emplace_back(i, j);
    groups[pat].push_back(el);
  }
  bool agrees = groups.size() == part.pieces.size();
  std::int64_t flagged = 0;
  for (const Piece& p : part.pieces) {
    auto it = groups.find(p.pattern);
    if (it == groups.end() ||
        FiniteSubset(std::vector<GroupElement>(it->second)) != p.set) {
      agrees = false;
      continue;
    }
    auto inv = check_invariance(ctx, inst.k, inst.delta, p.set);
    if (!inv.invariant) flagged += p.set.size();
    if (!inv.invariant != p.in_omega0) agrees = false;
  }
  if (flagged != part.omega0_total) agrees = false;
  if (inst.delta.le_times(flagged, inst.s.size()) != part.bound_holds)
    agrees = false;
  Json j;
  j["agrees"] = agrees;
  j["pieces"] = int_to_string((std::int64_t)groups.size());
  j["flagged_mass"] = int_to_string(flagged);
  return j;
}

int run_boundary(const Json& cfg, Json& report) {
  GroupContext ctx = context_of(cfg);
  FiniteSubset k = subset_from_json(ctx, field(cfg, "k"));
  FiniteSubset f = subset_from_json(ctx, field(cfg, "f"));
  FiniteSubset boundary = k_boundary(ctx, k, f);
  report["boundary_size"] = int_to_string(boundary.size());
  report["set_size"] = int_to_string(f.size());
  report["boundary"] = to_json(ctx, boundary);
  if (cfg.contains("delta")) {
    Rational delta = rational_from_json(cfg["delta"], "config.delta");
    report["delta"] = to_json(delta);
    report["invariant"] = check_invariance(ctx, k, delta, f).invariant;
  }
  return 0;
}

int run_quasitile(const Json& cfg, bool oracle, Json& report) {
  GroupContext ctx = context_of(cfg);
  FiniteSubset e = subset_from_json(ctx, field(cfg, "e"));
  Rational epsilon = rational_from_json(field(cfg, "epsilon"), "config.epsilon");
  TowerSequence seq = build_foelner_sequence(ctx, epsilon, foelner_of(cfg));
  Json levels = Json::array();
  for (const FiniteSubset& lvl : seq.levels)
    levels.push_back(int_to_string(lvl.size()));
  report["level_sizes"] = std::move(levels);
  report["required_m"] = int_to_string(seq.required_m);
  report["sequence_full"] = seq.full;

  QuasiTiling qt = quasitile(ctx, e, seq, mode_of(cfg));
  report["tiling"] = to_json(ctx, qt);
  report["covered_fraction"] =
      to_json(e.empty() ? Rational(1, 1) : Rational(qt.covered, e.size()));
  if (oracle) {
    report["oracle"] = diff_quasitilings(qt, oracle_quasitile(ctx, e, seq));
    if (!report["oracle"]["agrees"].get<bool>()) return 1;
  }
  return 0;
}

int run_disjointify(const Json& cfg, bool oracle, Json& report) {
  GroupContext ctx = context_of(cfg);
  DisjointificationInstance inst =
      instance_from_json(ctx, field(cfg, "instance"));
  PiecePartition part = disjointify(ctx, inst, mode_of(cfg));
  report["partition"] = to_json(ctx, part);
  BoundReport bound = verify_bound(ctx, part, inst.delta, inst.s);
  Json bj;
  bj["partition_ok"] = bound.partition_ok;
  bj["flags_ok"] = bound.flags_ok;
  bj["bound_holds"] = bound.bound_holds;
  bj["omega0_total"] = int_to_string(bound.omega0_total);
  report["bound"] = std::move(bj);
  if (oracle) {
    report["oracle"] = oracle_disjointify(ctx, inst, part);
    if (!report["oracle"]["agrees"].get<bool>()) return 1;
  }
  return 0;
}

int run_build_castle(const Json& cfg, bool trace, const std::string& castle_out,
                     Json& report) {
  GroupContext ctx = context_of(cfg);
  OdometerSpace space = space_of(ctx, cfg);
  FiniteSubset k = subset_from_json(ctx, field(cfg, "k"));
  Rational delta = rational_from_json(field(cfg, "delta"), "config.delta");
  Rational epsilon = rational_from_json(field(cfg, "epsilon"), "config.epsilon");

  CastleBuildOptions opts;
  opts.trace = trace;
  if (cfg.contains("options")) {
    const Json& oj = cfg["options"];
    if (oj.contains("tile_target_override"))
      opts.tile_target_override =
          rational_from_json(oj["tile_target_override"], "tile_target_override");
    if (oj.contains("eta_override"))
      opts.eta_override = rational_from_json(oj["eta_override"], "eta_override");
    if (oj.contains("audit_budget"))
      opts.audit_budget = int_from_json(oj["audit_budget"], "audit_budget");
    opts.foelner = foelner_of(oj);
    if (oj.contains("initial")) {
      const Json& ij = oj["initial"];
      if (ij.contains("min_h_depth"))
        opts.initial.min_h_depth =
            (int)int_from_json(ij["min_h_depth"], "initial.min_h_depth");
      if (ij.contains("min_z_depth"))
        opts.initial.min_z_depth =
            (int)int_from_json(ij["min_z_depth"], "initial.min_z_depth");
      if (ij.contains("max_shape_cells"))
        opts.initial.max_shape_cells =
            int_from_json(ij["max_shape_cells"], "initial.max_shape_cells");
    }
  }

  CastleBuildResult res = build_castle(space, ctx, k, delta, epsilon, opts);
  report["params"] = to_json(ctx, res.params);
  Json prep;
  prep["h_depth"] = int_to_string(res.prepared.initial.h_depth);
  prep["z_depth"] = int_to_string(res.prepared.initial.z_depth);
  prep["towers"] = int_to_string((std::int64_t)res.prepared.inputs.towers.size());
  prep["core_size"] = int_to_string(
      res.prepared.inputs.towers.empty()
          ? 0
          : res.prepared.inputs.towers[0].core->size());
  report["prepared"] = std::move(prep);
  report["selection"] = to_json(res.selection);
  report["recursion"] = to_json(res.recursion);
  if (trace) report["trace"] = trace_to_json(res.recursion.trace);
  report["report"] = to_json(res.report);
  report["castle_ok"] = check_castle(space, ctx, res.assembled.castle);

  Json castle = castle_to_json(space, ctx, res.assembled.castle);
  if (castle_out.empty()) {
    report["castle"] = std::move(castle);
  } else {
    write_file(castle_out, castle.dump(2) + "\n");
    report["castle_file"] = castle_out;
  }
  return res.report.meets_target && report["castle_ok"].get<bool>() ? 0 : 1;
}

int run_verify(const Json& cfg, Json& report) {
  GroupContext ctx = context_of(cfg);
  OdometerSpace space = space_of(ctx, cfg);
  const std::string kind = field(cfg, "kind").get<std::string>();
  bool valid = false;
  if (kind == "subequivalence") {
    SubequivalenceCertificate cert =
        subequivalence_from_json(space, ctx, field(cfg, "certificate"));
    valid = check_subequivalence(space, ctx, cert);
  } else if (kind == "castle") {
    Castle castle = castle_from_json(space, ctx, field(cfg, "castle"));
    valid = check_castle(space, ctx, castle);
    report["towers"] = int_to_string((std::int64_t)castle.towers.size());
  } else if (kind == "tiling") {
    FiniteSubset target = subset_from_json(ctx, field(cfg, "target"));
    TilingCertificate cert =
        certificate_from_json(ctx, field(cfg, "certificate"));
    valid = verify_tiling(ctx, target, cert);
  } else {
    throw ParseError("config: unknown verify kind \"" + kind + "\"");
  }
  report["kind"] = kind;
  report["valid"] = valid;
  return valid ? 0 : 1;
}

int run_density(const Json& cfg, Json& report) {
  GroupContext ctx = context_of(cfg);
  OdometerSpace space = space_of(ctx, cfg);
  ClopenSet set = clopen_from_json(space, field(cfg, "set"));
  const std::string mode = field(cfg, "mode").get<std::string>();
  report["set"] = to_json(space, set);
  report["mode"] = mode;
  if (mode == "exact") {
    report["value"] = to_json(exact_density(space, set));
    report["foelner"] = nullptr;
    report["samples"] = int_to_string(0);
  } else if (mode == "empirical") {
    FiniteSubset f = subset_from_json(ctx, field(cfg, "foelner"));
    std::vector<Point> samples;
    for (const Json& p : field(cfg, "samples"))
      samples.push_back(point_from_json(p));
    DensityEstimate est = empirical_density(space, ctx, set, f, samples);
    report["value"] = Json::array({to_json(est.lo), to_json(est.hi)});
    report["foelner"] = to_json(ctx, f);
    report["samples"] = int_to_string(est.samples);
  } else {
    throw ParseError("config: mode must be \"exact\" or \"empirical\"");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact quasitilings, disjointifications and marker castles"};
  app.require_subcommand(1);

  std::string config_path, out_path, castle_out;
  bool oracle = false, trace = false;

  CLI::App* cmds[6];
  cmds[0] = app.add_subcommand("boundary", "K-boundary of a finite set");
  cmds[1] = app.add_subcommand("quasitile", "greedy quasitiling of a finite set");
  cmds[2] = app.add_subcommand("disjointify",
                               "split overlapping tileable families");
  cmds[3] = app.add_subcommand("build-castle", "full castle construction");
  cmds[4] = app.add_subcommand("verify", "check a serialized certificate");
  cmds[5] = app.add_subcommand("density", "density of a clopen set");
  for (CLI::App* c : cmds) {
    c->add_option("--config", config_path, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);
    c->add_option("--out", out_path, "report file (default stdout)");
  }
  cmds[1]->add_flag("--oracle", oracle, "diff against the brute-force greedy");
  cmds[2]->add_flag("--oracle", oracle, "diff against per-element recomputation");
  cmds[3]->add_flag("--trace", trace, "record every stage decision");
  cmds[3]->add_option("--castle-out", castle_out,
                      "write the castle JSON here instead of inlining it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const std::string raw = read_file(config_path);
    const Json cfg = parse_json(raw, config_path);
    int status = 0;
    Json report;
    if (app.got_subcommand(cmds[0])) {
      report = envelope("boundary", cfg, fnv1a_hex(raw));
      status = run_boundary(cfg, report);
    } else if (app.got_subcommand(cmds[1])) {
      report = envelope("quasitile", cfg, fnv1a_hex(raw));
      status = run_quasitile(cfg, oracle, report);
    } else if (app.got_subcommand(cmds[2])) {
      report = envelope("disjointify", cfg, fnv1a_hex(raw));
      status = run_disjointify(cfg, oracle, report);
    } else if (app.got_subcommand(cmds[3])) {
      report = envelope("build-castle", cfg, fnv1a_hex(raw));
      status = run_build_castle(cfg, trace, castle_out, report);
    } else if (app.got_subcommand(cmds[4])) {
      report = envelope("verify", cfg, fnv1a_hex(raw));
      status = run_verify(cfg, report);
    } else {
      report = envelope("density", cfg, fnv1a_hex(raw));
      status = run_density(cfg, report);
    }
    const std::string text = report.dump(2) + "\n";
    if (out_path.empty())
      std::cout << text;
    else
      write_file(out_path, text);
    return status;
  } catch (const ParseError& e) {
    Json err;
    err["error"] = {{"type", "parse"}, {"what", e.what()}};
    std::cerr << err.dump(2) << "\n";
    return 2;
  } catch (const CastleAssertion& e) {
    Json err;
    err["error"] = {{"type", "castle_assertion"},
                    {"claim", e.claim()},
                    {"stage", int_to_string(e.stage())},
                    {"tower", int_to_string(e.tower())},
                    {"what", e.what()}};
    std::cerr << err.dump(2) << "\n";
    return 1;
  } catch (const HypothesisViolation& e) {
    Json err;
    err["error"] = {{"type", "hypothesis_violation"},
                    {"clause", e.clause()},
                    {"what", e.what()}};
    std::cerr << err.dump(2) << "\n";
    return 1;
  } catch (const Error& e) {
    Json err;
    err["error"] = {{"type", "contract"}, {"what", e.what()}};
    std::cerr << err.dump(2) << "\n";
    return 1;
  } catch (const std::exception& e) {
    Json err;
    err["error"] = {{"type", "internal"}, {"what", e.what()}};
    std::cerr << err.dump(2) << "\n";
    return 1;
  }
}
