#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "folner/castle.hpp"
#include "folner/comparison.hpp"
#include "folner/density.hpp"
#include "folner/disjointify.hpp"
#include "folner/errors.hpp"
#include "folner/group.hpp"
#include "folner/odometer.hpp"
#include "folner/quasitile.hpp"
#include "folner/rational.hpp"
#include "folner/tower.hpp"

// JSON schemas for every value that crosses the tool boundary.
//
// Conventions: group-valued data (coordinates, residues, exponents,
// cardinalities) is written as decimal strings so readers never face
// binary floats or silent truncation; rationals are "p/q" strings;
// context descriptors (kind, rank, alpha, finite tables) use plain JSON
// numbers. Parsers accept plain integers wherever a decimal string is
// expected. Elements are [h-vector, z] pairs. Malformed input raises
// ParseError; range checking is delegated to the usual constructors.

namespace folner {

using Json = nlohmann::ordered_json;

std::string int_to_string(std::int64_t v);
std::int64_t int_from_json(const Json& j, const char* what);

Json to_json(const Rational& r);
Rational rational_from_json(const Json& j, const char* what = "rational");

Json to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

// {"kind":"zd","d":2} | {"kind":"semidirect","d":2,"alpha":[[...],...]}
// | {"kind":"finite","table":[[...],...]}
Json to_json(const GroupContext& ctx);
GroupContext context_from_json(const Json& j);

Json to_json(const GroupContext& ctx, const GroupElement& el);
GroupElement element_from_json(const GroupContext& ctx, const Json& j);

// Array of [h-vector, z] pairs.
Json to_json(const GroupContext& ctx, const FiniteSubset& f);
FiniteSubset subset_from_json(const GroupContext& ctx, const Json& j);

Json to_json(const OdometerSpace& space);
OdometerSpace space_from_json(const Json& j);

Json to_json(const Point& x);
Point point_from_json(const Json& j);

// {"h_depth":..., "z_depth":..., "cells":[[h,z],...]}
Json to_json(const OdometerSpace& space, const ClopenSet& a);
ClopenSet clopen_from_json(const OdometerSpace& space, const Json& j);

// List of [tile, translate] pairs.
Json to_json(const GroupContext& ctx, const TilingCertificate& cert);
TilingCertificate certificate_from_json(const GroupContext& ctx,
                                        const Json& j);

Json to_json(const GroupContext& ctx, const QuasiTiling& tiling);

Json to_json(const InvarianceResult& inv);
InvarianceResult invariance_from_json(const Json& j);

Json to_json(const HypothesisReport& rep);
HypothesisReport hypothesis_report_from_json(const Json& j);

Json to_json(const GroupContext& ctx, const DisjointificationInstance& inst);
DisjointificationInstance instance_from_json(const GroupContext& ctx,
                                             const Json& j);

Json to_json(const GroupContext& ctx, const PiecePartition& part);
PiecePartition partition_from_json(const GroupContext& ctx, const Json& j);

Json to_json(const OdometerSpace& space, const GroupContext& ctx,
             const SubequivalenceCertificate& cert);
SubequivalenceCertificate subequivalence_from_json(const OdometerSpace& space,
                                                   const GroupContext& ctx,
                                                   const Json& j);

// Castles deduplicate tower shapes into a "shapes" array; a shape that
// is exactly a g-interval times a core in H is stored factored as
// {"product":{"g_lo","g_hi","core"}} over a shared "cores" array
// instead of an element list, which keeps castle files proportional to
// the core size rather than the footprint.
Json castle_to_json(const OdometerSpace& space, const GroupContext& ctx,
                    const Castle& castle);
Castle castle_from_json(const OdometerSpace& space, const GroupContext& ctx,
                        const Json& j);

Json to_json(const GInterval& iv);
GInterval ginterval_from_json(const Json& j);

// Report emitters (no parsers; reports are outputs, not inputs).
Json to_json(const GroupContext& ctx, const CastleParameters& params);
Json to_json(const SelectionReport& sel);
Json to_json(const RecursionResult& rec);
Json trace_to_json(const std::vector<StageRecord>& trace);
Json to_json(const CastleReport& rep);
Json to_json(const OdometerSpace& space, const GroupContext& ctx,
             const AssembledCastle& assembled);
Json to_json(const DensityEstimate& est);

const char* stage_case_name(StageCase c);

// 64-bit FNV-1a, 16 lowercase hex digits. Reports stamp configs with it.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace folner
