#include "folner/density.hpp"

namespace folner {

Rational exact_density(const OdometerSpace& space, const ClopenSet& A) {
  return clopen_measure(space, A);
}

DensityEstimate empirical_density(const OdometerSpace& space,
                                  const GroupContext& ctx, const ClopenSet& A,
                                  const FiniteSubset& F,
                                  const std::vector<Point>& samples) {
  if (F.empty()) throw PreconditionError("empirical density needs a nonempty F");
  if (samples.empty()) throw PreconditionError("empirical density needs sample points");
  DensityEstimate est;
  est.foelner_size = F.size();
  est.samples = (std::int64_t)samples.size();
  bool first = true;
  for (const auto& x : samples) {
    std::int64_t hits = 0;
    for (const auto& s : F)
      if (point_in(space, A, act(space, ctx, s, x))) ++hits;
    Rational avg(hits, F.size());
    if (first || avg < est.lo) est.lo = avg;
    if (first || est.hi < avg) est.hi = avg;
    first = false;
  }
  return est;
}

bool shift_invariance_check(const OdometerSpace& space, const GroupContext& ctx,
                            const ClopenSet& A) {
  if (ctx.kind() != GroupKind::Semidirect)
    throw PreconditionError("shift invariance needs a semidirect context");
  GroupElement g;
  g.h.assign((std::size_t)ctx.rank(), 0);
  g.z = 1;
  ClopenSet gA = clopen_translate(space, ctx, g, A);
  return clopen_measure(space, gA) == clopen_measure(space, A);
}

}  // namespace folner
