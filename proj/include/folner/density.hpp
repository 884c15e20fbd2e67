#pragma once

#include <vector>

#include "folner/odometer.hpp"

namespace folner {

// The odometer translation action is uniquely ergodic, so the exact
// measure of a clopen set is both its upper and lower density.
Rational exact_density(const OdometerSpace& space, const ClopenSet& A);

struct DensityEstimate {
  Rational lo;
  Rational hi;
  std::int64_t foelner_size = 0;
  std::int64_t samples = 0;
};

// Min and max over the sample points of the Folner average
// (1/|F|) sum_{s in F} 1_A(s x); the max estimates the upper density.
DensityEstimate empirical_density(const OdometerSpace& space,
                                  const GroupContext& ctx, const ClopenSet& A,
                                  const FiniteSubset& F,
                                  const std::vector<Point>& samples);

// Exact equality of density(gA) and density(A) in a semidirect context.
bool shift_invariance_check(const OdometerSpace& space, const GroupContext& ctx,
                            const ClopenSet& A);

}  // namespace folner
