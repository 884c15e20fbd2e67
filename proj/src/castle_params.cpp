#include <algorithm>
#include <vector>

#include "folner/castle.hpp"
#include "folner/errors.hpp"

namespace folner {

namespace {

// Union of alpha^i(K) over |i| <= radius.
FiniteSubset alpha_spread(const GroupContext& ctx, const FiniteSubset& k,
                          Coord radius) {
  if (ctx.alpha_is_identity()) return k;
  std::vector<GroupElement> elems;
  elems.reserve((std::size_t)(2 * radius + 1) * (std::size_t)k.size());
  for (Coord i = -radius; i <= radius; ++i) {
    FiniteSubset image = apply_alpha_power(ctx, i, k);
    elems.insert(elems.end(), image.begin(), image.end());
  }
  return FiniteSubset(std::move(elems));
}

}  // namespace

CastleParameters setup_parameters(const GroupContext& ctx,
                                  const FiniteSubset& k, const Rational& delta,
                                  const Rational& epsilon) {
  if (ctx.kind() != GroupKind::Semidirect) {
    throw PreconditionError("setup_parameters needs a semidirect context");
  }
  if (k.empty()) throw PreconditionError("window K is empty");
  for (const GroupElement& e : k) {
    if (e.z != 0) throw PreconditionError("window K must lie in H");
  }
  if (!(Rational(0, 1) < delta) || !(delta < Rational(1, 12))) {
    throw PreconditionError("delta must lie in (0, 1/12)");
  }
  if (!(Rational(0, 1) < epsilon) || !(epsilon < Rational(1, 3))) {
    throw PreconditionError("epsilon must lie in (0, 1/3)");
  }

  CastleParameters p;
  p.k = k;
  p.delta = delta;
  p.epsilon = epsilon;

  // Least r with 2 <= delta * floor(delta * r): floor(delta r) must
  // reach ceil(2/delta), so r = ceil(ceil(2/delta) / delta).
  Rational inv_delta(delta.den(), delta.num());
  Coord c_min = inv_delta.ceil_times(2);
  p.r = inv_delta.ceil_times(c_min);
  p.dr = delta.floor_times(p.r);
  if (!delta.le_times(2, p.dr)) {
    throw ContractViolation("radius r misses its defining inequality");
  }
  p.plus = p.r + (delta * Rational(3, 1)).ceil_times(p.r);

  Rational spread(1, 4 * p.r + 1);
  p.beta = std::min(epsilon * spread, delta);

  p.k_prime = alpha_spread(ctx, k, 2 * p.r);
  p.k_second = alpha_spread(ctx, k, 6 * p.r);

  p.eta = std::min(p.beta * p.beta * Rational(1, 4 * p.k_prime.size()),
                   epsilon * Rational(1, 4));
  p.tile_target = p.beta * p.beta * p.beta *
                  Rational(1, 8 * p.k_prime.size() * (8 * p.r + 1));
  return p;
}

}  // namespace folner
