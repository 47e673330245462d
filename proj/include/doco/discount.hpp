#pragma once

#include <algorithm>
#include <cstdint>

#include "doco/error.hpp"

namespace doco {

/// Below this, gamma^t is treated as exactly zero in step-size formulas.
inline constexpr double kDiscountTailCutover = 1e-15;
/// gamma^t is never allowed to underflow past this.
inline constexpr double kDiscountPowerFloor = 1e-300;

template <typename Scalar>
void require_discount(Scalar gamma) {
  detail::require(gamma > Scalar(0) && gamma <= Scalar(1), "discount factor must lie in (0, 1]");
}

/// gamma^t by iterated multiplication, floored. Loops stop early once the
/// value is below the tail cutover, since it no longer matters.
template <typename Scalar>
Scalar discounted_power(Scalar gamma, std::int64_t t) {
  Scalar p = 1;
  for (std::int64_t i = 0; i < t; ++i) {
    p = std::max(p * gamma, Scalar(kDiscountPowerFloor));
    if (p < Scalar(kDiscountTailCutover)) break;
  }
  return p;
}

/// One multiplication step of the cached gamma^t.
template <typename Scalar>
Scalar advance_power(Scalar gamma_pow, Scalar gamma) {
  return std::max(gamma_pow * gamma, Scalar(kDiscountPowerFloor));
}

/// gamma^t with the tail cutover applied.
template <typename Scalar>
Scalar effective_power(Scalar gamma_pow) {
  return gamma_pow < Scalar(kDiscountTailCutover) ? Scalar(0) : gamma_pow;
}

/// Discounted recursive least-squares step size (1 - gamma) / (1 - gamma^t),
/// and its gamma -> 1 limit 1/t.
template <typename Scalar>
Scalar rls_step_size(Scalar gamma, std::int64_t t, Scalar gamma_pow_t) {
  detail::require(t >= 1, "rls_step_size: t must be >= 1");
  if (gamma == Scalar(1)) return Scalar(1) / static_cast<Scalar>(t);
  return (Scalar(1) - gamma) / (Scalar(1) - effective_power(gamma_pow_t));
}

}  // namespace doco
