#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <type_traits>
#include <variant>

#include "doco/discount.hpp"
#include "doco/error.hpp"
#include "doco/geometry.hpp"

namespace doco {

enum class GdRule {
  SmoothStronglyConvex,  // eta_t = (1-g) / (ell (g - g^t) + u (1-g))
  StronglyConvex,        // eta_t = (1-g) / (ell (1 - g^t))
};

template <typename Scalar>
struct GdConfig {
  GdRule rule = GdRule::StronglyConvex;
  Scalar gamma = 1;
  Scalar ell = 1;
  Scalar u = 1;  // only read by SmoothStronglyConvex

  void validate() const {
    require_discount(gamma);
    detail::require(ell > Scalar(0), "GdConfig: ell must be > 0");
    if (rule == GdRule::SmoothStronglyConvex) {
      detail::require(u >= ell, "GdConfig: smooth rule needs ell <= u");
    }
  }
};

template <typename Scalar>
struct GdState {
  Vector<Scalar> theta;
  std::int64_t t = 1;
  Scalar gamma_pow_t = 1;  // gamma^t for the current round t
};

template <typename Scalar>
GdState<Scalar> gd_init(const GdConfig<Scalar>& config, std::type_identity_t<Vector<Scalar>> theta1,
                        const FeasibleBall<Scalar>& ball) {
  config.validate();
  detail::require_dim(theta1, ball, "gd_init");
  detail::require(ball.contains(theta1), "gd_init: initial point outside the feasible ball");
  return {std::move(theta1), 1, config.gamma};
}

/// Step size for round t, given gamma^t. For gamma = 1 the limits are
/// 1/(ell (t-1) + u) and 1/(ell t).
template <typename Scalar>
Scalar stepsize(const GdConfig<Scalar>& config, std::int64_t t, Scalar gamma_pow_t) {
  detail::require(t >= 1, "stepsize: t must be >= 1");
  const Scalar g = config.gamma;
  const Scalar ell = config.ell;
  if (g == Scalar(1)) {
    const Scalar tt = static_cast<Scalar>(t);
    return config.rule == GdRule::SmoothStronglyConvex ? Scalar(1) / (ell * (tt - 1) + config.u)
                                                       : Scalar(1) / (ell * tt);
  }
  const Scalar gp = effective_power(gamma_pow_t);
  if (config.rule == GdRule::SmoothStronglyConvex) {
    return (Scalar(1) - g) / (ell * (g - gp) + config.u * (Scalar(1) - g));
  }
  return (Scalar(1) - g) / (ell * (Scalar(1) - gp));
}

template <typename Scalar>
Scalar stepsize(const GdConfig<Scalar>& config, std::int64_t t) {
  return stepsize(config, t, discounted_power(config.gamma, t));
}

/// theta_{t+1} = Proj_S(theta_t - eta_t grad).
template <typename Scalar>
GdState<Scalar> gd_step(const GdState<Scalar>& state, const std::type_identity_t<Vector<Scalar>>& grad,
                        const GdConfig<Scalar>& config, const FeasibleBall<Scalar>& ball) {
  detail::require_dim(grad, ball, "gd_step");
  const Scalar eta = stepsize(config, state.t, state.gamma_pow_t);
  GdState<Scalar> next;
  next.theta = project_euclidean<Scalar>(state.theta - eta * grad, ball);
  next.t = state.t + 1;
  next.gamma_pow_t = advance_power(state.gamma_pow_t, config.gamma);
  return next;
}

// Discount schedules. Every "log T" here is the natural logarithm.

struct BetaPower {
  double beta;
};
struct PathTuned {
  double V;
};
struct FixedGamma {
  double gamma;
};
using Schedule = std::variant<BetaPower, PathTuned, FixedGamma>;

/// gamma = 1 - T^{-beta}, or gamma = 1 - 1/2 sqrt(max{V, ln^2 T / T} / (2 D T)),
/// or a fixed value.
inline double make_gamma(const Schedule& schedule, std::int64_t T, double D) {
  detail::require(T >= 2, "make_gamma: horizon T must be >= 2");
  detail::require(D >= 1.0, "make_gamma: D must be >= 1");
  const double TT = static_cast<double>(T);
  if (const auto* b = std::get_if<BetaPower>(&schedule)) {
    detail::require(b->beta > 0.0 && b->beta < 1.0, "make_gamma: beta must lie in (0, 1)");
    return 1.0 - std::pow(TT, -b->beta);
  }
  if (const auto* p = std::get_if<PathTuned>(&schedule)) {
    detail::require(p->V >= 0.0 && p->V <= 2.0 * D * TT,
                    "make_gamma: path budget V must lie in [0, 2 D T]");
    const double lnT = std::log(TT);
    const double floor = lnT * lnT / TT;
    return 1.0 - 0.5 * std::sqrt(std::max(p->V, floor) / (2.0 * D * TT));
  }
  const double g = std::get<FixedGamma>(schedule).gamma;
  require_discount(g);
  return g;
}

inline std::string describe(const Schedule& schedule) {
  if (const auto* b = std::get_if<BetaPower>(&schedule)) {
    return "beta_power(" + std::to_string(b->beta) + ")";
  }
  if (const auto* p = std::get_if<PathTuned>(&schedule)) {
    return "path_tuned(" + std::to_string(p->V) + ")";
  }
  return "fixed(" + std::to_string(std::get<FixedGamma>(schedule).gamma) + ")";
}

}  // namespace doco
