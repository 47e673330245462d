#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <type_traits>

#include "doco/discount.hpp"
#include "doco/error.hpp"
#include "doco/geometry.hpp"
#include "doco/losses.hpp"

namespace doco {

enum class NewtonVariant {
  QuasiNewton,  // P_t = gamma P_{t-1} + g g'
  FullNewton,   // P_t = gamma P_{t-1} + H_t
};

/// Which curvature assumption the run relies on. Each fixes the P-rule and an
/// upper bound on eta.
enum class NewtonRegime {
  ExpConcave,            // quasi-Newton, eta <= 1/2 min{1/(4GD), alpha}
  StronglyConvexSmooth,  // full Newton,  eta <= ell/u
  QuadBound,             // full Newton,  eta <= 1
};

template <typename Scalar>
struct NewtonConfig {
  Scalar gamma = 1;
  Scalar eta = 1;
  Scalar epsilon = 1;
  NewtonVariant variant = NewtonVariant::FullNewton;
  NewtonRegime regime = NewtonRegime::QuadBound;
};

/// 1/2 min{1/(4GD), alpha}.
template <typename Scalar>
Scalar exp_concave_rho(const ConvexityProfile<Scalar>& profile, const FeasibleBall<Scalar>& ball) {
  return Scalar(0.5) * std::min(Scalar(1) / (4 * profile.G() * ball.radius()), profile.alpha());
}

/// Largest eta admitted by the regime.
template <typename Scalar>
Scalar max_eta(NewtonRegime regime, const ConvexityProfile<Scalar>& profile,
               const FeasibleBall<Scalar>& ball) {
  switch (regime) {
    case NewtonRegime::ExpConcave: return exp_concave_rho(profile, ball);
    case NewtonRegime::StronglyConvexSmooth: return profile.ell() / profile.u();
    case NewtonRegime::QuadBound: return Scalar(1);
  }
  throw InternalInvariant("max_eta: unknown regime");
}

inline NewtonVariant variant_for(NewtonRegime regime) {
  return regime == NewtonRegime::ExpConcave ? NewtonVariant::QuasiNewton
                                            : NewtonVariant::FullNewton;
}

enum class EpsilonPreset {
  One,                 // 1
  InverseRhoSqDSq,     // 1 / (rho^2 D^2)
  InverseRhoSqDSqN,    // 1 / (rho^2 D^2 N)
};

template <typename Scalar>
Scalar epsilon_preset(EpsilonPreset preset, const ConvexityProfile<Scalar>& profile,
                      const FeasibleBall<Scalar>& ball, int experts = 1) {
  const Scalar rho = exp_concave_rho(profile, ball);
  const Scalar D = ball.radius();
  switch (preset) {
    case EpsilonPreset::One: return Scalar(1);
    case EpsilonPreset::InverseRhoSqDSq: return Scalar(1) / (rho * rho * D * D);
    case EpsilonPreset::InverseRhoSqDSqN:
      detail::require(experts >= 1, "epsilon_preset: expert count must be >= 1");
      return Scalar(1) / (rho * rho * D * D * static_cast<Scalar>(experts));
  }
  throw InternalInvariant("epsilon_preset: unknown preset");
}

/// Throws ContractViolation when the configuration breaks its regime's rules.
template <typename Scalar>
void validate(const NewtonConfig<Scalar>& config, const ConvexityProfile<Scalar>& profile,
              const FeasibleBall<Scalar>& ball) {
  require_discount(config.gamma);
  detail::require(config.eta > Scalar(0), "NewtonConfig: eta must be > 0");
  detail::require(config.epsilon > Scalar(0), "NewtonConfig: epsilon must be > 0");
  detail::require(config.variant == variant_for(config.regime),
                  config.regime == NewtonRegime::ExpConcave
                      ? "NewtonConfig: the exp-concave regime uses quasi-Newton updates"
                      : "NewtonConfig: this regime uses full-Newton updates");
  const Scalar cap = max_eta(config.regime, profile, ball);
  detail::require(config.eta <= cap * (Scalar(1) + Scalar(1e-12)),
                  "NewtonConfig: eta exceeds the regime's admissible maximum");
}

template <typename Scalar>
struct NewtonState {
  Vector<Scalar> theta;
  SpdMatrix<Scalar> P;
  Matrix<Scalar> P_inv;  // maintained by the quasi-Newton path only
  std::int64_t t = 1;
  int jitter_retries = 0;
};

template <typename Scalar>
NewtonState<Scalar> newton_init(const NewtonConfig<Scalar>& config, std::type_identity_t<Vector<Scalar>> theta1,
                                const FeasibleBall<Scalar>& ball) {
  detail::require_dim(theta1, ball, "newton_init");
  detail::require(ball.contains(theta1), "newton_init: initial point outside the feasible ball");
  detail::require(config.epsilon > Scalar(0), "newton_init: epsilon must be > 0");
  const Eigen::Index n = ball.dim();
  NewtonState<Scalar> s;
  s.theta = std::move(theta1);
  s.P = SpdMatrix<Scalar>::identity(n, config.epsilon);
  if (config.variant == NewtonVariant::QuasiNewton) {
    s.P_inv = Matrix<Scalar>::Identity(n, n) / config.epsilon;
  }
  return s;
}

namespace detail {

/// Cholesky of P, retried once with 1e-12 trace(P)/n added to the diagonal.
template <typename Scalar>
Eigen::LLT<Matrix<Scalar>> factor_with_jitter(SpdMatrix<Scalar>& P, int& retries) {
  Eigen::LLT<Matrix<Scalar>> llt(P.matrix());
  if (llt.info() == Eigen::Success) return llt;
  const Eigen::Index n = P.dim();
  const Scalar jitter = Scalar(1e-12) * P.matrix().trace() / static_cast<Scalar>(n);
  if (!(jitter > Scalar(0))) throw SingularMetric("newton_step: P_t is singular");
  P = SpdMatrix<Scalar>(P.matrix() + jitter * Matrix<Scalar>::Identity(n, n));
  ++retries;
  llt.compute(P.matrix());
  if (llt.info() != Eigen::Success) throw SingularMetric("newton_step: P_t is singular");
  return llt;
}

}  // namespace detail

/// One round of the discounted online Newton step:
///
///   P_t        = gamma P_{t-1} + g g'      (quasi)   or  gamma P_{t-1} + H_t  (full)
///   theta_{t+1} = Proj^{P_t}_S(theta_t - (1/eta) P_t^{-1} g)
///
/// The quasi-Newton path keeps P_t^{-1} current with Sherman-Morrison,
/// O(n^2) per round; the full-Newton path refactors P_t.
template <typename Scalar>
NewtonState<Scalar> newton_step(const NewtonState<Scalar>& state, const std::type_identity_t<Vector<Scalar>>& grad,
                                const std::type_identity_t<std::optional<SpdMatrix<Scalar>>>& hess,
                                const NewtonConfig<Scalar>& config,
                                const FeasibleBall<Scalar>& ball) {
  detail::require_dim(grad, ball, "newton_step");
  const Eigen::Index n = ball.dim();
  const Scalar gamma = config.gamma;

  NewtonState<Scalar> next;
  next.t = state.t + 1;
  next.jitter_retries = state.jitter_retries;

  Vector<Scalar> direction;
  if (config.variant == NewtonVariant::QuasiNewton) {
    detail::require(!hess, "newton_step: quasi-Newton takes no Hessian");
    next.P = SpdMatrix<Scalar>(gamma * state.P.matrix() + grad * grad.transpose());
    const Matrix<Scalar> B = state.P_inv / gamma;
    const Vector<Scalar> Bg = B * grad;
    const Scalar denom = Scalar(1) + grad.dot(Bg);
    Matrix<Scalar> inv = B - (Bg * Bg.transpose()) / denom;
    inv = (inv + inv.transpose()) * Scalar(0.5);
    if (!inv.allFinite()) {
      auto llt = detail::factor_with_jitter(next.P, next.jitter_retries);
      inv = llt.solve(Matrix<Scalar>::Identity(n, n));
    }
    next.P_inv = std::move(inv);
    direction = next.P_inv * grad;
  } else {
    detail::require(hess.has_value(), "newton_step: full-Newton requires the Hessian");
    detail::require(hess->dim() == n, "newton_step: Hessian dimension mismatch");
    next.P = SpdMatrix<Scalar>(gamma * state.P.matrix() + hess->matrix());
    auto llt = detail::factor_with_jitter(next.P, next.jitter_retries);
    direction = llt.solve(grad);
  }

  const Vector<Scalar> target = state.theta - direction / config.eta;
  if (!target.allFinite()) throw SingularMetric("newton_step: non-finite Newton direction");
  next.theta = project_metric<Scalar>(target, next.P, ball);
  return next;
}

/// Cap on ||P_t||_2: eps + G^2/(1-gamma) (quasi) or eps + u/(1-gamma) (full).
/// For gamma = 1 the finite-horizon form eps + t G^2 (resp. eps + t u) is used.
template <typename Scalar>
Scalar p_norm_cap(const NewtonConfig<Scalar>& config, const ConvexityProfile<Scalar>& profile,
                  std::int64_t t) {
  const Scalar per_round = config.variant == NewtonVariant::QuasiNewton
                               ? profile.G() * profile.G()
                               : profile.u();
  if (config.gamma == Scalar(1)) return config.epsilon + static_cast<Scalar>(t) * per_round;
  return config.epsilon + per_round / (Scalar(1) - config.gamma);
}

}  // namespace doco
