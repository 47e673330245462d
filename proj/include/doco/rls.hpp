#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <type_traits>
#include <vector>

#include "doco/discount.hpp"
#include "doco/error.hpp"
#include "doco/geometry.hpp"

namespace doco {

/// Discounted recursive least squares.
///
///   P_t   = gamma P_{t-1} + A_t' A_t          (A_t = I for the tracking loss)
///   Phi_t = gamma Phi_{t-1} + A_t' y_t
///   theta_{t+1} = P_t^{-1} Phi_t = argmin sum_i gamma^{i-1} f_{t+1-i}
///
/// with P_0 = 0 and Phi_0 = 0. No projection is applied.
template <typename Scalar>
struct RlsState {
  Vector<Scalar> theta;
  SpdMatrix<Scalar> P;
  Vector<Scalar> Phi;
  Matrix<Scalar> P_inv;  // valid once t >= 2
  Scalar gamma = 1;
  std::int64_t t = 1;
  Scalar gamma_pow_t = 1;
};

template <typename Scalar>
RlsState<Scalar> rls_init(std::type_identity_t<Vector<Scalar>> theta1, Scalar gamma) {
  require_discount(gamma);
  detail::require(theta1.size() >= 1 && theta1.allFinite(), "rls_init: invalid initial point");
  const Eigen::Index n = theta1.size();
  RlsState<Scalar> s;
  s.P = SpdMatrix<Scalar>(Matrix<Scalar>::Zero(n, n));
  s.Phi = Vector<Scalar>::Zero(n);
  s.theta = std::move(theta1);
  s.gamma = gamma;
  s.gamma_pow_t = gamma;
  return s;
}

/// Weight on theta_t in the convex-combination form, (gamma - gamma^t)/(1 - gamma^t);
/// (t-1)/t when gamma = 1.
template <typename Scalar>
Scalar rls_memory_weight(Scalar gamma, std::int64_t t, Scalar gamma_pow_t) {
  if (gamma == Scalar(1)) return static_cast<Scalar>(t - 1) / static_cast<Scalar>(t);
  const Scalar gp = effective_power(gamma_pow_t);
  return (gamma - gp) / (Scalar(1) - gp);
}

/// Tracking-loss update
///   theta_{t+1} = (gamma - gamma^t)/(1 - gamma^t) theta_t + (1 - gamma)/(1 - gamma^t) y_t.
template <typename Scalar>
RlsState<Scalar> rls_step_quadratic(const RlsState<Scalar>& state, const std::type_identity_t<Vector<Scalar>>& y,
                                    const FeasibleBall<Scalar>& ball) {
  detail::require_dim(y, ball, "rls_step_quadratic");
  detail::require(ball.contains(y), "rls_step_quadratic: target outside the feasible ball");
  detail::require(state.theta.size() == y.size(), "rls_step_quadratic: dimension mismatch");
  const Eigen::Index n = y.size();
  const Scalar keep = rls_memory_weight(state.gamma, state.t, state.gamma_pow_t);
  const Scalar eta = rls_step_size(state.gamma, state.t, state.gamma_pow_t);

  RlsState<Scalar> next;
  next.gamma = state.gamma;
  next.t = state.t + 1;
  next.gamma_pow_t = advance_power(state.gamma_pow_t, state.gamma);
  next.theta = keep * state.theta + eta * y;
  next.P = SpdMatrix<Scalar>(state.gamma * state.P.matrix() + Matrix<Scalar>::Identity(n, n));
  next.Phi = state.gamma * state.Phi + y;
  next.P_inv = Matrix<Scalar>::Identity(n, n) / next.P.matrix()(0, 0);
  return next;
}

/// General least-squares update with P_t = gamma P_{t-1} + A'A. When
/// m < n and P_{t-1} is already invertible, P_t^{-1} comes from a rank-m
/// Woodbury update; otherwise P_t is refactored.
template <typename Scalar>
RlsState<Scalar> rls_step_general(const RlsState<Scalar>& state, const std::type_identity_t<Matrix<Scalar>>& A,
                                  const std::type_identity_t<Vector<Scalar>>& y, const FeasibleBall<Scalar>& ball) {
  const Eigen::Index n = state.theta.size();
  detail::require(A.cols() == n && A.rows() == y.size(), "rls_step_general: dimension mismatch");
  detail::require(y.norm() <= ball.radius() * (Scalar(1) + Scalar(1e-12)),
                  "rls_step_general: ||y|| exceeds D");
  const Scalar gamma = state.gamma;

  RlsState<Scalar> next;
  next.gamma = gamma;
  next.t = state.t + 1;
  next.gamma_pow_t = advance_power(state.gamma_pow_t, gamma);
  next.P = SpdMatrix<Scalar>(gamma * state.P.matrix() + A.transpose() * A);
  next.Phi = gamma * state.Phi + A.transpose() * y;

  if (A.rows() < n && state.t >= 2) {
    const Matrix<Scalar> B = state.P_inv / gamma;
    const Matrix<Scalar> BAt = B * A.transpose();
    const Matrix<Scalar> S =
        Matrix<Scalar>::Identity(A.rows(), A.rows()) + A * BAt;
    Matrix<Scalar> inv = B - BAt * S.ldlt().solve(BAt.transpose());
    next.P_inv = (inv + inv.transpose()) * Scalar(0.5);
  } else {
    Eigen::LLT<Matrix<Scalar>> llt(next.P.matrix());
    if (llt.info() != Eigen::Success) {
      throw ContractViolation(
          "rls_step_general: accumulated A'A is singular (first-round A must have full column rank)");
    }
    next.P_inv = llt.solve(Matrix<Scalar>::Identity(n, n));
  }
  next.theta = next.P_inv * next.Phi;
  return next;
}

/// max_t || theta_{t+1} - y_t - c_t (theta_t - y_t) ||, c_t the memory weight.
/// thetas holds theta_1..theta_{T+1}, targets y_1..y_T.
template <typename Scalar>
Scalar check_weighted_average_recursion(const std::vector<Vector<Scalar>>& thetas,
                                        const std::vector<Vector<Scalar>>& targets, Scalar gamma) {
  detail::require(thetas.size() == targets.size() + 1,
                  "check_weighted_average_recursion: need one more iterate than targets");
  Scalar worst = 0;
  Scalar gp = gamma;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const std::int64_t t = static_cast<std::int64_t>(i) + 1;
    const Scalar c = rls_memory_weight(gamma, t, gp);
    const Vector<Scalar> r = thetas[i + 1] - targets[i] - c * (thetas[i] - targets[i]);
    worst = std::max(worst, r.norm());
    gp = advance_power(gp, gamma);
  }
  return worst;
}

/// sqrt(u/ell) * u gamma / (u gamma + ell (1 - gamma)).
template <typename Scalar>
Scalar contraction_bound_general(Scalar gamma, Scalar ell, Scalar u) {
  using std::sqrt;
  return sqrt(u / ell) * (u * gamma) / (u * gamma + ell * (Scalar(1) - gamma));
}

/// Discount factors below 1/(delta^{3/2} - delta + 1) make the general bound
/// a strict contraction.
template <typename Scalar>
Scalar contraction_gamma_limit(Scalar delta) {
  using std::pow;
  return Scalar(1) / (pow(delta, Scalar(1.5)) - delta + Scalar(1));
}

struct ContractionReport {
  double max_ratio = 0;
  double bound = 0;
  int rounds_checked = 0;
  bool holds(double tol = 1e-9) const { return max_ratio <= bound + tol; }
};

/// max_t ||theta_{t+1} - theta_t*|| / ||theta_t - theta_t*|| over the rounds
/// where the denominator is at least 1e-12. thetas holds theta_1..theta_{T+1},
/// minimizers theta_1*..theta_T*.
template <typename Scalar>
ContractionReport check_contraction_general(const std::vector<Vector<Scalar>>& thetas,
                                            const std::vector<Vector<Scalar>>& minimizers,
                                            Scalar gamma, Scalar ell, Scalar u) {
  detail::require(thetas.size() == minimizers.size() + 1,
                  "check_contraction_general: need one more iterate than minimizers");
  ContractionReport r;
  r.bound = static_cast<double>(contraction_bound_general(gamma, ell, u));
  for (std::size_t i = 0; i < minimizers.size(); ++i) {
    const Scalar before = (thetas[i] - minimizers[i]).norm();
    if (before < Scalar(1e-12)) continue;
    const Scalar after = (thetas[i + 1] - minimizers[i]).norm();
    r.max_ratio = std::max(r.max_ratio, static_cast<double>(after / before));
    ++r.rounds_checked;
  }
  return r;
}

}  // namespace doco
