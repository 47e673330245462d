#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

#include "doco/error.hpp"

namespace doco {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

/// Dense symmetric matrix used as a metric (P_t, Hessians, A'A).
///
/// The stored matrix is symmetrized on construction, so entries (i, j) and
/// (j, i) are bit-identical. Positive definiteness is not checked here; the
/// operations that need it (projection, solves) factor and report failure.
template <typename Scalar>
class SpdMatrix {
 public:
  using MatrixType = Matrix<Scalar>;

  SpdMatrix() = default;

  template <typename Derived>
  explicit SpdMatrix(const Eigen::MatrixBase<Derived>& m) {
    detail::require(m.rows() == m.cols(), "SpdMatrix: matrix must be square");
    detail::require(m.allFinite(), "SpdMatrix: non-finite entries");
    m_ = (m + m.transpose()) * Scalar(0.5);
  }

  static SpdMatrix identity(Eigen::Index n, Scalar scale = Scalar(1)) {
    return SpdMatrix(MatrixType::Identity(n, n) * scale);
  }

  const MatrixType& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

  Scalar max_eigenvalue() const {
    return Eigen::SelfAdjointEigenSolver<MatrixType>(m_, Eigen::EigenvaluesOnly)
        .eigenvalues()
        .maxCoeff();
  }

  Scalar min_eigenvalue() const {
    return Eigen::SelfAdjointEigenSolver<MatrixType>(m_, Eigen::EigenvaluesOnly)
        .eigenvalues()
        .minCoeff();
  }

  /// Spectral norm; equals the largest eigenvalue for PSD matrices.
  Scalar spectral_norm() const {
    const auto ev =
        Eigen::SelfAdjointEigenSolver<MatrixType>(m_, Eigen::EigenvaluesOnly).eigenvalues();
    return ev.cwiseAbs().maxCoeff();
  }

 private:
  MatrixType m_;
};

/// The feasible set S = { x : ||x|| <= D } in R^n, with D >= 1.
template <typename Scalar>
class FeasibleBall {
 public:
  FeasibleBall(Scalar radius, Eigen::Index dim) : radius_(radius), dim_(dim) {
    detail::require(std::isfinite(static_cast<double>(radius)) && radius >= Scalar(1),
                    "FeasibleBall: radius must be finite and >= 1");
    detail::require(dim >= 1, "FeasibleBall: dimension must be >= 1");
  }

  Scalar radius() const { return radius_; }
  Eigen::Index dim() const { return dim_; }

  template <typename Derived>
  bool contains(const Eigen::MatrixBase<Derived>& x, Scalar rel_tol = Scalar(1e-12)) const {
    return x.size() == dim_ && x.norm() <= radius_ * (Scalar(1) + rel_tol);
  }

 private:
  Scalar radius_;
  Eigen::Index dim_;
};

namespace detail {

template <typename Scalar>
void require_dim(const Vector<Scalar>& y, const FeasibleBall<Scalar>& ball, const char* who) {
  if (y.size() != ball.dim()) {
    throw ContractViolation(std::string(who) + ": dimension mismatch (got " +
                            std::to_string(y.size()) + ", ball has " +
                            std::to_string(ball.dim()) + ")");
  }
  if (!y.allFinite()) throw ContractViolation(std::string(who) + ": non-finite input");
}

}  // namespace detail

/// Euclidean projection onto the ball: y itself when feasible, D*y/||y|| otherwise.
template <typename Scalar>
Vector<Scalar> project_euclidean(const Vector<Scalar>& y, const FeasibleBall<Scalar>& ball) {
  detail::require_dim(y, ball, "project_euclidean");
  const Scalar norm = y.norm();
  if (norm <= ball.radius()) return y;
  return y * (ball.radius() / norm);
}

/// Bisection controls for the metric projection.
struct MetricProjectionOptions {
  double tolerance = 1e-10;  // relative, on ||z(lambda)|| - D
  int max_iterations = 200;
};

/// argmin_{||z|| <= D} (z - y)' P (z - y).
///
/// Interior points are returned unchanged. Otherwise the minimizer lies on
/// the sphere and satisfies z(lambda) = (P + lambda I)^{-1} P y for the unique
/// lambda >= 0 with ||z(lambda)|| = D. ||z(lambda)|| decreases monotonically
/// in lambda, so lambda is bracketed by doubling and then bisected. With the
/// eigendecomposition P = Q diag(p) Q', z(lambda) = Q diag(p / (p + lambda)) Q' y,
/// making each bisection step O(n).
///
/// The returned point is always the feasible end of the final bracket.
template <typename Scalar>
Vector<Scalar> project_metric(const Vector<Scalar>& y, const SpdMatrix<Scalar>& P,
                              const FeasibleBall<Scalar>& ball,
                              const MetricProjectionOptions& opts = {}) {
  detail::require_dim(y, ball, "project_metric");
  if (P.dim() != ball.dim()) throw ContractViolation("project_metric: metric dimension mismatch");

  Eigen::LLT<Matrix<Scalar>> llt(P.matrix());
  if (llt.info() != Eigen::Success) {
    throw SingularMetric("project_metric: metric is not positive definite");
  }
  const Scalar radius = ball.radius();
  if (y.norm() <= radius) return y;

  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(P.matrix());
  const Vector<Scalar>& p = eig.eigenvalues();
  if (!(p.minCoeff() > Scalar(0))) {
    throw SingularMetric("project_metric: metric has a non-positive eigenvalue");
  }
  const Vector<Scalar> c = eig.eigenvectors().transpose() * y;

  auto shrunk = [&](Scalar lambda) -> Vector<Scalar> {
    return (p.array() / (p.array() + lambda) * c.array()).matrix();
  };

  Scalar lo = 0;
  Scalar hi = p.maxCoeff();
  Vector<Scalar> w_hi = shrunk(hi);
  int doublings = 0;
  while (w_hi.norm() >= radius) {
    lo = hi;
    hi *= Scalar(2);
    w_hi = shrunk(hi);
    if (++doublings > 2000 || !std::isfinite(static_cast<double>(hi))) {
      throw InternalInvariant("project_metric: failed to bracket the multiplier");
    }
  }

  const Scalar tol = static_cast<Scalar>(opts.tolerance) * radius;
  for (int it = 0; it < opts.max_iterations && radius - w_hi.norm() > tol; ++it) {
    const Scalar mid = lo + (hi - lo) / Scalar(2);
    if (mid <= lo || mid >= hi) break;
    const Vector<Scalar> w_mid = shrunk(mid);
    if (w_mid.norm() > radius) {
      lo = mid;
    } else {
      hi = mid;
      w_hi = w_mid;
    }
  }
  return eig.eigenvectors() * w_hi;
}

/// Squared P-norm (z - y)' P (z - y).
template <typename Scalar>
Scalar metric_distance_sq(const Vector<Scalar>& z, const Vector<Scalar>& y,
                          const SpdMatrix<Scalar>& P) {
  const Vector<Scalar> d = z - y;
  return d.dot(P.matrix() * d);
}

}  // namespace doco
