#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "doco/error.hpp"
#include "doco/geometry.hpp"
#include "doco/random.hpp"

namespace doco {

/// Declared curvature constants of a loss family on the feasible ball.
///
///   alpha  exp-concavity: exp(-alpha f) concave on S
///   ell    strong convexity
///   u      smoothness (u-Lipschitz gradient)
///   G      bound on ||grad f|| over S
///
/// When alpha is not given and ell > 0, alpha = ell / G^2, which is always
/// admissible for an ell-strongly-convex function with gradients bounded by G.
template <typename Scalar>
class ConvexityProfile {
 public:
  ConvexityProfile(Scalar ell, Scalar u, Scalar G, std::optional<Scalar> alpha = std::nullopt)
      : ell_(ell), u_(u), G_(G) {
    detail::require(ell >= Scalar(0), "ConvexityProfile: ell must be >= 0");
    detail::require(u > Scalar(0), "ConvexityProfile: u must be > 0");
    detail::require(G > Scalar(0), "ConvexityProfile: G must be > 0");
    detail::require(ell <= u, "ConvexityProfile: ell must not exceed u");
    if (alpha) {
      detail::require(*alpha >= Scalar(0), "ConvexityProfile: alpha must be >= 0");
      alpha_ = *alpha;
    } else {
      alpha_ = ell > Scalar(0) ? ell / (G * G) : Scalar(0);
    }
  }

  Scalar alpha() const { return alpha_; }
  Scalar ell() const { return ell_; }
  Scalar u() const { return u_; }
  Scalar G() const { return G_; }
  Scalar condition_number() const { return u_ / ell_; }

 private:
  Scalar alpha_;
  Scalar ell_;
  Scalar u_;
  Scalar G_;
};

enum class LossKind { TrackingQuadratic, GeneralLeastSquares, ScalarAdversarial };

inline const char* to_string(LossKind k) {
  switch (k) {
    case LossKind::TrackingQuadratic: return "tracking_quadratic";
    case LossKind::GeneralLeastSquares: return "general_least_squares";
    case LossKind::ScalarAdversarial: return "scalar_adversarial";
  }
  return "unknown";
}

/// f(x) = 1/2 x'Hx - b'x + c. Every shipped family is a quadratic.
template <typename Scalar>
struct QuadraticForm {
  Matrix<Scalar> H;
  Vector<Scalar> b;
  Scalar c;
};

/// A per-round objective on the feasible ball.
///
///   TrackingQuadratic    f(x) = 1/2 ||x - y||^2,      y in S
///   GeneralLeastSquares  f(x) = 1/2 ||y - A x||^2,    ell I <= A'A <= u I, ||y|| <= D
///   ScalarAdversarial    f(x) = (x - eps)^2,          n = 1
///
/// Instances are built through the named factories, which validate the data
/// and fill in the convexity profile (including G) for the given ball.
template <typename Scalar>
class LossFunction {
 public:
  static LossFunction tracking_quadratic(Vector<Scalar> y, const FeasibleBall<Scalar>& ball) {
    detail::require_dim(y, ball, "tracking_quadratic");
    detail::require(ball.contains(y), "tracking_quadratic: target must lie in the ball");
    const Scalar D = ball.radius();
    LossFunction f(LossKind::TrackingQuadratic, ConvexityProfile<Scalar>(1, 1, 2 * D));
    f.y_ = std::move(y);
    return f;
  }

  /// ell and u are the declared curvature bounds of the stream; A'A must
  /// respect them (checked to 1e-9 relative).
  static LossFunction general_least_squares(Matrix<Scalar> A, Vector<Scalar> y,
                                            const FeasibleBall<Scalar>& ball, Scalar ell,
                                            Scalar u) {
    detail::require(A.cols() == ball.dim(), "general_least_squares: A has wrong column count");
    detail::require(A.rows() == y.size(), "general_least_squares: A and y disagree on m");
    detail::require(A.allFinite() && y.allFinite(), "general_least_squares: non-finite data");
    detail::require(ell > Scalar(0) && ell <= u,
                    "general_least_squares: need 0 < ell <= u");
    detail::require(y.norm() <= ball.radius() * (Scalar(1) + Scalar(1e-12)),
                    "general_least_squares: ||y|| must not exceed D");
    const SpdMatrix<Scalar> AtA(A.transpose() * A);
    const auto ev = Eigen::SelfAdjointEigenSolver<Matrix<Scalar>>(AtA.matrix(),
                                                                 Eigen::EigenvaluesOnly)
                        .eigenvalues();
    const Scalar slack = Scalar(1e-9) * u;
    detail::require(ev.minCoeff() >= ell - slack && ev.maxCoeff() <= u + slack,
                    "general_least_squares: A'A violates ell I <= A'A <= u I");
    LossFunction f(LossKind::GeneralLeastSquares,
                   ConvexityProfile<Scalar>(ell, u, gls_gradient_bound(ell, u, ball.radius())));
    f.A_ = std::move(A);
    f.y_ = std::move(y);
    return f;
  }

  /// sigma_max bounds |eps| / 2 over the stream; it enters the gradient bound.
  static LossFunction scalar_adversarial(Scalar eps, Scalar sigma_max,
                                         const FeasibleBall<Scalar>& ball) {
    detail::require(ball.dim() == 1, "scalar_adversarial: ball must be one-dimensional");
    detail::require(std::isfinite(static_cast<double>(eps)), "scalar_adversarial: non-finite eps");
    detail::require(std::abs(eps) <= 2 * sigma_max * (Scalar(1) + Scalar(1e-12)),
                    "scalar_adversarial: |eps| exceeds 2 sigma_max");
    const Scalar G = 2 * (ball.radius() + 2 * sigma_max);
    LossFunction f(LossKind::ScalarAdversarial, ConvexityProfile<Scalar>(2, 2, G));
    f.eps_ = eps;
    return f;
  }

  /// sup over S of ||A'(Ax - y)||. sqrt(u)(sqrt(u)+1)D bounds it on all of S;
  /// sqrt(u)(u/ell+1)D bounds it along segments between RLS iterates and
  /// per-round minimizers. The larger of the two covers both uses.
  static Scalar gls_gradient_bound(Scalar ell, Scalar u, Scalar D) {
    using std::sqrt;
    return sqrt(u) * std::max(sqrt(u) + Scalar(1), u / ell + Scalar(1)) * D;
  }

  LossKind kind() const { return kind_; }
  const ConvexityProfile<Scalar>& profile() const { return profile_; }
  Eigen::Index dim() const {
    switch (kind_) {
      case LossKind::TrackingQuadratic: return y_.size();
      case LossKind::GeneralLeastSquares: return A_.cols();
      case LossKind::ScalarAdversarial: return 1;
    }
    return 0;
  }

  const Vector<Scalar>& target() const { return y_; }
  const Matrix<Scalar>& design() const { return A_; }
  Scalar epsilon() const { return eps_; }

  QuadraticForm<Scalar> quadratic_form() const {
    switch (kind_) {
      case LossKind::TrackingQuadratic:
        return {Matrix<Scalar>::Identity(y_.size(), y_.size()), y_, Scalar(0.5) * y_.squaredNorm()};
      case LossKind::GeneralLeastSquares:
        return {A_.transpose() * A_, A_.transpose() * y_, Scalar(0.5) * y_.squaredNorm()};
      case LossKind::ScalarAdversarial: {
        Matrix<Scalar> H(1, 1);
        H(0, 0) = 2;
        Vector<Scalar> b(1);
        b[0] = 2 * eps_;
        return {H, b, eps_ * eps_};
      }
    }
    throw InternalInvariant("quadratic_form: unknown loss kind");
  }

 private:
  LossFunction(LossKind kind, ConvexityProfile<Scalar> profile)
      : kind_(kind), profile_(std::move(profile)) {}

  LossKind kind_;
  ConvexityProfile<Scalar> profile_;
  Vector<Scalar> y_;
  Matrix<Scalar> A_;
  Scalar eps_ = 0;
};

namespace detail {

template <typename Scalar>
void require_loss_dim(const LossFunction<Scalar>& f, const Vector<Scalar>& x, const char* who) {
  if (x.size() != f.dim()) {
    throw ContractViolation(std::string(who) + ": dimension mismatch (got " +
                            std::to_string(x.size()) + ", loss has " +
                            std::to_string(f.dim()) + ")");
  }
}

}  // namespace detail

template <typename Scalar>
Scalar value(const LossFunction<Scalar>& f, const Vector<Scalar>& x) {
  detail::require_loss_dim(f, x, "value");
  switch (f.kind()) {
    case LossKind::TrackingQuadratic: return Scalar(0.5) * (x - f.target()).squaredNorm();
    case LossKind::GeneralLeastSquares:
      return Scalar(0.5) * (f.target() - f.design() * x).squaredNorm();
    case LossKind::ScalarAdversarial: {
      const Scalar d = x[0] - f.epsilon();
      return d * d;
    }
  }
  throw InternalInvariant("value: unknown loss kind");
}

template <typename Scalar>
Vector<Scalar> gradient(const LossFunction<Scalar>& f, const Vector<Scalar>& x) {
  detail::require_loss_dim(f, x, "gradient");
  switch (f.kind()) {
    case LossKind::TrackingQuadratic: return x - f.target();
    case LossKind::GeneralLeastSquares:
      return f.design().transpose() * (f.design() * x - f.target());
    case LossKind::ScalarAdversarial: {
      Vector<Scalar> g(1);
      g[0] = 2 * (x[0] - f.epsilon());
      return g;
    }
  }
  throw InternalInvariant("gradient: unknown loss kind");
}

template <typename Scalar>
SpdMatrix<Scalar> hessian(const LossFunction<Scalar>& f, const Vector<Scalar>& x) {
  detail::require_loss_dim(f, x, "hessian");
  switch (f.kind()) {
    case LossKind::TrackingQuadratic: return SpdMatrix<Scalar>::identity(f.dim());
    case LossKind::GeneralLeastSquares:
      return SpdMatrix<Scalar>(f.design().transpose() * f.design());
    case LossKind::ScalarAdversarial: return SpdMatrix<Scalar>::identity(1, Scalar(2));
  }
  throw InternalInvariant("hessian: unknown loss kind");
}

/// Largest observed violation of each function-class inequality over random
/// pairs in S. A positive entry means the inequality failed by that much;
/// std::nullopt means the profile does not declare the constant involved.
struct ClassCheckReport {
  static constexpr double kTolerance = 1e-9;

  std::optional<double> exp_concave_first_order;  // f(y) >= f(x) + g'(y-x) + rho/2 (g'(x-y))^2
  std::optional<double> strongly_convex;          // ... + ell/2 ||x-y||^2
  std::optional<double> quadratic_bound;          // ... + 1/2 ||x-y||^2_{H(x)}
  std::optional<double> smooth;                   // f(y) <= f(x) + g'(y-x) + u/2 ||x-y||^2
  std::optional<double> exp_concave_midpoint;     // exp(-alpha f) midpoint concave
  double rho = 0;

  static bool ok(const std::optional<double>& v) { return !v || *v <= kTolerance; }

  bool certified() const {
    return ok(exp_concave_first_order) && ok(strongly_convex) && ok(quadratic_bound) &&
           ok(smooth) && ok(exp_concave_midpoint);
  }
};

/// Samples `samples` pairs uniformly from S and evaluates every inequality the
/// profile declares, with rho = 1/2 min{1/(4GD), alpha} for the first-order
/// exp-concavity bound.
template <typename Scalar>
ClassCheckReport check_class_inequalities(const LossFunction<Scalar>& f,
                                          const ConvexityProfile<Scalar>& profile,
                                          const FeasibleBall<Scalar>& ball, int samples,
                                          std::uint64_t seed) {
  detail::require(samples >= 1, "check_class_inequalities: samples must be >= 1");
  detail::require(f.dim() == ball.dim(), "check_class_inequalities: dimension mismatch");
  const double D = static_cast<double>(ball.radius());
  const double alpha = static_cast<double>(profile.alpha());
  const double ell = static_cast<double>(profile.ell());
  const double u = static_cast<double>(profile.u());
  const double G = static_cast<double>(profile.G());

  ClassCheckReport r;
  r.rho = 0.5 * std::min(1.0 / (4.0 * G * D), alpha);
  const bool has_alpha = alpha > 0;
  const bool has_ell = ell > 0;
  if (has_alpha) {
    r.exp_concave_first_order = -std::numeric_limits<double>::infinity();
    r.exp_concave_midpoint = -std::numeric_limits<double>::infinity();
  }
  if (has_ell) r.strongly_convex = -std::numeric_limits<double>::infinity();
  r.quadratic_bound = -std::numeric_limits<double>::infinity();
  r.smooth = -std::numeric_limits<double>::infinity();

  auto bump = [](std::optional<double>& slot, double v) {
    if (slot) slot = std::max(*slot, v);
  };

  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Vector<Scalar> x = rng.in_ball(ball.dim(), D).template cast<Scalar>();
    const Vector<Scalar> y = rng.in_ball(ball.dim(), D).template cast<Scalar>();
    const double fx = static_cast<double>(value(f, x));
    const double fy = static_cast<double>(value(f, y));
    const Vector<Scalar> g = gradient(f, x);
    const Vector<Scalar> d = y - x;
    const double lin = fx + static_cast<double>(g.dot(d));
    const double gd = static_cast<double>(g.dot(d));
    const double dd = static_cast<double>(d.squaredNorm());
    const double dHd = static_cast<double>(d.dot(hessian(f, x).matrix() * d));

    bump(r.exp_concave_first_order, lin + 0.5 * r.rho * gd * gd - fy);
    bump(r.strongly_convex, lin + 0.5 * ell * dd - fy);
    bump(r.quadratic_bound, lin + 0.5 * dHd - fy);
    bump(r.smooth, fy - lin - 0.5 * u * dd);
    if (has_alpha) {
      const Vector<Scalar> mid = (x + y) * Scalar(0.5);
      const double fm = static_cast<double>(value(f, mid));
      bump(r.exp_concave_midpoint,
           0.5 * std::exp(-alpha * fx) + 0.5 * std::exp(-alpha * fy) - std::exp(-alpha * fm));
    }
  }
  return r;
}

}  // namespace doco
