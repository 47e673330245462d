#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "doco/error.hpp"
#include "doco/geometry.hpp"
#include "doco/losses.hpp"

namespace doco {

enum class ComparatorKind { FixedOptimum, PerRoundMinimizer, Explicit };

inline const char* to_string(ComparatorKind k) {
  switch (k) {
    case ComparatorKind::FixedOptimum: return "fixed_optimum";
    case ComparatorKind::PerRoundMinimizer: return "per_round_minimizer";
    case ComparatorKind::Explicit: return "explicit";
  }
  return "unknown";
}

template <typename Scalar>
Scalar path_length(const std::vector<Vector<Scalar>>& points) {
  Scalar v = 0;
  for (std::size_t t = 1; t < points.size(); ++t) v += (points[t] - points[t - 1]).norm();
  return v;
}

template <typename Scalar>
struct ComparatorTrace {
  ComparatorKind kind = ComparatorKind::Explicit;
  std::vector<Vector<Scalar>> points;  // z_1..z_T
  Scalar path_length = 0;
};

/// argmin_{||x|| <= D} 1/2 x'Hx - b'x for positive definite H. The
/// unconstrained solution is returned when feasible; otherwise the KKT point
/// (H + lambda I)^{-1} b on the sphere, which is the H-metric projection of
/// H^{-1} b.
template <typename Scalar>
Vector<Scalar> minimize_quadratic_on_ball(const Matrix<Scalar>& H, const Vector<Scalar>& b,
                                          const FeasibleBall<Scalar>& ball) {
  Eigen::LLT<Matrix<Scalar>> llt(H);
  if (llt.info() != Eigen::Success) {
    throw SingularMetric("minimize_quadratic_on_ball: Hessian is not positive definite");
  }
  const Vector<Scalar> x = llt.solve(b);
  if (x.norm() <= ball.radius()) return x;
  return project_metric<Scalar>(x, SpdMatrix<Scalar>(H), ball);
}

/// The best fixed point in hindsight, argmin_S sum_t f_t.
template <typename Scalar>
ComparatorTrace<Scalar> fixed_optimum(const std::vector<LossFunction<Scalar>>& losses,
                                      const FeasibleBall<Scalar>& ball) {
  detail::require(!losses.empty(), "fixed_optimum: empty loss sequence");
  const Eigen::Index n = ball.dim();
  Matrix<Scalar> H = Matrix<Scalar>::Zero(n, n);
  Vector<Scalar> b = Vector<Scalar>::Zero(n);
  for (const auto& f : losses) {
    detail::require(f.dim() == n, "fixed_optimum: loss dimension mismatch");
    const QuadraticForm<Scalar> q = f.quadratic_form();
    H += q.H;
    b += q.b;
  }
  const Vector<Scalar> x = minimize_quadratic_on_ball(H, b, ball);
  ComparatorTrace<Scalar> c;
  c.kind = ComparatorKind::FixedOptimum;
  c.points.assign(losses.size(), x);
  c.path_length = 0;
  return c;
}

/// theta_t* = argmin_S f_t for every round; path_length is V*.
template <typename Scalar>
ComparatorTrace<Scalar> per_round_minimizers(const std::vector<LossFunction<Scalar>>& losses,
                                             const FeasibleBall<Scalar>& ball) {
  ComparatorTrace<Scalar> c;
  c.kind = ComparatorKind::PerRoundMinimizer;
  c.points.reserve(losses.size());
  for (const auto& f : losses) {
    detail::require(f.dim() == ball.dim(), "per_round_minimizers: loss dimension mismatch");
    switch (f.kind()) {
      case LossKind::TrackingQuadratic: c.points.push_back(f.target()); break;
      case LossKind::ScalarAdversarial: {
        Vector<Scalar> z(1);
        z[0] = std::clamp(f.epsilon(), -ball.radius(), ball.radius());
        c.points.push_back(std::move(z));
        break;
      }
      case LossKind::GeneralLeastSquares: {
        const QuadraticForm<Scalar> q = f.quadratic_form();
        c.points.push_back(minimize_quadratic_on_ball(q.H, q.b, ball));
        break;
      }
    }
  }
  c.path_length = path_length(c.points);
  return c;
}

/// A caller-supplied comparator sequence. Points must be feasible, and the
/// realized path length must respect `budget` when one is given.
template <typename Scalar>
ComparatorTrace<Scalar> explicit_comparator(std::vector<Vector<Scalar>> points,
                                            const FeasibleBall<Scalar>& ball,
                                            std::optional<Scalar> budget = std::nullopt) {
  for (const auto& z : points) {
    detail::require(ball.contains(z, Scalar(1e-9)), "explicit_comparator: point outside the ball");
  }
  ComparatorTrace<Scalar> c;
  c.kind = ComparatorKind::Explicit;
  c.path_length = path_length(points);
  c.points = std::move(points);
  if (budget) {
    detail::require(c.path_length <= *budget * (Scalar(1) + Scalar(1e-12)),
                    "explicit_comparator: path length exceeds the declared budget");
  }
  return c;
}

template <typename Scalar>
struct RoundRecord {
  std::int64_t t;
  Scalar loss;
  Scalar comparator_loss;
  Scalar cum_regret;
};

template <typename Scalar>
struct RegretReport {
  ComparatorKind comparator = ComparatorKind::Explicit;
  std::vector<RoundRecord<Scalar>> rounds;
  Scalar total = 0;
  Scalar path_length = 0;

  /// Cumulative regret after the first t rounds (t in 1..T).
  Scalar prefix(std::int64_t t) const {
    detail::require(t >= 1 && t <= static_cast<std::int64_t>(rounds.size()),
                    "RegretReport::prefix: t out of range");
    return rounds[static_cast<std::size_t>(t - 1)].cum_regret;
  }
};

/// sum_t f_t(theta_t) - f_t(z_t), round by round. Regret may be negative.
template <typename Scalar>
RegretReport<Scalar> regret_of(const std::vector<Vector<Scalar>>& thetas,
                               const std::vector<LossFunction<Scalar>>& losses,
                               const ComparatorTrace<Scalar>& comparator) {
  detail::require(thetas.size() >= losses.size() && thetas.size() <= losses.size() + 1,
                  "regret_of: iterate trace length must match the loss sequence");
  detail::require(comparator.points.size() == losses.size(),
                  "regret_of: comparator length must match the loss sequence");
  RegretReport<Scalar> r;
  r.comparator = comparator.kind;
  r.path_length = comparator.path_length;
  r.rounds.reserve(losses.size());
  Scalar cum = 0;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    const Scalar a = value(losses[i], thetas[i]);
    const Scalar c = value(losses[i], comparator.points[i]);
    cum += a - c;
    r.rounds.push_back({static_cast<std::int64_t>(i) + 1, a, c, cum});
  }
  r.total = cum;
  return r;
}

/// How regret is regressed against the horizon.
enum class GrowthScale {
  Power,        // ln R  vs ln T      (slope = exponent)
  LogLog,       // ln R  vs ln ln T   (slope ~ 1 for R ~ ln T)
  LinearInLog,  // R     vs ln T      (slope = coefficient of ln T)
};

struct GrowthFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  int used = 0;
  int dropped = 0;
};

/// Ordinary least squares over (T_j, R_j). Points whose transform is
/// undefined (nonpositive R on log scales) are dropped and counted.
inline GrowthFit fit_growth(const std::vector<std::pair<double, double>>& points,
                            GrowthScale scale) {
  std::vector<double> xs;
  std::vector<double> ys;
  GrowthFit fit;
  for (const auto& [T, R] : points) {
    double x = std::log(T);
    if (scale == GrowthScale::LogLog) x = std::log(x);
    double y = R;
    if (scale != GrowthScale::LinearInLog) {
      if (!(R > 0.0)) {
        ++fit.dropped;
        continue;
      }
      y = std::log(R);
    }
    if (!std::isfinite(x) || !std::isfinite(y)) {
      ++fit.dropped;
      continue;
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  fit.used = static_cast<int>(xs.size());
  detail::require(fit.used >= 2, "fit_growth: need at least two usable points");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  detail::require(sxx > 0.0, "fit_growth: horizons must not all coincide");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

/// Prefix checkpoints T/8, T/4, T/2, T used for per-run growth fits.
inline std::vector<std::int64_t> prefix_checkpoints(std::int64_t T) {
  return {std::max<std::int64_t>(1, T / 8), std::max<std::int64_t>(1, T / 4),
          std::max<std::int64_t>(1, T / 2), T};
}

}  // namespace doco
