#include "doco/scenarios.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>

#include "doco/error.hpp"
#include "doco/random.hpp"
#include "doco/regret.hpp"

namespace doco {

const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Stationary: return "stationary";
    case ScenarioKind::RandomWalk: return "random_walk";
    case ScenarioKind::PiecewiseConstant: return "piecewise_constant";
    case ScenarioKind::LowerBoundAdversary: return "lower_bound_adversary";
  }
  return "unknown";
}

double adversary_sigma(std::int64_t T, double gamma0) {
  detail::require(T >= 2, "adversary_sigma: T must be >= 2");
  detail::require(gamma0 > 0.0 && gamma0 < 1.0, "adversary_sigma: gamma0 must lie in (0, 1)");
  return std::pow(static_cast<double>(T), -2.0 * (1.0 - gamma0) / (4.0 - gamma0));
}

double expected_adversary_regret(std::int64_t T, double gamma0) {
  const double s = adversary_sigma(T, gamma0);
  return 3.0 * s * s * static_cast<double>(T);
}

namespace {

bool is_least_squares(const ScenarioSpec& spec) {
  return spec.kind != ScenarioKind::LowerBoundAdversary &&
         spec.loss.family == LossKind::GeneralLeastSquares;
}

double latent_radius(const ScenarioSpec& spec) {
  return is_least_squares(spec) ? spec.D / std::sqrt(spec.loss.u) : spec.D;
}

/// Moves p by `step` inside the ball of radius r. Tries d, then -d, then
/// straight toward (and through) the center, clipping at the far side.
/// Returns the distance actually moved.
double take_step(Eigen::VectorXd& p, const Eigen::VectorXd& d, double step, double r) {
  if (step <= 0.0) return 0.0;
  for (const double sgn : {1.0, -1.0}) {
    const Eigen::VectorXd cand = p + sgn * step * d;
    if (cand.norm() <= r) {
      p = cand;
      return step;
    }
  }
  const double pn = p.norm();
  const Eigen::VectorXd inward = pn > 0.0 ? Eigen::VectorXd(-p / pn) : d;
  Eigen::VectorXd cand = p + step * inward;
  if (cand.norm() > r) cand *= r / cand.norm();
  const double moved = (cand - p).norm();
  p = cand;
  return moved;
}

Eigen::MatrixXd random_design(Rng& rng, int m, int n, double ell, double u) {
  auto gaussian = [&](int rows, int cols) {
    Eigen::MatrixXd g(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) g(i, j) = rng.normal();
    return g;
  };
  const Eigen::MatrixXd left =
      Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian(m, n)).householderQ() *
      Eigen::MatrixXd::Identity(m, n);
  const Eigen::MatrixXd right =
      Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian(n, n)).householderQ() *
      Eigen::MatrixXd::Identity(n, n);
  const double lo = std::sqrt(ell);
  const double hi = std::sqrt(u);
  Eigen::VectorXd s(n);
  for (int i = 0; i < n; ++i) s[i] = rng.uniform(lo, hi);
  // Pin the extremes so the declared ell and u are attained.
  s[0] = lo;
  if (n > 1) s[n - 1] = hi;
  return left * s.asDiagonal() * right.transpose();
}

}  // namespace

ConvexityProfile<double> family_profile(const ScenarioSpec& spec) {
  if (spec.kind == ScenarioKind::LowerBoundAdversary) {
    const double sigma = adversary_sigma(spec.T, spec.gamma0);
    return ConvexityProfile<double>(2.0, 2.0, 2.0 * (spec.D + 2.0 * sigma));
  }
  if (spec.loss.family == LossKind::GeneralLeastSquares) {
    return ConvexityProfile<double>(
        spec.loss.ell, spec.loss.u,
        LossFunction<double>::gls_gradient_bound(spec.loss.ell, spec.loss.u, spec.D));
  }
  return ConvexityProfile<double>(1.0, 1.0, 2.0 * spec.D);
}

double ScenarioSpec::budget() const {
  switch (kind) {
    case ScenarioKind::Stationary: return 0.0;
    case ScenarioKind::RandomWalk:
    case ScenarioKind::PiecewiseConstant: return V;
    case ScenarioKind::LowerBoundAdversary:
      return 2.0 * adversary_sigma(T, gamma0) * static_cast<double>(T);
  }
  return 0.0;
}

void ScenarioSpec::validate() const {
  using detail::require;
  require(T >= 2, "scenario: T must be >= 2");
  require(n >= 1, "scenario: n must be >= 1");
  require(std::isfinite(D) && D >= 1.0, "scenario: D must be >= 1");
  require(std::isfinite(noise) && noise >= 0.0, "scenario: noise must be >= 0");
  if (kind == ScenarioKind::LowerBoundAdversary) {
    require(n == 1, "scenario: the lower-bound adversary is one-dimensional (n = 1)");
    require(gamma0 > 0.0 && gamma0 < 1.0, "scenario: gamma0 must lie in (0, 1)");
    require(2.0 * adversary_sigma(T, gamma0) <= D,
            "scenario: adversary needs 2 sigma <= D so that eps_t/2 is feasible");
    return;
  }
  if (loss.family == LossKind::GeneralLeastSquares) {
    require(loss.m >= n, "scenario: least-squares family needs m >= n");
    require(loss.ell > 0.0 && loss.ell <= loss.u, "scenario: need 0 < ell <= u");
  } else {
    require(loss.family == LossKind::TrackingQuadratic,
            "scenario: loss family must be tracking_quadratic or general_least_squares");
  }
  const double r = latent_radius(*this);
  if (kind == ScenarioKind::RandomWalk || kind == ScenarioKind::PiecewiseConstant) {
    require(std::isfinite(V) && V >= 0.0, "scenario: V must be >= 0");
    require(V <= 2.0 * D * static_cast<double>(T), "scenario: V must not exceed 2 D T");
  }
  if (kind == ScenarioKind::RandomWalk) {
    require(V / static_cast<double>(T) <= 2.0 * r,
            "scenario: random-walk step V/T exceeds the latent diameter");
  }
  if (kind == ScenarioKind::PiecewiseConstant) {
    require(segments >= 1 && segments <= T, "scenario: segments must lie in [1, T]");
    if (segments == 1) {
      require(V == 0.0, "scenario: a single segment cannot spend a positive budget");
    } else {
      require(V / (segments - 1) <= 2.0 * r,
              "scenario: piecewise jump V/(k-1) exceeds the latent diameter");
    }
  }
}

Scenario generate(const ScenarioSpec& spec) {
  spec.validate();
  Scenario out;
  out.spec = spec;
  out.profile = family_profile(spec);
  const FeasibleBall<double> ball(spec.D, spec.n);
  const auto T = static_cast<std::size_t>(spec.T);
  out.start = Eigen::VectorXd::Zero(spec.n);
  out.losses.reserve(T);
  out.path.reserve(T);

  Rng root(spec.seed);
  Rng path_rng = root.split(1);
  Rng noise_rng = root.split(2);
  Rng design_rng = root.split(3);

  if (spec.kind == ScenarioKind::LowerBoundAdversary) {
    out.sigma = adversary_sigma(spec.T, spec.gamma0);
    for (std::size_t t = 0; t < T; ++t) {
      const double eps = 2.0 * out.sigma * path_rng.sign();
      out.losses.push_back(LossFunction<double>::scalar_adversarial(eps, out.sigma, ball));
      out.path.push_back(Eigen::VectorXd::Constant(1, eps / 2.0));
    }
    out.path_length = path_length(out.path);
    return out;
  }

  const double r = latent_radius(spec);
  Eigen::VectorXd p = path_rng.in_ball(spec.n, 0.5 * r);
  double remaining = spec.budget();
  const double walk_step = spec.V / static_cast<double>(spec.T);
  const double jump = spec.segments > 1 ? spec.V / (spec.segments - 1) : 0.0;

  for (std::size_t t = 0; t < T; ++t) {
    if (t > 0) {
      double step = 0.0;
      if (spec.kind == ScenarioKind::RandomWalk) {
        step = walk_step;
      } else if (spec.kind == ScenarioKind::PiecewiseConstant) {
        const std::size_t k = static_cast<std::size_t>(spec.segments);
        if ((t * k) / T != ((t - 1) * k) / T) step = jump;
      }
      step = std::min(step, remaining);
      if (step > 0.0) remaining -= take_step(p, path_rng.direction(spec.n), step, r);
      remaining = std::max(remaining, 0.0);
    }
    out.path.push_back(p);

    if (spec.loss.family == LossKind::GeneralLeastSquares) {
      const Eigen::MatrixXd A =
          random_design(design_rng, spec.loss.m, spec.n, spec.loss.ell, spec.loss.u);
      Eigen::VectorXd y = A * p;
      if (spec.noise > 0.0) y += noise_rng.in_ball(spec.loss.m, spec.noise);
      if (y.norm() > spec.D) y *= spec.D / y.norm();
      out.losses.push_back(LossFunction<double>::general_least_squares(A, std::move(y), ball,
                                                                       spec.loss.ell, spec.loss.u));
    } else {
      Eigen::VectorXd y = p;
      if (spec.noise > 0.0) y += noise_rng.in_ball(spec.n, spec.noise);
      if (y.norm() > spec.D) y *= spec.D / y.norm();
      out.losses.push_back(LossFunction<double>::tracking_quadratic(std::move(y), ball));
    }
  }
  out.path_length = path_length(out.path);
  return out;
}

}  // namespace doco
