#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "doco/losses.hpp"

namespace doco {

enum class ScenarioKind { Stationary, RandomWalk, PiecewiseConstant, LowerBoundAdversary };

const char* to_string(ScenarioKind k);

struct LossFamilySpec {
  LossKind family = LossKind::TrackingQuadratic;  // TrackingQuadratic or GeneralLeastSquares
  int m = 0;                                      // rows of A_t
  double ell = 1.0;
  double u = 1.0;
};

/// A seeded, non-stationary loss stream.
///
/// Every stream is driven by a latent path p_1..p_T inside the ball (radius D
/// for tracking losses, D/sqrt(u) for least-squares losses so that
/// ||A_t p_t|| <= D). Stationary holds p fixed, RandomWalk takes steps of
/// length V/T in uniform random directions, PiecewiseConstant jumps k-1
/// times by V/(k-1). The observed target is y_t = p_t (tracking) or
/// y_t = A_t p_t (least squares), optionally perturbed by noise drawn
/// uniformly from a ball of radius `noise` and clipped back into the ball.
/// The latent path is the stream's designated comparator; its path length
/// never exceeds V.
///
/// LowerBoundAdversary ignores the loss family: n = 1, f_t(x) = (x - eps_t)^2
/// with eps_t = +-2 sigma uniformly, sigma = T^{-2(1-gamma0)/(4-gamma0)}, and
/// designated comparator z_t = eps_t / 2.
struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::Stationary;
  std::int64_t T = 100;
  int n = 1;
  double D = 1.0;
  std::uint64_t seed = 0;
  LossFamilySpec loss;
  double V = 0.0;
  int segments = 1;
  double gamma0 = 0.5;
  double noise = 0.0;

  /// Throws ContractViolation on invalid fields.
  void validate() const;
  /// The declared path budget: V, 0 for Stationary, 2 sigma T for the adversary.
  double budget() const;
};

struct Scenario {
  ScenarioSpec spec;
  std::vector<LossFunction<double>> losses;
  std::vector<Eigen::VectorXd> path;  // designated comparator z_1..z_T
  double path_length = 0.0;           // realized sum ||z_t - z_{t-1}||
  double sigma = 0.0;                 // adversary only
  ConvexityProfile<double> profile{1.0, 1.0, 1.0};  // shared by every round
  Eigen::VectorXd start;              // suggested theta_1 (the origin)
};

/// Deterministic in spec (including seed).
Scenario generate(const ScenarioSpec& spec);

double adversary_sigma(std::int64_t T, double gamma0);

/// 3 sigma^2 T, the expected dynamic regret any learner suffers against z_t = eps_t/2.
double expected_adversary_regret(std::int64_t T, double gamma0);

/// Profile every loss of the spec's family carries.
ConvexityProfile<double> family_profile(const ScenarioSpec& spec);

}  // namespace doco
