#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "doco/error.hpp"
#include "doco/geometry.hpp"

namespace doco {

/// Geometric grid of discount factors gamma_i = 1 - eta_i with
///   eta_i = 1/2 ln T / (T sqrt(2D)) 2^{i-1},   i = 1..N,
///   N     = ceil(1/2 log2(2 D T^2 / ln^2 T)) + 1,
/// sorted by descending gamma. The optional gamma = 1 expert is appended last.
/// prior[i] = C / ((i+1)(i+2)) with C = 1 + 1/|H|, which sums to one exactly
/// over |H| experts.
struct ExpertGrid {
  std::vector<double> etas;
  std::vector<double> gammas;
  std::vector<double> prior;
  int N = 0;
  bool include_gamma_one = false;

  std::size_t size() const { return gammas.size(); }
};

inline int grid_size(std::int64_t T, double D) {
  const double TT = static_cast<double>(T);
  const double lnT = std::log(TT);
  return static_cast<int>(std::ceil(0.5 * std::log2(2.0 * D * TT * TT / (lnT * lnT)))) + 1;
}

inline double smallest_grid_eta(std::int64_t T, double D) {
  const double TT = static_cast<double>(T);
  return 0.5 * std::log(TT) / (TT * std::sqrt(2.0 * D));
}

/// C/(i(i+1)) for i = 1..count with C = 1 + 1/count.
inline std::vector<double> harmonic_prior(std::size_t count) {
  detail::require(count >= 1, "harmonic_prior: need at least one expert");
  const double C = 1.0 + 1.0 / static_cast<double>(count);
  std::vector<double> w(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double k = static_cast<double>(i + 1);
    w[i] = C / (k * (k + 1.0));
  }
  return w;
}

inline ExpertGrid build_grid(std::int64_t T, double D, bool include_gamma_one) {
  detail::require(T >= 2, "build_grid: horizon T must be >= 2");
  detail::require(D >= 1.0, "build_grid: D must be >= 1");
  ExpertGrid g;
  g.N = grid_size(T, D);
  g.include_gamma_one = include_gamma_one;
  double eta = smallest_grid_eta(T, D);
  for (int i = 0; i < g.N; ++i) {
    g.etas.push_back(eta);
    g.gammas.push_back(1.0 - eta);
    eta *= 2.0;
  }
  if (include_gamma_one) {
    g.etas.push_back(0.0);
    g.gammas.push_back(1.0);
  }
  g.prior = harmonic_prior(g.gammas.size());
  return g;
}

/// The discount gap a path-length-aware tuning would pick,
///   eta* = 1/2 (ln T / T) sqrt(max{T V / ln^2 T, 1} / (2D)),
/// i.e. 1 - gamma for the path-tuned schedule.
inline double tuned_eta(double V, std::int64_t T, double D) {
  const double TT = static_cast<double>(T);
  const double lnT = std::log(TT);
  return 0.5 * (lnT / TT) * std::sqrt(std::max(TT * V / (lnT * lnT), 1.0) / (2.0 * D));
}

/// Index k (0-based) of a grid entry with eta_k <= eta* <= 2 eta_k, or -1.
inline int covering_index(const ExpertGrid& grid, double eta_star) {
  for (int k = 0; k < grid.N; ++k) {
    const double e = grid.etas[static_cast<std::size_t>(k)];
    const double slack = 1e-12 * e;  // rounding
    if (e - slack <= eta_star && eta_star <= 2.0 * e + slack) return k;
  }
  return -1;
}

/// Exponential weights over experts, held as normalized log-weights.
template <typename Scalar>
class MetaState {
 public:
  MetaState(const std::vector<Scalar>& prior, Scalar lambda) : lambda_(lambda) {
    detail::require(!prior.empty(), "MetaState: need at least one expert");
    detail::require(lambda > Scalar(0) && std::isfinite(static_cast<double>(lambda)),
                    "MetaState: lambda must be positive and finite");
    log_w_.reserve(prior.size());
    for (Scalar p : prior) {
      detail::require(p > Scalar(0), "MetaState: prior weights must be positive");
      log_w_.push_back(std::log(p));
    }
    normalize();
  }

  Scalar lambda() const { return lambda_; }
  std::size_t size() const { return log_w_.size(); }
  const std::vector<Scalar>& log_weights() const { return log_w_; }

  std::vector<Scalar> weights() const {
    std::vector<Scalar> w(log_w_.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_w_[i]);
    return w;
  }

  /// w_i <- w_i exp(-lambda loss_i), renormalized.
  void absorb(const std::vector<Scalar>& losses) {
    detail::require(losses.size() == log_w_.size(), "MetaState: one loss per expert required");
    for (std::size_t i = 0; i < losses.size(); ++i) {
      if (!std::isfinite(static_cast<double>(losses[i]))) {
        throw ContractViolation("meta_round: non-finite expert loss");
      }
      log_w_[i] -= lambda_ * losses[i];
    }
    normalize();
  }

 private:
  void normalize() {
    const Scalar top = *std::max_element(log_w_.begin(), log_w_.end());
    Scalar sum = 0;
    for (Scalar v : log_w_) sum += std::exp(v - top);
    const Scalar log_norm = top + std::log(sum);
    for (Scalar& v : log_w_) v -= log_norm;
  }

  std::vector<Scalar> log_w_;
  Scalar lambda_;
};

template <typename Scalar>
struct MetaRound {
  Vector<Scalar> prediction;
  MetaState<Scalar> state;
};

/// Plays sum_i w_i theta_i with the current weights, then folds this round's
/// expert losses into the weights.
template <typename Scalar>
MetaRound<Scalar> meta_round(const MetaState<Scalar>& state, const std::vector<Scalar>& losses,
                             const std::vector<Vector<Scalar>>& predictions) {
  detail::require(predictions.size() == state.size(), "meta_round: one prediction per expert");
  const std::vector<Scalar> w = state.weights();
  Vector<Scalar> play = Vector<Scalar>::Zero(predictions.front().size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    detail::require(predictions[i].size() == play.size(), "meta_round: prediction size mismatch");
    play += w[i] * predictions[i];
  }
  MetaState<Scalar> next = state;
  next.absorb(losses);
  return {std::move(play), std::move(next)};
}

struct MixtureBoundReport {
  double max_slack = -std::numeric_limits<double>::infinity();  // max_i lhs_i - rhs_i
  int worst_expert = -1;
  bool holds(double tol = 1e-9) const { return max_slack <= tol; }
};

/// Checks meta_cum - expert_cum_i <= (1/lambda) ln(1/prior_i) for every expert.
inline MixtureBoundReport check_mixture_bound(double meta_cum, const std::vector<double>& expert_cums,
                                       const std::vector<double>& prior, double lambda) {
  detail::require(expert_cums.size() == prior.size(), "check_mixture_bound: size mismatch");
  detail::require(lambda > 0.0, "check_mixture_bound: lambda must be positive");
  MixtureBoundReport r;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    const double slack = (meta_cum - expert_cums[i]) - std::log(1.0 / prior[i]) / lambda;
    if (slack > r.max_slack) {
      r.max_slack = slack;
      r.worst_expert = static_cast<int>(i);
    }
  }
  return r;
}

}  // namespace doco
