#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "doco/gd.hpp"
#include "doco/geometry.hpp"
#include "doco/losses.hpp"
#include "doco/meta.hpp"
#include "doco/newton.hpp"
#include "doco/rls.hpp"

namespace doco {

/// Uniform driver interface over the learners: play prediction(), then
/// observe() the round's loss. step_size() and discount() describe the
/// update applied by the most recent observe().
template <typename Scalar>
class OnlineLearner {
 public:
  virtual ~OnlineLearner() = default;
  virtual const Vector<Scalar>& prediction() const = 0;
  virtual void observe(const LossFunction<Scalar>& f) = 0;
  virtual Scalar step_size() const = 0;
  virtual Scalar discount() const = 0;
};

template <typename Scalar>
class NewtonLearner final : public OnlineLearner<Scalar> {
 public:
  NewtonLearner(NewtonConfig<Scalar> config, Vector<Scalar> theta1, FeasibleBall<Scalar> ball)
      : config_(config), ball_(ball), state_(newton_init(config, std::move(theta1), ball)) {}

  const Vector<Scalar>& prediction() const override { return state_.theta; }

  void observe(const LossFunction<Scalar>& f) override {
    const Vector<Scalar> g = gradient(f, state_.theta);
    std::optional<SpdMatrix<Scalar>> h;
    if (config_.variant == NewtonVariant::FullNewton) h = hessian(f, state_.theta);
    state_ = newton_step(state_, g, h, config_, ball_);
  }

  Scalar step_size() const override { return config_.eta; }
  Scalar discount() const override { return config_.gamma; }
  const NewtonState<Scalar>& state() const { return state_; }
  const NewtonConfig<Scalar>& config() const { return config_; }

 private:
  NewtonConfig<Scalar> config_;
  FeasibleBall<Scalar> ball_;
  NewtonState<Scalar> state_;
};

template <typename Scalar>
class GdLearner final : public OnlineLearner<Scalar> {
 public:
  GdLearner(GdConfig<Scalar> config, Vector<Scalar> theta1, FeasibleBall<Scalar> ball)
      : config_(config), ball_(ball), state_(gd_init(config, std::move(theta1), ball)) {}

  const Vector<Scalar>& prediction() const override { return state_.theta; }

  void observe(const LossFunction<Scalar>& f) override {
    last_eta_ = stepsize(config_, state_.t, state_.gamma_pow_t);
    state_ = gd_step(state_, gradient(f, state_.theta), config_, ball_);
  }

  Scalar step_size() const override { return last_eta_; }
  Scalar discount() const override { return config_.gamma; }
  const GdState<Scalar>& state() const { return state_; }

 private:
  GdConfig<Scalar> config_;
  FeasibleBall<Scalar> ball_;
  GdState<Scalar> state_;
  Scalar last_eta_ = 0;
};

/// Discounted RLS; tracking losses use the closed-form scalar recursion,
/// general least-squares losses the matrix recursion.
template <typename Scalar>
class RlsLearner final : public OnlineLearner<Scalar> {
 public:
  RlsLearner(Scalar gamma, Vector<Scalar> theta1, FeasibleBall<Scalar> ball)
      : ball_(ball), state_(rls_init(std::move(theta1), gamma)) {}

  const Vector<Scalar>& prediction() const override { return state_.theta; }

  void observe(const LossFunction<Scalar>& f) override {
    last_eta_ = rls_step_size(state_.gamma, state_.t, state_.gamma_pow_t);
    switch (f.kind()) {
      case LossKind::TrackingQuadratic:
        state_ = rls_step_quadratic(state_, f.target(), ball_);
        break;
      case LossKind::GeneralLeastSquares:
        state_ = rls_step_general(state_, f.design(), f.target(), ball_);
        break;
      case LossKind::ScalarAdversarial:
        throw ContractViolation("RlsLearner: scalar adversarial losses are not least-squares losses");
    }
  }

  Scalar step_size() const override { return last_eta_; }
  Scalar discount() const override { return state_.gamma; }
  const RlsState<Scalar>& state() const { return state_; }

 private:
  FeasibleBall<Scalar> ball_;
  RlsState<Scalar> state_;
  Scalar last_eta_ = 0;
};

/// Exponentially weighted experts over learners with different discounts.
/// Each expert is charged the true loss at its own prediction and updated
/// with its own gradient.
template <typename Scalar>
class MetaLearner final : public OnlineLearner<Scalar> {
 public:
  MetaLearner(std::vector<std::unique_ptr<OnlineLearner<Scalar>>> experts,
              const std::vector<Scalar>& prior, Scalar lambda)
      : experts_(std::move(experts)), prior_(prior), state_(prior, lambda) {
    detail::require(experts_.size() == prior.size(), "MetaLearner: one prior weight per expert");
    cum_expert_.assign(experts_.size(), Scalar(0));
    refresh_prediction();
  }

  const Vector<Scalar>& prediction() const override { return play_; }

  void observe(const LossFunction<Scalar>& f) override {
    std::vector<Scalar> losses(experts_.size());
    std::vector<Vector<Scalar>> preds(experts_.size());
    for (std::size_t i = 0; i < experts_.size(); ++i) {
      preds[i] = experts_[i]->prediction();
      losses[i] = value(f, preds[i]);
      cum_expert_[i] += losses[i];
    }
    cum_meta_ += value(f, play_);
    auto round = meta_round(state_, losses, preds);
    state_ = std::move(round.state);
    for (auto& e : experts_) e->observe(f);
    refresh_prediction();
  }

  Scalar step_size() const override { return state_.lambda(); }

  /// Weight-averaged discount of the experts.
  Scalar discount() const override {
    const auto w = state_.weights();
    Scalar g = 0;
    for (std::size_t i = 0; i < w.size(); ++i) g += w[i] * experts_[i]->discount();
    return g;
  }

  std::vector<Scalar> weights() const { return state_.weights(); }
  const std::vector<Scalar>& prior() const { return prior_; }
  const std::vector<Scalar>& expert_cumulative_losses() const { return cum_expert_; }
  Scalar cumulative_loss() const { return cum_meta_; }
  std::size_t size() const { return experts_.size(); }
  const OnlineLearner<Scalar>& expert(std::size_t i) const { return *experts_[i]; }

 private:
  void refresh_prediction() {
    const auto w = state_.weights();
    play_ = Vector<Scalar>::Zero(experts_.front()->prediction().size());
    for (std::size_t i = 0; i < w.size(); ++i) play_ += w[i] * experts_[i]->prediction();
  }

  std::vector<std::unique_ptr<OnlineLearner<Scalar>>> experts_;
  std::vector<Scalar> prior_;
  MetaState<Scalar> state_;
  std::vector<Scalar> cum_expert_;
  Scalar cum_meta_ = 0;
  Vector<Scalar> play_;
};

/// What a learner did over a loss stream: theta_1..theta_T (the points
/// played) plus the step size and discount of each update.
template <typename Scalar>
struct LearnerTrace {
  std::vector<Vector<Scalar>> thetas;
  std::vector<Scalar> etas;
  std::vector<Scalar> gammas;
  std::vector<std::vector<Scalar>> weights;  // meta learners only, weights used in round t
};

template <typename Scalar>
LearnerTrace<Scalar> simulate(OnlineLearner<Scalar>& learner,
                              const std::vector<LossFunction<Scalar>>& losses) {
  LearnerTrace<Scalar> tr;
  tr.thetas.reserve(losses.size());
  tr.etas.reserve(losses.size());
  tr.gammas.reserve(losses.size());
  auto* meta = dynamic_cast<MetaLearner<Scalar>*>(&learner);
  for (const auto& f : losses) {
    tr.thetas.push_back(learner.prediction());
    if (meta) tr.weights.push_back(meta->weights());
    const Scalar g = learner.discount();
    learner.observe(f);
    tr.etas.push_back(learner.step_size());
    tr.gammas.push_back(g);
  }
  return tr;
}

}  // namespace doco
