#pragma once

#include "distal/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

namespace distal {

enum class Loss { mae, mse };

/// Loss and its derivative with respect to the prediction. sign(0) = 0.
template <typename Scalar>
std::pair<Scalar, Scalar> loss_value_and_dloss(Loss loss, Scalar prediction, Scalar target) {
  if (!std::isfinite(prediction) || !std::isfinite(target)) throw std::domain_error("non-finite input");
  const Scalar r = prediction - target;
  if (loss == Loss::mae) {
    const Scalar sign = r > Scalar(0) ? Scalar(1) : (r < Scalar(0) ? Scalar(-1) : Scalar(0));
    return {std::abs(r), sign};
  }
  return {r * r, Scalar(2) * r};
}

/// Adam moments and hyperparameters. Defaults follow the usual framework
/// defaults (lr 1e-3, betas 0.9 / 0.999, eps 1e-8).
template <typename Scalar>
struct AdamState {
  VectorX<Scalar> m;
  VectorX<Scalar> v;
  std::int64_t t = 0;
  Scalar lr = Scalar(1e-3);
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar eps = Scalar(1e-8);

  AdamState() = default;
  explicit AdamState(Index size, Scalar learning_rate = Scalar(1e-3))
      : m(VectorX<Scalar>::Zero(size)), v(VectorX<Scalar>::Zero(size)), lr(learning_rate) {}

  void reset() {
    m.setZero();
    v.setZero();
    t = 0;
  }
};

/// One bias-corrected Adam update. A zero gradient entry with zero moments
/// leaves its parameter bit-identical.
template <typename Scalar>
void adam_step(AdamState<Scalar>& state, VectorX<Scalar>& params, const std::type_identity_t<VectorX<Scalar>>& grad) {
  if (params.size() != grad.size() || state.m.size() != grad.size() || state.v.size() != grad.size())
    throw std::invalid_argument("size mismatch");
  ++state.t;
  const Scalar c1 = Scalar(1) - std::pow(state.beta1, Scalar(state.t));
  const Scalar c2 = Scalar(1) - std::pow(state.beta2, Scalar(state.t));
  for (Index i = 0; i < params.size(); ++i) {
    const Scalar g = grad(i);
    state.m(i) = state.beta1 * state.m(i) + (Scalar(1) - state.beta1) * g;
    state.v(i) = state.beta2 * state.v(i) + (Scalar(1) - state.beta2) * g * g;
    const Scalar m_hat = state.m(i) / c1;
    const Scalar v_hat = state.v(i) / c2;
    params(i) -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

struct TrainConfig {
  int epochs = 200;
  Index batch_size = 100;
  Loss loss = Loss::mae;
  std::uint64_t shuffle_seed = 0;
};

/// Training inputs are the columns of `points`; `targets` has one entry per
/// column.
template <typename Scalar>
struct Dataset {
  MatrixX<Scalar> points;
  VectorX<Scalar> targets;

  Index size() const { return points.cols(); }
};

template <typename Scalar>
Dataset<Scalar> concatenate(const Dataset<Scalar>& a, const Dataset<Scalar>& b) {
  if (a.size() > 0 && b.size() > 0 && a.points.rows() != b.points.rows())
    throw std::invalid_argument("dimension mismatch");
  Dataset<Scalar> out;
  const Index rows = a.size() > 0 ? a.points.rows() : b.points.rows();
  out.points.resize(rows, a.size() + b.size());
  out.targets.resize(a.size() + b.size());
  if (a.size() > 0) {
    out.points.leftCols(a.size()) = a.points;
    out.targets.head(a.size()) = a.targets;
  }
  if (b.size() > 0) {
    out.points.rightCols(b.size()) = b.points;
    out.targets.tail(b.size()) = b.targets;
  }
  return out;
}

/// Mini-batch training. Each epoch reshuffles with an engine seeded once
/// from cfg.shuffle_seed; every batch contributes one Adam step on the mean
/// of dL/df * grad f. Returns the mean training loss seen during each epoch.
template <DifferentiableModel M>
std::vector<typename M::Scalar> train_epochs(M& model, const Dataset<typename M::Scalar>& data,
                                             const TrainConfig& cfg, AdamState<typename M::Scalar>& state) {
  using Scalar = typename M::Scalar;
  if (data.size() == 0) throw std::invalid_argument("empty dataset");
  if (data.targets.size() != data.size()) throw std::invalid_argument("target count mismatch");
  if (data.points.rows() != model.input_dim()) throw std::invalid_argument("dimension mismatch");
  if (cfg.epochs < 1 || cfg.batch_size < 1) throw std::invalid_argument("invalid training configuration");
  require_unit_cube(data.points);
  if (state.m.size() != model.num_params()) {
    const Scalar lr = state.lr;
    state = AdamState<Scalar>(model.num_params(), lr);
  }

  auto engine = make_engine(cfg.shuffle_seed);
  std::vector<Index> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), Index(0));

  std::vector<Scalar> history;
  history.reserve(cfg.epochs);
  VectorX<Scalar> grad(model.num_params());
  MatrixX<Scalar> batch_points;
  VectorX<Scalar> coeffs;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), engine);
    Scalar epoch_loss(0);
    for (Index start = 0; start < data.size(); start += cfg.batch_size) {
      const Index count = std::min(cfg.batch_size, data.size() - start);
      batch_points.resize(data.points.rows(), count);
      for (Index s = 0; s < count; ++s) batch_points.col(s) = data.points.col(order[start + s]);
      const VectorX<Scalar> predictions = model.values(batch_points);
      coeffs.resize(count);
      for (Index s = 0; s < count; ++s) {
        const auto [value, dloss] = loss_value_and_dloss(cfg.loss, predictions(s), data.targets(order[start + s]));
        epoch_loss += value;
        coeffs(s) = dloss / Scalar(count);
      }
      grad.setZero();
      model.accumulate_gradient(batch_points, coeffs, grad);
      adam_step(state, model.params(), grad);
    }
    history.push_back(epoch_loss / Scalar(data.size()));
  }
  return history;
}

/// Mean absolute error of the model on a dataset.
template <DifferentiableModel M>
typename M::Scalar mean_absolute_error(const M& model, const Dataset<typename M::Scalar>& data) {
  return (model.values(data.points) - data.targets).cwiseAbs().mean();
}

}  // namespace distal
