#pragma once

#include "distal/types.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace distal {

/// Dense ReLU network with a scalar output. Inputs in [0,1]^n are mapped to
/// [-1,1]^n by a fixed affine layer first; the output layer is linear.
///
/// Parameters are stored layer by layer: the out x in weight matrix in
/// column-major order, then the out-sized bias vector.
template <typename Scalar_>
class ReluMlp {
 public:
  using Scalar = Scalar_;
  using Matrix = MatrixX<Scalar>;
  using Vector = VectorX<Scalar>;

  explicit ReluMlp(std::vector<Index> layer_sizes) : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) throw std::invalid_argument("an MLP needs at least input and output layers");
    for (Index s : sizes_)
      if (s < 1) throw std::invalid_argument("layer sizes must be positive");
    if (sizes_.back() != 1) throw std::invalid_argument("output layer must have exactly one unit");
    Index total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      weight_offsets_.push_back(total);
      total += sizes_[l] * sizes_[l + 1];
      bias_offsets_.push_back(total);
      total += sizes_[l + 1];
    }
    theta_ = Vector::Zero(total);
  }

  const std::vector<Index>& layer_sizes() const { return sizes_; }
  Index layers() const { return static_cast<Index>(sizes_.size()) - 1; }
  Index input_dim() const { return sizes_.front(); }
  Index num_params() const { return theta_.size(); }
  const Vector& params() const { return theta_; }
  Vector& params() { return theta_; }

  Index fan_in(Index layer) const { return sizes_[layer]; }
  Index fan_out(Index layer) const { return sizes_[layer + 1]; }
  Index weight_offset(Index layer) const { return weight_offsets_[layer]; }
  Index bias_offset(Index layer) const { return bias_offsets_[layer]; }

  Eigen::Map<const Matrix> weights(Index l) const {
    return {theta_.data() + weight_offsets_[l], fan_out(l), fan_in(l)};
  }
  Eigen::Map<const Vector> bias(Index l) const { return {theta_.data() + bias_offsets_[l], fan_out(l)}; }

  template <typename Derived>
  Scalar value(const Eigen::MatrixBase<Derived>& x) const {
    require_dimension(x, input_dim());
    require_unit_cube(x);
    Vector a = (Scalar(2) * x.template cast<Scalar>()).array() - Scalar(1);
    for (Index l = 0; l < layers(); ++l) {
      Vector pre = weights(l) * a + bias(l);
      a = (l + 1 < layers()) ? Vector(pre.cwiseMax(Scalar(0))) : pre;
    }
    return a(0);
  }

  /// Smallest |pre-activation| over the hidden units at x; finite
  /// differences are only trustworthy away from ReLU kinks.
  template <typename Derived>
  Scalar min_abs_preactivation(const Eigen::MatrixBase<Derived>& x) const {
    require_dimension(x, input_dim());
    Vector a = (Scalar(2) * x.template cast<Scalar>()).array() - Scalar(1);
    Scalar smallest = std::numeric_limits<Scalar>::infinity();
    for (Index l = 0; l + 1 < layers(); ++l) {
      Vector pre = weights(l) * a + bias(l);
      smallest = std::min(smallest, pre.cwiseAbs().minCoeff());
      a = pre.cwiseMax(Scalar(0));
    }
    return smallest;
  }

  VectorX<Scalar> values(const Matrix& points) const {
    check_points(points);
    // Chunked with reused buffers so wide hidden layers stay cache-sized.
    constexpr Index chunk = 256;
    Vector out(points.cols());
    std::vector<Matrix> act(static_cast<std::size_t>(layers()) + 1);
    for (Index start = 0; start < points.cols(); start += chunk) {
      const Index count = std::min(chunk, points.cols() - start);
      act[0] = (Scalar(2) * points.middleCols(start, count)).array() - Scalar(1);
      for (Index l = 0; l < layers(); ++l) {
        Matrix& next = act[l + 1];
        next.resize(fan_out(l), count);
        next.noalias() = weights(l) * act[l];
        next.colwise() += bias(l);
        if (l + 1 < layers()) next = next.cwiseMax(Scalar(0));
      }
      out.segment(start, count) = act.back().row(0).transpose();
    }
    return out;
  }

  template <typename Derived>
  SparseGrad<Scalar> param_grad(const Eigen::MatrixBase<Derived>& x) const {
    Matrix points = x.template cast<Scalar>();
    Vector dense = Vector::Zero(num_params());
    accumulate_gradient(points, Vector::Ones(1), dense);
    SparseGrad<Scalar> g(num_params());
    g.reserve(num_params());
    for (Index i = 0; i < dense.size(); ++i) g.insertBack(i) = dense(i);
    return g;
  }

  /// grad += sum_s coeffs(s) * d f(points.col(s)) / d theta, by one reverse
  /// sweep over the whole batch. The ReLU derivative at exactly 0 is 0.
  void accumulate_gradient(const Matrix& points, const Vector& coeffs, Vector& grad) const {
    check_points(points);
    std::vector<Matrix> acts;
    std::vector<Matrix> pres;
    acts.reserve(layers() + 1);
    pres.reserve(layers());
    acts.emplace_back((Scalar(2) * points).array() - Scalar(1));
    for (Index l = 0; l < layers(); ++l) {
      Matrix pre = weights(l) * acts.back();
      pre.colwise() += bias(l);
      acts.emplace_back(l + 1 < layers() ? Matrix(pre.cwiseMax(Scalar(0))) : pre);
      pres.push_back(std::move(pre));
    }
    Matrix delta = coeffs.transpose();
    for (Index l = layers() - 1; l >= 0; --l) {
      Eigen::Map<Matrix> gw(grad.data() + weight_offsets_[l], fan_out(l), fan_in(l));
      Eigen::Map<Vector> gb(grad.data() + bias_offsets_[l], fan_out(l));
      gw.noalias() += delta * acts[l].transpose();
      gb += delta.rowwise().sum();
      if (l > 0) {
        Matrix back = weights(l).transpose() * delta;
        delta = back.cwiseProduct((pres[l - 1].array() > Scalar(0)).template cast<Scalar>().matrix());
      }
    }
  }

 private:
  void check_points(const Matrix& points) const {
    if (points.rows() != input_dim()) throw std::invalid_argument("dimension mismatch");
    require_unit_cube(points);
  }

  std::vector<Index> sizes_;
  std::vector<Index> weight_offsets_;
  std::vector<Index> bias_offsets_;
  Vector theta_;
};

}  // namespace distal
