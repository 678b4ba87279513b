#pragma once

#include "distal/spline.hpp"

#include <vector>

namespace distal {

namespace detail {

// One basis window per input coordinate, all with the same partition number.
template <typename Scalar, typename Derived>
std::vector<BasisWindow<Scalar>> coordinate_windows(Index z, const Eigen::MatrixBase<Derived>& x) {
  std::vector<BasisWindow<Scalar>> windows(static_cast<std::size_t>(x.size()));
  for (Index j = 0; j < x.size(); ++j) windows[j] = basis_window<Scalar>(z, x(j));
  return windows;
}

// Sum over coordinates of the additive spline stored at theta[block_offset..].
template <typename Scalar>
Scalar additive_sum(const VectorX<Scalar>& theta, Index block_offset, Index stride,
                    const std::vector<BasisWindow<Scalar>>& windows) {
  Scalar sum(0);
  for (std::size_t j = 0; j < windows.size(); ++j) {
    const auto& w = windows[j];
    const Index base = block_offset + static_cast<Index>(j) * stride + w.offset();
    for (Index t = 0; t < 4; ++t) sum += theta(base + t) * w.values[t];
  }
  return sum;
}

template <typename Scalar>
void insert_block(SparseGrad<Scalar>& g, Index block_offset, Index stride,
                  const std::vector<BasisWindow<Scalar>>& windows, Scalar scale) {
  for (std::size_t j = 0; j < windows.size(); ++j) {
    const auto& w = windows[j];
    const Index base = block_offset + static_cast<Index>(j) * stride + w.offset();
    for (Index t = 0; t < 4; ++t)
      if (w.values[t] != Scalar(0)) g.insertBack(base + t) = scale * w.values[t];
  }
}

template <typename Scalar>
void add_block(VectorX<Scalar>& grad, Index block_offset, Index stride,
               const std::vector<BasisWindow<Scalar>>& windows, Scalar scale) {
  for (std::size_t j = 0; j < windows.size(); ++j) {
    const auto& w = windows[j];
    const Index base = block_offset + static_cast<Index>(j) * stride + w.offset();
    for (Index t = 0; t < 4; ++t) grad(base + t) += scale * w.values[t];
  }
}

}  // namespace detail

/// Additive model: one z-density spline per input coordinate. Coefficients
/// for coordinate j occupy [j*(4z+3), (j+1)*(4z+3)).
template <typename Scalar_>
class SplineAnn {
 public:
  using Scalar = Scalar_;

  SplineAnn(Index n, Index z) : n_(n), z_(z) {
    if (n < 1 || z < 1) throw std::invalid_argument("invalid spline ANN size");
    theta_ = VectorX<Scalar>::Zero(n * basis_count(z));
  }

  Index input_dim() const { return n_; }
  Index partitions() const { return z_; }
  Index num_params() const { return theta_.size(); }
  const VectorX<Scalar>& params() const { return theta_; }
  VectorX<Scalar>& params() { return theta_; }

  template <typename Derived>
  Scalar value(const Eigen::MatrixBase<Derived>& x) const {
    require_dimension(x, n_);
    return detail::additive_sum(theta_, 0, basis_count(z_), detail::coordinate_windows<Scalar>(z_, x));
  }

  template <typename Derived>
  SparseGrad<Scalar> param_grad(const Eigen::MatrixBase<Derived>& x) const {
    require_dimension(x, n_);
    SparseGrad<Scalar> g(num_params());
    g.reserve(4 * n_);
    detail::insert_block(g, 0, basis_count(z_), detail::coordinate_windows<Scalar>(z_, x), Scalar(1));
    return g;
  }

  VectorX<Scalar> values(const MatrixX<Scalar>& points) const {
    VectorX<Scalar> out(points.cols());
    for (Index s = 0; s < points.cols(); ++s) out(s) = value(points.col(s));
    return out;
  }

  void accumulate_gradient(const MatrixX<Scalar>& points, const VectorX<Scalar>& coeffs,
                           VectorX<Scalar>& grad) const {
    for (Index s = 0; s < points.cols(); ++s) {
      require_dimension(points.col(s), n_);
      detail::add_block(grad, 0, basis_count(z_), detail::coordinate_windows<Scalar>(z_, points.col(s)),
                        coeffs(s));
    }
  }

 private:
  Index n_;
  Index z_;
  VectorX<Scalar> theta_;
};

}  // namespace distal
