#pragma once

#include "distal/spline_ann.hpp"

#include <cmath>

namespace distal {

/// Antisymmetric bounded exponential layer spline:
///
///   A(x) = F(x) + sum_{k=1..K} (exp(G_k(x)) - exp(H_k(x))) / k^2
///
/// where F, G_k and H_k are additive splines sharing one partition number.
/// Parameter layout is [F | G_1 .. G_K | H_1 .. H_K], each block n*(4z+3)
/// wide and laid out like SplineAnn.
template <typename Scalar_>
class AbelSpline {
 public:
  using Scalar = Scalar_;

  AbelSpline(Index n, Index z, Index pairs) : n_(n), z_(z), pairs_(pairs) {
    if (n < 1 || z < 1 || pairs < 1) throw std::invalid_argument("invalid ABEL-Spline size");
    theta_ = VectorX<Scalar>::Zero(block_width() * (2 * pairs + 1));
  }

  Index input_dim() const { return n_; }
  Index partitions() const { return z_; }
  Index pairs() const { return pairs_; }
  Index num_params() const { return theta_.size(); }
  const VectorX<Scalar>& params() const { return theta_; }
  VectorX<Scalar>& params() { return theta_; }

  Index block_width() const { return n_ * basis_count(z_); }
  Index f_offset() const { return 0; }
  Index g_offset(Index k) const { return k * block_width(); }
  Index h_offset(Index k) const { return (pairs_ + k) * block_width(); }

  static Scalar scale(Index k) { return Scalar(1) / Scalar(k * k); }

  template <typename Derived>
  Scalar value(const Eigen::MatrixBase<Derived>& x) const {
    require_dimension(x, n_);
    const auto windows = detail::coordinate_windows<Scalar>(z_, x);
    const Index stride = basis_count(z_);
    Scalar out = detail::additive_sum(theta_, f_offset(), stride, windows);
    for (Index k = 1; k <= pairs_; ++k) {
      const Scalar g = detail::additive_sum(theta_, g_offset(k), stride, windows);
      const Scalar h = detail::additive_sum(theta_, h_offset(k), stride, windows);
      out += scale(k) * (std::exp(g) - std::exp(h));
    }
    return out;
  }

  template <typename Derived>
  SparseGrad<Scalar> param_grad(const Eigen::MatrixBase<Derived>& x) const {
    require_dimension(x, n_);
    const auto windows = detail::coordinate_windows<Scalar>(z_, x);
    const Index stride = basis_count(z_);
    std::vector<Scalar> g_scale(pairs_ + 1), h_scale(pairs_ + 1);
    for (Index k = 1; k <= pairs_; ++k) {
      g_scale[k] = scale(k) * std::exp(detail::additive_sum(theta_, g_offset(k), stride, windows));
      h_scale[k] = -scale(k) * std::exp(detail::additive_sum(theta_, h_offset(k), stride, windows));
    }
    SparseGrad<Scalar> grad(num_params());
    grad.reserve(4 * n_ * (2 * pairs_ + 1));
    detail::insert_block(grad, f_offset(), stride, windows, Scalar(1));
    for (Index k = 1; k <= pairs_; ++k) detail::insert_block(grad, g_offset(k), stride, windows, g_scale[k]);
    for (Index k = 1; k <= pairs_; ++k) detail::insert_block(grad, h_offset(k), stride, windows, h_scale[k]);
    return grad;
  }

  VectorX<Scalar> values(const MatrixX<Scalar>& points) const {
    VectorX<Scalar> out(points.cols());
    for (Index s = 0; s < points.cols(); ++s) out(s) = value(points.col(s));
    return out;
  }

  void accumulate_gradient(const MatrixX<Scalar>& points, const VectorX<Scalar>& coeffs,
                           VectorX<Scalar>& grad) const {
    const Index stride = basis_count(z_);
    for (Index s = 0; s < points.cols(); ++s) {
      require_dimension(points.col(s), n_);
      const auto windows = detail::coordinate_windows<Scalar>(z_, points.col(s));
      const Scalar c = coeffs(s);
      detail::add_block(grad, f_offset(), stride, windows, c);
      for (Index k = 1; k <= pairs_; ++k) {
        const Scalar g = detail::additive_sum(theta_, g_offset(k), stride, windows);
        const Scalar h = detail::additive_sum(theta_, h_offset(k), stride, windows);
        detail::add_block(grad, g_offset(k), stride, windows, c * scale(k) * std::exp(g));
        detail::add_block(grad, h_offset(k), stride, windows, -c * scale(k) * std::exp(h));
      }
    }
  }

 private:
  Index n_;
  Index z_;
  Index pairs_;
  VectorX<Scalar> theta_;
};

}  // namespace distal
