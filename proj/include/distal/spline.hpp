#pragma once

// Cardinal cubic B-splines on [0, 1].
//
// A z-density spline has 4z+3 basis functions S_i(x) = S(4z*x + 4 - i) with
// 1-based i, all sharing the activation S below. Storage is 0-based: basis i
// lives at coefficient offset i-1. That conversion happens only in
// BasisWindow::offset().

#include "distal/types.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace distal {

namespace detail {

// Unchecked cubic B-spline kernel, supported on (0, 4).
template <typename Scalar>
Scalar cubic_bspline(Scalar x) {
  const Scalar sixth = Scalar(1) / Scalar(6);
  if (x < Scalar(0) || x >= Scalar(4)) return Scalar(0);
  if (x < Scalar(1)) return sixth * x * x * x;
  if (x < Scalar(2)) {
    const Scalar t = x - Scalar(1);
    return sixth * (Scalar(-3) * t * t * t + Scalar(3) * t * t + Scalar(3) * t + Scalar(1));
  }
  if (x < Scalar(3)) {
    const Scalar t = x - Scalar(2);
    return sixth * (Scalar(3) * t * t * t - Scalar(6) * t * t + Scalar(4));
  }
  const Scalar t = Scalar(4) - x;
  return sixth * t * t * t;
}

}  // namespace detail

/// The piecewise cubic activation S(x). Zero outside [0, 4], C2 everywhere.
template <typename Scalar>
Scalar activation_s(Scalar x) {
  if (!std::isfinite(x)) throw std::domain_error("non-finite input");
  return detail::cubic_bspline(x);
}

/// Number of basis functions of a z-density spline.
inline Index basis_count(Index z) { return 4 * z + 3; }

/// The four basis values that can be non-zero at a point.
template <typename Scalar>
struct BasisWindow {
  Index first_index = 1;  // 1-based, in 1..4z+1
  std::array<Scalar, 4> values{};

  /// 0-based coefficient offset of values[0].
  Index offset() const { return first_index - 1; }
};

/// Basis values S_i(x) for i = first_index..first_index+3. Every basis index
/// outside the window is exactly zero at x.
template <typename Scalar>
BasisWindow<Scalar> basis_window(Index z, Scalar x) {
  if (z < 1) throw std::invalid_argument("partition number must be positive");
  if (!(x >= Scalar(0) && x <= Scalar(1))) throw std::domain_error("domain violation");
  const Scalar u = Scalar(4 * z) * x;
  Index first = static_cast<Index>(std::floor(u)) + 1;
  // x = 1 would start the window at 4z+1; keep it inside 1..4z+3.
  if (first > 4 * z) first = 4 * z;
  BasisWindow<Scalar> w;
  w.first_index = first;
  for (Index j = 0; j < 4; ++j)
    w.values[j] = detail::cubic_bspline(u + Scalar(4 - (first + j)));
  return w;
}

/// Dense evaluation of S_i(x) for a single 1-based basis index.
template <typename Scalar>
Scalar basis_value(Index z, Index i, Scalar x) {
  return detail::cubic_bspline(Scalar(4 * z) * x + Scalar(4 - i));
}

/// One-variable cardinal cubic B-spline with 4z+3 coefficients.
template <typename Scalar>
class ZDensitySpline {
 public:
  explicit ZDensitySpline(Index z) : z_(z), theta_(VectorX<Scalar>::Zero(basis_count(z))) {
    if (z < 1) throw std::invalid_argument("partition number must be positive");
  }

  ZDensitySpline(Index z, VectorX<Scalar> theta) : z_(z), theta_(std::move(theta)) {
    if (z < 1) throw std::invalid_argument("partition number must be positive");
    if (theta_.size() != basis_count(z))
      throw std::invalid_argument("coefficient vector must have 4z+3 entries");
  }

  Index z() const { return z_; }
  const VectorX<Scalar>& theta() const { return theta_; }
  VectorX<Scalar>& theta() { return theta_; }

 private:
  Index z_;
  VectorX<Scalar> theta_;
};

/// Sum of theta_i * S_i(x) over the window, accumulated in index order
/// starting from zero so it matches the dense sum bit for bit.
template <typename Scalar>
Scalar spline_forward(const ZDensitySpline<Scalar>& s, Scalar x) {
  const auto w = basis_window(s.z(), x);
  Scalar sum(0);
  for (Index j = 0; j < 4; ++j) sum += s.theta()(w.offset() + j) * w.values[j];
  return sum;
}

/// d f / d theta_i = S_i(x); exact zeros are not stored.
template <typename Scalar>
SparseGrad<Scalar> spline_param_grad(const ZDensitySpline<Scalar>& s, Scalar x) {
  const auto w = basis_window(s.z(), x);
  SparseGrad<Scalar> g(basis_count(s.z()));
  g.reserve(4);
  for (Index j = 0; j < 4; ++j)
    if (w.values[j] != Scalar(0)) g.insertBack(w.offset() + j) = w.values[j];
  return g;
}

}  // namespace distal
