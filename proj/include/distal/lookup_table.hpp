#pragma once

#include "distal/types.hpp"

#include <stdexcept>

namespace distal {

/// Piecewise-constant model on [0,1]^n with z^n equal hyper-cube cells.
/// Cell coordinate i is min(floor(x_i * z), z - 1); cells are stored
/// row-major with the first coordinate most significant.
template <typename Scalar_>
class LookupTable {
 public:
  using Scalar = Scalar_;

  LookupTable(Index n, Index z) : n_(n), z_(z) {
    if (n < 1 || z < 1) throw std::invalid_argument("invalid lookup table size");
    Index cells = 1;
    for (Index i = 0; i < n; ++i) cells *= z;
    table_ = VectorX<Scalar>::Zero(cells);
  }

  Index input_dim() const { return n_; }
  Index partitions() const { return z_; }
  Index num_params() const { return table_.size(); }
  const VectorX<Scalar>& params() const { return table_; }
  VectorX<Scalar>& params() { return table_; }

  template <typename Derived>
  Index cell(const Eigen::MatrixBase<Derived>& x) const {
    require_dimension(x, n_);
    require_unit_cube(x);
    Index idx = 0;
    for (Index i = 0; i < n_; ++i) {
      Index c = static_cast<Index>(std::floor(x(i) * Scalar(z_)));
      if (c > z_ - 1) c = z_ - 1;
      idx = idx * z_ + c;
    }
    return idx;
  }

  template <typename Derived>
  Scalar value(const Eigen::MatrixBase<Derived>& x) const {
    return table_(cell(x));
  }

  template <typename Derived>
  SparseGrad<Scalar> param_grad(const Eigen::MatrixBase<Derived>& x) const {
    SparseGrad<Scalar> g(num_params());
    g.insert(cell(x)) = Scalar(1);
    return g;
  }

  VectorX<Scalar> values(const MatrixX<Scalar>& points) const {
    VectorX<Scalar> out(points.cols());
    for (Index s = 0; s < points.cols(); ++s) out(s) = value(points.col(s));
    return out;
  }

  void accumulate_gradient(const MatrixX<Scalar>& points, const VectorX<Scalar>& coeffs,
                           VectorX<Scalar>& grad) const {
    for (Index s = 0; s < points.cols(); ++s) grad(cell(points.col(s))) += coeffs(s);
  }

 private:
  Index n_;
  Index z_;
  VectorX<Scalar> table_;
};

}  // namespace distal
