#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cmath>
#include <stdexcept>

namespace distal {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Parameter gradient of a scalar model output, stored as sorted
/// (index, value) pairs. Only entries that may be non-zero are stored.
template <typename Scalar>
using SparseGrad = Eigen::SparseVector<Scalar>;

/// Number of stored entries that are actually non-zero.
template <typename Scalar>
Index nonzero_count(const SparseGrad<Scalar>& g) {
  Index count = 0;
  for (typename SparseGrad<Scalar>::InnerIterator it(g); it; ++it)
    if (it.value() != Scalar(0)) ++count;
  return count;
}

template <typename Scalar>
Scalar l1_norm(const SparseGrad<Scalar>& g) {
  Scalar sum(0);
  for (typename SparseGrad<Scalar>::InnerIterator it(g); it; ++it)
    sum += std::abs(it.value());
  return sum;
}

/// True when no index carries a non-zero value in both gradients. Disjoint
/// support implies a dot product of exactly zero.
template <typename Scalar>
bool supports_disjoint(const SparseGrad<Scalar>& a, const SparseGrad<Scalar>& b) {
  typename SparseGrad<Scalar>::InnerIterator ia(a), ib(b);
  while (ia && ib) {
    if (ia.index() < ib.index()) {
      ++ia;
    } else if (ib.index() < ia.index()) {
      ++ib;
    } else {
      if (ia.value() != Scalar(0) && ib.value() != Scalar(0)) return false;
      ++ia;
      ++ib;
    }
  }
  return true;
}

/// Throws unless every coordinate of `x` lies in [0, 1].
template <typename Derived>
void require_unit_cube(const Eigen::MatrixBase<Derived>& x) {
  for (Index i = 0; i < x.size(); ++i) {
    const auto v = x(i);
    if (!(v >= 0 && v <= 1)) throw std::domain_error("domain violation");
  }
}

template <typename Derived>
void require_dimension(const Eigen::MatrixBase<Derived>& x, Index n) {
  if (x.size() != n) throw std::invalid_argument("dimension mismatch");
}

}  // namespace distal
