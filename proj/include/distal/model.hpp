#pragma once

#include "distal/abel_spline.hpp"
#include "distal/lookup_table.hpp"
#include "distal/relu_mlp.hpp"
#include "distal/spline_ann.hpp"

#include <concepts>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace distal {

/// What every trainable model in the library provides. Points are columns of
/// an n x N matrix.
template <typename M>
concept DifferentiableModel = requires(M m, const M cm, const MatrixX<typename M::Scalar> pts,
                                       const VectorX<typename M::Scalar> coeffs,
                                       VectorX<typename M::Scalar> grad) {
  typename M::Scalar;
  { cm.input_dim() } -> std::convertible_to<Index>;
  { cm.num_params() } -> std::convertible_to<Index>;
  { cm.value(pts.col(0)) } -> std::convertible_to<typename M::Scalar>;
  { cm.param_grad(pts.col(0)) } -> std::same_as<SparseGrad<typename M::Scalar>>;
  { cm.values(pts) } -> std::same_as<VectorX<typename M::Scalar>>;
  cm.accumulate_gradient(pts, coeffs, grad);
  { m.params() } -> std::same_as<VectorX<typename M::Scalar>&>;
};

enum class InitKind { glorot_uniform, random_uniform };

template <typename Scalar>
struct InitSpec {
  InitKind kind = InitKind::random_uniform;
  std::uint64_t seed = 0;
  Scalar low = Scalar(-0.05);
  Scalar high = Scalar(0.05);
};

/// Seeded 64-bit engine for a (seed, stream) pair.
inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

/// Derives an independent 64-bit seed for a sub-stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  auto engine = make_engine(seed, stream);
  return engine();
}

/// Fills every parameter from U[low, high).
template <DifferentiableModel M>
void init_random_uniform(M& model, const InitSpec<typename M::Scalar>& spec) {
  if (!(spec.low < spec.high)) throw std::invalid_argument("empty initialisation range");
  auto engine = make_engine(spec.seed);
  std::uniform_real_distribution<typename M::Scalar> dist(spec.low, spec.high);
  for (Index i = 0; i < model.num_params(); ++i) model.params()(i) = dist(engine);
}

/// Glorot uniform weights, +-sqrt(6 / (fan_in + fan_out)) per layer, zero
/// biases.
template <typename Scalar>
void init_glorot_uniform(ReluMlp<Scalar>& model, std::uint64_t seed) {
  auto engine = make_engine(seed);
  model.params().setZero();
  for (Index l = 0; l < model.layers(); ++l) {
    const Scalar limit = std::sqrt(Scalar(6) / Scalar(model.fan_in(l) + model.fan_out(l)));
    std::uniform_real_distribution<Scalar> dist(-limit, limit);
    const Index count = model.fan_in(l) * model.fan_out(l);
    for (Index i = 0; i < count; ++i) model.params()(model.weight_offset(l) + i) = dist(engine);
  }
}

/// Architecture descriptors, one per model family.
struct LookupArch {
  Index n = 2;
  Index z = 20;
};
struct SplineAnnArch {
  Index n = 2;
  Index z = 20;
};
struct AbelArch {
  Index n = 2;
  Index z = 20;
  Index pairs = 6;
};
struct ReluArch {
  std::vector<Index> layers;
};
using Architecture = std::variant<LookupArch, SplineAnnArch, AbelArch, ReluArch>;

/// Value type over the four model families. Satisfies DifferentiableModel.
class Model {
 public:
  using Scalar = double;
  using Variant = std::variant<LookupTable<double>, SplineAnn<double>, AbelSpline<double>, ReluMlp<double>>;

  template <typename M>
    requires std::constructible_from<Variant, M>
  Model(M m) : impl_(std::move(m)) {}  // NOLINT(google-explicit-constructor)

  const Variant& variant() const { return impl_; }
  Variant& variant() { return impl_; }

  Index input_dim() const {
    return std::visit([](const auto& m) { return m.input_dim(); }, impl_);
  }
  Index num_params() const {
    return std::visit([](const auto& m) { return m.num_params(); }, impl_);
  }
  const VectorX<double>& params() const {
    return std::visit([](const auto& m) -> const VectorX<double>& { return m.params(); }, impl_);
  }
  VectorX<double>& params() {
    return std::visit([](auto& m) -> VectorX<double>& { return m.params(); }, impl_);
  }

  template <typename Derived>
  double value(const Eigen::MatrixBase<Derived>& x) const {
    return std::visit([&](const auto& m) { return m.value(x); }, impl_);
  }
  template <typename Derived>
  SparseGrad<double> param_grad(const Eigen::MatrixBase<Derived>& x) const {
    return std::visit([&](const auto& m) { return m.param_grad(x); }, impl_);
  }
  VectorX<double> values(const MatrixX<double>& points) const {
    return std::visit([&](const auto& m) { return m.values(points); }, impl_);
  }
  void accumulate_gradient(const MatrixX<double>& points, const VectorX<double>& coeffs,
                           VectorX<double>& grad) const {
    std::visit([&](const auto& m) { m.accumulate_gradient(points, coeffs, grad); }, impl_);
  }

  Architecture architecture() const;

 private:
  Variant impl_;
};

static_assert(DifferentiableModel<LookupTable<double>>);
static_assert(DifferentiableModel<SplineAnn<double>>);
static_assert(DifferentiableModel<AbelSpline<double>>);
static_assert(DifferentiableModel<ReluMlp<double>>);
static_assert(DifferentiableModel<Model>);

/// Builds a model and draws its parameters. Glorot is only defined for the
/// layered ReLU architecture.
Model init_model(const InitSpec<double>& spec, const Architecture& arch);

/// Text dump of (architecture, parameters) that round-trips bit-exactly:
///
///   distal-model 1
///   arch lookup <n> <z> | spline_ann <n> <z> | abel <n> <z> <pairs> | relu <s0> ... <sL>
///   params <count>
///   <one shortest round-trip decimal per line>
void write_model(std::ostream& os, const Model& m);
Model read_model(std::istream& is);

}  // namespace distal
