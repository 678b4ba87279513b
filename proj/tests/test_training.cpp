#include "distal/training.hpp"

#include <doctest.h>

#include <random>

using namespace distal;

TEST_CASE("loss values and derivatives") {
  auto [v0, d0] = loss_value_and_dloss(Loss::mae, 2.0, 2.0);
  CHECK(v0 == 0.0);
  CHECK(d0 == 0.0);
  auto [v1, d1] = loss_value_and_dloss(Loss::mae, 3.0, 1.0);
  CHECK(v1 == 2.0);
  CHECK(d1 == 1.0);
  auto [v2, d2] = loss_value_and_dloss(Loss::mae, -3.0, 1.0);
  CHECK(v2 == 4.0);
  CHECK(d2 == -1.0);
  auto [v3, d3] = loss_value_and_dloss(Loss::mse, 3.0, 1.0);
  CHECK(v3 == 4.0);
  CHECK(d3 == 4.0);
  CHECK_THROWS_AS(loss_value_and_dloss(Loss::mse, std::nan(""), 1.0), std::domain_error);
}

TEST_CASE("Adam step") {
  SUBCASE("zero gradient with zero moments leaves parameters bit-identical") {
    AdamState<double> state(4);
    VectorX<double> params(4);
    params << 0.1, -0.0, -7.25, 1e-300;
    const VectorX<double> before = params;
    adam_step(state, params, VectorX<double>::Zero(4));
    for (Index i = 0; i < 4; ++i) CHECK(std::signbit(params(i)) == std::signbit(before(i)));
    CHECK(params == before);
  }
  SUBCASE("first step moves by the learning rate") {
    AdamState<double> state(1, 0.001);
    VectorX<double> params = VectorX<double>::Constant(1, 0.5);
    adam_step(state, params, VectorX<double>::Constant(1, 1.0));
    CHECK(params(0) - 0.5 == doctest::Approx(-0.001).epsilon(1e-7));
    CHECK(state.t == 1);
  }
  SUBCASE("matches a scalar reference over several steps") {
    AdamState<double> state(1, 0.01);
    VectorX<double> params = VectorX<double>::Constant(1, 1.0);
    double theta = 1.0, m = 0.0, v = 0.0;
    const double grads[] = {0.3, -1.2, 0.7, 0.0, 2.5};
    int t = 0;
    for (double g : grads) {
      adam_step(state, params, VectorX<double>::Constant(1, g));
      ++t;
      m = 0.9 * m + 0.1 * g;
      v = 0.999 * v + 0.001 * g * g;
      const double mh = m / (1 - std::pow(0.9, t)), vh = v / (1 - std::pow(0.999, t));
      theta -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
      CHECK(params(0) == doctest::Approx(theta).epsilon(1e-14));
    }
  }
  SUBCASE("size mismatch") {
    AdamState<double> state(2);
    VectorX<double> params(3);
    CHECK_THROWS_AS(adam_step(state, params, VectorX<double>::Zero(3)), std::invalid_argument);
  }
}

namespace {

Dataset<double> line_data(Index count) {
  Dataset<double> d{MatrixX<double>(1, count), VectorX<double>(count)};
  for (Index s = 0; s < count; ++s) {
    d.points(0, s) = (static_cast<double>(s) + 0.5) / static_cast<double>(count);
    d.targets(s) = d.points(0, s);
  }
  return d;
}

}  // namespace

TEST_CASE("training on zero-loss data changes nothing") {
  Model m = init_model({InitKind::random_uniform, 5}, AbelArch{2, 6, 2});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  Dataset<double> d{MatrixX<double>(2, 50), VectorX<double>(50)};
  for (Index s = 0; s < 50; ++s) d.points.col(s) << u(rng), u(rng);
  d.targets = m.values(d.points);
  const VectorX<double> before = m.params();
  AdamState<double> state(m.num_params());
  train_epochs(m, d, TrainConfig{3, 7, Loss::mae, 1}, state);
  CHECK(m.params() == before);
}

TEST_CASE("one point touches only its window parameters") {
  Model m = init_model({InitKind::random_uniform, 9}, SplineAnnArch{2, 20});
  const VectorX<double> before = m.params();
  Dataset<double> d{MatrixX<double>(2, 1), VectorX<double>::Constant(1, 3.0)};
  d.points << 0.37, 0.81;
  const auto support = m.param_grad(d.points.col(0));
  AdamState<double> state(m.num_params());
  train_epochs(m, d, TrainConfig{1, 1, Loss::mae, 0}, state);
  Index changed = 0;
  for (Index i = 0; i < m.num_params(); ++i) {
    const bool in_support = support.coeff(i) != 0.0;
    if (in_support) {
      CHECK(m.params()(i) != before(i));
      CHECK(state.m(i) != 0.0);
      ++changed;
    } else {
      CHECK(m.params()(i) == before(i));
      CHECK(state.m(i) == 0.0);
      CHECK(state.v(i) == 0.0);
    }
  }
  CHECK(changed <= 8);
  CHECK(changed >= 6);
}

TEST_CASE("training a subregion leaves unreachable parameters bit-identical") {
  Model m = init_model({InitKind::random_uniform, 2}, AbelArch{2, 10, 3});
  const VectorX<double> before = m.params();
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  Dataset<double> d{MatrixX<double>(2, 64), VectorX<double>(64)};
  for (Index s = 0; s < 64; ++s) {
    d.points.col(s) << u(rng), u(rng);
    d.targets(s) = 1.0;
  }
  VectorX<double> reachable = VectorX<double>::Zero(m.num_params());
  for (Index s = 0; s < 64; ++s) {
    const SparseGrad<double> g = m.param_grad(d.points.col(s));
    for (SparseGrad<double>::InnerIterator it(g); it; ++it) reachable(it.index()) = 1;
  }
  AdamState<double> state(m.num_params());
  train_epochs(m, d, TrainConfig{5, 8, Loss::mae, 3}, state);
  Index untouched = 0;
  for (Index i = 0; i < m.num_params(); ++i)
    if (reachable(i) == 0) {
      CHECK(m.params()(i) == before(i));
      ++untouched;
    }
  CHECK(untouched > m.num_params() / 2);
}

TEST_CASE("same shuffle seed gives identical trajectories") {
  auto run = [](std::uint64_t seed) {
    Model m = init_model({InitKind::glorot_uniform, 1}, ReluArch{{2, 8, 8, 1}});
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0, 1);
    Dataset<double> d{MatrixX<double>(2, 40), VectorX<double>(40)};
    for (Index s = 0; s < 40; ++s) {
      d.points.col(s) << u(rng), u(rng);
      d.targets(s) = d.points(0, s) - d.points(1, s);
    }
    AdamState<double> state(m.num_params());
    train_epochs(m, d, TrainConfig{4, 6, Loss::mse, seed}, state);
    return VectorX<double>(m.params());
  };
  CHECK(run(5) == run(5));
  CHECK(run(5) != run(6));
}

TEST_CASE("fitting y = x with a one-variable spline") {
  const Dataset<double> d = line_data(256);
  // Least-squares oracle: cubic B-splines reproduce linear functions exactly.
  const Index z = 5;
  MatrixX<double> design(256, basis_count(z));
  for (Index s = 0; s < 256; ++s)
    for (Index i = 1; i <= basis_count(z); ++i) design(s, i - 1) = basis_value(z, i, d.points(0, s));
  const VectorX<double> lsq = design.completeOrthogonalDecomposition().solve(d.targets);
  CHECK((design * lsq - d.targets).cwiseAbs().maxCoeff() < 1e-10);

  Model m = init_model({InitKind::random_uniform, 4}, SplineAnnArch{1, z});
  AdamState<double> state(m.num_params());
  train_epochs(m, d, TrainConfig{500, 16, Loss::mae, 8}, state);
  const double mae = mean_absolute_error(m, d);
  CHECK(mae < 0.01);
}

TEST_CASE("full-batch MSE training of a spline ANN does not increase the loss") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  Dataset<double> d{MatrixX<double>(2, 200), VectorX<double>(200)};
  for (Index s = 0; s < 200; ++s) {
    d.points.col(s) << u(rng), u(rng);
    d.targets(s) = std::sin(3 * d.points(0, s)) + d.points(1, s) * d.points(1, s);
  }
  Model m = init_model({InitKind::random_uniform, 2}, SplineAnnArch{2, 3});
  AdamState<double> state(m.num_params(), 0.005);
  const auto history = train_epochs(m, d, TrainConfig{150, 200, Loss::mse, 0}, state);
  for (std::size_t e = 1; e < history.size(); ++e) CHECK(history[e] <= history[e - 1] + 1e-9);
  CHECK(history.back() < 0.5 * history.front());
}

TEST_CASE("training rejects invalid input") {
  Model m = SplineAnn<double>(2, 3);
  AdamState<double> state(m.num_params());
  Dataset<double> empty{MatrixX<double>(2, 0), VectorX<double>(0)};
  CHECK_THROWS_AS(train_epochs(m, empty, TrainConfig{}, state), std::invalid_argument);
  Dataset<double> outside{MatrixX<double>::Constant(2, 1, 1.5), VectorX<double>::Zero(1)};
  CHECK_THROWS_AS(train_epochs(m, outside, TrainConfig{}, state), std::domain_error);
  Dataset<double> ok{MatrixX<double>::Constant(2, 1, 0.5), VectorX<double>::Zero(1)};
  CHECK_THROWS_AS(train_epochs(m, ok, TrainConfig{0, 1, Loss::mae, 0}, state), std::invalid_argument);
}
