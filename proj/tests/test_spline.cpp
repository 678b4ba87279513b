#include "distal/spline.hpp"

#include <doctest.h>

#include <random>

using namespace distal;

namespace {

// Dense oracle: every one of the 4z+3 basis functions, evaluated directly.
VectorX<double> dense_basis(Index z, double x) {
  VectorX<double> b(basis_count(z));
  for (Index i = 1; i <= basis_count(z); ++i) b(i - 1) = basis_value(z, i, x);
  return b;
}

double dense_forward(const ZDensitySpline<double>& s, double x) {
  const VectorX<double> b = dense_basis(s.z(), x);
  double sum = 0.0;
  for (Index i = 0; i < b.size(); ++i) sum += s.theta()(i) * b(i);
  return sum;
}

}  // namespace

TEST_CASE("activation S at knots and outside its support") {
  CHECK(activation_s(0.0) == 0.0);
  CHECK(activation_s(2.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(activation_s(1.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(activation_s(3.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(activation_s(4.0) == 0.0);
  CHECK(activation_s(5.0) == 0.0);
  CHECK(activation_s(-0.5) == 0.0);
  CHECK_THROWS_WITH_AS(activation_s(std::nan("")), "non-finite input", std::domain_error);
  CHECK_THROWS_AS(activation_s(std::numeric_limits<double>::infinity()), std::domain_error);
}

TEST_CASE("activation S is C2 at the knots") {
  const double h = 1e-4;
  auto d1 = [&](double x, int side) {
    return side < 0 ? (activation_s(x) - activation_s(x - h)) / h : (activation_s(x + h) - activation_s(x)) / h;
  };
  auto d2 = [&](double x, int side) {
    return side < 0 ? (activation_s(x) - 2 * activation_s(x - h) + activation_s(x - 2 * h)) / (h * h)
                    : (activation_s(x + 2 * h) - 2 * activation_s(x + h) + activation_s(x)) / (h * h);
  };
  for (double knot : {1.0, 2.0, 3.0}) {
    CAPTURE(knot);
    CHECK(std::abs(activation_s(knot - 1e-9) - activation_s(knot + 1e-9)) < 1e-6);
    // One-sided differences carry O(h) bias; the sides agree to that order.
    CHECK(std::abs(d1(knot, -1) - d1(knot, +1)) < 2e-4);
    CHECK(std::abs(d2(knot, -1) - d2(knot, +1)) < 1e-3);
  }
  // Central second difference straddling the knot matches either side.
  for (double knot : {1.0, 2.0, 3.0}) {
    const double c2 = (activation_s(knot + h) - 2 * activation_s(knot) + activation_s(knot - h)) / (h * h);
    CHECK(std::abs(c2 - d2(knot + h, +1)) < 1e-2);
  }
}

TEST_CASE("basis window boundary cases") {
  const auto w0 = basis_window<double>(1, 0.0);
  CHECK(w0.first_index == 1);
  CHECK(w0.values[0] == doctest::Approx(1.0 / 6.0));
  CHECK(w0.values[1] == doctest::Approx(2.0 / 3.0));
  CHECK(w0.values[2] == doctest::Approx(1.0 / 6.0));
  CHECK(w0.values[3] == 0.0);

  const auto w1 = basis_window<double>(1, 1.0);
  CHECK(w1.first_index == 4);
  CHECK(w1.values[0] == 0.0);
  CHECK(w1.values[1] == doctest::Approx(1.0 / 6.0));
  CHECK(w1.values[2] == doctest::Approx(2.0 / 3.0));
  CHECK(w1.values[3] == doctest::Approx(1.0 / 6.0));

  const auto w = basis_window<double>(20, 0.5);
  double sum = 0.0;
  for (double v : w.values) {
    CHECK(v >= 0.0);
    sum += v;
  }
  CHECK(std::abs(sum - dense_basis(20, 0.5).sum()) < 1e-15);
  CHECK(std::abs(sum - 1.0) < 1e-12);

  CHECK_THROWS_WITH_AS(basis_window<double>(3, -0.1), "domain violation", std::domain_error);
  CHECK_THROWS_WITH_AS(basis_window<double>(3, 1.0000001), "domain violation", std::domain_error);
  CHECK_THROWS_AS(basis_window<double>(0, 0.5), std::invalid_argument);
}

TEST_CASE("window agrees with the dense basis and everything else is zero") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Index z : {1, 2, 5, 20}) {
    for (int k = 0; k < 500; ++k) {
      const double x = k == 0 ? 0.0 : (k == 1 ? 1.0 : u(rng));
      const auto w = basis_window<double>(z, x);
      const VectorX<double> dense = dense_basis(z, x);
      REQUIRE(w.first_index >= 1);
      REQUIRE(w.first_index + 3 <= basis_count(z));
      for (Index i = 0; i < dense.size(); ++i) {
        const Index j = i - w.offset();
        if (j >= 0 && j < 4) {
          CHECK(dense(i) == w.values[j]);
        } else {
          CHECK(dense(i) == 0.0);
        }
      }
      for (double v : w.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 2.0 / 3.0 + 1e-15);
      }
      CHECK(std::abs(dense.sum() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("spline forward examples") {
  ZDensitySpline<double> zero(4);
  CHECK(spline_forward(zero, 0.3) == 0.0);

  ZDensitySpline<double> constant(7, VectorX<double>::Constant(basis_count(7), 2.5));
  for (double x : {0.0, 0.123, 0.5, 0.99, 1.0}) CHECK(spline_forward(constant, x) == doctest::Approx(2.5).epsilon(1e-14));

  VectorX<double> one_hot = VectorX<double>::Zero(basis_count(1));
  one_hot(1) = 1.0;  // basis index 2
  ZDensitySpline<double> s(1, one_hot);
  CHECK(spline_forward(s, 0.0) == doctest::Approx(2.0 / 3.0));

  CHECK_THROWS_AS(ZDensitySpline<double>(3, VectorX<double>::Zero(10)), std::invalid_argument);
  CHECK_THROWS_AS(spline_forward(s, 1.5), std::domain_error);
}

TEST_CASE("spline forward is bit-identical to the dense sum") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0), coef(-3.0, 3.0);
  for (Index z : {1, 2, 5, 20}) {
    ZDensitySpline<double> s(z);
    for (int k = 0; k < 200; ++k) {
      for (Index i = 0; i < s.theta().size(); ++i) s.theta()(i) = coef(rng);
      const double x = k == 0 ? 1.0 : u(rng);
      CHECK(spline_forward(s, x) == dense_forward(s, x));
    }
  }
}

TEST_CASE("spline parameter gradient") {
  ZDensitySpline<double> s(1);
  const auto g = spline_param_grad(s, 0.0);
  CHECK(g.nonZeros() == 3);
  CHECK(g.coeff(0) == doctest::Approx(1.0 / 6.0));
  CHECK(g.coeff(1) == doctest::Approx(2.0 / 3.0));
  CHECK(g.coeff(2) == doctest::Approx(1.0 / 6.0));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0), coef(-1.0, 1.0);
  for (Index z : {1, 2, 5, 20}) {
    ZDensitySpline<double> spline(z);
    for (Index i = 0; i < spline.theta().size(); ++i) spline.theta()(i) = coef(rng);
    for (int k = 0; k < 300; ++k) {
      const double x = k == 0 ? 0.0 : (k == 1 ? 1.0 : u(rng));
      const auto grad = spline_param_grad(spline, x);
      const Index nnz = nonzero_count(grad);
      CHECK(nnz <= 4);
      CHECK(nnz >= 3);
      const double l1 = l1_norm(grad);
      CHECK(l1 < 4.0);
      CHECK(std::abs(l1 - 1.0) < 1e-12);
    }
    // Central differences in every coefficient.
    for (int k = 0; k < 10; ++k) {
      const double x = u(rng);
      const VectorX<double> analytic(spline_param_grad(spline, x));
      for (Index i = 0; i < spline.theta().size(); ++i) {
        ZDensitySpline<double> up = spline, down = spline;
        up.theta()(i) += 1e-6;
        down.theta()(i) -= 1e-6;
        const double fd = (spline_forward(up, x) - spline_forward(down, x)) / 2e-6;
        CHECK(std::abs(fd - analytic(i)) < 1e-8);
      }
    }
  }
}

TEST_CASE("distant points have disjoint gradient windows") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Index z : {1, 2, 5, 20}) {
    ZDensitySpline<double> s(z);
    int pairs = 0;
    while (pairs < 1000) {
      const double x = u(rng), y = (pairs % 50 == 0) ? 1.0 : u(rng);
      if (!(std::abs(x - y) > 1.0 / static_cast<double>(z))) {
        if (z == 1) break;  // no pair in [0,1] is further than 1 apart
        continue;
      }
      ++pairs;
      const auto wx = basis_window<double>(z, x), wy = basis_window<double>(z, y);
      CHECK((wx.first_index + 3 < wy.first_index || wy.first_index + 3 < wx.first_index));
      const auto gx = spline_param_grad(s, x), gy = spline_param_grad(s, y);
      CHECK(supports_disjoint(gx, gy));
      CHECK(gx.dot(gy) == 0.0);
    }
  }
}
