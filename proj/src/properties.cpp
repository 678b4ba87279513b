#include "distal/properties.hpp"

#include "distal/interference.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace distal {

namespace {

class Checker {
 public:
  explicit Checker(std::string name) { result_.name = std::move(name); }

  template <typename Describe>
  void expect(bool ok, Describe&& describe) {
    if (!ok && result_.passed) {
      result_.passed = false;
      result_.detail = describe();
    }
  }

  PropertyResult result() const { return result_; }

 private:
  PropertyResult result_;
};

std::string tag(Index n, Index z, Index pairs = 0) {
  std::ostringstream os;
  os << "n=" << n << " z=" << z;
  if (pairs > 0) os << " K=" << pairs;
  return os.str();
}

template <typename Engine>
VectorX<double> random_point(Index n, Engine& engine) {
  return uniform_points<double>(n, 1, engine).col(0);
}

// Every point of {0, 1/2, 1}^n: corners, edge midpoints and face centres.
std::vector<VectorX<double>> boundary_points(Index n) {
  std::vector<VectorX<double>> out;
  Index count = 1;
  for (Index i = 0; i < n; ++i) count *= 3;
  for (Index code = 0; code < count; ++code) {
    VectorX<double> x(n);
    Index c = code;
    for (Index i = 0; i < n; ++i, c /= 3) x(i) = 0.5 * static_cast<double>(c % 3);
    out.push_back(x);
  }
  return out;
}

// y with min_i |x_i - y_i| > gap (or max_i when `use_max`), by rejection.
template <typename Engine>
bool distal_partner(const VectorX<double>& x, double gap, bool use_max, Engine& engine, VectorX<double>& y) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    y = random_point(x.size(), engine);
    const double d = dissimilarity(x, y, use_max ? Dissimilarity::max_abs : Dissimilarity::min_abs);
    if (d > gap) return true;
  }
  return false;
}

template <typename Engine>
void randomize(Model& m, Engine& engine) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (Index i = 0; i < m.num_params(); ++i) m.params()(i) = dist(engine);
}

}  // namespace

double gradient_check(const Model& model, const VectorX<double>& x, double h) {
  const SparseGrad<double> sparse = model.param_grad(x);
  const VectorX<double> analytic = VectorX<double>(sparse);
  Model probe = model;
  double worst = 0.0;
  const double scale = std::max(1.0, analytic.cwiseAbs().maxCoeff());
  for (Index i = 0; i < model.num_params(); ++i) {
    const double saved = probe.params()(i);
    probe.params()(i) = saved + h;
    const double up = probe.value(x);
    probe.params()(i) = saved - h;
    const double down = probe.value(x);
    probe.params()(i) = saved;
    const double fd = (up - down) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - analytic(i)) / scale);
  }
  return worst;
}

std::vector<PropertyResult> run_property_suite(const PropertySuiteConfig& cfg) {
  auto engine = make_engine(cfg.seed);
  std::vector<PropertyResult> results;

  {
    Checker unity("partition of unity and one-variable sparsity");
    for (Index z : cfg.partitions) {
      ZDensitySpline<double> s(z);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (Index k = 0; k < cfg.samples + 2; ++k) {
        const double x = k == 0 ? 0.0 : (k == 1 ? 1.0 : u(engine));
        const auto g = spline_param_grad(s, x);
        const Index nnz = nonzero_count(g);
        const double l1 = l1_norm(g);
        unity.expect(nnz >= 3 && nnz <= 4, [&] { return "z=" + std::to_string(z) + " nnz=" + std::to_string(nnz); });
        unity.expect(l1 < 4.0 && std::abs(l1 - 1.0) <= 1e-12,
                     [&] { return "z=" + std::to_string(z) + " L1=" + format_number(l1); });
      }
    }
    results.push_back(unity.result());
  }

  Checker sparsity("gradient sparsity");
  Checker bounded("gradient L1 bound");
  Checker trainable("uniform trainability");
  Checker min_distal("min-distal orthogonality");
  Checker max_distal("max-distal orthogonality (lookup table)");

  for (Index z : cfg.partitions) {
    const double gap = 1.0 / static_cast<double>(z);
    for (Index n : cfg.dims) {
      std::vector<std::pair<std::string, Model>> family;
      family.emplace_back("spline_ann " + tag(n, z), SplineAnn<double>(n, z));
      for (Index k : cfg.pairs) family.emplace_back("abel " + tag(n, z, k), AbelSpline<double>(n, z, k));
      family.emplace_back("lookup " + tag(n, z), LookupTable<double>(n, z));

      for (auto& [label, model] : family) {
        const bool is_lookup = std::holds_alternative<LookupTable<double>>(model.variant());
        const auto* abel = std::get_if<AbelSpline<double>>(&model.variant());
        const Index pairs = abel ? abel->pairs() : 0;
        const Index nnz_cap = is_lookup ? 1 : 4 * n * (2 * pairs + 1);

        for (Index s = 0; s < cfg.samples; ++s) {
          randomize(model, engine);
          const double mu = model.params().cwiseAbs().maxCoeff();
          const double l1_cap = abel ? 4.0 * n + 8.0 * n * std::exp(4.0 * mu * n) * std::numbers::pi * std::numbers::pi / 6.0
                                     : (is_lookup ? 1.0 + 1e-12 : 4.0 * n);
          const VectorX<double> x = random_point(n, engine);
          const auto g = model.param_grad(x);
          const Index nnz = nonzero_count(g);
          sparsity.expect(is_lookup ? nnz == 1 : nnz <= nnz_cap,
                          [&] { return label + " nnz=" + std::to_string(nnz); });
          const double l1 = l1_norm(g);
          bounded.expect(l1 < l1_cap,
                         [&] { return label + " L1=" + format_number(l1) + " cap=" + format_number(l1_cap); });

          VectorX<double> y;
          if (is_lookup) {
            if (distal_partner(x, gap, true, engine, y)) {
              const auto gy = model.param_grad(y);
              max_distal.expect(supports_disjoint(g, gy) && g.dot(gy) == 0.0, [&] { return label; });
            }
          } else if (distal_partner(x, gap, false, engine, y)) {
            const auto gy = model.param_grad(y);
            min_distal.expect(supports_disjoint(g, gy) && g.dot(gy) == 0.0, [&] { return label; });
          }
        }

        randomize(model, engine);
        auto points = boundary_points(n);
        for (Index s = 0; s < cfg.trainability_points; ++s) points.push_back(random_point(n, engine));
        for (const auto& x : points) {
          const Index nnz = nonzero_count(model.param_grad(x));
          trainable.expect(nnz > 0, [&] { return label + " zero gradient"; });
        }
      }
    }
  }
  results.push_back(sparsity.result());
  results.push_back(bounded.result());
  results.push_back(trainable.result());
  results.push_back(min_distal.result());
  results.push_back(max_distal.result());

  Checker fd("gradient matches central differences");
  std::vector<std::pair<std::string, Model>> family;
  family.emplace_back("lookup", LookupTable<double>(2, 5));
  family.emplace_back("spline_ann", SplineAnn<double>(2, 5));
  family.emplace_back("abel", AbelSpline<double>(2, 5, 3));
  family.emplace_back("relu", ReluMlp<double>({2, 8, 8, 1}));
  for (auto& [label, model] : family) {
    const auto* mlp = std::get_if<ReluMlp<double>>(&model.variant());
    for (Index c = 0; c < cfg.gradient_configs; ++c) {
      randomize(model, engine);
      VectorX<double> x = random_point(model.input_dim(), engine);
      while (mlp && mlp->min_abs_preactivation(x) < 1e-4) x = random_point(model.input_dim(), engine);
      const double err = gradient_check(model, x);
      fd.expect(err <= 1e-6, [&] { return label + " relative error " + format_number(err); });
    }
  }
  results.push_back(fd.result());
  return results;
}

}  // namespace distal
