#include "distal/model.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace distal {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("malformed number in model file: " + s);
  return v;
}

}  // namespace

Architecture Model::architecture() const {
  return std::visit(overloaded{
                        [](const LookupTable<double>& m) -> Architecture {
                          return LookupArch{m.input_dim(), m.partitions()};
                        },
                        [](const SplineAnn<double>& m) -> Architecture {
                          return SplineAnnArch{m.input_dim(), m.partitions()};
                        },
                        [](const AbelSpline<double>& m) -> Architecture {
                          return AbelArch{m.input_dim(), m.partitions(), m.pairs()};
                        },
                        [](const ReluMlp<double>& m) -> Architecture { return ReluArch{m.layer_sizes()}; },
                    },
                    impl_);
}

Model init_model(const InitSpec<double>& spec, const Architecture& arch) {
  Model model = std::visit(overloaded{
                               [](const LookupArch& a) -> Model { return LookupTable<double>(a.n, a.z); },
                               [](const SplineAnnArch& a) -> Model { return SplineAnn<double>(a.n, a.z); },
                               [](const AbelArch& a) -> Model { return AbelSpline<double>(a.n, a.z, a.pairs); },
                               [](const ReluArch& a) -> Model { return ReluMlp<double>(a.layers); },
                           },
                           arch);
  if (spec.kind == InitKind::random_uniform) {
    init_random_uniform(model, spec);
  } else if (auto* mlp = std::get_if<ReluMlp<double>>(&model.variant())) {
    init_glorot_uniform(*mlp, spec.seed);
  } else {
    throw std::invalid_argument("glorot_uniform requires a layered architecture");
  }
  return model;
}

void write_model(std::ostream& os, const Model& m) {
  os << "distal-model 1\narch ";
  std::visit(overloaded{
                 [&](const LookupArch& a) { os << "lookup " << a.n << ' ' << a.z; },
                 [&](const SplineAnnArch& a) { os << "spline_ann " << a.n << ' ' << a.z; },
                 [&](const AbelArch& a) { os << "abel " << a.n << ' ' << a.z << ' ' << a.pairs; },
                 [&](const ReluArch& a) {
                   os << "relu";
                   for (Index s : a.layers) os << ' ' << s;
                 },
             },
             m.architecture());
  os << "\nparams " << m.num_params() << '\n';
  for (Index i = 0; i < m.num_params(); ++i) os << format_double(m.params()(i)) << '\n';
}

Model read_model(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "distal-model 1") throw std::runtime_error("not a distal model file");
  if (!std::getline(is, line)) throw std::runtime_error("missing architecture line");
  std::istringstream arch_line(line);
  std::string tag, kind;
  arch_line >> tag >> kind;
  if (tag != "arch") throw std::runtime_error("missing architecture line");
  Architecture arch;
  if (kind == "lookup") {
    LookupArch a;
    arch_line >> a.n >> a.z;
    arch = a;
  } else if (kind == "spline_ann") {
    SplineAnnArch a;
    arch_line >> a.n >> a.z;
    arch = a;
  } else if (kind == "abel") {
    AbelArch a;
    arch_line >> a.n >> a.z >> a.pairs;
    arch = a;
  } else if (kind == "relu") {
    ReluArch a;
    Index s = 0;
    while (arch_line >> s) a.layers.push_back(s);
    arch = a;
  } else {
    throw std::runtime_error("unknown architecture: " + kind);
  }
  if (arch_line.fail() && !arch_line.eof()) throw std::runtime_error("malformed architecture line");

  Model model = init_model(InitSpec<double>{}, arch);
  if (!std::getline(is, line)) throw std::runtime_error("missing parameter count");
  std::istringstream count_line(line);
  Index count = -1;
  count_line >> tag >> count;
  if (tag != "params" || count != model.num_params()) throw std::runtime_error("parameter count mismatch");
  for (Index i = 0; i < count; ++i) {
    if (!std::getline(is, line)) throw std::runtime_error("truncated parameter list");
    model.params()(i) = parse_double(line);
  }
  return model;
}

}  // namespace distal
