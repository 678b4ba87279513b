#include "distal/harness.hpp"
#include "distal/properties.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

int run_selftest(std::ostream& out) {
  bool ok = true;
  for (const auto& r : distal::run_property_suite()) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.passed) out << ": " << r.detail;
    out << '\n';
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distal interference experiments for spline, lookup-table and ReLU models"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::string models;
  std::string config_path;
  int threads = 1;
  for (const char* name : {"perturbation", "regression", "sequential", "rehearsal"}) {
    auto* sub = app.add_subcommand(name, std::string("Run the ") + name + " experiment");
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("--out-dir", out_dir, "Directory for manifest, CSV tables and heatmaps");
    sub->add_option("--models", models, "Comma-separated subset of wide_relu,deep_relu,abel,spline_ann,lookup");
    sub->add_option("--config", config_path, "File of key=value overrides");
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  }
  app.add_subcommand("selftest", "Check gradient sparsity, bounds, trainability and orthogonality");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  auto* sub = app.get_subcommands().front();
  if (sub->get_name() == "selftest") return run_selftest(std::cout);

  try {
    distal::ExperimentConfig cfg;
    const std::string name = sub->get_name();
    cfg.experiment = name == "perturbation" ? distal::Experiment::perturbation
                     : name == "regression" ? distal::Experiment::regression
                     : name == "sequential" ? distal::Experiment::sequential
                                            : distal::Experiment::rehearsal;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw std::runtime_error("cannot read config file " + config_path);
      distal::apply_config_file(cfg, in);
    }
    if (sub->count("--seed")) cfg.set("seed", std::to_string(seed));
    if (!models.empty()) cfg.set("models", models);
    if (sub->count("--threads")) cfg.set("threads", std::to_string(threads));
    distal::run_experiment(cfg, out_dir, std::cout);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
