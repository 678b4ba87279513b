#pragma once

#include "distal/interference.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace distal {

enum class Experiment { perturbation, regression, sequential, rehearsal };

std::string to_string(Experiment e);

/// Names accepted by --models, in roster order.
inline const std::array<std::string, 5>& roster_names() {
  static const std::array<std::string, 5> names{"wide_relu", "deep_relu", "abel", "spline_ann", "lookup"};
  return names;
}

struct ExperimentConfig {
  Experiment experiment = Experiment::regression;
  std::vector<std::string> models{roster_names().begin(), roster_names().end()};
  Index z = 20;
  Index pairs = 6;
  Index n_train = 16000;
  int epochs = 200;
  Index batch = 100;
  double lr = 0.001;
  Index partitions = 16;
  Index points_per_partition = 1000;
  Index rehearsal_points = 1000;
  Index n_test = 10000;
  Index resolution = 200;
  Index trials = 100;
  Index mc_samples = 100000;
  std::vector<double> deltas{0.1, 0.05, 0.01};
  std::uint64_t master_seed = 0;
  int threads = 1;
  std::vector<std::string> overrides;  // keys changed from their defaults

  /// Applies one key=value setting; throws std::invalid_argument on unknown
  /// keys or malformed values.
  void set(const std::string& key, const std::string& value);
};

/// Reads `key=value` lines; blank lines and `#` comments are ignored.
void apply_config_file(ExperimentConfig& cfg, std::istream& in);

/// Every effective setting, one `key=value` per line; overridden keys are
/// listed on a final `overrides=` line.
std::string manifest(const ExperimentConfig& cfg);

/// Architecture and initialiser of a roster model for a 2-D input.
Architecture roster_architecture(const std::string& name, const ExperimentConfig& cfg);
InitSpec<double> roster_init(const std::string& name, std::uint64_t seed);
Model make_roster_model(const std::string& name, const ExperimentConfig& cfg, std::uint64_t seed);

/// sin(4 pi x1) * sin(4 pi x2) on [0,1]^2.
double target_2d(const Eigen::Ref<const VectorX<double>>& x);

Dataset<double> sample_target(const MatrixX<double>& points);

/// Square grid of equal axis-aligned cells over [0,1]^2 and a visiting
/// order. Cell c covers column c % side along x1 and row c / side along x2.
struct PartitionPlan {
  Index side = 4;
  std::vector<Index> order;

  Index cells() const { return side * side; }
  std::array<double, 4> bounds(Index cell) const;  // x1_lo, x1_hi, x2_lo, x2_hi
  Index cell_of(const Eigen::Ref<const VectorX<double>>& x) const;
};

PartitionPlan make_partition_plan(Index partitions, std::uint64_t seed);

/// Uniform points inside one partition cell.
MatrixX<double> sample_in_cell(const PartitionPlan& plan, Index cell, Index count, std::uint64_t seed);

/// values(r, c) is the model output at ((c + 0.5) / R, (r + 0.5) / R); row 0
/// is x2 = 0.
struct Heatmap {
  Index resolution = 0;
  MatrixX<double> values;
};

Heatmap make_heatmap(const Model& model, Index resolution);
Heatmap make_target_heatmap(Index resolution);

/// Grey level for a heatmap value: clamp to [-1.2, 1.2], map linearly to
/// [0, 255] and round half up, so 0 maps to 128.
std::uint8_t pgm_level(double value);

/// Writes `<stem>.csv` (one heatmap row per line) and `<stem>.pgm` (binary
/// 8-bit P5, first image row is x2 = 0).
void emit_heatmap(const Heatmap& h, const std::filesystem::path& stem);
void write_heatmap_csv(std::ostream& os, const Heatmap& h);
Heatmap read_heatmap_csv(std::istream& is);
void write_heatmap_pgm(std::ostream& os, const Heatmap& h);

struct RegressionResult {
  std::string model;
  double train_mae = 0.0;
  double test_mae = 0.0;
  Heatmap heatmap;
};

std::vector<RegressionResult> run_regression(const ExperimentConfig& cfg);

/// Task data for one sequential step: true-target points in the cell,
/// optionally followed by rehearsal inputs labelled by `snapshot`.
Dataset<double> task_dataset(const Dataset<double>& task, const Model* snapshot,
                             const MatrixX<double>& rehearsal_inputs);

struct SequentialResult {
  std::string model;
  double final_test_mae = 0.0;
  std::vector<double> task_test_mae;  // global test MAE after each task
  Heatmap heatmap;
};

struct SequentialRun {
  PartitionPlan plan;
  std::vector<SequentialResult> results;
};

SequentialRun run_sequential(const ExperimentConfig& cfg, bool rehearsal);

/// Runs cfg.experiment, writing manifest.txt, CSV tables and heatmaps into
/// `out_dir`. Returns the manifest text.
std::string run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace distal
