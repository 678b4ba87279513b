#include "distal/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <thread>

namespace distal {

namespace {

// Sub-stream identifiers under the master seed.
constexpr std::uint64_t kTrainPoints = 1;
constexpr std::uint64_t kTestPoints = 2;
constexpr std::uint64_t kPartitionOrder = 3;
constexpr std::uint64_t kMcSamples = 4;
constexpr std::uint64_t kMcTrials = 5;
constexpr std::uint64_t kModelInit = 1000;
constexpr std::uint64_t kShuffle = 2000;
constexpr std::uint64_t kTaskPoints = 10000;
constexpr std::uint64_t kRehearsalPoints = 20000;

std::uint64_t roster_index(const std::string& name) {
  const auto& names = roster_names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::invalid_argument("unknown model: " + name);
  return static_cast<std::uint64_t>(it - names.begin());
}

template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
}

Dataset<double> test_set(const ExperimentConfig& cfg) {
  auto engine = make_engine(cfg.master_seed, kTestPoints);
  return sample_target(uniform_points<double>(2, cfg.n_test, engine));
}

TrainConfig train_config(const ExperimentConfig& cfg, std::uint64_t shuffle_seed) {
  return TrainConfig{.epochs = cfg.epochs, .batch_size = cfg.batch, .loss = Loss::mae, .shuffle_seed = shuffle_seed};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

double target_2d(const Eigen::Ref<const VectorX<double>>& x) {
  require_dimension(x, 2);
  require_unit_cube(x);
  constexpr double w = 4.0 * std::numbers::pi;
  return std::sin(w * x(0)) * std::sin(w * x(1));
}

Dataset<double> sample_target(const MatrixX<double>& points) {
  Dataset<double> data{points, VectorX<double>(points.cols())};
  for (Index s = 0; s < points.cols(); ++s) data.targets(s) = target_2d(points.col(s));
  return data;
}

std::array<double, 4> PartitionPlan::bounds(Index cell) const {
  if (cell < 0 || cell >= cells()) throw std::out_of_range("partition cell out of range");
  const double w = 1.0 / static_cast<double>(side);
  const auto col = static_cast<double>(cell % side);
  const auto row = static_cast<double>(cell / side);
  return {col * w, (col + 1) * w, row * w, (row + 1) * w};
}

Index PartitionPlan::cell_of(const Eigen::Ref<const VectorX<double>>& x) const {
  require_dimension(x, 2);
  require_unit_cube(x);
  auto axis = [&](double v) { return std::min(static_cast<Index>(std::floor(v * static_cast<double>(side))), side - 1); };
  return axis(x(1)) * side + axis(x(0));
}

PartitionPlan make_partition_plan(Index partitions, std::uint64_t seed) {
  const auto side = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(partitions))));
  if (partitions < 1 || side * side != partitions) throw std::invalid_argument("partitions must be a perfect square");
  PartitionPlan plan;
  plan.side = side;
  plan.order.resize(static_cast<std::size_t>(partitions));
  for (Index i = 0; i < partitions; ++i) plan.order[i] = i;
  auto engine = make_engine(seed);
  std::shuffle(plan.order.begin(), plan.order.end(), engine);
  return plan;
}

MatrixX<double> sample_in_cell(const PartitionPlan& plan, Index cell, Index count, std::uint64_t seed) {
  const auto b = plan.bounds(cell);
  auto engine = make_engine(seed);
  std::uniform_real_distribution<double> u1(b[0], b[1]), u2(b[2], b[3]);
  MatrixX<double> points(2, count);
  for (Index s = 0; s < count; ++s) {
    points(0, s) = u1(engine);
    points(1, s) = u2(engine);
  }
  return points;
}

std::vector<RegressionResult> run_regression(const ExperimentConfig& cfg) {
  auto train_engine = make_engine(cfg.master_seed, kTrainPoints);
  const Dataset<double> train = sample_target(uniform_points<double>(2, cfg.n_train, train_engine));
  const Dataset<double> test = test_set(cfg);

  std::vector<RegressionResult> results(cfg.models.size());
  parallel_for(cfg.models.size(), cfg.threads, [&](std::size_t i) {
    const auto& name = cfg.models[i];
    const auto ri = roster_index(name);
    Model model = make_roster_model(name, cfg, derive_seed(cfg.master_seed, kModelInit + ri));
    AdamState<double> adam(model.num_params(), cfg.lr);
    train_epochs(model, train, train_config(cfg, derive_seed(cfg.master_seed, kShuffle + ri)), adam);
    results[i] = {name, mean_absolute_error(model, train), mean_absolute_error(model, test),
                  make_heatmap(model, cfg.resolution)};
  });
  return results;
}

Dataset<double> task_dataset(const Dataset<double>& task, const Model* snapshot,
                             const MatrixX<double>& rehearsal_inputs) {
  if (snapshot == nullptr || rehearsal_inputs.cols() == 0) return task;
  return concatenate(task, Dataset<double>{rehearsal_inputs, snapshot->values(rehearsal_inputs)});
}

SequentialRun run_sequential(const ExperimentConfig& cfg, bool rehearsal) {
  SequentialRun run;
  run.plan = make_partition_plan(cfg.partitions, derive_seed(cfg.master_seed, kPartitionOrder));
  const Dataset<double> test = test_set(cfg);

  std::vector<Dataset<double>> tasks;
  std::vector<MatrixX<double>> rehearsal_inputs;
  for (std::size_t t = 0; t < run.plan.order.size(); ++t) {
    tasks.push_back(sample_target(sample_in_cell(run.plan, run.plan.order[t], cfg.points_per_partition,
                                                 derive_seed(cfg.master_seed, kTaskPoints + t))));
    if (rehearsal) {
      auto engine = make_engine(cfg.master_seed, kRehearsalPoints + t);
      rehearsal_inputs.push_back(uniform_points<double>(2, cfg.rehearsal_points, engine));
    } else {
      rehearsal_inputs.emplace_back(2, 0);
    }
  }

  run.results.resize(cfg.models.size());
  parallel_for(cfg.models.size(), cfg.threads, [&](std::size_t i) {
    const auto& name = cfg.models[i];
    const auto ri = roster_index(name);
    Model model = make_roster_model(name, cfg, derive_seed(cfg.master_seed, kModelInit + ri));
    const std::uint64_t shuffle_base = derive_seed(cfg.master_seed, kShuffle + ri);
    SequentialResult result;
    result.model = name;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      const Model snapshot = model;
      const Dataset<double> data = task_dataset(tasks[t], rehearsal ? &snapshot : nullptr, rehearsal_inputs[t]);
      AdamState<double> adam(model.num_params(), cfg.lr);
      train_epochs(model, data, train_config(cfg, derive_seed(shuffle_base, t)), adam);
      result.task_test_mae.push_back(mean_absolute_error(model, test));
    }
    result.final_test_mae = result.task_test_mae.back();
    result.heatmap = make_heatmap(model, cfg.resolution);
    run.results[i] = std::move(result);
  });
  return run;
}

std::string run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log) {
  std::filesystem::create_directories(out_dir);
  std::string text = manifest(cfg);
  const bool sequential = cfg.experiment == Experiment::sequential || cfg.experiment == Experiment::rehearsal;
  if (sequential) {
    const auto plan = make_partition_plan(cfg.partitions, derive_seed(cfg.master_seed, kPartitionOrder));
    text += "partition_order=";
    for (std::size_t t = 0; t < plan.order.size(); ++t) text += (t ? "," : "") + std::to_string(plan.order[t]);
    text += '\n';
  }
  log << text << std::flush;
  write_text(out_dir / "manifest.txt", text);

  const std::string exp = to_string(cfg.experiment);
  if (cfg.experiment == Experiment::perturbation) {
    McConfig mc{.n_samples = cfg.mc_samples,
                .n_trials = cfg.trials,
                .sample_seed = derive_seed(cfg.master_seed, kMcSamples),
                .trial_seed = derive_seed(cfg.master_seed, kMcTrials)};
    std::vector<DistalSpec> specs;
    for (auto kind : {Dissimilarity::max_abs, Dissimilarity::min_abs})
      for (double d : cfg.deltas) specs.push_back({kind, d});
    std::vector<TrialReport> reports;
    for (const auto& name : cfg.models) {
      auto factory = [&](std::uint64_t seed) { return make_roster_model(name, cfg, seed); };
      reports.push_back(run_interference_trials(name, factory, 2, mc, specs, cfg.lr, cfg.threads));
      log << name << ": perturbation " << format_number(reports.back().perturbation.mean) << '\n';
    }
    std::ofstream os(out_dir / "perturbation.csv", std::ios::binary);
    write_report_csv(os, reports);
    if (!os) throw std::runtime_error("failed writing perturbation.csv");
  } else if (cfg.experiment == Experiment::regression) {
    const auto results = run_regression(cfg);
    std::string csv = "model,train_mae,test_mae\n";
    for (const auto& r : results) {
      csv += r.model + ',' + format_number(r.train_mae) + ',' + format_number(r.test_mae) + '\n';
      emit_heatmap(r.heatmap, out_dir / ("regression_" + r.model));
      log << r.model << ": test MAE " << format_number(r.test_mae) << '\n';
    }
    write_text(out_dir / "regression.csv", csv);
    emit_heatmap(make_target_heatmap(cfg.resolution), out_dir / "target");
  } else {
    const auto run = run_sequential(cfg, cfg.experiment == Experiment::rehearsal);
    std::string csv = "model,final_test_mae\n";
    std::string trace = "model,task,cell,test_mae\n";
    for (const auto& r : run.results) {
      csv += r.model + ',' + format_number(r.final_test_mae) + '\n';
      for (std::size_t t = 0; t < r.task_test_mae.size(); ++t)
        trace += r.model + ',' + std::to_string(t) + ',' + std::to_string(run.plan.order[t]) + ',' +
                 format_number(r.task_test_mae[t]) + '\n';
      emit_heatmap(r.heatmap, out_dir / (exp + "_" + r.model));
      log << r.model << ": final test MAE " << format_number(r.final_test_mae) << '\n';
    }
    write_text(out_dir / (exp + ".csv"), csv);
    write_text(out_dir / (exp + "_trace.csv"), trace);
  }
  return text;
}

}  // namespace distal
