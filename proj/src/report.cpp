#include "distal/interference.hpp"

#include <atomic>
#include <charconv>
#include <ostream>
#include <thread>

namespace distal {

std::string to_string(Dissimilarity kind) { return kind == Dissimilarity::max_abs ? "max_abs" : "min_abs"; }

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

MeanStd summarize(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(sq / static_cast<double>(values.size()));
  return out;
}

const InterferenceCell& TrialReport::cell(Dissimilarity kind, double delta) const {
  for (const auto& c : interference)
    if (c.spec.kind == kind && c.spec.delta == delta) return c;
  throw std::out_of_range("no interference cell for " + to_string(kind) + " " + format_number(delta));
}

namespace {

struct TrialResult {
  double perturbation = 0.0;
  std::vector<DistalEstimate<double>> cells;
};

TrialResult run_trial(const ModelFactory& factory, Index input_dim, const McConfig& cfg,
                      const std::vector<DistalSpec>& specs, double learning_rate, Index trial) {
  const auto t = static_cast<std::uint64_t>(trial);
  auto trial_engine = make_engine(cfg.trial_seed, t);
  const MatrixX<double> v = uniform_points<double>(input_dim, 1, trial_engine);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double target = normal(trial_engine);
  const std::uint64_t init_seed = trial_engine();

  const Model before = factory(init_seed);
  if (before.input_dim() != input_dim) throw std::invalid_argument("dimension mismatch");
  Model after = before;
  AdamState<double> adam(after.num_params(), learning_rate);
  TrainConfig one_step{.epochs = 1, .batch_size = 1, .loss = Loss::mae, .shuffle_seed = init_seed};
  Dataset<double> data{v, VectorX<double>::Constant(1, target)};
  train_epochs(after, data, one_step, adam);

  auto sample_engine = make_engine(cfg.sample_seed, t);
  const MatrixX<double> samples = uniform_points<double>(input_dim, cfg.n_samples, sample_engine);
  const VectorX<double> change = absolute_change(before, after, samples);

  TrialResult result;
  result.perturbation = change.mean();
  for (const auto& spec : specs) result.cells.push_back(distal_mean(change, samples, v.col(0), spec));
  return result;
}

}  // namespace

TrialReport run_interference_trials(const std::string& label, const ModelFactory& factory, Index input_dim,
                                    const McConfig& cfg, const std::vector<DistalSpec>& specs,
                                    double learning_rate, int threads) {
  if (cfg.n_samples < 1 || cfg.n_trials < 1) throw std::invalid_argument("invalid Monte Carlo configuration");
  std::vector<TrialResult> results(static_cast<std::size_t>(cfg.n_trials));
  std::atomic<Index> next{0};
  auto worker = [&] {
    for (Index t = next++; t < cfg.n_trials; t = next++)
      results[t] = run_trial(factory, input_dim, cfg, specs, learning_rate, t);
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  TrialReport report;
  report.label = label;
  report.trials = cfg.n_trials;
  for (const auto& r : results) report.perturbation_per_trial.push_back(r.perturbation);
  report.perturbation = summarize(report.perturbation_per_trial);
  for (std::size_t c = 0; c < specs.size(); ++c) {
    InterferenceCell cell;
    cell.spec = specs[c];
    for (const auto& r : results) {
      cell.per_trial.push_back(r.cells[c].value);
      if (r.cells[c].empty()) ++cell.empty_trials;
    }
    cell.stats = summarize(cell.per_trial);
    report.interference.push_back(std::move(cell));
  }
  return report;
}

void write_report_csv(std::ostream& os, const std::vector<TrialReport>& reports) {
  os << "model,metric,kind,delta,mean,std\n";
  for (const auto& r : reports) {
    os << r.label << ",perturbation,none,0," << format_number(r.perturbation.mean) << ','
       << format_number(r.perturbation.std) << '\n';
    for (const auto& c : r.interference)
      os << r.label << ",distal_interference," << to_string(c.spec.kind) << ',' << format_number(c.spec.delta)
         << ',' << format_number(c.stats.mean) << ',' << format_number(c.stats.std) << '\n';
  }
}

}  // namespace distal
