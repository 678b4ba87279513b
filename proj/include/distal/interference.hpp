#pragma once

// Monte Carlo estimates of how far a single training update reaches.
//
// Both estimators average |f_after - f_before| over uniform samples of the
// unit cube (volume 1). Distal interference multiplies by the indicator of
// d(x, v) > delta instead of renormalising to the distal set's volume.

#include "distal/training.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace distal {

enum class Dissimilarity { max_abs, min_abs };

struct DistalSpec {
  Dissimilarity kind = Dissimilarity::max_abs;
  double delta = 0.05;
};

std::string to_string(Dissimilarity kind);

template <typename DerivedX, typename DerivedV>
typename DerivedX::Scalar dissimilarity(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedV>& v,
                                        Dissimilarity kind) {
  if (x.size() != v.size()) throw std::invalid_argument("dimension mismatch");
  if (x.size() == 0) throw std::invalid_argument("empty point");
  const auto diff = (x - v).cwiseAbs();
  return kind == Dissimilarity::max_abs ? diff.maxCoeff() : diff.minCoeff();
}

/// n x count matrix of points drawn from U[0,1)^n.
template <typename Scalar, typename Engine>
MatrixX<Scalar> uniform_points(Index n, Index count, Engine& engine) {
  std::uniform_real_distribution<Scalar> dist(Scalar(0), Scalar(1));
  MatrixX<Scalar> points(n, count);
  for (Index s = 0; s < count; ++s)
    for (Index i = 0; i < n; ++i) points(i, s) = dist(engine);
  return points;
}

template <DifferentiableModel M>
VectorX<typename M::Scalar> absolute_change(const M& before, const M& after,
                                            const MatrixX<typename M::Scalar>& samples) {
  if (samples.cols() == 0) throw std::invalid_argument("empty sample set");
  if (before.input_dim() != after.input_dim()) throw std::invalid_argument("dimension mismatch");
  return (after.values(samples) - before.values(samples)).cwiseAbs();
}

/// Estimate of the L1 function distance between two models on [0,1]^n.
template <DifferentiableModel M>
typename M::Scalar perturbation_mc(const M& before, const M& after, const MatrixX<typename M::Scalar>& samples) {
  return absolute_change(before, after, samples).mean();
}

template <typename Scalar>
struct DistalEstimate {
  Scalar value = Scalar(0);
  Index members = 0;  // samples inside the distal set

  bool empty() const { return members == 0; }
};

/// Mean of |change| * 1[d(x, v) > delta] over precomputed per-sample changes.
template <typename Scalar, typename DerivedV>
DistalEstimate<Scalar> distal_mean(const VectorX<Scalar>& change, const MatrixX<Scalar>& samples,
                                   const Eigen::MatrixBase<DerivedV>& v, const DistalSpec& spec) {
  if (!(spec.delta > 0)) throw std::invalid_argument("delta must be positive");
  DistalEstimate<Scalar> est;
  Scalar sum(0);
  for (Index s = 0; s < samples.cols(); ++s) {
    if (dissimilarity(samples.col(s), v, spec.kind) > Scalar(spec.delta)) {
      sum += change(s);
      ++est.members;
    }
  }
  est.value = sum / Scalar(samples.cols());
  return est;
}

template <DifferentiableModel M, typename DerivedV>
DistalEstimate<typename M::Scalar> distal_interference_mc(const M& before, const M& after,
                                                          const Eigen::MatrixBase<DerivedV>& v,
                                                          const DistalSpec& spec,
                                                          const MatrixX<typename M::Scalar>& samples) {
  if (v.size() != before.input_dim()) throw std::invalid_argument("dimension mismatch");
  return distal_mean(absolute_change(before, after, samples), samples, v, spec);
}

struct McConfig {
  Index n_samples = 100000;
  Index n_trials = 100;
  std::uint64_t sample_seed = 1;
  std::uint64_t trial_seed = 2;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Mean and population standard deviation.
MeanStd summarize(const std::vector<double>& values);

struct InterferenceCell {
  DistalSpec spec;
  MeanStd stats;
  std::vector<double> per_trial;
  Index empty_trials = 0;  // trials with no sample in the distal set
};

struct TrialReport {
  std::string label;
  Index trials = 0;
  MeanStd perturbation;
  std::vector<double> perturbation_per_trial;
  std::vector<InterferenceCell> interference;

  const InterferenceCell& cell(Dissimilarity kind, double delta) const;
};

/// Builds a freshly initialised model from a seed.
using ModelFactory = std::function<Model(std::uint64_t seed)>;

/// Per trial: fresh model, one uniform training point with a standard-normal
/// target, one Adam step (one epoch of batch size 1, MAE), then perturbation
/// and every distal cell on a fresh uniform sample. Trials with the same
/// index share the training pair and the sample across models.
TrialReport run_interference_trials(const std::string& label, const ModelFactory& factory, Index input_dim,
                                    const McConfig& cfg, const std::vector<DistalSpec>& specs,
                                    double learning_rate = 1e-3, int threads = 1);

/// CSV with header model,metric,kind,delta,mean,std. The perturbation row
/// uses kind "none" and delta 0.
void write_report_csv(std::ostream& os, const std::vector<TrialReport>& reports);

/// Shortest decimal that round-trips to the same double.
std::string format_number(double v);

}  // namespace distal
