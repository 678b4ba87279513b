#pragma once

#include "distal/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace distal {

struct PropertyResult {
  std::string name;
  bool passed = true;
  std::string detail;  // first violation, if any
};

struct PropertySuiteConfig {
  std::vector<Index> partitions{1, 5, 20};
  std::vector<Index> dims{1, 2, 3};
  std::vector<Index> pairs{1, 6};
  Index samples = 1000;            // random (x, params) draws per model
  Index trainability_points = 10000;
  Index gradient_configs = 10;     // finite-difference checks per family
  std::uint64_t seed = 12345;
};

/// Structural guarantees of the partition-based models, checked by sampling:
/// gradient sparsity, gradient L1 bounds, non-zero gradients everywhere
/// (including corners), disjoint gradient support for distal point pairs,
/// and agreement of every family's gradient with central differences.
std::vector<PropertyResult> run_property_suite(const PropertySuiteConfig& cfg = {});

/// Largest |fd - g| / max(1, max|g|) over all parameters, where fd is the
/// central difference of model.value with step h.
double gradient_check(const Model& model, const VectorX<double>& x, double h = 1e-6);

}  // namespace distal
