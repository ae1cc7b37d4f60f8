#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "smg/problems.hpp"

namespace smg {

// Binary classification dataset in memory. Labels are +1/-1; feature indices
// are 0-based (shifted from the 1-based on-disk convention at parse time).
struct Dataset {
  std::vector<SparseVector> features;
  std::vector<double> labels;
  int dim = 0;
  std::string source;

  int n() const { return static_cast<int>(features.size()); }
};

// Parses LIBSVM lines: "<label> <index>:<value> ...". Positive labels map to
// +1, everything else to -1. Indices must be ascending and 1-based; zero
// values are dropped. Blank lines are skipped; errors carry the line number.
// dim is the maximum index seen unless min_dim forces a larger space (needed
// when a test split mentions fewer features than its training file).
Dataset parse_libsvm(std::istream& in, const std::string& source, int min_dim = 0);
Dataset parse_libsvm_file(const std::string& path, int min_dim = 0);
Dataset parse_libsvm_string(const std::string& text, int min_dim = 0);

// Inverse of the parser (1-based indices, shortest round-trip numbers), so
// parse(serialize(ds)) reproduces ds exactly.
std::string serialize_libsvm(const Dataset& ds);

// Synthetic strongly convex finite sum: n diagonal quadratics on R^dim with
// per-coordinate curvatures drawn uniformly from [1, condition] and linear
// terms b_i = center + spread * z_i, z_i standard normal. Deterministic in
// seed; condition = 1 with spread = 0 collapses every component onto one
// shared minimizer.
std::shared_ptr<DiagonalQuadraticProblem> synth_quadratic_dataset(
    int n, int dim, std::uint64_t seed, double condition, double center_scale = 1.0,
    double spread = 1.0);

// Deterministic holdout split (Fisher-Yates on sample order, first part trains).
struct SplitDataset {
  Dataset train;
  Dataset test;
};
SplitDataset split_dataset(const Dataset& ds, double test_fraction,
                           std::uint64_t seed);

// Fraction of samples with sign(x^T w) matching the label (ties count as +1).
double binary_accuracy(const Dataset& ds, const Vector& w);

}  // namespace smg
