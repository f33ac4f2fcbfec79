#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "alrank/pool.hpp"
#include "alrank/scorers.hpp"

// Data-parallel inner loops of the engine. Every kernel in `alrank::kernels`
// is OpenMP-parallel over independent items and writes results by index, so
// its output is bitwise identical to the serial twin in
// `alrank::kernels::reference`. Tests and the benchmark compare the two.

namespace alrank::kernels {

/// Runs fn(i) for i in [0, n). fn must only write state owned by index i.
template <typename F>
void parallel_for(std::size_t n, F&& fn) {
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
}

std::vector<ScoreReport> score_sets(const std::vector<const EnsembleCaptionSet*>& sets,
                                    Strategy strategy, int model);

struct Assignment {
  std::vector<int> label;
  std::vector<double> dist2;
};

/// Nearest centroid per point (squared Euclidean, ties to the lowest index).
Assignment nearest_centroid(const std::vector<FeatureVec>& points,
                            const std::vector<FeatureVec>& centroids);

/// Euclidean distance from every query to its nearest reference.
std::vector<double> nearest_distances(const std::vector<FeatureVec>& queries,
                                      const std::vector<FeatureVec>& references);

/// min_dist2[i] = min(min_dist2[i], |points[i] - anchor|^2) for every i.
void relax_min_distances(const std::vector<FeatureVec>& points, const FeatureVec& anchor,
                         std::vector<double>& min_dist2);

namespace reference {

template <typename F>
void parallel_for(std::size_t n, F&& fn) {
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

std::vector<ScoreReport> score_sets(const std::vector<const EnsembleCaptionSet*>& sets,
                                    Strategy strategy, int model);
Assignment nearest_centroid(const std::vector<FeatureVec>& points,
                            const std::vector<FeatureVec>& centroids);
std::vector<double> nearest_distances(const std::vector<FeatureVec>& queries,
                                      const std::vector<FeatureVec>& references);
void relax_min_distances(const std::vector<FeatureVec>& points, const FeatureVec& anchor,
                         std::vector<double>& min_dist2);

}  // namespace reference
}  // namespace alrank::kernels
