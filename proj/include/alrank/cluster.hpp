#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "alrank/pool.hpp"

namespace alrank {

struct SelectionBatch;

struct Clustering {
  int k = 0;
  std::vector<FeatureVec> centroids;
  std::map<std::string, int> assignment;
  double inertia = 0.0;
  std::uint64_t seed = 0;
  /// Inertia after every assignment step, first entry after initialization.
  std::vector<double> inertia_trace;

  int cluster_of(const std::string& id) const;
};

/// ceil(N / 20), at least 1.
int default_k(std::size_t n);

/// k-means++ seeding followed by Lloyd iterations over every pool item, until
/// the assignment stops changing or `max_iters` is reached.
Clustering kmeans(const Pool& pool, int k, std::uint64_t seed, int max_iters = 100);

/// Same over bare points. Ids are "0", "1", ... when `ids` is empty.
Clustering kmeans_points(const std::vector<FeatureVec>& points, const std::vector<std::string>& ids,
                         int k, std::uint64_t seed, int max_iters = 100);

/// Distinct clusters among the batch ids.
int clusters_selected(const SelectionBatch& batch, const Clustering& clustering);

/// Mean over queries of the Euclidean distance to the nearest reference.
double mean_nn_distance(const std::vector<FeatureVec>& queries,
                        const std::vector<FeatureVec>& references);

double squared_distance(const FeatureVec& a, const FeatureVec& b);

}  // namespace alrank
