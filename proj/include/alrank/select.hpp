#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "alrank/cluster.hpp"
#include "alrank/pool.hpp"
#include "alrank/scorers.hpp"

namespace alrank {

struct SelectionBatch {
  int round = 0;
  std::string strategy;
  std::vector<std::string> ids;
  std::map<int, int> per_cluster_counts;
  /// 0 when the base cap held; r means the cap was raised to phi * (r + 1).
  int relaxation_level = 0;
};

/// Best-first greedy pick of `batch_size` reports with at most `phi` picks per
/// cluster. When a full pass comes up short the cap is raised to 2*phi, 3*phi,
/// ... and the pass restarts from the top of the ranking.
SelectionBatch select_capped(std::vector<ScoreReport> reports, const Clustering& clustering,
                             std::size_t batch_size, int phi);

/// Uniform sample of unlabeled ids without replacement.
SelectionBatch select_random(const Pool& pool, std::size_t batch_size, std::uint64_t seed);

/// Farthest-first traversal from the labeled set (greedy k-center).
SelectionBatch select_coreset_greedy(const Pool& pool, std::size_t batch_size);

/// Seeded uniform scores pushed through select_capped.
SelectionBatch select_random_capped(const Pool& pool, const Clustering& clustering,
                                    std::size_t batch_size, int phi, std::uint64_t seed);

/// Largest batch the cap `cap` admits given per-cluster availability.
std::size_t cap_capacity(const std::map<int, int>& available_per_cluster, int cap);

}  // namespace alrank
