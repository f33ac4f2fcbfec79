#include "alrank/select.hpp"

#include <algorithm>
#include <limits>

#include "alrank/error.hpp"
#include "alrank/kernels.hpp"
#include "alrank/rng.hpp"

namespace alrank {

std::size_t cap_capacity(const std::map<int, int>& available_per_cluster, int cap) {
  std::size_t total = 0;
  for (const auto& [c, n] : available_per_cluster) total += static_cast<std::size_t>(std::min(n, cap));
  return total;
}

SelectionBatch select_capped(std::vector<ScoreReport> reports, const Clustering& clustering,
                             std::size_t batch_size, int phi) {
  if (phi < 1) throw Error("select: phi must be >= 1");
  if (batch_size > reports.size())
    throw Error("select: batch size " + std::to_string(batch_size) + " exceeds the " +
                std::to_string(reports.size()) + " available items");
  for (const auto& r : reports)
    if (r.strategy != reports.front().strategy || r.direction != reports.front().direction)
      throw Error("select: reports mix strategies or directions");
  sort_best_first(reports);

  std::vector<int> cluster(reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i) cluster[i] = clustering.cluster_of(reports[i].item_id);

  SelectionBatch batch;
  batch.strategy = reports.empty() ? "" : std::string(to_string(reports.front().strategy));
  std::vector<bool> taken(reports.size(), false);
  // Earlier picks are kept when the cap is relaxed; each pass restarts from the top.
  for (int level = 0; batch.ids.size() < batch_size; ++level) {
    const long long wide_cap = static_cast<long long>(phi) * (level + 1);
    const int cap = static_cast<int>(std::min<long long>(wide_cap, std::numeric_limits<int>::max()));
    batch.relaxation_level = level;
    for (std::size_t i = 0; i < reports.size() && batch.ids.size() < batch_size; ++i) {
      if (taken[i]) continue;
      int& count = batch.per_cluster_counts[cluster[i]];
      if (count >= cap) continue;
      ++count;
      taken[i] = true;
      batch.ids.push_back(reports[i].item_id);
    }
  }
  return batch;
}

SelectionBatch select_random(const Pool& pool, std::size_t batch_size, std::uint64_t seed) {
  auto ids = pool.unlabeled_ids();
  if (batch_size > ids.size())
    throw Error("select: batch size " + std::to_string(batch_size) + " exceeds the " +
                std::to_string(ids.size()) + " unlabeled items");
  auto rng = substream(seed, "random-select");
  for (std::size_t i = 0; i < batch_size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, ids.size() - 1);
    std::swap(ids[i], ids[pick(rng)]);
  }
  ids.resize(batch_size);
  SelectionBatch batch;
  batch.strategy = "random";
  batch.ids = std::move(ids);
  return batch;
}

SelectionBatch select_coreset_greedy(const Pool& pool, std::size_t batch_size) {
  const auto labeled = pool.labeled_indices();
  const auto unlabeled = pool.unlabeled_indices();
  if (labeled.empty()) throw Error("coreset-greedy: the labeled set is empty, nothing to anchor on");
  if (batch_size > unlabeled.size())
    throw Error("select: batch size " + std::to_string(batch_size) + " exceeds the " +
                std::to_string(unlabeled.size()) + " unlabeled items");

  std::vector<FeatureVec> points;
  points.reserve(unlabeled.size());
  for (auto i : unlabeled) points.push_back(pool.item(i).features);
  std::vector<double> min_d2(points.size(), std::numeric_limits<double>::infinity());
  for (auto i : labeled) kernels::relax_min_distances(points, pool.item(i).features, min_d2);

  SelectionBatch batch;
  batch.strategy = "coreset-greedy";
  std::vector<bool> taken(points.size(), false);
  for (std::size_t b = 0; b < batch_size; ++b) {
    std::size_t best = points.size();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (taken[i]) continue;
      if (best == points.size() || min_d2[i] > min_d2[best]) best = i;
    }
    taken[best] = true;
    batch.ids.push_back(pool.item(unlabeled[best]).id);
    kernels::relax_min_distances(points, points[best], min_d2);
  }
  return batch;
}

SelectionBatch select_random_capped(const Pool& pool, const Clustering& clustering,
                                    std::size_t batch_size, int phi, std::uint64_t seed) {
  auto reports = score_pool(pool, {}, Strategy::random, seed);
  auto batch = select_capped(std::move(reports), clustering, batch_size, phi);
  batch.strategy = "cluster-random";
  return batch;
}

}  // namespace alrank
