#include "alrank/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "alrank/error.hpp"
#include "alrank/kernels.hpp"
#include "alrank/rng.hpp"
#include "alrank/select.hpp"

namespace alrank {
namespace {

std::vector<FeatureVec> kmeanspp_init(const std::vector<FeatureVec>& points, int k, Rng& rng) {
  const std::size_t n = points.size();
  std::vector<FeatureVec> centers;
  std::vector<bool> chosen(n, false);
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  std::size_t pick = first(rng);
  centers.push_back(points[pick]);
  chosen[pick] = true;
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], centers[0]);

  while (centers.size() < static_cast<std::size_t>(k)) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    if (total > 0.0) {
      double r = uniform01(rng) * total;
      pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        pick = i;
        r -= d2[i];
        if (r < 0.0) break;
      }
    } else {
      // Every point coincides with a center: fall back to an unused point.
      std::vector<std::size_t> unused;
      for (std::size_t i = 0; i < n; ++i)
        if (!chosen[i]) unused.push_back(i);
      std::uniform_int_distribution<std::size_t> u(0, unused.size() - 1);
      pick = unused[u(rng)];
    }
    chosen[pick] = true;
    centers.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], squared_distance(points[i], centers.back()));
  }
  return centers;
}

// Means of the assigned points. An empty cluster takes over the point that is
// farthest from its centroid among clusters that can spare one.
void update_centroids(const std::vector<FeatureVec>& points, std::vector<int>& label,
                      std::vector<double>& dist2, std::vector<FeatureVec>& centers) {
  const std::size_t k = centers.size();
  const std::size_t dim = points.front().size();
  std::vector<std::size_t> count(k, 0);
  for (int l : label) ++count[static_cast<std::size_t>(l)];

  for (std::size_t c = 0; c < k; ++c) {
    if (count[c] > 0) continue;
    std::size_t far = points.size();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (count[static_cast<std::size_t>(label[i])] < 2) continue;
      if (far == points.size() || dist2[i] > dist2[far]) far = i;
    }
    if (far == points.size()) break;
    --count[static_cast<std::size_t>(label[far])];
    label[far] = static_cast<int>(c);
    dist2[far] = 0.0;
    count[c] = 1;
  }

  std::vector<FeatureVec> sums(k, FeatureVec(dim, 0.0));
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto& s = sums[static_cast<std::size_t>(label[i])];
    for (std::size_t d = 0; d < dim; ++d) s[d] += points[i][d];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (count[c] == 0) continue;
    for (std::size_t d = 0; d < dim; ++d) centers[c][d] = sums[c][d] / static_cast<double>(count[c]);
  }
}

double total_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

double squared_distance(const FeatureVec& a, const FeatureVec& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

int Clustering::cluster_of(const std::string& id) const {
  auto it = assignment.find(id);
  if (it == assignment.end()) throw Error("id has no cluster assignment: " + id);
  return it->second;
}

int default_k(std::size_t n) {
  return std::max(1, static_cast<int>((n + 19) / 20));
}

Clustering kmeans_points(const std::vector<FeatureVec>& points, const std::vector<std::string>& ids,
                         int k, std::uint64_t seed, int max_iters) {
  if (k < 1) throw Error("kmeans: K must be >= 1");
  if (static_cast<std::size_t>(k) > points.size())
    throw Error("kmeans: K = " + std::to_string(k) + " exceeds the number of points (" +
                std::to_string(points.size()) + ")");
  if (!ids.empty() && ids.size() != points.size()) throw Error("kmeans: ids and points differ in size");

  auto rng = substream(seed, "kmeans");
  Clustering out;
  out.k = k;
  out.seed = seed;
  out.centroids = kmeanspp_init(points, k, rng);

  auto a = kernels::nearest_centroid(points, out.centroids);
  out.inertia_trace.push_back(total_of(a.dist2));
  for (int iter = 0; iter < max_iters; ++iter) {
    update_centroids(points, a.label, a.dist2, out.centroids);
    auto next = kernels::nearest_centroid(points, out.centroids);
    const bool changed = next.label != a.label;
    a = std::move(next);
    out.inertia_trace.push_back(total_of(a.dist2));
    if (!changed) break;
  }
  out.inertia = out.inertia_trace.back();
  for (std::size_t i = 0; i < points.size(); ++i)
    out.assignment[ids.empty() ? std::to_string(i) : ids[i]] = a.label[i];
  return out;
}

Clustering kmeans(const Pool& pool, int k, std::uint64_t seed, int max_iters) {
  std::vector<FeatureVec> points;
  std::vector<std::string> ids;
  points.reserve(pool.size());
  for (const auto& it : pool.items()) {
    points.push_back(it.features);
    ids.push_back(it.id);
  }
  if (points.empty()) throw Error("kmeans: empty pool");
  return kmeans_points(points, ids, k, seed, max_iters);
}

int clusters_selected(const SelectionBatch& batch, const Clustering& clustering) {
  std::set<int> distinct;
  for (const auto& id : batch.ids) distinct.insert(clustering.cluster_of(id));
  return static_cast<int>(distinct.size());
}

double mean_nn_distance(const std::vector<FeatureVec>& queries,
                        const std::vector<FeatureVec>& references) {
  if (queries.empty()) throw Error("mean_nn_distance: empty query list");
  if (references.empty()) throw Error("mean_nn_distance: empty reference list");
  const auto dim = references.front().size();
  for (const auto& q : queries)
    if (q.size() != dim) throw Error("mean_nn_distance: dimension mismatch");
  for (const auto& r : references)
    if (r.size() != dim) throw Error("mean_nn_distance: dimension mismatch");
  const auto d = kernels::nearest_distances(queries, references);
  return total_of(d) / static_cast<double>(d.size());
}

}  // namespace alrank
