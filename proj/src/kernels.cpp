#include "alrank/kernels.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <mutex>

#include "alrank/cluster.hpp"
#include "alrank/error.hpp"

namespace alrank::kernels {
namespace {

std::pair<int, double> nearest_of(const FeatureVec& x, const std::vector<FeatureVec>& centers) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = squared_distance(x, centers[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return {best, best_d};
}

// Exceptions must not escape an OpenMP region; keep the first and rethrow.
class FirstError {
 public:
  template <typename F>
  void guard(F&& fn) {
    try {
      fn();
    } catch (...) {
      std::lock_guard lock(mu_);
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr error_;
};

}  // namespace

std::vector<ScoreReport> score_sets(const std::vector<const EnsembleCaptionSet*>& sets,
                                    Strategy strategy, int model) {
  std::vector<ScoreReport> out(sets.size());
  FirstError errors;
  parallel_for(sets.size(), [&](std::size_t i) {
    errors.guard([&] { out[i] = score_set(*sets[i], strategy, model); });
  });
  errors.rethrow();
  return out;
}

Assignment nearest_centroid(const std::vector<FeatureVec>& points,
                            const std::vector<FeatureVec>& centroids) {
  Assignment a{std::vector<int>(points.size()), std::vector<double>(points.size())};
  parallel_for(points.size(), [&](std::size_t i) {
    std::tie(a.label[i], a.dist2[i]) = nearest_of(points[i], centroids);
  });
  return a;
}

std::vector<double> nearest_distances(const std::vector<FeatureVec>& queries,
                                      const std::vector<FeatureVec>& references) {
  std::vector<double> out(queries.size());
  parallel_for(queries.size(), [&](std::size_t i) {
    out[i] = std::sqrt(nearest_of(queries[i], references).second);
  });
  return out;
}

void relax_min_distances(const std::vector<FeatureVec>& points, const FeatureVec& anchor,
                         std::vector<double>& min_dist2) {
  parallel_for(points.size(), [&](std::size_t i) {
    const double d = squared_distance(points[i], anchor);
    if (d < min_dist2[i]) min_dist2[i] = d;
  });
}

namespace reference {

std::vector<ScoreReport> score_sets(const std::vector<const EnsembleCaptionSet*>& sets,
                                    Strategy strategy, int model) {
  std::vector<ScoreReport> out;
  out.reserve(sets.size());
  for (const auto* s : sets) out.push_back(score_set(*s, strategy, model));
  return out;
}

Assignment nearest_centroid(const std::vector<FeatureVec>& points,
                            const std::vector<FeatureVec>& centroids) {
  Assignment a;
  for (const auto& p : points) {
    auto [label, d] = nearest_of(p, centroids);
    a.label.push_back(label);
    a.dist2.push_back(d);
  }
  return a;
}

std::vector<double> nearest_distances(const std::vector<FeatureVec>& queries,
                                      const std::vector<FeatureVec>& references) {
  std::vector<double> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(std::sqrt(nearest_of(q, references).second));
  return out;
}

void relax_min_distances(const std::vector<FeatureVec>& points, const FeatureVec& anchor,
                         std::vector<double>& min_dist2) {
  for (std::size_t i = 0; i < points.size(); ++i)
    min_dist2[i] = std::min(min_dist2[i], squared_distance(points[i], anchor));
}

}  // namespace reference
}  // namespace alrank::kernels
