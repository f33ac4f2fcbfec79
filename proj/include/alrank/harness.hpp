#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "alrank/cluster.hpp"
#include "alrank/pool.hpp"
#include "alrank/scorers.hpp"
#include "alrank/select.hpp"
#include "alrank/toy_learner.hpp"

namespace alrank {

/// How a round's batch is chosen.
struct StrategySpec {
  enum class Kind { random, coreset_greedy, cluster_random, scored };
  Kind kind = Kind::random;
  Strategy scorer = Strategy::random;
  bool capped = false;

  std::string name() const;
  bool needs_ensemble() const { return kind == Kind::scored && alrank::needs_ensemble(scorer); }
};

/// Accepts random, coreset-greedy, cluster-random, any scorer name, and
/// "cluster-<scorer>" for the cluster-capped version of a scorer.
std::optional<StrategySpec> parse_strategy_spec(std::string_view name);
/// Every name parse_strategy_spec accepts, in display order.
std::vector<std::string> strategy_names();

struct RunConfig {
  StrategySpec strategy;
  ToyLearnerConfig learner;
  SamplingConfig sampling;
  double seed_fraction = 0.05;
  double rounds_fraction = 0.05;
  int phi = 3;
  int clusters = 0;  // 0 means default_k(N)
  int kmeans_max_iters = 100;
  int bleu_max_n = 4;
  int candidate_model = 0;  // scoring model for single-model strategies
};

struct RoundResult {
  int round = 0;
  double labeled_fraction = 0.0;
  double eval_bleu = 0.0;
  double eval_mean_loglik = 0.0;
  int clusters_selected = 0;  // of the batch that produced this round's labeled set
  double mean_nn_dist = 0.0;
  int relaxation_level = 0;
  std::size_t batch_size = 0;
};

struct Interval {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct RoundSummary {
  int round = 0;
  double labeled_fraction = 0.0;
  Interval bleu;
  Interval mean_loglik;
  double clusters_selected = 0.0;
  double mean_nn_dist = 0.0;
};

struct LearningCurve {
  std::string strategy;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<RoundResult>> rounds;  // per seed
  std::vector<RoundSummary> summary;
};

/// Snapshot handed to an observer right after each selection.
struct SelectionEvent {
  std::uint64_t seed;
  const Pool& before;
  const SelectionBatch& batch;
  const Clustering& clustering;
  int phi;
};
using SelectionObserver = std::function<void(const SelectionEvent&)>;

/// Percentile bootstrap interval of the mean.
Interval bootstrap_interval(const std::vector<double>& values, int resamples = 1000, double level = 0.95,
                            std::uint64_t seed = 0);

/// Seeds the pool, then alternates train / evaluate / score / select / apply
/// until nothing is left unlabeled. One curve row per evaluation point.
LearningCurve run_active_learning(const Pool& pool, const std::vector<ItemRecord>& validation,
                                  const RunConfig& config, const std::vector<std::uint64_t>& seeds,
                                  const SelectionObserver& observer = {});

/// One curve per ensemble size, everything else held fixed.
std::vector<LearningCurve> ensemble_size_sweep(const Pool& pool, const std::vector<ItemRecord>& validation,
                                               const std::vector<int>& sizes, const RunConfig& config,
                                               const std::vector<std::uint64_t>& seeds);

/// Smallest labeled fraction at which the seed-mean BLEU reaches `level`
/// times its final value.
double fraction_to_reach(const LearningCurve& curve, double level = 0.95);
/// Trapezoid area under seed-mean BLEU against labeled fraction.
double bleu_auc(const LearningCurve& curve);
/// Mean clusters selected per acquisition round (round 0 excluded), over seeds.
double mean_clusters_selected(const LearningCurve& curve);

void write_curve_csv(std::ostream& out, const std::vector<LearningCurve>& curves);
void write_summary_csv(std::ostream& out, const std::vector<LearningCurve>& curves);

}  // namespace alrank
