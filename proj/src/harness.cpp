#include "alrank/harness.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include "alrank/error.hpp"
#include "alrank/kernels.hpp"
#include "alrank/rng.hpp"

namespace alrank {
namespace {

constexpr Strategy kScorers[] = {Strategy::entropy_mc, Strategy::entropy_full, Strategy::likelihood,
                                 Strategy::agreement, Strategy::divergence};

std::vector<const ItemRecord*> labeled_items(const Pool& pool) {
  std::vector<const ItemRecord*> out;
  for (auto i : pool.labeled_indices()) out.push_back(&pool.item(i));
  return out;
}

std::vector<FeatureVec> labeled_features(const Pool& pool) {
  std::vector<FeatureVec> out;
  for (auto i : pool.labeled_indices()) out.push_back(pool.item(i).features);
  return out;
}

int distinct_clusters(const std::vector<std::size_t>& indices, const Pool& pool, const Clustering& clustering) {
  std::set<int> seen;
  for (auto i : indices) seen.insert(clustering.cluster_of(pool.item(i).id));
  return static_cast<int>(seen.size());
}

SelectionBatch select_scored(const Pool& pool, const Ensemble& ensemble, const Clustering& clustering,
                             const RunConfig& config, std::size_t batch_size, std::uint64_t seed) {
  const auto unlabeled = pool.unlabeled_indices();
  std::vector<ScoreReport> reports(unlabeled.size());
  const auto round = static_cast<std::uint64_t>(pool.round());
  // Sets are built and scored per item so only the scores stay resident.
  kernels::parallel_for(unlabeled.size(), [&](std::size_t j) {
    const std::size_t i = unlabeled[j];
    const auto item_seed = substream_seed(seed, "sampling", round * pool.size() + i);
    const auto set = sample_captions(ensemble, pool.item(i), config.sampling, item_seed);
    reports[j] = score_set(set, config.strategy.scorer, config.candidate_model);
  });
  const int cap = config.strategy.capped ? config.phi : INT_MAX;
  auto batch = select_capped(std::move(reports), clustering, batch_size, cap);
  batch.strategy = config.strategy.name();
  return batch;
}

void summarize(LearningCurve& curve) {
  curve.summary.clear();
  if (curve.rounds.empty()) return;
  const std::size_t n_rounds = curve.rounds.front().size();
  for (const auto& r : curve.rounds)
    if (r.size() != n_rounds) throw Error("learning curve: seeds disagree on round structure");
  for (std::size_t k = 0; k < n_rounds; ++k) {
    std::vector<double> bleu, ll;
    RoundSummary s;
    s.round = static_cast<int>(k);
    for (const auto& r : curve.rounds) {
      bleu.push_back(r[k].eval_bleu);
      ll.push_back(r[k].eval_mean_loglik);
      s.labeled_fraction += r[k].labeled_fraction;
      s.clusters_selected += r[k].clusters_selected;
      s.mean_nn_dist += r[k].mean_nn_dist;
    }
    const auto n = static_cast<double>(curve.rounds.size());
    s.labeled_fraction /= n;
    s.clusters_selected /= n;
    s.mean_nn_dist /= n;
    s.bleu = bootstrap_interval(bleu, 1000, 0.95, substream_seed(k, "bootstrap-bleu"));
    s.mean_loglik = bootstrap_interval(ll, 1000, 0.95, substream_seed(k, "bootstrap-loglik"));
    curve.summary.push_back(s);
  }
}

}  // namespace

std::string StrategySpec::name() const {
  switch (kind) {
    case Kind::random: return "random";
    case Kind::coreset_greedy: return "coreset-greedy";
    case Kind::cluster_random: return "cluster-random";
    case Kind::scored: return (capped ? "cluster-" : "") + std::string(to_string(scorer));
  }
  return "?";
}

std::optional<StrategySpec> parse_strategy_spec(std::string_view name) {
  using Kind = StrategySpec::Kind;
  if (name == "random") return StrategySpec{Kind::random, Strategy::random, false};
  if (name == "coreset-greedy") return StrategySpec{Kind::coreset_greedy, Strategy::random, false};
  if (name == "cluster-random") return StrategySpec{Kind::cluster_random, Strategy::random, true};
  bool capped = false;
  if (name.starts_with("cluster-")) {
    capped = true;
    name.remove_prefix(8);
  }
  auto s = parse_strategy(name);
  if (!s || *s == Strategy::random) return std::nullopt;
  return StrategySpec{Kind::scored, *s, capped};
}

std::vector<std::string> strategy_names() {
  std::vector<std::string> out{"random"};
  for (auto s : kScorers) out.emplace_back(to_string(s));
  out.emplace_back("coreset-greedy");
  out.emplace_back("cluster-random");
  for (auto s : kScorers) out.push_back("cluster-" + std::string(to_string(s)));
  return out;
}

Interval bootstrap_interval(const std::vector<double>& values, int resamples, double level, std::uint64_t seed) {
  if (values.empty()) throw Error("bootstrap: no values");
  Interval out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  auto rng = substream(seed, "bootstrap");
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += values[pick(rng)];
    m = s / static_cast<double>(values.size());
  }
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - level) / 2.0;
  auto at = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(means.size() - 1) + 0.5));
    return means[std::min(idx, means.size() - 1)];
  };
  out.lo = at(tail);
  out.hi = at(1.0 - tail);
  return out;
}

LearningCurve run_active_learning(const Pool& pool, const std::vector<ItemRecord>& validation,
                                  const RunConfig& config, const std::vector<std::uint64_t>& seeds,
                                  const SelectionObserver& observer) {
  if (pool.size() == 0) throw Error("run_active_learning: empty pool");
  if (pool.seeded()) throw Error("run_active_learning: pool must start fully unlabeled");
  if (validation.empty()) throw Error("run_active_learning: empty validation split");
  if (seeds.empty()) throw Error("run_active_learning: no seeds");
  if (config.phi < 1) throw Error("run_active_learning: phi must be >= 1");
  if (!(config.rounds_fraction > 0.0 && config.rounds_fraction <= 1.0))
    throw Error("run_active_learning: rounds_fraction must lie in (0, 1]");
  config.learner.validate();
  if (config.strategy.needs_ensemble() && config.learner.ensemble_size < 2)
    throw Error(config.strategy.name() + " needs ensemble_size >= 2");

  std::vector<FeatureVec> val_features;
  for (const auto& v : validation) val_features.push_back(v.features);
  const int k = config.clusters > 0 ? config.clusters : default_k(pool.size());
  const std::size_t step = batch_size_for(pool.size(), config.rounds_fraction);

  LearningCurve curve;
  curve.strategy = config.strategy.name();
  curve.seeds = seeds;
  for (const auto seed : seeds) {
    // Fixed for the whole run: the clustering of the full pool.
    const Clustering clustering = kmeans(pool, k, substream_seed(seed, "kmeans"), config.kmeans_max_iters);
    ToyLearnerConfig learner = config.learner;
    learner.seed = substream_seed(seed, "learner");

    Pool state = seed_split(pool, config.seed_fraction, seed);
    std::vector<RoundResult> rows;
    RoundResult pending;
    pending.clusters_selected = distinct_clusters(state.labeled_indices(), state, clustering);
    pending.batch_size = state.labeled_count();

    while (true) {
      const auto ensemble = train_toy_ensemble(labeled_items(state), learner);
      const auto eval = evaluate(ensemble, validation, config.sampling,
                                 substream_seed(seed, "eval", static_cast<std::uint64_t>(state.round())),
                                 config.bleu_max_n);
      RoundResult row = pending;
      row.round = state.round();
      row.labeled_fraction = static_cast<double>(state.labeled_count()) / static_cast<double>(state.size());
      row.eval_bleu = eval.bleu;
      row.eval_mean_loglik = eval.mean_loglik;
      row.mean_nn_dist = mean_nn_distance(val_features, labeled_features(state));
      rows.push_back(row);
      if (state.unlabeled_count() == 0) break;

      const std::size_t batch_size = std::min(step, state.unlabeled_count());
      const auto round_seed = substream_seed(seed, "select", static_cast<std::uint64_t>(state.round()));
      SelectionBatch batch;
      switch (config.strategy.kind) {
        case StrategySpec::Kind::random: batch = select_random(state, batch_size, round_seed); break;
        case StrategySpec::Kind::coreset_greedy: batch = select_coreset_greedy(state, batch_size); break;
        case StrategySpec::Kind::cluster_random:
          batch = select_random_capped(state, clustering, batch_size, config.phi, round_seed);
          break;
        case StrategySpec::Kind::scored:
          batch = select_scored(state, ensemble, clustering, config, batch_size, seed);
          break;
      }
      batch.round = state.round() + 1;
      if (batch.per_cluster_counts.empty())
        for (const auto& id : batch.ids) ++batch.per_cluster_counts[clustering.cluster_of(id)];
      if (observer) observer(SelectionEvent{seed, state, batch, clustering, config.phi});

      pending = RoundResult{};
      pending.clusters_selected = clusters_selected(batch, clustering);
      pending.relaxation_level = batch.relaxation_level;
      pending.batch_size = batch.ids.size();
      state = apply_batch(state, batch);
    }
    curve.rounds.push_back(std::move(rows));
  }
  summarize(curve);
  return curve;
}

std::vector<LearningCurve> ensemble_size_sweep(const Pool& pool, const std::vector<ItemRecord>& validation,
                                               const std::vector<int>& sizes, const RunConfig& config,
                                               const std::vector<std::uint64_t>& seeds) {
  std::vector<LearningCurve> out;
  for (int size : sizes) {
    if (size < 2) throw Error("ensemble_size_sweep: sizes must be >= 2");
    RunConfig c = config;
    c.learner.ensemble_size = size;
    auto curve = run_active_learning(pool, validation, c, seeds);
    curve.strategy += "-L" + std::to_string(size);
    out.push_back(std::move(curve));
  }
  return out;
}

double fraction_to_reach(const LearningCurve& curve, double level) {
  if (curve.summary.empty()) throw Error("fraction_to_reach: empty curve");
  const double target = level * curve.summary.back().bleu.mean;
  for (const auto& s : curve.summary)
    if (s.bleu.mean >= target) return s.labeled_fraction;
  return curve.summary.back().labeled_fraction;
}

double bleu_auc(const LearningCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.summary.size(); ++i) {
    const auto& a = curve.summary[i - 1];
    const auto& b = curve.summary[i];
    area += 0.5 * (a.bleu.mean + b.bleu.mean) * (b.labeled_fraction - a.labeled_fraction);
  }
  return area;
}

double mean_clusters_selected(const LearningCurve& curve) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& seed_rows : curve.rounds)
    for (const auto& r : seed_rows)
      if (r.round > 0) {
        total += r.clusters_selected;
        ++n;
      }
  return n == 0 ? 0.0 : total / static_cast<double>(n);
}

void write_curve_csv(std::ostream& out, const std::vector<LearningCurve>& curves) {
  out << "strategy,seed,round,labeled_fraction,bleu,mean_loglik,clusters_selected,mean_nn_dist,relaxation_level\n";
  out.precision(17);
  for (const auto& c : curves)
    for (std::size_t s = 0; s < c.rounds.size(); ++s)
      for (const auto& r : c.rounds[s])
        out << c.strategy << ',' << c.seeds[s] << ',' << r.round << ',' << r.labeled_fraction << ','
            << r.eval_bleu << ',' << r.eval_mean_loglik << ',' << r.clusters_selected << ','
            << r.mean_nn_dist << ',' << r.relaxation_level << '\n';
}

void write_summary_csv(std::ostream& out, const std::vector<LearningCurve>& curves) {
  out << "strategy,round,labeled_fraction,bleu_mean,bleu_lo95,bleu_hi95,loglik_mean,loglik_lo95,loglik_hi95,"
         "clusters_selected_mean,mean_nn_dist_mean\n";
  out.precision(17);
  for (const auto& c : curves)
    for (const auto& s : c.summary)
      out << c.strategy << ',' << s.round << ',' << s.labeled_fraction << ',' << s.bleu.mean << ','
          << s.bleu.lo << ',' << s.bleu.hi << ',' << s.mean_loglik.mean << ',' << s.mean_loglik.lo << ','
          << s.mean_loglik.hi << ',' << s.clusters_selected << ',' << s.mean_nn_dist << '\n';
}

}  // namespace alrank
