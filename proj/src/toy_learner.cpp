#include "alrank/toy_learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "alrank/bleu.hpp"
#include "alrank/cluster.hpp"
#include "alrank/error.hpp"
#include "alrank/kernels.hpp"

namespace alrank {
namespace {

constexpr int kBucketIters = 50;

}  // namespace

void ToyLearnerConfig::validate() const {
  if (order < 1) throw Error("toy learner: order must be >= 1");
  if (vocab_size < 2) throw Error("toy learner: vocab_size must be >= 2");
  if (!(smoothing > 0.0)) throw Error("toy learner: smoothing must be > 0");
  if (condition_buckets < 1) throw Error("toy learner: condition_buckets must be >= 1");
  if (ensemble_size < 1) throw Error("toy learner: ensemble_size must be >= 1");
  if (eos < 0 || eos >= vocab_size) throw Error("toy learner: eos token outside vocabulary");
  // Context keys pack bucket and `order` tokens into 64 bits.
  long double span = condition_buckets;
  for (int i = 0; i < order; ++i) span *= static_cast<long double>(vocab_size) + 1.0L;
  if (span >= 1.8e19L) throw Error("toy learner: order too large for this vocabulary");
}

NgramModel::NgramModel(const ToyLearnerConfig& config, int /*buckets*/)
    : order_(config.order), vocab_(config.vocab_size), alpha_(config.smoothing), eos_(config.eos) {
  uniform_.vocab_size = vocab_;
  uniform_.remainder = 1.0;
}

std::uint64_t NgramModel::key(int bucket, std::span<const Token> prefix) const {
  std::uint64_t k = static_cast<std::uint64_t>(bucket);
  const auto n = static_cast<std::ptrdiff_t>(prefix.size());
  for (std::ptrdiff_t i = n - order_; i < n; ++i) {
    const std::uint64_t sym = i < 0 ? 0 : static_cast<std::uint64_t>(prefix[static_cast<std::size_t>(i)]) + 1;
    k = k * (static_cast<std::uint64_t>(vocab_) + 1) + sym;
  }
  return k;
}

void NgramModel::observe(int bucket, const TokenSeq& caption) {
  TokenSeq seq = caption;
  seq.push_back(eos_);
  for (std::size_t w = 0; w < seq.size(); ++w) {
    auto& row = counts_[key(bucket, std::span<const Token>(seq.data(), w))];
    auto it = std::find_if(row.begin(), row.end(), [&](const auto& e) { return e.first == seq[w]; });
    if (it == row.end())
      row.emplace_back(seq[w], 1);
    else
      ++it->second;
  }
}

void NgramModel::finalize() {
  rows_.clear();
  rows_.reserve(counts_.size());
  for (auto& [k, row] : counts_) {
    std::sort(row.begin(), row.end());
    double total = 0.0;
    for (const auto& e : row) total += e.second;
    const double denom = total + alpha_ * static_cast<double>(vocab_);
    TokenDistribution d;
    d.vocab_size = vocab_;
    d.entries.reserve(row.size());
    for (const auto& [tok, c] : row) d.entries.emplace_back(tok, (c + alpha_) / denom);
    d.remainder = alpha_ * static_cast<double>(vocab_ - static_cast<std::int32_t>(row.size())) / denom;
    rows_.emplace(k, std::move(d));
  }
}

const TokenDistribution& NgramModel::next(int bucket, std::span<const Token> prefix) const {
  auto it = rows_.find(key(bucket, prefix));
  return it == rows_.end() ? uniform_ : it->second;
}

Ensemble::Ensemble(ToyLearnerConfig config, std::vector<std::vector<FeatureVec>> bucket_centers,
                   std::vector<NgramModel> members)
    : config_(std::move(config)), centers_(std::move(bucket_centers)), members_(std::move(members)) {
  if (centers_.size() != members_.size()) throw Error("ensemble: one bucket set per member required");
}

int Ensemble::bucket_of(int member, const FeatureVec& features) const {
  const auto& centers = centers_[static_cast<std::size_t>(member)];
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = squared_distance(features, centers[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

Ensemble train_toy_ensemble(const std::vector<const ItemRecord*>& labeled, const ToyLearnerConfig& config) {
  config.validate();
  if (labeled.empty()) throw Error("train_toy_ensemble: empty labeled set");

  std::vector<std::vector<FeatureVec>> centers;
  std::vector<NgramModel> members;
  members.reserve(static_cast<std::size_t>(config.ensemble_size));
  const auto bucket_seed = substream_seed(config.seed, "buckets");
  for (int m = 0; m < config.ensemble_size; ++m) {
    std::vector<std::size_t> draws(labeled.size());
    auto rng = substream(config.seed, "member", static_cast<std::uint64_t>(m));
    std::uniform_int_distribution<std::size_t> pick(0, labeled.size() - 1);
    for (std::size_t d = 0; d < draws.size(); ++d) draws[d] = config.bootstrap ? pick(rng) : d;

    // Buckets are fit on the member's own training sample with a shared seed,
    // so members trained on identical data are identical.
    std::vector<FeatureVec> points;
    points.reserve(draws.size());
    for (auto i : draws) points.push_back(labeled[i]->features);
    const int buckets = std::min<int>(config.condition_buckets, static_cast<int>(points.size()));
    auto clustering = kmeans_points(points, {}, buckets, bucket_seed, kBucketIters);

    NgramModel model(config, buckets);
    for (std::size_t d = 0; d < draws.size(); ++d) {
      const int bucket = clustering.assignment.at(std::to_string(d));
      for (const auto& ref : labeled[draws[d]]->references) model.observe(bucket, ref);
    }
    model.finalize();
    members.push_back(std::move(model));
    centers.push_back(std::move(clustering.centroids));
  }
  return Ensemble(config, std::move(centers), std::move(members));
}

Ensemble train_toy_ensemble(const std::vector<ItemRecord>& labeled, const ToyLearnerConfig& config) {
  std::vector<const ItemRecord*> ptrs;
  ptrs.reserve(labeled.size());
  for (const auto& it : labeled) ptrs.push_back(&it);
  return train_toy_ensemble(ptrs, config);
}

Token sample_token(const TokenDistribution& d, double temperature, Rng& rng) {
  if (!(temperature > 0.0)) throw Error("sampling temperature must be > 0");
  const auto unlisted = static_cast<std::int64_t>(d.vocab_size) - static_cast<std::int64_t>(d.entries.size());
  const double share = d.unlisted_share();
  const bool has_rest = unlisted > 0 && share > 0.0;

  double top = 0.0;
  for (const auto& e : d.entries) top = std::max(top, e.second);
  if (has_rest) top = std::max(top, share);

  // p^(1/T) relative to the largest probability, so the peak weight is 1.
  const double inv_t = 1.0 / temperature;
  thread_local std::vector<double> weight;
  weight.resize(d.entries.size());
  double total = 0.0;
  for (std::size_t i = 0; i < d.entries.size(); ++i) {
    weight[i] = std::pow(d.entries[i].second / top, inv_t);
    total += weight[i];
  }
  const double rest = has_rest ? static_cast<double>(unlisted) * std::pow(share / top, inv_t) : 0.0;
  total += rest;

  double r = uniform01(rng) * total;
  for (std::size_t i = 0; i < d.entries.size(); ++i) {
    if (r < weight[i]) return d.entries[i].first;
    r -= weight[i];
  }
  if (!has_rest) return d.entries.back().first;
  // The rank-th unlisted token in ascending id order.
  std::uniform_int_distribution<std::int64_t> pick(0, unlisted - 1);
  auto tok = static_cast<Token>(pick(rng));
  for (const auto& e : d.entries) {
    if (e.first <= tok)
      ++tok;
    else
      break;
  }
  return tok;
}

TokenSeq sample_caption(const Ensemble& ensemble, int member, int bucket, const SamplingConfig& sampling,
                        Rng& rng) {
  TokenSeq tokens;
  const auto& model = ensemble.member(member);
  while (static_cast<int>(tokens.size()) < sampling.max_len) {
    const Token t = sample_token(model.next(bucket, tokens), sampling.temperature, rng);
    tokens.push_back(t);
    if (t == ensemble.config().eos) break;
  }
  return tokens;
}

EnsembleCaptionSet sample_captions(const Ensemble& ensemble, const ItemRecord& item,
                                   const SamplingConfig& sampling, std::uint64_t seed) {
  if (sampling.samples < 1) throw Error("sample_captions: K must be >= 1");
  if (sampling.max_len < 1) throw Error("sample_captions: max_len must be >= 1");
  const int L = ensemble.size();
  std::vector<int> bucket(static_cast<std::size_t>(L));
  for (int m = 0; m < L; ++m) bucket[static_cast<std::size_t>(m)] = ensemble.bucket_of(m, item.features);
  EnsembleCaptionSet set;
  set.item_id = item.id;
  set.L = L;
  set.K = sampling.samples;
  set.eos = ensemble.config().eos;
  set.samples.reserve(static_cast<std::size_t>(L * sampling.samples));
  for (int p = 0; p < L; ++p) {
    for (int k = 0; k < sampling.samples; ++k) {
      auto rng = substream(seed, "caption", static_cast<std::uint64_t>(p * sampling.samples + k));
      CaptionSample s;
      s.producer = p;
      s.tokens = sample_caption(ensemble, p, bucket[static_cast<std::size_t>(p)], sampling, rng);
      s.cond.resize(static_cast<std::size_t>(L));
      for (int q = 0; q < L; ++q) {
        auto& row = s.cond[static_cast<std::size_t>(q)];
        row.reserve(s.tokens.size());
        for (std::size_t w = 0; w < s.tokens.size(); ++w)
          row.push_back(ensemble.member(q).next(bucket[static_cast<std::size_t>(q)],
                                                std::span<const Token>(s.tokens.data(), w)));
      }
      set.samples.push_back(std::move(s));
    }
  }
  return set;
}

double reference_loglik(const Ensemble& ensemble, int member, const ItemRecord& item) {
  const int bucket = ensemble.bucket_of(member, item.features);
  const auto& model = ensemble.member(member);
  double total = 0.0;
  for (const auto& ref : item.references) {
    TokenSeq seq = ref;
    seq.push_back(ensemble.config().eos);
    double ll = 0.0;
    for (std::size_t w = 0; w < seq.size(); ++w)
      ll += chosen_token_logprob(model.next(bucket, std::span<const Token>(seq.data(), w)), seq[w]);
    total += ll / static_cast<double>(seq.size());
  }
  return total / static_cast<double>(item.references.size());
}

EvalResult evaluate(const Ensemble& ensemble, const std::vector<ItemRecord>& val_items,
                    const SamplingConfig& sampling, std::uint64_t seed, int bleu_max_n) {
  if (val_items.empty()) throw Error("evaluate: empty validation set");
  const int L = ensemble.size();
  const std::size_t n = val_items.size();
  std::vector<double> item_bleu(static_cast<std::size_t>(L) * n);
  std::vector<double> item_ll(static_cast<std::size_t>(L) * n);
  const Token eos = ensemble.config().eos;

  kernels::parallel_for(n, [&](std::size_t i) {
    const auto& item = val_items[i];
    const BleuScorer scorer(item.references, bleu_max_n);
    for (int m = 0; m < L; ++m) {
      const int bucket = ensemble.bucket_of(m, item.features);
      auto rng = substream(seed, "eval", static_cast<std::uint64_t>(m) * n + i);
      double b = 0.0;
      for (int k = 0; k < sampling.samples; ++k) {
        auto caption = sample_caption(ensemble, m, bucket, sampling, rng);
        if (!caption.empty() && caption.back() == eos) caption.pop_back();
        if (!caption.empty()) b += scorer.score(caption);
      }
      item_bleu[static_cast<std::size_t>(m) * n + i] = b / sampling.samples;
      item_ll[static_cast<std::size_t>(m) * n + i] = reference_loglik(ensemble, m, item);
    }
  });

  EvalResult out;
  for (int m = 0; m < L; ++m) {
    double b = 0.0;
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      b += item_bleu[static_cast<std::size_t>(m) * n + i];
      ll += item_ll[static_cast<std::size_t>(m) * n + i];
    }
    out.member_bleu.push_back(b / static_cast<double>(n));
    out.member_loglik.push_back(ll / static_cast<double>(n));
  }
  for (int m = 0; m < L; ++m) {
    out.bleu += out.member_bleu[static_cast<std::size_t>(m)];
    out.mean_loglik += out.member_loglik[static_cast<std::size_t>(m)];
  }
  out.bleu /= L;
  out.mean_loglik /= L;
  return out;
}

}  // namespace alrank
