#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "alrank/pool.hpp"
#include "alrank/rng.hpp"
#include "alrank/scorers.hpp"
#include "alrank/token_distribution.hpp"

namespace alrank {

struct ToyLearnerConfig {
  int order = 2;               // context length in tokens
  std::int32_t vocab_size = 64;
  double smoothing = 0.1;      // add-alpha
  int condition_buckets = 40;  // k-means buckets over labeled features
  int ensemble_size = 4;
  bool bootstrap = true;
  std::uint64_t seed = 0;
  Token eos = 0;

  void validate() const;
};

/// Add-alpha n-gram model keyed by (feature bucket, last `order` tokens).
class NgramModel {
 public:
  NgramModel(const ToyLearnerConfig& config, int buckets);

  void observe(int bucket, const TokenSeq& caption);
  /// Turns accumulated counts into distributions. Call once after observing.
  void finalize();

  /// Next-token distribution after `prefix` (earlier tokens beyond `order` are ignored).
  const TokenDistribution& next(int bucket, std::span<const Token> prefix) const;

 private:
  std::uint64_t key(int bucket, std::span<const Token> prefix) const;

  int order_;
  std::int32_t vocab_;
  double alpha_;
  Token eos_;
  std::unordered_map<std::uint64_t, std::vector<std::pair<Token, int>>> counts_;
  std::unordered_map<std::uint64_t, TokenDistribution> rows_;
  TokenDistribution uniform_;
};

class Ensemble {
 public:
  Ensemble(ToyLearnerConfig config, std::vector<std::vector<FeatureVec>> bucket_centers,
           std::vector<NgramModel> members);

  int size() const { return static_cast<int>(members_.size()); }
  const ToyLearnerConfig& config() const { return config_; }
  const NgramModel& member(int m) const { return members_[static_cast<std::size_t>(m)]; }
  /// Nearest of the member's bucket centers (ties to the lowest index).
  int bucket_of(int member, const FeatureVec& features) const;
  const std::vector<FeatureVec>& bucket_centers(int member) const {
    return centers_[static_cast<std::size_t>(member)];
  }

 private:
  ToyLearnerConfig config_;
  std::vector<std::vector<FeatureVec>> centers_;
  std::vector<NgramModel> members_;
};

/// Trains one member per ensemble slot on a bootstrap resample of the labeled
/// items (or on all of them when bootstrap is off). Each member fits its
/// feature buckets on its own sample. A pure function of its inputs.
Ensemble train_toy_ensemble(const std::vector<const ItemRecord*>& labeled, const ToyLearnerConfig& config);
Ensemble train_toy_ensemble(const std::vector<ItemRecord>& labeled, const ToyLearnerConfig& config);

struct SamplingConfig {
  int samples = 8;  // K
  double temperature = 0.8;
  int max_len = 16;
};

/// Draws a token from `d` after sharpening it with the temperature. Unlisted
/// tokens share the remainder uniformly.
Token sample_token(const TokenDistribution& d, double temperature, Rng& rng);

/// Samples one caption from a single member, ending at eos or max_len.
TokenSeq sample_caption(const Ensemble& ensemble, int member, int bucket, const SamplingConfig& sampling,
                        Rng& rng);

/// K captions per member, each annotated with every member's conditional
/// distributions along it.
EnsembleCaptionSet sample_captions(const Ensemble& ensemble, const ItemRecord& item,
                                   const SamplingConfig& sampling, std::uint64_t seed);

/// Mean per-token log-likelihood of the references (with eos appended) under
/// one member, averaged over references.
double reference_loglik(const Ensemble& ensemble, int member, const ItemRecord& item);

struct EvalResult {
  double bleu = 0.0;
  double mean_loglik = 0.0;
  std::vector<double> member_bleu;
  std::vector<double> member_loglik;
};

/// Per member: K sampled captions per item scored with BLEU against the
/// references, plus the reference log-likelihood. Reports the member mean.
EvalResult evaluate(const Ensemble& ensemble, const std::vector<ItemRecord>& val_items,
                    const SamplingConfig& sampling, std::uint64_t seed, int bleu_max_n = 4);

}  // namespace alrank
