#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "alrank/pool.hpp"
#include "alrank/token_distribution.hpp"

namespace alrank {

/// One sampled caption together with every ensemble member's conditional
/// next-token distribution along it: cond[model][position].
struct CaptionSample {
  int producer = 0;
  TokenSeq tokens;
  std::vector<std::vector<TokenDistribution>> cond;
};

/// All samples for one item: K per producer, L producers.
struct EnsembleCaptionSet {
  std::string item_id;
  int L = 0;
  int K = 0;
  std::vector<CaptionSample> samples;
  // A trailing eos token keeps its cond row but does not count toward the
  // caption length used by agreement and divergence.
  std::optional<Token> eos;

  /// Throws alrank::Error when the shape contract does not hold.
  void validate() const;
  double width(const CaptionSample& sample) const;
};

enum class Strategy { random, entropy_mc, entropy_full, likelihood, agreement, divergence };
enum class Direction { maximize, minimize };

std::string_view to_string(Strategy s);
std::string_view to_string(Direction d);
/// Accepts the CLI names (random, entropy-mc, entropy, likelihood, agreement,
/// divergence). Returns nullopt for anything else.
std::optional<Strategy> parse_strategy(std::string_view name);
Direction direction_of(Strategy s);
bool needs_ensemble(Strategy s);  // agreement, divergence

struct ScoreReport {
  std::string item_id;
  Strategy strategy = Strategy::random;
  double value = 0.0;
  Direction direction = Direction::maximize;
};

/// Mean over the model's samples of sum_w -P log P for the
/// sampled token under the producing model.
ScoreReport entropy_score_mc(const EnsembleCaptionSet& set, int model);
/// Mean over the model's samples of the summed full entropy of each step.
ScoreReport entropy_score_full(const EnsembleCaptionSet& set, int model);
/// Mean over the model's samples of the summed (unnormalized) log-likelihood.
ScoreReport likelihood_score(const EnsembleCaptionSet& set, int model);
/// Mean pairwise cross-model log-likelihood, length-normalized per sample.
ScoreReport agreement_score(const EnsembleCaptionSet& set);
/// Mean pairwise per-word KL between producer and other members along the
/// producer's samples.
ScoreReport divergence_score(const EnsembleCaptionSet& set);

/// Dispatch for every non-random strategy. `model` picks the candidate model
/// for single-model strategies.
ScoreReport score_set(const EnsembleCaptionSet& set, Strategy strategy, int model = 0);

/// One report per id in `ids` (ascending-id order is preserved). The random
/// strategy draws one seeded uniform value per id and ignores `sets`.
std::vector<ScoreReport> score_items(const std::vector<std::string>& ids,
                                     const std::map<std::string, EnsembleCaptionSet>& sets,
                                     Strategy strategy, std::uint64_t seed, int model = 0);

/// score_items over the pool's unlabeled ids.
std::vector<ScoreReport> score_pool(const Pool& pool,
                                    const std::map<std::string, EnsembleCaptionSet>& sets,
                                    Strategy strategy, std::uint64_t seed, int model = 0);

/// Best-first order by direction, ties by ascending id.
void sort_best_first(std::vector<ScoreReport>& reports);

}  // namespace alrank
