#include "alrank/scorers.hpp"

#include <algorithm>
#include <cmath>

#include "alrank/error.hpp"
#include "alrank/kernels.hpp"
#include "alrank/rng.hpp"

namespace alrank {
namespace {

ScoreReport make_report(const EnsembleCaptionSet& set, Strategy s, double value) {
  if (!std::isfinite(value))
    throw Error("non-finite " + std::string(to_string(s)) + " score for item " + set.item_id);
  return ScoreReport{set.item_id, s, value, direction_of(s)};
}

std::vector<const CaptionSample*> samples_of(const EnsembleCaptionSet& set, int model) {
  if (model < 0 || model >= set.L)
    throw Error("item " + set.item_id + ": model index " + std::to_string(model) + " out of range");
  std::vector<const CaptionSample*> out;
  for (const auto& s : set.samples)
    if (s.producer == model) out.push_back(&s);
  if (out.empty())
    throw Error("item " + set.item_id + ": no samples produced by model " + std::to_string(model));
  return out;
}

void require_ensemble(const EnsembleCaptionSet& set, Strategy s) {
  if (set.L < 2)
    throw Error(std::string(to_string(s)) + " needs an ensemble of at least 2 members (item " +
                set.item_id + " has " + std::to_string(set.L) + ")");
}

}  // namespace

void EnsembleCaptionSet::validate() const {
  if (L < 1 || K < 1) throw Error("item " + item_id + ": L and K must be >= 1");
  if (samples.size() != static_cast<std::size_t>(L) * static_cast<std::size_t>(K))
    throw Error("item " + item_id + ": expected " + std::to_string(L * K) + " samples, found " +
                std::to_string(samples.size()));
  std::vector<int> per_producer(static_cast<std::size_t>(L), 0);
  for (const auto& s : samples) {
    if (s.producer < 0 || s.producer >= L)
      throw Error("item " + item_id + ": producer " + std::to_string(s.producer) + " out of range");
    ++per_producer[static_cast<std::size_t>(s.producer)];
    if (s.tokens.empty()) throw Error("item " + item_id + ": empty caption sample");
    if (s.cond.size() != static_cast<std::size_t>(L))
      throw Error("item " + item_id + ": cond must have one row per ensemble member");
    for (const auto& row : s.cond)
      if (row.size() != s.tokens.size())
        throw Error("item " + item_id + ": cond row length differs from caption length");
  }
  for (int p = 0; p < L; ++p)
    if (per_producer[static_cast<std::size_t>(p)] != K)
      throw Error("item " + item_id + ": producer " + std::to_string(p) + " has " +
                  std::to_string(per_producer[static_cast<std::size_t>(p)]) + " samples, expected " +
                  std::to_string(K));
}

double EnsembleCaptionSet::width(const CaptionSample& sample) const {
  std::size_t w = sample.tokens.size();
  if (eos && w > 1 && sample.tokens.back() == *eos) --w;
  return static_cast<double>(w);
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::random: return "random";
    case Strategy::entropy_mc: return "entropy-mc";
    case Strategy::entropy_full: return "entropy";
    case Strategy::likelihood: return "likelihood";
    case Strategy::agreement: return "agreement";
    case Strategy::divergence: return "divergence";
  }
  return "?";
}

std::string_view to_string(Direction d) {
  return d == Direction::maximize ? "maximize" : "minimize";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  for (auto s : {Strategy::random, Strategy::entropy_mc, Strategy::entropy_full, Strategy::likelihood,
                 Strategy::agreement, Strategy::divergence})
    if (to_string(s) == name) return s;
  if (name == "entropy-full" || name == "entropy_full") return Strategy::entropy_full;
  if (name == "entropy_mc") return Strategy::entropy_mc;
  return std::nullopt;
}

Direction direction_of(Strategy s) {
  return (s == Strategy::likelihood || s == Strategy::agreement) ? Direction::minimize
                                                                 : Direction::maximize;
}

bool needs_ensemble(Strategy s) { return s == Strategy::agreement || s == Strategy::divergence; }

ScoreReport entropy_score_mc(const EnsembleCaptionSet& set, int model) {
  const auto own = samples_of(set, model);
  double total = 0.0;
  for (const auto* s : own) {
    const auto& row = s->cond[static_cast<std::size_t>(model)];
    for (std::size_t w = 0; w < s->tokens.size(); ++w) {
      const double lp = chosen_token_logprob(row[w], s->tokens[w]);
      total -= std::exp(lp) * lp;
    }
  }
  return make_report(set, Strategy::entropy_mc, total / static_cast<double>(own.size()));
}

ScoreReport entropy_score_full(const EnsembleCaptionSet& set, int model) {
  const auto own = samples_of(set, model);
  double total = 0.0;
  for (const auto* s : own)
    for (const auto& d : s->cond[static_cast<std::size_t>(model)]) total += shannon_entropy(d);
  return make_report(set, Strategy::entropy_full, total / static_cast<double>(own.size()));
}

ScoreReport likelihood_score(const EnsembleCaptionSet& set, int model) {
  const auto own = samples_of(set, model);
  double total = 0.0;
  for (const auto* s : own) {
    const auto& row = s->cond[static_cast<std::size_t>(model)];
    for (std::size_t w = 0; w < s->tokens.size(); ++w)
      total += chosen_token_logprob(row[w], s->tokens[w]);
  }
  return make_report(set, Strategy::likelihood, total / static_cast<double>(own.size()));
}

ScoreReport agreement_score(const EnsembleCaptionSet& set) {
  require_ensemble(set, Strategy::agreement);
  double total = 0.0;
  for (const auto& s : set.samples) {
    const double norm = static_cast<double>(set.K) * set.width(s);
    for (int q = 0; q < set.L; ++q) {
      if (q == s.producer) continue;
      const auto& row = s.cond[static_cast<std::size_t>(q)];
      double ll = 0.0;
      for (std::size_t w = 0; w < s.tokens.size(); ++w) ll += chosen_token_logprob(row[w], s.tokens[w]);
      total += ll / norm;
    }
  }
  const double pairs = static_cast<double>(set.L) * static_cast<double>(set.L - 1);
  return make_report(set, Strategy::agreement, total / pairs);
}

ScoreReport divergence_score(const EnsembleCaptionSet& set) {
  require_ensemble(set, Strategy::divergence);
  double total = 0.0;
  for (const auto& s : set.samples) {
    const auto& own = s.cond[static_cast<std::size_t>(s.producer)];
    const double width = set.width(s);
    for (int q = 0; q < set.L; ++q) {
      if (q == s.producer) continue;
      const auto& other = s.cond[static_cast<std::size_t>(q)];
      double d = 0.0;
      for (std::size_t w = 0; w < s.tokens.size(); ++w) d += token_kl(own[w], other[w]);
      total += (d / width) / static_cast<double>(set.K);
    }
  }
  const double pairs = static_cast<double>(set.L) * static_cast<double>(set.L - 1);
  return make_report(set, Strategy::divergence, total / pairs);
}

ScoreReport score_set(const EnsembleCaptionSet& set, Strategy strategy, int model) {
  switch (strategy) {
    case Strategy::entropy_mc: return entropy_score_mc(set, model);
    case Strategy::entropy_full: return entropy_score_full(set, model);
    case Strategy::likelihood: return likelihood_score(set, model);
    case Strategy::agreement: return agreement_score(set);
    case Strategy::divergence: return divergence_score(set);
    case Strategy::random: break;
  }
  throw Error("random strategy has no caption-set score");
}

std::vector<ScoreReport> score_items(const std::vector<std::string>& ids,
                                     const std::map<std::string, EnsembleCaptionSet>& sets,
                                     Strategy strategy, std::uint64_t seed, int model) {
  std::vector<ScoreReport> out;
  out.reserve(ids.size());
  if (strategy == Strategy::random) {
    auto rng = substream(seed, "random-strategy");
    for (const auto& id : ids) out.push_back({id, strategy, uniform01(rng), Direction::maximize});
    return out;
  }
  std::vector<const EnsembleCaptionSet*> ordered;
  ordered.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = sets.find(id);
    if (it == sets.end())
      throw Error("no ensemble caption set for item " + id + " (needed by " +
                  std::string(to_string(strategy)) + ")");
    ordered.push_back(&it->second);
  }
  return kernels::score_sets(ordered, strategy, model);
}

std::vector<ScoreReport> score_pool(const Pool& pool,
                                    const std::map<std::string, EnsembleCaptionSet>& sets,
                                    Strategy strategy, std::uint64_t seed, int model) {
  return score_items(pool.unlabeled_ids(), sets, strategy, seed, model);
}

void sort_best_first(std::vector<ScoreReport>& reports) {
  std::sort(reports.begin(), reports.end(), [](const ScoreReport& a, const ScoreReport& b) {
    if (a.value != b.value)
      return a.direction == Direction::maximize ? a.value > b.value : a.value < b.value;
    return a.item_id < b.item_id;
  });
}

}  // namespace alrank
