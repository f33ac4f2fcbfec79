#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "alrank/rng.hpp"
#include "alrank/scorers.hpp"
#include "alrank/token_distribution.hpp"

namespace support {

using alrank::Token;
using alrank::TokenDistribution;

inline TokenDistribution dist(std::vector<std::pair<Token, double>> entries, double rem, std::int32_t vocab) {
  return TokenDistribution::from_entries(std::move(entries), rem, vocab);
}

inline TokenDistribution one_hot(Token t, std::int32_t vocab) { return dist({{t, 1.0}}, 0.0, vocab); }

inline alrank::CaptionSample sample(int producer, alrank::TokenSeq tokens,
                                    std::vector<std::vector<TokenDistribution>> cond) {
  alrank::CaptionSample s;
  s.producer = producer;
  s.tokens = std::move(tokens);
  s.cond = std::move(cond);
  return s;
}

inline alrank::EnsembleCaptionSet caption_set(std::string id, int L, int K,
                                              std::vector<alrank::CaptionSample> samples) {
  alrank::EnsembleCaptionSet set;
  set.item_id = std::move(id);
  set.L = L;
  set.K = K;
  set.samples = std::move(samples);
  set.validate();
  return set;
}

// Random sparse row: `listed` distinct tokens out of `vocab`, the rest of the
// mass in the remainder. With listed == vocab the row is dense.
inline TokenDistribution random_row(alrank::Rng& rng, std::int32_t vocab, std::int32_t listed) {
  std::vector<Token> ids(static_cast<std::size_t>(vocab));
  for (Token t = 0; t < vocab; ++t) ids[static_cast<std::size_t>(t)] = t;
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<double> w(static_cast<std::size_t>(listed) + 1);
  double total = 0.0;
  for (auto& x : w) total += (x = 0.05 + alrank::uniform01(rng));
  if (listed == vocab) total -= w.back();
  std::vector<std::pair<Token, double>> entries;
  for (std::int32_t i = 0; i < listed; ++i)
    entries.emplace_back(ids[static_cast<std::size_t>(i)], w[static_cast<std::size_t>(i)] / total);
  double rem = listed == vocab ? 0.0 : w.back() / total;
  return TokenDistribution::from_entries(std::move(entries), rem, vocab);
}

inline std::string fixture(const std::string& rel) { return std::string(ALRANK_FIXTURES) + "/" + rel; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace support
