#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "alrank/pool.hpp"

namespace alrank {

/// Sentence BLEU in [0, 1]: geometric mean of clipped n-gram precisions for
/// n = 1..max_n (add-one smoothing for n >= 2) times the brevity penalty
/// against the closest reference length (shorter wins ties).
double bleu(const TokenSeq& candidate, const std::vector<TokenSeq>& references, int max_n = 4);

/// Reference side of BLEU, precomputed once and reused across candidates.
/// n-grams are packed into 64-bit keys when max_n <= 4 and every token fits
/// in 16 bits; otherwise token vectors are used as keys.
class BleuScorer {
 public:
  BleuScorer(const std::vector<TokenSeq>& references, int max_n = 4);

  double score(const TokenSeq& candidate) const;

 private:
  using Packed = std::vector<std::pair<std::uint64_t, int>>;  // sorted by key

  int max_n_;
  bool packed_;
  std::vector<std::size_t> ref_lengths_;
  std::vector<Packed> packed_max_;                  // per n
  std::vector<std::map<TokenSeq, int>> general_max_;  // per n
};

}  // namespace alrank
