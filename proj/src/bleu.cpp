#include "alrank/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "alrank/error.hpp"

namespace alrank {
namespace {

constexpr Token kPackLimit = 0xfffe;

bool packable(const TokenSeq& seq) {
  return std::all_of(seq.begin(), seq.end(), [](Token t) { return t >= 0 && t <= kPackLimit; });
}

std::vector<std::uint64_t> packed_ngrams(const TokenSeq& seq, std::size_t n) {
  std::vector<std::uint64_t> out;
  if (seq.size() < n) return out;
  out.reserve(seq.size() - n + 1);
  for (std::size_t i = 0; i + n <= seq.size(); ++i) {
    std::uint64_t k = 0;
    for (std::size_t j = 0; j < n; ++j) {
      // Code 0 is never produced by a reference, so unpackable tokens never match.
      const Token t = seq[i + j];
      const std::uint64_t code = (t >= 0 && t <= kPackLimit) ? static_cast<std::uint64_t>(t) + 1 : 0;
      k = (k << 16) | code;
    }
    out.push_back(k);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::map<TokenSeq, int> count_ngrams(const TokenSeq& seq, std::size_t n) {
  std::map<TokenSeq, int> counts;
  if (seq.size() < n) return counts;
  for (std::size_t i = 0; i + n <= seq.size(); ++i)
    ++counts[TokenSeq(seq.begin() + static_cast<std::ptrdiff_t>(i),
                      seq.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return counts;
}

}  // namespace

BleuScorer::BleuScorer(const std::vector<TokenSeq>& references, int max_n) : max_n_(max_n) {
  if (references.empty()) throw Error("bleu: no references");
  if (max_n < 1) throw Error("bleu: max_n must be >= 1");
  packed_ = max_n <= 4 && std::all_of(references.begin(), references.end(), packable);
  for (const auto& ref : references) ref_lengths_.push_back(ref.size());

  for (int n = 1; n <= max_n; ++n) {
    const auto nn = static_cast<std::size_t>(n);
    if (packed_) {
      Packed merged;
      for (const auto& ref : references) {
        const auto grams = packed_ngrams(ref, nn);
        for (std::size_t i = 0; i < grams.size();) {
          std::size_t j = i;
          while (j < grams.size() && grams[j] == grams[i]) ++j;
          merged.emplace_back(grams[i], static_cast<int>(j - i));
          i = j;
        }
      }
      // Keep the maximum count per key.
      std::sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : a.second > b.second;
      });
      merged.erase(std::unique(merged.begin(), merged.end(),
                               [](const auto& a, const auto& b) { return a.first == b.first; }),
                   merged.end());
      packed_max_.push_back(std::move(merged));
    } else {
      std::map<TokenSeq, int> max_ref;
      for (const auto& ref : references)
        for (const auto& [gram, c] : count_ngrams(ref, nn)) {
          int& slot = max_ref[gram];
          slot = std::max(slot, c);
        }
      general_max_.push_back(std::move(max_ref));
    }
  }
}

double BleuScorer::score(const TokenSeq& candidate) const {
  if (candidate.empty()) throw Error("bleu: empty candidate");

  double log_sum = 0.0;
  for (int n = 1; n <= max_n_; ++n) {
    const auto nn = static_cast<std::size_t>(n);
    int matched = 0;
    int total = 0;
    if (packed_) {
      const auto& ref = packed_max_[nn - 1];
      const auto grams = packed_ngrams(candidate, nn);
      total = static_cast<int>(grams.size());
      for (std::size_t i = 0; i < grams.size();) {
        std::size_t j = i;
        while (j < grams.size() && grams[j] == grams[i]) ++j;
        auto it = std::lower_bound(ref.begin(), ref.end(), grams[i],
                                   [](const auto& e, std::uint64_t k) { return e.first < k; });
        if (it != ref.end() && it->first == grams[i]) matched += std::min(static_cast<int>(j - i), it->second);
        i = j;
      }
    } else {
      const auto& ref = general_max_[nn - 1];
      for (const auto& [gram, c] : count_ngrams(candidate, nn)) {
        total += c;
        auto it = ref.find(gram);
        if (it != ref.end()) matched += std::min(c, it->second);
      }
    }
    const double precision = n == 1 ? static_cast<double>(matched) / static_cast<double>(total)
                                    : (matched + 1.0) / (total + 1.0);
    if (precision <= 0.0) return 0.0;
    log_sum += std::log(precision);
  }

  const auto c = static_cast<double>(candidate.size());
  std::size_t closest = ref_lengths_.front();
  for (auto len : ref_lengths_) {
    const auto diff = std::abs(static_cast<double>(len) - c);
    const auto best = std::abs(static_cast<double>(closest) - c);
    if (diff < best || (diff == best && len < closest)) closest = len;
  }
  const double bp = std::exp(std::min(0.0, 1.0 - static_cast<double>(closest) / c));
  return std::clamp(bp * std::exp(log_sum / max_n_), 0.0, 1.0);
}

double bleu(const TokenSeq& candidate, const std::vector<TokenSeq>& references, int max_n) {
  if (candidate.empty()) throw Error("bleu: empty candidate");
  return BleuScorer(references, max_n).score(candidate);
}

}  // namespace alrank
