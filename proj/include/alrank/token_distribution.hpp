#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "alrank/pool.hpp"

namespace alrank {

inline constexpr double kProbFloor = 1e-10;

/// Sparse next-token distribution: listed entries plus the collective mass of
/// every unlisted token. Entries are sorted by token id.
struct TokenDistribution {
  std::vector<std::pair<Token, double>> entries;
  double remainder = 0.0;
  std::int32_t vocab_size = 0;

  /// Probability of one unlisted token when the remainder is spread uniformly.
  double unlisted_share() const;
  /// Listed probability, or the uniform remainder share for an unlisted token.
  double prob(Token token) const;

  /// Throws alrank::Error if probabilities are not positive, ids not sorted and
  /// unique or in range, or total mass is more than `tolerance` away from 1.
  void validate(double tolerance = 1e-6) const;

  /// Canonicalizes raw (token, prob) pairs (sorts by token) and validates.
  static TokenDistribution from_entries(std::vector<std::pair<Token, double>> entries,
                                        double remainder, std::int32_t vocab_size,
                                        double tolerance = 1e-6);
  /// Dense row over the whole vocabulary, zero entries dropped.
  static TokenDistribution from_dense(const std::vector<double>& probs);
};

/// KL(p || q) over the union of listed tokens plus one remainder pseudo-token.
///
/// A token listed on one side only takes the other side's uniform remainder
/// share, and the pseudo-token carries whatever remainder is left. q-side
/// probabilities are floored at kProbFloor. Exact for dense rows and for rows
/// whose unlisted tokens really are uniform.
double token_kl(const TokenDistribution& p, const TokenDistribution& q);

/// log P(token) with unlisted tokens taking the uniform remainder share,
/// floored at kProbFloor.
double chosen_token_logprob(const TokenDistribution& d, Token token);

/// Shannon entropy with the remainder as a single pseudo-token.
double shannon_entropy(const TokenDistribution& d);

}  // namespace alrank
