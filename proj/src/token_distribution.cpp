#include "alrank/token_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "alrank/error.hpp"

namespace alrank {
namespace {

double plogp_ratio(double p, double q) {
  if (p <= 0.0) return 0.0;
  return p * std::log(p / std::max(q, kProbFloor));
}

}  // namespace

double TokenDistribution::unlisted_share() const {
  const auto unlisted = static_cast<std::int64_t>(vocab_size) - static_cast<std::int64_t>(entries.size());
  if (unlisted <= 0) return 0.0;
  return remainder / static_cast<double>(unlisted);
}

double TokenDistribution::prob(Token token) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), token,
                             [](const auto& e, Token t) { return e.first < t; });
  if (it != entries.end() && it->first == token) return it->second;
  return unlisted_share();
}

void TokenDistribution::validate(double tolerance) const {
  if (vocab_size < 1) throw Error("token distribution: vocab_size must be >= 1");
  if (entries.size() > static_cast<std::size_t>(vocab_size))
    throw Error("token distribution: more entries than vocabulary");
  if (!(remainder >= 0.0) || !std::isfinite(remainder))
    throw Error("token distribution: remainder must be finite and >= 0");
  double total = remainder;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto [tok, p] = entries[i];
    if (tok < 0 || tok >= vocab_size)
      throw Error("token distribution: token " + std::to_string(tok) + " outside vocabulary");
    if (!(p > 0.0) || !std::isfinite(p))
      throw Error("token distribution: probability for token " + std::to_string(tok) + " must be > 0");
    if (i > 0 && entries[i - 1].first >= tok)
      throw Error("token distribution: token ids must be unique and ascending");
    total += p;
  }
  if (std::abs(total - 1.0) > tolerance)
    throw Error("token distribution: total mass " + std::to_string(total) + " is not 1");
}

TokenDistribution TokenDistribution::from_entries(std::vector<std::pair<Token, double>> entries,
                                                  double remainder, std::int32_t vocab_size,
                                                  double tolerance) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  TokenDistribution d{std::move(entries), remainder, vocab_size};
  d.validate(tolerance);
  return d;
}

TokenDistribution TokenDistribution::from_dense(const std::vector<double>& probs) {
  TokenDistribution d;
  d.vocab_size = static_cast<std::int32_t>(probs.size());
  for (std::size_t t = 0; t < probs.size(); ++t)
    if (probs[t] > 0.0) d.entries.emplace_back(static_cast<Token>(t), probs[t]);
  return d;
}

double token_kl(const TokenDistribution& p, const TokenDistribution& q) {
  if (p.vocab_size != q.vocab_size)
    throw Error("token_kl: vocabulary size mismatch (" + std::to_string(p.vocab_size) + " vs " +
                std::to_string(q.vocab_size) + ")");
  const double p_share = p.unlisted_share();
  const double q_share = q.unlisted_share();
  // Remainder mass not yet attributed to a union token.
  double p_rest = p.remainder;
  double q_rest = q.remainder;
  double kl = 0.0;

  auto pi = p.entries.begin();
  auto qi = q.entries.begin();
  while (pi != p.entries.end() || qi != q.entries.end()) {
    double pv = 0.0;
    double qv = 0.0;
    if (qi == q.entries.end() || (pi != p.entries.end() && pi->first < qi->first)) {
      pv = pi->second;
      qv = q_share;
      q_rest -= q_share;
      ++pi;
    } else if (pi == p.entries.end() || qi->first < pi->first) {
      pv = p_share;
      qv = qi->second;
      p_rest -= p_share;
      ++qi;
    } else {
      pv = pi->second;
      qv = qi->second;
      ++pi;
      ++qi;
    }
    kl += plogp_ratio(pv, qv);
  }
  kl += plogp_ratio(std::max(p_rest, 0.0), std::max(q_rest, 0.0));
  return kl;
}

double chosen_token_logprob(const TokenDistribution& d, Token token) {
  return std::log(std::max(d.prob(token), kProbFloor));
}

double shannon_entropy(const TokenDistribution& d) {
  double h = 0.0;
  for (const auto& [tok, p] : d.entries) h -= p * std::log(p);
  if (d.remainder > 0.0) h -= d.remainder * std::log(d.remainder);
  return h;
}

}  // namespace alrank
