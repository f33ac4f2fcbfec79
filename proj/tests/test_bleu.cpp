#include <cmath>

#include "alrank/bleu.hpp"
#include "alrank/error.hpp"
#include "alrank/rng.hpp"
#include "doctest.h"

using namespace alrank;

TEST_CASE("bleu examples") {
  CHECK(bleu({1, 2, 3, 4, 5}, {{1, 2, 3, 4, 5}}) == doctest::Approx(1.0));
  // "a a a a" against "a b": clipped unigram precision 1/4, no brevity penalty.
  CHECK(bleu({1, 1, 1, 1}, {{1, 2}}, 1) == doctest::Approx(0.25));
  CHECK(bleu({7, 8, 9}, {{1, 2, 3}}) == 0.0);
  // Short candidate: exp(1 - r/c) with r = 4, c = 2.
  CHECK(bleu({1, 2}, {{1, 2, 3, 4}}, 1) == doctest::Approx(std::exp(-1.0)));
  // Closest reference length wins; ties go to the shorter one.
  CHECK(bleu({1, 2}, {{1, 2, 3, 4}, {1, 2}}, 1) == doctest::Approx(1.0));
  CHECK(bleu({1, 2, 3}, {{1, 2}, {4, 5, 6, 7}}, 1) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("bleu add-one smoothing above unigrams") {
  // Unigrams all match, bigrams 0 of 2: (1 * (0+1)/(2+1))^(1/2).
  CHECK(bleu({1, 2, 3}, {{3, 2, 1}}, 2) == doctest::Approx(std::sqrt(1.0 / 3.0)));
}

TEST_CASE("bleu errors") {
  CHECK_THROWS_AS(bleu({}, {{1}}), Error);
  CHECK_THROWS_AS(bleu({1}, {}), Error);
  CHECK_THROWS_AS(bleu({1}, {{1}}, 0), Error);
}

TEST_CASE("property: bleu in [0,1], reference order irrelevant, packed equals general") {
  auto rng = substream(5, "bleu");
  for (int trial = 0; trial < 300; ++trial) {
    auto seq = [&](std::size_t len) {
      TokenSeq s(len);
      for (auto& t : s) t = static_cast<Token>(1 + rng() % 6);
      return s;
    };
    const TokenSeq cand = seq(1 + rng() % 10);
    std::vector<TokenSeq> refs;
    for (std::size_t r = 0; r < 1 + rng() % 4; ++r) refs.push_back(seq(1 + rng() % 10));
    const double b = bleu(cand, refs);
    CHECK(b >= 0.0);
    CHECK(b <= 1.0);
    auto reversed = refs;
    std::reverse(reversed.begin(), reversed.end());
    CHECK(bleu(cand, reversed) == b);

    // Tokens past 16 bits force the general n-gram path.
    auto shift = [](TokenSeq s) {
      for (auto& t : s) t += 100000;
      return s;
    };
    std::vector<TokenSeq> shifted;
    for (const auto& r : refs) shifted.push_back(shift(r));
    CHECK(bleu(shift(cand), shifted) == doctest::Approx(b).epsilon(1e-12));
    CHECK(BleuScorer(refs, 5).score(cand) >= 0.0);
  }
}

TEST_CASE("bleu with max_n above four matches itself on exact copies") {
  const TokenSeq s{1, 2, 3, 4, 5, 6, 7};
  CHECK(bleu(s, {s}, 6) == doctest::Approx(1.0));
  // Matches per order: 7/8, 5/7, 3/6, 1/5, 0/4; smoothed from bigrams on.
  const TokenSeq c{1, 2, 3, 4, 9, 6, 7, 8};
  const double expected = std::exp((std::log(7.0 / 8) + std::log(6.0 / 8) + std::log(4.0 / 7) +
                                    std::log(2.0 / 6) + std::log(1.0 / 5)) / 5.0);
  CHECK(bleu(c, {{1, 2, 3, 4, 5, 6, 7, 8}}, 5) == doctest::Approx(expected));
}
