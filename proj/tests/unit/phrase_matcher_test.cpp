#include <gtest/gtest.h>

#include <random>

#include "harvest/errors.hpp"
#include "harvest/phrase_matcher.hpp"
#include "test_support.hpp"

using harvest::corpus::PhraseMatcher;

TEST(PhraseMatcher, TokenRunsNotSubstrings) {
  const std::vector<std::string> lex = {"Hamas", "West Bank"};
  const PhraseMatcher m(lex);
  EXPECT_TRUE(m.matches("Israel-Hamas war enters second week"));
  EXPECT_TRUE(m.matches("Settlers in the west   bank"));
  EXPECT_FALSE(m.matches("Bahamas vacation deals"));
  EXPECT_FALSE(m.matches("Bank of the West"));
  EXPECT_FALSE(m.matches(""));
  EXPECT_EQ(m.phrase_count(), 2u);
}

TEST(PhraseMatcher, OverlappingPrefixes) {
  const std::vector<std::string> lex = {"a b c", "b c d", "c x"};
  const PhraseMatcher m(lex);
  EXPECT_TRUE(m.matches("a b c"));
  EXPECT_TRUE(m.matches("a b b c d"));
  EXPECT_TRUE(m.matches("a b c x"));
  EXPECT_FALSE(m.matches("a b d c"));
}

TEST(PhraseMatcher, EmptyLexiconRejected) {
  const std::vector<std::string> none = {"", "--"};
  EXPECT_THROW(PhraseMatcher{none}, harvest::Error);
}

TEST(PhraseMatcher, AgreesWithNaiveScan) {
  std::mt19937 rng(2024);
  const std::vector<std::string> vocab = {"gaza", "Gaza", "strip", "west", "bank", "iron", "dome", "al",
                                          "shifa", "x", "Hamas", "hamas's", "ü", "über"};
  const std::vector<std::string> seps = {" ", "-", ", ", "  ", "'", "\n", "/"};
  auto phrase = [&](std::size_t max_len) {
    std::string s;
    const std::size_t len = 1 + rng() % max_len;
    for (std::size_t k = 0; k < len; ++k) s += (k ? seps[rng() % seps.size()] : "") + vocab[rng() % vocab.size()];
    return s;
  };
  int positives = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<std::string> lex;
    const std::size_t n = 1 + rng() % 6;
    for (std::size_t i = 0; i < n; ++i) lex.push_back(phrase(3));
    const PhraseMatcher m(lex);
    const std::string text = phrase(12);
    const bool expected = testsupport::naive_matches(text, lex);
    positives += expected;
    ASSERT_EQ(m.matches(text), expected) << "text: " << text;
  }
  EXPECT_GT(positives, 1000);
  EXPECT_LT(positives, 9000);
}
