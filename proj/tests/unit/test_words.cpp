#include "doctest.h"
#include "strobo/words.hpp"

using namespace strobo;

namespace {
GaussianRational gr(Rational re, Rational im) { return {re, im}; }
}  // namespace

TEST_CASE("beta base cases") {
  CHECK(beta_exact({0}) == gr(1, 0));
  for (int j : {-3, -1, 1, 5}) CHECK(beta_exact({j}) == gr(0, 0));
  CHECK(beta_exact({0, 0}) == gr(0, 0));
  CHECK(beta_exact({0, 0, 0, 0}) == gr(0, 0));
}

TEST_CASE("beta of (k,-k) is -i/k") {
  for (int k = 1; k <= 3; ++k) CHECK(beta_exact({k, -k}) == gr(0, Rational(-1, k)));
}

TEST_CASE("hand-recursed words") {
  // each value worked out with the recursion rules on paper
  CHECK(beta_exact({0, 1}) == gr(0, -1));
  CHECK(beta_exact({0, 0, 1}) == gr(1, 0));
  CHECK(beta_exact({0, 0, 2}) == gr(Rational(1, 4), 0));
  CHECK(beta_exact({1, 0}) == gr(0, 1));
  CHECK(beta_exact({1, 1}) == gr(0, 0));
  CHECK(beta_exact({-1, 1}) == gr(0, 1));
  CHECK(beta_exact({1, -1, 0}) == gr(1, 0));
  CHECK(beta_exact({1, 0, -1}) == gr(-2, 0));
  CHECK(beta_exact({2, -1, -1}) == gr(Rational(-1, 2), 0));
  CHECK(beta_exact({0, 1, -1}) == gr(1, 0));
  CHECK(beta_exact({1, 2, -3}) == gr(Rational(-1, 3), 0));
}

TEST_CASE("memo agrees with fresh evaluation") {
  BetaTable t;
  for (int r = 1; r <= 3; ++r)
    for (const auto& w : enumerate_words(r, 3)) CHECK(t.exact(w) == beta_exact(w));
  std::size_t n = t.size();
  for (const auto& w : enumerate_words(3, 3)) (void)t.exact(w);
  CHECK(t.size() == n);
  CHECK(t({1, -1}) == Complex(0, -1));
}

TEST_CASE("enumerate words") {
  auto w1 = enumerate_words(1, 1);
  REQUIRE(w1.size() == 3);
  CHECK(w1[0] == Word{-1});
  CHECK(w1[1] == Word{0});
  CHECK(w1[2] == Word{1});
  CHECK(enumerate_words(2, 1).size() == 9);
  CHECK(enumerate_words(3, 2).size() == 125);
  CHECK_THROWS_AS(enumerate_words(0, 1), UsageError);
}

TEST_CASE("word parsing") {
  CHECK(parse_word("1,-1") == Word{1, -1});
  CHECK(parse_word(" 0 ") == Word{0});
  CHECK(word_to_string(Word{2, -3, 0}) == "2,-3,0");
  CHECK_THROWS_AS(parse_word("1,x"), ConfigError);
  CHECK_THROWS_AS(parse_word(""), ConfigError);
  CHECK_THROWS_AS(beta_exact({}), UsageError);
  CHECK(beta_exact({1, -1}).to_string() == "0-1i");
}
