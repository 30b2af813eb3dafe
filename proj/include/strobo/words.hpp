#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "strobo/types.hpp"

namespace strobo {

using Word = std::vector<int>;
using Rational = boost::multiprecision::cpp_rational;

// a + b i with exact rational parts
struct GaussianRational {
  Rational re{0}, im{0};

  Complex to_complex() const;
  std::string to_string() const;
  bool is_zero() const { return re == 0 && im == 0; }
  friend bool operator==(const GaussianRational&, const GaussianRational&) = default;
  GaussianRational operator-(const GaussianRational& o) const { return {re - o.re, im - o.im}; }
  GaussianRational operator-() const { return {-re, -im}; }
  // multiply by i/j
  GaussianRational times_i_over(int j) const { return {-im / j, re / j}; }
};

// Fresh evaluation of the recursion (no memo).
GaussianRational beta_exact(const Word& w);

class BetaTable {
 public:
  GaussianRational exact(const Word& w) const;
  Complex operator()(const Word& w) const { return exact(w).to_complex(); }
  std::size_t size() const;

 private:
  GaussianRational eval(const Word& w, int depth, int max_depth) const;
  mutable std::mutex mu_;
  mutable std::map<Word, GaussianRational> memo_;
};

std::vector<Word> enumerate_words(int r, int k_max);

Word parse_word(const std::string& text);
std::string word_to_string(const Word& w);

}  // namespace strobo
