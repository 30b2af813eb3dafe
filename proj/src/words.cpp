#include "strobo/words.hpp"

#include <sstream>

namespace strobo {

Complex GaussianRational::to_complex() const {
  return {static_cast<double>(re), static_cast<double>(im)};
}

std::string GaussianRational::to_string() const {
  std::ostringstream os;
  os << re;
  if (im < 0)
    os << "-" << Rational(-im) << "i";
  else
    os << "+" << im << "i";
  return os.str();
}

namespace {

// One step of the recursion. `sub` evaluates shorter or reduced words.
template <class Sub>
GaussianRational step(const Word& w, Sub&& sub) {
  std::size_t r = 0;
  while (r < w.size() && w[r] == 0) ++r;
  if (r == w.size()) {
    GaussianRational v;
    if (r == 1) v.re = 1;
    return v;
  }
  const int j = w[r];
  Word rest(w.begin() + static_cast<long>(r) + 1, w.end());
  if (r == 0 && rest.empty()) return {};
  // first term: drop one leading zero, or the letter j itself when there are none
  Word a;
  if (r == 0) {
    a = rest;
  } else {
    a.assign(r - 1, 0);
    a.push_back(j);
    a.insert(a.end(), rest.begin(), rest.end());
  }
  // second term: merge j into the next letter
  Word b(r, 0);
  if (!rest.empty()) {
    b.push_back(j + rest[0]);
    b.insert(b.end(), rest.begin() + 1, rest.end());
  }
  GaussianRational va = sub(a);
  GaussianRational vb = b.empty() ? GaussianRational{} : sub(b);
  return (va - vb).times_i_over(j);
}

GaussianRational fresh(const Word& w, int depth, int max_depth) {
  if (depth > max_depth) throw NumericError("beta recursion depth exceeded for word " + word_to_string(w));
  return step(w, [&](const Word& u) { return fresh(u, depth + 1, max_depth); });
}

}  // namespace

GaussianRational beta_exact(const Word& w) {
  if (w.empty()) throw UsageError("beta of the empty word");
  return fresh(w, 0, 4 * static_cast<int>(w.size()));
}

GaussianRational BetaTable::eval(const Word& w, int depth, int max_depth) const {
  if (depth > max_depth) throw NumericError("beta recursion depth exceeded for word " + word_to_string(w));
  if (auto it = memo_.find(w); it != memo_.end()) return it->second;
  GaussianRational v = step(w, [&](const Word& u) { return eval(u, depth + 1, max_depth); });
  memo_.emplace(w, v);
  return v;
}

GaussianRational BetaTable::exact(const Word& w) const {
  if (w.empty()) throw UsageError("beta of the empty word");
  std::lock_guard<std::mutex> lock(mu_);
  return eval(w, 0, 4 * static_cast<int>(w.size()));
}

std::size_t BetaTable::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return memo_.size();
}

std::vector<Word> enumerate_words(int r, int k_max) {
  if (r < 1 || k_max < 0) throw UsageError("enumerate_words: need r >= 1 and k_max >= 0");
  std::vector<Word> out;
  Word w(r, -k_max);
  while (true) {
    out.push_back(w);
    int i = r - 1;
    while (i >= 0 && w[i] == k_max) w[i--] = -k_max;
    if (i < 0) break;
    ++w[i];
  }
  return out;
}

Word parse_word(const std::string& text) {
  Word w;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    try {
      int v = std::stoi(item, &pos);
      while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
      if (pos != item.size()) throw std::invalid_argument(item);
      w.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("malformed word entry '" + item + "'");
    }
  }
  if (w.empty()) throw ConfigError("empty word");
  return w;
}

std::string word_to_string(const Word& w) {
  std::ostringstream os;
  for (std::size_t i = 0; i < w.size(); ++i) os << (i ? "," : "") << w[i];
  return os.str();
}

}  // namespace strobo
