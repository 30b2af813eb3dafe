#include "strobo/expr.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

namespace strobo {

Expr Expr::number(double c) { return Expr(std::make_shared<const Node>(Node{Op::num, c, -1, nullptr, nullptr})); }

Expr Expr::variable(int index) {
  if (index < 0) throw UsageError("negative variable index");
  return Expr(std::make_shared<const Node>(Node{Op::var, 0, index, nullptr, nullptr}));
}

Expr Expr::make(Op op, const Expr& a, const Expr& b) {
  // constant folding for the common cases produced by diff()
  auto num = [](const Expr& e) { return e.node_->op == Op::num; };
  switch (op) {
    case Op::add:
      if (a.is_num(0)) return b;
      if (b.is_num(0)) return a;
      if (num(a) && num(b)) return number(a.node_->value + b.node_->value);
      break;
    case Op::sub:
      if (b.is_num(0)) return a;
      if (num(a) && num(b)) return number(a.node_->value - b.node_->value);
      break;
    case Op::mul:
      if (a.is_num(0) || b.is_num(0)) return number(0);
      if (a.is_num(1)) return b;
      if (b.is_num(1)) return a;
      if (num(a) && num(b)) return number(a.node_->value * b.node_->value);
      break;
    case Op::div:
      if (a.is_num(0)) return number(0);
      if (b.is_num(1)) return a;
      break;
    case Op::neg:
      if (num(a)) return number(-a.node_->value);
      break;
    default: break;
  }
  return Expr(std::make_shared<const Node>(Node{op, 0, -1, a.node_, b.node_}));
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::make(Expr::Op::add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::make(Expr::Op::sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::make(Expr::Op::mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::make(Expr::Op::div, a, b); }
Expr operator-(const Expr& a) { return Expr::make(Expr::Op::neg, a); }

double Expr::eval_node(const Node& n, const Vec& p) {
  switch (n.op) {
    case Op::num: return n.value;
    case Op::var:
      if (n.index >= p.size()) throw UsageError("expression variable out of range for point");
      return p[n.index];
    case Op::add: return eval_node(*n.a, p) + eval_node(*n.b, p);
    case Op::sub: return eval_node(*n.a, p) - eval_node(*n.b, p);
    case Op::mul: return eval_node(*n.a, p) * eval_node(*n.b, p);
    case Op::div: return eval_node(*n.a, p) / eval_node(*n.b, p);
    case Op::pow: return std::pow(eval_node(*n.a, p), eval_node(*n.b, p));
    case Op::neg: return -eval_node(*n.a, p);
    case Op::sin: return std::sin(eval_node(*n.a, p));
    case Op::cos: return std::cos(eval_node(*n.a, p));
    case Op::exp: return std::exp(eval_node(*n.a, p));
  }
  return NAN;
}

double Expr::eval(const Vec& point) const {
  if (!node_) throw UsageError("empty expression");
  return eval_node(*node_, point);
}

Expr Expr::diff(int k) const {
  if (!node_) throw UsageError("empty expression");
  const Node& n = *node_;
  Expr a(n.a), b(n.b);
  switch (n.op) {
    case Op::num: return number(0);
    case Op::var: return number(n.index == k ? 1 : 0);
    case Op::add: return a.diff(k) + b.diff(k);
    case Op::sub: return a.diff(k) - b.diff(k);
    case Op::mul: return a.diff(k) * b + a * b.diff(k);
    case Op::div: return (a.diff(k) * b - a * b.diff(k)) / (b * b);
    case Op::neg: return -a.diff(k);
    case Op::sin: return make(Op::cos, a) * a.diff(k);
    case Op::cos: return -(make(Op::sin, a) * a.diff(k));
    case Op::exp: return *this * a.diff(k);
    case Op::pow: {
      Expr db = b.diff(k);
      if (db.is_num(0)) {
        // b constant in x_k
        Expr bm1 = b - number(1);
        return b * make(Op::pow, a, bm1) * a.diff(k);
      }
      throw UsageError("variable exponents are not supported by differentiation");
    }
  }
  return number(0);
}

std::string Expr::str_node(const Node& n) {
  std::ostringstream os;
  os.precision(17);
  switch (n.op) {
    case Op::num: os << n.value; break;
    case Op::var: os << "x" << n.index + 1; break;
    case Op::add: os << "(" << str_node(*n.a) << " + " << str_node(*n.b) << ")"; break;
    case Op::sub: os << "(" << str_node(*n.a) << " - " << str_node(*n.b) << ")"; break;
    case Op::mul: os << "(" << str_node(*n.a) << " * " << str_node(*n.b) << ")"; break;
    case Op::div: os << "(" << str_node(*n.a) << " / " << str_node(*n.b) << ")"; break;
    case Op::pow: os << "(" << str_node(*n.a) << " ^ " << str_node(*n.b) << ")"; break;
    case Op::neg: os << "(-" << str_node(*n.a) << ")"; break;
    case Op::sin: os << "sin(" << str_node(*n.a) << ")"; break;
    case Op::cos: os << "cos(" << str_node(*n.a) << ")"; break;
    case Op::exp: os << "exp(" << str_node(*n.a) << ")"; break;
  }
  return os.str();
}

std::string Expr::to_string() const { return node_ ? str_node(*node_) : std::string(); }

// expr   := term (('+'|'-') term)*
// term   := unary (('*'|'/') unary)*
// unary  := '-' unary | power
// power  := atom ('^' unary)?
// atom   := number | name | name '(' expr ')' | '(' expr ')'
class ExprParser {
 public:
  ExprParser(const std::string& s, const std::vector<std::string>& vars) : s_(s), vars_(vars) {}

  Expr run() {
    Expr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) {
    std::ostringstream os;
    os << "expression '" << s_ << "': " << what << " at position " << pos_;
    throw ConfigError(os.str());
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  Expr expr() {
    Expr e = term();
    for (;;) {
      if (accept('+'))
        e = e + term();
      else if (accept('-'))
        e = e - term();
      else
        return e;
    }
  }
  Expr term() {
    Expr e = unary();
    for (;;) {
      if (accept('*'))
        e = e * unary();
      else if (accept('/'))
        e = e / unary();
      else
        return e;
    }
  }
  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }
  Expr power() {
    Expr base = atom();
    if (accept('^')) return Expr::make(Expr::Op::pow, base, unary());
    return base;
  }
  Expr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    char c = s_[pos_];
    if (accept('(')) {
      Expr e = expr();
      if (!accept(')')) fail("missing ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      return Expr::number(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      std::string name = s_.substr(start, pos_ - start);
      if (name == "sin" || name == "cos" || name == "exp") {
        if (!accept('(')) fail("expected '(' after " + name);
        Expr arg = expr();
        if (!accept(')')) fail("missing ')'");
        Expr::Op op = name == "sin" ? Expr::Op::sin : name == "cos" ? Expr::Op::cos : Expr::Op::exp;
        return Expr::make(op, arg);
      }
      if (name == "pi") return Expr::number(std::numbers::pi);
      for (std::size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i] == name) return Expr::variable(static_cast<int>(i));
      pos_ = start;
      fail("unknown name '" + name + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

Expr Expr::parse(const std::string& text, const std::vector<std::string>& vars) {
  return ExprParser(text, vars).run();
}

ScalarField expr_scalar_field(const Expr& e, int dim, const std::string& label) {
  if (!e.valid()) throw UsageError("empty expression");
  std::vector<Expr> grad;
  std::vector<std::vector<Expr>> hess(dim);
  for (int i = 0; i < dim; ++i) grad.push_back(e.diff(i));
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) hess[i].push_back(grad[i].diff(j));
  return ScalarField(
      dim, [e](const Vec& y) { return e.eval(y); },
      [grad](const Vec& y) {
        Vec g(y.size());
        for (int i = 0; i < y.size(); ++i) g[i] = grad[i].eval(y);
        return g;
      },
      [hess](const Vec& y) {
        Mat H(y.size(), y.size());
        for (int i = 0; i < y.size(); ++i)
          for (int j = 0; j < y.size(); ++j) H(i, j) = hess[i][j].eval(y);
        return H;
      },
      label.empty() ? e.to_string() : label);
}

}  // namespace strobo
