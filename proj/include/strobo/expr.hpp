#pragma once

#include <memory>
#include <string>
#include <vector>

#include "strobo/fields.hpp"

namespace strobo {

// Expression trees over named coordinates: + - * / ^, unary minus, sin cos exp, pi, numbers.
class Expr {
 public:
  enum class Op { num, var, add, sub, mul, div, pow, neg, sin, cos, exp };

  Expr() = default;

  // vars: coordinate names in order, e.g. {"x1","x2","x3"}
  static Expr parse(const std::string& text, const std::vector<std::string>& vars);
  static Expr number(double c);
  static Expr variable(int index);

  bool valid() const { return static_cast<bool>(node_); }
  double eval(const Vec& point) const;
  Expr diff(int index) const;  // symbolic partial derivative
  std::string to_string() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);

 private:
  struct Node {
    Op op;
    double value = 0;
    int index = -1;
    std::shared_ptr<const Node> a, b;
  };
  using NodePtr = std::shared_ptr<const Node>;
  explicit Expr(NodePtr n) : node_(std::move(n)) {}
  static Expr make(Op op, const Expr& a, const Expr& b = {});
  static double eval_node(const Node& n, const Vec& p);
  static std::string str_node(const Node& n);
  bool is_num(double c) const { return node_ && node_->op == Op::num && node_->value == c; }

  friend class ExprParser;
  NodePtr node_;
};

// Scalar field from an expression with symbolic gradient and Hessian.
ScalarField expr_scalar_field(const Expr& e, int dim, const std::string& label = {});

}  // namespace strobo
