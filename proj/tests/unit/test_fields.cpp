#include <cmath>

#include "doctest.h"
#include "strobo/fields.hpp"

using namespace strobo;

namespace {

// F1 = (y2^2, y1 y2), F2 = (sin y1, y1 + y2): bracket worked out by hand
VectorField F1() {
  return VectorField(
      2, [](const Vec& y) { return make_vec({y[1] * y[1], y[0] * y[1]}); },
      [](const Vec& y) { return Mat((Mat(2, 2) << 0, 2 * y[1], y[1], y[0]).finished()); }, "F1", FdScheme::standard(),
      [](const Vec&) {
        // H[l](i,j) = d^2 F_i / dy_j dy_l
        Hess h(2, Mat::Zero(2, 2));
        h[1](0, 1) = 2;
        h[0](1, 1) = 1;
        h[1](1, 0) = 1;
        return h;
      });
}
VectorField F2() {
  return VectorField(
      2, [](const Vec& y) { return make_vec({std::sin(y[0]), y[0] + y[1]}); },
      [](const Vec& y) { return Mat((Mat(2, 2) << std::cos(y[0]), 0, 1, 1).finished()); }, "F2");
}

Vec hand_bracket(const Vec& y) {
  // DF1 F2 - DF2 F1
  double a = y[0], b = y[1];
  Vec f1 = make_vec({b * b, a * b}), f2 = make_vec({std::sin(a), a + b});
  Mat d1(2, 2), d2(2, 2);
  d1 << 0, 2 * b, b, a;
  d2 << std::cos(a), 0, 1, 1;
  return d1 * f2 - d2 * f1;
}

}  // namespace

TEST_CASE("finite difference stencils") {
  auto f = [](double x) { return std::exp(std::sin(x)); };
  const double x = 0.7, exact = std::cos(x) * std::exp(std::sin(x));
  CHECK(std::abs(fd::derivative(f, x, FdScheme{2, 1e-5}) - exact) < 1e-9);
  CHECK(std::abs(fd::derivative(f, x, FdScheme{4, 1e-3}) - exact) < 1e-10);
  CHECK(std::abs(fd::derivative(f, x, FdScheme{6, 5e-3}) - exact) < 1e-11);
}

TEST_CASE("jacobian: analytic vs finite differences") {
  Vec y = make_vec({0.4, -1.3});
  CHECK((F1().jacobian(y) - F1().fd_jacobian(y, FdScheme::nested())).norm() < 1e-10);
  CHECK((F2().jacobian(y) - F2().numeric_only().jacobian(y)).norm() < 1e-8);
}

TEST_CASE("hessian: analytic vs finite differences of the jacobian") {
  Vec y = make_vec({0.4, -1.3});
  Hess a = F1().hessian(y), n = F1().numeric_only().hessian(y);
  for (int l = 0; l < 2; ++l) CHECK((a[l] - n[l]).norm() < 1e-6);
}

TEST_CASE("lie bracket matches the hand computation") {
  VectorField B = lie_bracket(F1(), F2());
  for (Vec y : {make_vec({0.4, -1.3}), make_vec({2.0, 0.5})}) CHECK((B(y) - hand_bracket(y)).norm() < 1e-13);
  CHECK_THROWS_AS(lie_bracket(F1(), zero_field(3)), UsageError);
}

TEST_CASE("bracket is antisymmetric and vanishes on itself") {
  Vec y = make_vec({-0.2, 0.9});
  CHECK((lie_bracket(F1(), F2())(y) + lie_bracket(F2(), F1())(y)).norm() < 1e-13);
  CHECK(lie_bracket(F2(), F2())(y).norm() < 1e-13);
}

TEST_CASE("combine and divergence") {
  VectorField C = combine<double>({2.0, -1.0}, {F1(), F2()}, "C");
  Vec y = make_vec({0.4, -1.3});
  CHECK((C(y) - (2 * F1()(y) - F2()(y))).norm() < 1e-15);
  CHECK(C.has_analytic_jacobian());
  // div F1 = y1, div F2 = cos y1 + 1
  CHECK(divergence(F1(), y) == doctest::Approx(0.4));
  CHECK(divergence(C, y) == doctest::Approx(2 * 0.4 - (std::cos(0.4) + 1)));
  CHECK_THROWS_AS(combine<double>({1.0}, {F1(), F2()}), UsageError);
}

TEST_CASE("dimension checks") {
  CHECK_THROWS_AS(F1()(make_vec({1, 2, 3})), UsageError);
  CHECK_THROWS_AS(VectorField(0, [](const Vec& y) { return y; }), UsageError);
  CHECK_THROWS_AS(VectorField(kMaxDim + 1, [](const Vec& y) { return y; }), UsageError);
  VectorField empty;
  CHECK_THROWS_AS(empty.dim(), UsageError);
}

TEST_CASE("real part guards the imaginary residue") {
  ComplexVectorField z(
      1, [](const Vec& y) { return CVec::Constant(1, Complex(y[0], 1e-14)); }, {}, "z");
  CHECK(real_part(z)(make_vec({3.0}))[0] == 3.0);
  ComplexVectorField w(
      1, [](const Vec& y) { return CVec::Constant(1, Complex(y[0], 1e-3)); }, {}, "w");
  CHECK_THROWS_AS(real_part(w)(make_vec({3.0})), NumericError);
}

TEST_CASE("scalar fields") {
  ScalarField s(2, [](const Vec& y) { return y[0] * y[0] * y[1]; });
  Vec y = make_vec({1.5, 2.0});
  CHECK(s.gradient(y)[0] == doctest::Approx(6.0));
  CHECK(s.gradient(y)[1] == doctest::Approx(2.25));
  CHECK(s.hessian(y)(0, 1) == doctest::Approx(3.0).epsilon(1e-5));
  CHECK(ScalarField::constant(2, 4.0)(y) == 4.0);
  CHECK(ScalarField::constant(2, 4.0).gradient(y).norm() == 0.0);
}
