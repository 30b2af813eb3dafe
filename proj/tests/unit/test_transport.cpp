#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "doctest.h"
#include "strobo/problems.hpp"
#include "strobo/transport.hpp"

using namespace strobo;

namespace {

// x' = v, v' = J v / eps + E as a 5x5 affine generator acting on (x, v, 1)
Eigen::Matrix<double, 5, 5> generator(double eps, double E1, double E2) {
  Eigen::Matrix<double, 5, 5> M = Eigen::Matrix<double, 5, 5>::Zero();
  M(0, 2) = M(1, 3) = 1;
  M(2, 3) = 1 / eps;
  M(3, 2) = -1 / eps;
  M(2, 4) = E1;
  M(3, 4) = E2;
  return M;
}

Vec foot(double eps, double t, const Vec& y, double E1 = 1.0, double E2 = 0.0) {
  Eigen::Matrix<double, 5, 1> z;
  z << y[0], y[1], y[2], y[3], 1.0;
  Eigen::Matrix<double, 5, 5> P = (-t * generator(eps, E1, E2)).exp();
  return Vec((P * z).head<4>());
}

}  // namespace

TEST_CASE("gaussian density") {
  auto f = gaussian_density(2.0);
  CHECK(f(make_vec({0, 0})) == 1.0);
  CHECK(f(make_vec({2, 0})) == doctest::Approx(std::exp(-0.5)));
  auto g = gaussian_density(1.0, make_vec({1, 1}));
  CHECK(g(make_vec({1, 1})) == 1.0);
  CHECK_THROWS_AS(gaussian_density(0.0), UsageError);
}

TEST_CASE("reference foot against the matrix exponential") {
  Problem p = const_eb_2d(0.6, -0.3);
  const double eps = 0.05, t = 0.7;
  for (const auto& y : p.sample_points(4, 3)) {
    Vec a = reference_foot(p.full_field(eps), eps, t, y);
    CHECK((a - foot(eps, t, y, 0.6, -0.3)).norm() < 1e-9);
    CHECK(p.exact_solution(t, y, eps) == doctest::Approx(p.f0(foot(eps, t, y, 0.6, -0.3))).epsilon(1e-12));
  }
}

TEST_CASE("cost guard") {
  ReferenceOptions o;
  CHECK_THROWS_AS(check_reference_cost(1e-6, 1.0, o), CostGuardError);
  CHECK_NOTHROW(check_reference_cost(1e-3, 1.0, o));
  o.allow_expensive = true;
  CHECK_NOTHROW(check_reference_cost(1e-6, 1.0, o));
  CHECK_THROWS_AS(check_reference_cost(0.0, 1.0, o), UsageError);
}

TEST_CASE("angle reduction") {
  CHECK(reduce_angle(1.0) == 1.0);
  CHECK(reduce_angle(kTwoPi + 0.5) == doctest::Approx(0.5));
  CHECK(reduce_angle(-0.5) == doctest::Approx(kTwoPi - 0.5));
  CHECK(reduce_angle(1000.0) == doctest::Approx(std::fmod(1000.0, kTwoPi)));
}

TEST_CASE("diagonal evaluation with the order-2 split is exact for constant E") {
  Problem p = const_eb_2d(1.0, 0.5);
  AveragingInput in = p.averaging_input();
  auto terms = averaged_terms(in, 2, Route::pipeline);
  for (double eps : {0.1, 0.01}) {
    AveragedSplit s = make_split(in, terms, eps);
    for (const auto& y : p.sample_points(3, 4)) {
      double want = p.f0(foot(eps, 1.0, y, 1.0, 0.5));
      CHECK(std::abs(diagonal_eval(s, p.f0, 1.0, y) - want) < 1e-9);
      // both solve orders agree for a commuting pair
      SplitOptions o;
      o.order = SolveOrder::t_first;
      CHECK(std::abs(solve_split(s, p.f0, 1.0, 1.0 / eps, y, o) - want) < 1e-9);
    }
  }
}

TEST_CASE("lower-order splits carry an eps-dependent error") {
  Problem p = const_eb_2d(1.0, 0.5);
  AveragingInput in = p.averaging_input();
  auto terms = averaged_terms(in, 1, Route::pipeline);
  std::vector<double> err;
  Vec y = p.sample_points(1, 5)[0];
  for (double eps : {0.02, 0.01}) {
    AveragedSplit s = make_split(in, terms, eps);
    err.push_back(std::abs(diagonal_eval(s, p.f0, 1.0, y) - p.f0(foot(eps, 1.0, y, 1.0, 0.5))));
  }
  CHECK(err[0] > 1e-6);
  CHECK(err[1] < err[0]);
}

TEST_CASE("reference counts grow like 1/eps") {
  Problem p = const_eb_2d();
  Vec y = p.sample_points(1, 6)[0];
  IntegratorStats a, b;
  solve_reference(p, 1e-1, 1.0, y, {}, &a);
  solve_reference(p, 1e-2, 1.0, y, {}, &b);
  CHECK(b.rhs_evals > 5 * a.rhs_evals);
}
