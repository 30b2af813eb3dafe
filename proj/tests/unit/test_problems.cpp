#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "strobo/problems.hpp"

using namespace strobo;

TEST_CASE("registry") {
  auto names = problem_names();
  for (const char* n : {"const_eb_2d", "elementary_rotation", "vlasov_const_b_2d", "vlasov_varying_b_2d", "vlasov_3d"})
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
  CHECK_THROWS_AS(make_problem("nope"), ConfigError);
  CHECK_THROWS_AS(make_problem("const_eb_2d", {{"U", "x1"}}), ConfigError);
  CHECK_THROWS_AS(make_problem("vlasov_varying_b_2d", {{"b", "sin(x1)"}}), DomainError);
  CHECK_THROWS_AS(make_problem("vlasov_3d", {{"direction", "sideways"}}), ConfigError);
  for (const auto& n : names) {
    ParamMap d = default_parameters(n);
    CHECK(d.count("sigma") == 1);
    CHECK(d.count("center") == 1);
    Problem p = make_problem(n);
    CHECK(p.name == n);
    CHECK(p.eps_default.size() >= 3);
    for (const auto& [k, v] : p.parameters) CHECK(d.count(k) == 1);
    CHECK(p.parameters.count("center") == 1);
  }
}

TEST_CASE("center parameter") {
  Problem p = make_problem("const_eb_2d", {{"center", "1,0,0,0"}});
  Vec c(4);
  c << 1, 0, 0, 0;
  CHECK(p.f0(c) == 1.0);
  CHECK_THROWS_AS(make_problem("const_eb_2d", {{"center", "1,0"}}), ConfigError);
  CHECK_THROWS_AS(make_problem("const_eb_2d", {{"center", "a,b,c,d"}}), ConfigError);
  Problem q = make_problem("vlasov_const_b_2d");
  CHECK(q.f0(c.setZero()) < 1.0);  // off-center default
}

TEST_CASE("sample points are seeded and inside the box") {
  Problem p = make_problem("vlasov_3d");
  auto a = p.sample_points(30, 9), b = p.sample_points(30, 9), c = p.sample_points(30, 10);
  CHECK(a.size() == 30);
  bool same = true, differ = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    same = same && a[i] == b[i];
    differ = differ || a[i] != c[i];
    CHECK(a[i].size() == 6);
    CHECK(a[i].cwiseAbs().maxCoeff() <= p.box);
  }
  CHECK(same);
  CHECK(differ);
}

TEST_CASE("exact solutions start at f0") {
  for (const auto& n : problem_names()) {
    Problem p = make_problem(n);
    if (!p.exact_solution) continue;
    for (const auto& y : p.sample_points(5, 2)) CHECK(p.exact_solution(0.0, y, 0.1) == doctest::Approx(p.f0(y)));
  }
}

TEST_CASE("closed forms agree with their numeric counterparts") {
  for (const auto& n : problem_names()) {
    CAPTURE(n);
    for (const auto& e : self_test(make_problem(n), 6, 3)) {
      CAPTURE(e.check);
      CAPTURE(e.deviation);
      CHECK(e.ok());
    }
  }
}

TEST_CASE("full field is G / eps + K for constant frequency") {
  Problem p = make_problem("vlasov_const_b_2d");
  Vec y = p.sample_points(1, 4)[0];
  CHECK((p.full_field(0.1)(y) - (10.0 * p.G(y) + p.K(y))).norm() < 1e-12);
  Problem r = make_problem("elementary_rotation");
  Vec z = r.sample_points(1, 4)[0];
  CHECK((r.full_field(0.1)(z) - (10.0 * r.omega(z) * r.G(z) + r.K(z))).norm() < 1e-12);
}
