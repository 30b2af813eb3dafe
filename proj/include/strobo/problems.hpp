#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "strobo/averaging.hpp"
#include "strobo/expr.hpp"
#include "strobo/geometry3d.hpp"
#include "strobo/phase.hpp"
#include "strobo/transport.hpp"

namespace strobo {

using ParamMap = std::map<std::string, std::string>;

struct Problem {
  std::string name;
  int dim_y = 0;
  bool constant_frequency = true;  // omega == 1
  ScalarField omega;               // over y
  VectorField G, K;                // over y: F^eps = omega G / eps + K
  PeriodicFlow flow;               // flow of G over y
  InitialDensity f0;
  std::vector<double> eps_default;
  double box = 4.0;  // |x|, |v| <= box

  // optional closed forms
  std::function<double(double t, const Vec& y, double eps)> exact_solution;
  std::function<double(double t, double tau, const Vec& y)> exact_h;
  std::function<double(double t, double tau, const Vec& y)> exact_S;
  std::vector<VectorField> exact_terms;  // K^[1], K^[2], ... over y, or over (t, y) when augmented
  ScalarField leading_phase;             // phi0(y) with S = phi0 t + O(eps), when known
  std::optional<FieldGeometry> geometry;

  ParamMap parameters;  // resolved

  // dimension of the space where averaging runs (dim_y or dim_y + 1)
  int averaging_dim() const { return constant_frequency ? dim_y : dim_y + 1; }
  VectorField full_field(double eps) const;
  AveragingInput averaging_input(ModeOptions mode_opts = {}) const;
  // always over Y = (t, y); constant-frequency problems are lifted with omega = 1
  AveragingInput phase_input(ModeOptions mode_opts = {}) const;
  AugmentedProblem augmented(const std::vector<Vec>& samples = {}) const;
  Vec averaging_point(const Vec& y, double t = 0.0) const;
  std::vector<Vec> sample_points(int count, std::uint64_t seed) const;
};

std::vector<std::string> problem_names();
// defaults of every recognised parameter for a problem
ParamMap default_parameters(const std::string& name);
// unknown names or parameters -> ConfigError
Problem make_problem(const std::string& name, const ParamMap& overrides = {});

Problem const_eb_2d(double E1 = 1.0, double E2 = 0.0, double sigma = 1.0, const Vec& center = Vec());
Problem elementary_rotation(double sigma = 1.0, const Vec& center = Vec());
Problem vlasov_const_b_2d(const std::string& U = "0.5*(x1^2 + x2^2)", double sigma = 1.0, const Vec& center = Vec());
Problem vlasov_varying_b_2d(const std::string& b = "2 + sin(x1)*cos(x2)", const std::string& U = "0.5*(x1^2 + x2^2)",
                            double sigma = 1.0, const Vec& center = Vec());
// direction: "general" uses B1..B3, "constant" uses B = (0, 0, b)
Problem vlasov_3d(const std::string& direction = "general", const std::vector<std::string>& B = {},
                  const std::string& b = "2 + sin(x1)*cos(x2)", const std::string& U = "0.5*(x1^2 + x2^2 + x3^2)",
                  double sigma = 1.0, const Vec& center = Vec());

double solve_reference(const Problem& p, double eps, double t, const Vec& y, const ReferenceOptions& opts = {},
                       IntegratorStats* stats = nullptr);

struct SelfTestEntry {
  std::string check;
  double deviation = 0;
  double tolerance = 0;
  bool ok() const { return deviation <= tolerance; }
};
// closed forms against their numeric counterparts
std::vector<SelfTestEntry> self_test(const Problem& p, int points = 20, std::uint64_t seed = 7);

}  // namespace strobo
