#pragma once

#include <functional>

#include "strobo/averaging.hpp"
#include "strobo/ode.hpp"

namespace strobo {

using InitialDensity = std::function<double(const Vec&)>;

// exp(-|y - c|^2 / (2 sigma^2)); smooth, decays fast enough to make pointwise errors meaningful
InitialDensity gaussian_density(double sigma = 1.0, Vec center = Vec());

// chi_{-t}(y) for ydot = F(y)
Vec backward_point(const VectorField& F, double t, const Vec& y, const IntegratorOptions& opts = {},
                   IntegratorStats* stats = nullptr);

struct ReferenceOptions {
  IntegratorOptions integ = default_integ();
  double step_factor = 0.2;      // max_step = step_factor * eps
  double max_fast_periods = 1e5;  // refuse t / eps beyond this
  bool allow_expensive = false;

  static IntegratorOptions default_integ() {
    IntegratorOptions o;
    o.rel_tol = 1e-11;
    o.abs_tol = 1e-13;
    return o;
  }
};

void check_reference_cost(double eps, double t, const ReferenceOptions& opts);

Vec reference_foot(const VectorField& F_eps, double eps, double t, const Vec& y, const ReferenceOptions& opts = {},
                   IntegratorStats* stats = nullptr);
double solve_reference(const VectorField& F_eps, double eps, const InitialDensity& f0, double t, const Vec& y,
                       const ReferenceOptions& opts = {}, IntegratorStats* stats = nullptr);

enum class SolveOrder {
  tau_first,  // tau-equation solved at t = 0, then the t-equation
  t_first,
};

struct SplitOptions {
  IntegratorOptions integ;
  SolveOrder order = SolveOrder::tau_first;
  bool reduce_tau = true;
};

double reduce_angle(double tau);

Vec split_foot(const AveragedSplit& split, double t, double tau, const Vec& y, const SplitOptions& opts = {},
               IntegratorStats* stats = nullptr);
double solve_split(const AveragedSplit& split, const InitialDensity& f0, double t, double tau, const Vec& y,
                   const SplitOptions& opts = {}, IntegratorStats* stats = nullptr);
double diagonal_eval(const AveragedSplit& split, const InitialDensity& f0, double t, const Vec& y,
                     const SplitOptions& opts = {}, IntegratorStats* stats = nullptr);

}  // namespace strobo
