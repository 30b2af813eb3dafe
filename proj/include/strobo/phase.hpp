#pragma once

#include <functional>
#include <optional>

#include "strobo/averaging.hpp"
#include "strobo/transport.hpp"

namespace strobo {

// Y = (t, y); Gcheck = (0, G), Kcheck = (1/omega, K/omega)
struct AugmentedProblem {
  int dim_y = 0;
  VectorField Gcheck, Kcheck;
  ScalarField omega;
  double omega_min = 0;  // smallest sampled value
  PeriodicFlow flow;     // flow of Gcheck (valid when a base flow was supplied)
};

AugmentedProblem augment(const ScalarField& omega, const VectorField& G, const VectorField& K,
                         const std::vector<Vec>& sample_points, const PeriodicFlow* base_flow = nullptr);

// (t, y) -> (t, Phi_tau(y))
PeriodicFlow augment_flow(const PeriodicFlow& base);

Vec lift(const Vec& y, double t = 0.0);

struct CommutingPair {
  int order = 0;  // epsilon order p: built from K^[1..p+1]
  double eps = 0;
  VectorField A, B;
  ScalarField alpha, beta;
};

// Pair from a split computed over Y. Checks t-independence and Kcheck_1 != 0 at the sample points.
CommutingPair commuting_pair(const AveragedSplit& split_checked, const std::vector<Vec>& sample_points);

struct PairDefect {
  double bracket = 0;  // |[A,B](y)|
  double lie = 0;      // |L_A beta - L_B alpha|(y)
};
PairDefect pair_defect(const CommutingPair& pair, const Vec& y);

struct PhaseOptions {
  IntegratorOptions integ;
  SolveOrder order = SolveOrder::tau_first;
  bool reduce_tau = true;
  double residual_tol = 1e-10;
};

double solve_h(const CommutingPair& pair, const InitialDensity& f0, double t, double tau, const Vec& y,
               const PhaseOptions& opts = {}, IntegratorStats* stats = nullptr);
double solve_S(const CommutingPair& pair, double t, double tau, const Vec& y, const PhaseOptions& opts = {},
               IntegratorStats* stats = nullptr);
// warm: previous root on the same branch, if any
double solve_tau(const CommutingPair& pair, double t, const Vec& y, double eps, const PhaseOptions& opts = {},
                 std::optional<double> warm = std::nullopt, IntegratorStats* stats = nullptr);

struct Reconstruction {
  double f = 0;
  double tau = 0;
  double S = 0;
  double residual = 0;  // |eps tau - S(t, tau, y)|
};

Reconstruction reconstruct(const CommutingPair& pair, const InitialDensity& f0, double t, const Vec& y, double eps,
                           const PhaseOptions& opts = {}, std::optional<double> warm = std::nullopt,
                           IntegratorStats* stats = nullptr);

// (S - phi0(y) t) / eps for a problem declaring a leading phase phi0
double tilde_S(const CommutingPair& pair, const ScalarField& leading_phase, double t, double tau, const Vec& y,
               double eps, const PhaseOptions& opts = {});

// Evaluators bundled for one (pair, f0, eps)
class PhaseProfile {
 public:
  PhaseProfile(CommutingPair pair, InitialDensity f0, double eps, PhaseOptions opts = {});
  double S(double t, double tau, const Vec& y) const;
  double h(double t, double tau, const Vec& y) const;
  double tau(double t, const Vec& y) const;
  double f(double t, const Vec& y) const;
  const CommutingPair& pair() const { return pair_; }

 private:
  CommutingPair pair_;
  InitialDensity f0_;
  double eps_;
  PhaseOptions opts_;
};

}  // namespace strobo
