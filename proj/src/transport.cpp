#include "strobo/transport.hpp"

#include <cmath>
#include <sstream>

namespace strobo {

InitialDensity gaussian_density(double sigma, Vec center) {
  if (!(sigma > 0)) throw UsageError("gaussian width must be positive");
  return [sigma, center](const Vec& y) {
    double r2 = center.size() == y.size() ? (y - center).squaredNorm() : y.squaredNorm();
    return std::exp(-r2 / (2 * sigma * sigma));
  };
}

Vec backward_point(const VectorField& F, double t, const Vec& y, const IntegratorOptions& opts,
                   IntegratorStats* stats) {
  if (t < 0) throw UsageError("backward_point needs t >= 0");
  return flow(F, y, -t, opts, stats);
}

void check_reference_cost(double eps, double t, const ReferenceOptions& opts) {
  if (!(eps > 0)) throw UsageError("eps must be positive");
  if (!opts.allow_expensive && std::abs(t) / eps > opts.max_fast_periods) {
    std::ostringstream os;
    os << "stiff reference refused: t/eps = " << std::abs(t) / eps << " exceeds " << opts.max_fast_periods
       << " (set allow_expensive to override)";
    throw CostGuardError(os.str());
  }
}

Vec reference_foot(const VectorField& F_eps, double eps, double t, const Vec& y, const ReferenceOptions& opts,
                   IntegratorStats* stats) {
  check_reference_cost(eps, t, opts);
  IntegratorOptions io = opts.integ;
  io.max_step = std::min(io.max_step, opts.step_factor * eps);
  return backward_point(F_eps, t, y, io, stats);
}

double solve_reference(const VectorField& F_eps, double eps, const InitialDensity& f0, double t, const Vec& y,
                       const ReferenceOptions& opts, IntegratorStats* stats) {
  return f0(reference_foot(F_eps, eps, t, y, opts, stats));
}

double reduce_angle(double tau) {
  double m = std::fmod(tau, kTwoPi);
  if (m < 0) m += kTwoPi;
  return m;
}

Vec split_foot(const AveragedSplit& split, double t, double tau, const Vec& y, const SplitOptions& opts,
               IntegratorStats* stats) {
  if (t < 0) throw UsageError("split solve needs t >= 0");
  const double tr = opts.reduce_tau ? reduce_angle(tau) : tau;
  if (opts.order == SolveOrder::tau_first) {
    Vec z = flow(split.Keps, y, -t, opts.integ, stats);
    return flow(split.Geps, z, -tr, opts.integ, stats);
  }
  Vec z = flow(split.Geps, y, -tr, opts.integ, stats);
  return flow(split.Keps, z, -t, opts.integ, stats);
}

double solve_split(const AveragedSplit& split, const InitialDensity& f0, double t, double tau, const Vec& y,
                   const SplitOptions& opts, IntegratorStats* stats) {
  return f0(split_foot(split, t, tau, y, opts, stats));
}

double diagonal_eval(const AveragedSplit& split, const InitialDensity& f0, double t, const Vec& y,
                     const SplitOptions& opts, IntegratorStats* stats) {
  SplitOptions o = opts;
  o.reduce_tau = true;
  return solve_split(split, f0, t, t / split.eps, y, o, stats);
}

}  // namespace strobo
