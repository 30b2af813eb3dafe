#include "strobo/phase.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <sstream>

#include "bundle_jet.hpp"

namespace strobo {

Vec lift(const Vec& y, double t) {
  Vec Y(y.size() + 1);
  Y[0] = t;
  Y.tail(y.size()) = y;
  return Y;
}

AugmentedProblem augment(const ScalarField& omega, const VectorField& G, const VectorField& K,
                         const std::vector<Vec>& sample_points, const PeriodicFlow* base_flow) {
  const int d = G.dim();
  if (K.dim() != d || omega.dim() != d) throw UsageError("augment: dimension mismatch");
  if (d + 1 > kMaxDim) throw UsageError("augment: augmented dimension too large");
  AugmentedProblem P;
  P.dim_y = d;
  P.omega = omega;
  P.omega_min = std::numeric_limits<double>::infinity();
  for (const auto& y : sample_points) {
    double w = omega(y);
    if (!(w > 0)) {
      std::ostringstream os;
      os << "omega = " << w << " <= 0 at y = " << y.transpose();
      throw DomainError(os.str());
    }
    P.omega_min = std::min(P.omega_min, w);
  }
  VectorField::JacFn gjac;
  if (G.has_analytic_jacobian())
    gjac = [G, d](const Vec& Y) {
      Mat M = Mat::Zero(d + 1, d + 1);
      M.bottomRightCorner(d, d) = G.jacobian(Vec(Y.tail(d)));
      return M;
    };
  P.Gcheck = VectorField(
      d + 1,
      [G, d](const Vec& Y) {
        Vec out = Vec::Zero(d + 1);
        out.tail(d) = G(Vec(Y.tail(d)));
        return out;
      },
      gjac, "Gcheck");
  VectorField::JacFn kjac;
  if (K.has_analytic_jacobian())
    kjac = [K, omega, d](const Vec& Y) {
      Vec y = Y.tail(d);
      double w = omega(y);
      Vec g = omega.gradient(y);
      Vec k = K(y);
      Mat M = Mat::Zero(d + 1, d + 1);
      M.block(0, 1, 1, d) = -g.transpose() / (w * w);
      M.bottomRightCorner(d, d) = K.jacobian(y) / w - k * g.transpose() / (w * w);
      return M;
    };
  P.Kcheck = VectorField(
      d + 1,
      [K, omega, d](const Vec& Y) {
        Vec y = Y.tail(d);
        double w = omega(y);
        Vec out(d + 1);
        out[0] = 1.0 / w;
        out.tail(d) = K(y) / w;
        return out;
      },
      kjac, "Kcheck");
  if (base_flow && base_flow->valid()) P.flow = augment_flow(*base_flow);
  return P;
}

PeriodicFlow augment_flow(const PeriodicFlow& base) {
  const int d = base.dim();
  return PeriodicFlow::analytic(
      d + 1,
      [base, d](double tau, const Vec& Y) {
        FlowJet b = base(tau, Vec(Y.tail(d)));
        FlowJet out;
        out.point = Y;
        out.point.tail(d) = b.point;
        out.jacobian = Mat::Identity(d + 1, d + 1);
        out.jacobian.bottomRightCorner(d, d) = b.jacobian;
        return out;
      },
      "augmented " + base.label());
}

// ---------------------------------------------------------------- commuting pair

CommutingPair commuting_pair(const AveragedSplit& split, const std::vector<Vec>& sample_points) {
  const VectorField K = split.Keps, G = split.Geps;
  const int n = K.dim(), d = n - 1;
  if (d < 1) throw UsageError("commuting_pair: split is not over an augmented space");
  for (const auto& y : sample_points) {
    if (y.size() != d) throw UsageError("commuting_pair: sample point dimension mismatch");
    Vec k0 = K(lift(y, 0.0)), k1 = K(lift(y, 0.731));
    Vec g0 = G(lift(y, 0.0)), g1 = G(lift(y, 0.731));
    if ((k0 - k1).norm() > 1e-10 * (1 + k0.norm()) || (g0 - g1).norm() > 1e-10 * (1 + g0.norm()))
      throw UsageError("commuting_pair: averaged fields depend on t");
    if (!(std::abs(k0[0]) > 1e-8)) {
      std::ostringstream os;
      os << "first component of Kcheck^eps vanishes (" << k0[0] << ") at y = " << y.transpose();
      throw DomainError(os.str());
    }
  }
  CommutingPair P;
  P.order = split.order - 1;
  P.eps = split.eps;
  auto A_eval = [K, d](const Vec& y) {
    Vec k = K(lift(y));
    return Vec(k.tail(d) / k[0]);
  };
  auto alpha_eval = [K](const Vec& y) { return 1.0 / K(lift(y))[0]; };
  auto beta_eval = [K, G](const Vec& y) {
    Vec Y = lift(y);
    return -G(Y)[0] / K(Y)[0];
  };
  auto B_eval = [K, G, d](const Vec& y) {
    Vec Y = lift(y);
    Vec k = K(Y), g = G(Y);
    double b = -g[0] / k[0];
    return Vec(g.tail(d) + b * k.tail(d));
  };
  VectorField::JacFn A_jac, B_jac;
  ScalarField::GradFn alpha_grad, beta_grad;
  if (K.has_analytic_jacobian() && G.has_analytic_jacobian()) {
    A_jac = [K, d](const Vec& y) {
      Vec Y = lift(y);
      Vec k = K(Y);
      Mat JK = K.jacobian(Y).rightCols(d);
      Vec A = k.tail(d) / k[0];
      return Mat((JK.bottomRows(d) - A * JK.row(0)) / k[0]);
    };
    alpha_grad = [K, d](const Vec& y) {
      Vec Y = lift(y);
      double k0 = K(Y)[0];
      return Vec(-K.jacobian(Y).block(0, 1, 1, d).transpose() / (k0 * k0));
    };
    auto bgrad = [K, G, d](const Vec& Y, const Vec& k, const Vec& g) {
      Vec dk0 = K.jacobian(Y).block(0, 1, 1, d).transpose();
      Vec dg0 = G.jacobian(Y).block(0, 1, 1, d).transpose();
      return Vec(-dg0 / k[0] + g[0] * dk0 / (k[0] * k[0]));
    };
    beta_grad = [K, G, bgrad](const Vec& y) {
      Vec Y = lift(y);
      return bgrad(Y, K(Y), G(Y));
    };
    B_jac = [K, G, d, bgrad](const Vec& y) {
      Vec Y = lift(y);
      Vec k = K(Y), g = G(Y);
      double b = -g[0] / k[0];
      Mat JK = K.jacobian(Y).rightCols(d), JG = G.jacobian(Y).rightCols(d);
      return Mat(JG.bottomRows(d) + k.tail(d) * bgrad(Y, k, g).transpose() + b * JK.bottomRows(d));
    };
  }
  const FdScheme fd = FdScheme::nested();
  P.A = VectorField(d, A_eval, A_jac, "A", fd);
  P.B = VectorField(d, B_eval, B_jac, "B", fd);
  P.alpha = ScalarField(d, alpha_eval, alpha_grad, {}, "alpha", fd);
  P.beta = ScalarField(d, beta_eval, beta_grad, {}, "beta", fd);
  return P;
}

PairDefect pair_defect(const CommutingPair& pair, const Vec& y) {
  PairDefect out;
  Vec a = pair.A(y), b = pair.B(y);
  out.bracket = (pair.A.jacobian(y) * b - pair.B.jacobian(y) * a).norm();
  out.lie = std::abs(pair.beta.gradient(y).dot(a) - pair.alpha.gradient(y).dot(b));
  return out;
}

// ---------------------------------------------------------------- characteristics with source

namespace {

struct CharEnd {
  Vec z;
  double S;
};

// dz/ds = -V(z), dS/ds = src(z), s in [0, T]
OdeRhs char_rhs(const VectorField& V, const ScalarField& src) {
  const int d = V.dim();
  return [V, src, d](double, const State& s, State& ds) {
    Vec z = s.head(d);
    ds.resize(d + 1);
    ds.head(d) = -V(z);
    ds[d] = src(z);
  };
}

State char_start(const Vec& y) {
  State s(y.size() + 1);
  s.head(y.size()) = y;
  s[y.size()] = 0;
  return s;
}

CharEnd char_back(const VectorField& V, const ScalarField& src, const Vec& y, double T, const IntegratorOptions& io,
                  IntegratorStats* stats) {
  State s = Dopri5(io).integrate(char_rhs(V, src), 0.0, char_start(y), T, stats);
  const int d = static_cast<int>(y.size());
  return {Vec(s.head(d)), s[d]};
}

double angle(const PhaseOptions& o, double tau) { return o.reduce_tau ? reduce_angle(tau) : tau; }

}  // namespace

double solve_h(const CommutingPair& pair, const InitialDensity& f0, double t, double tau, const Vec& y,
               const PhaseOptions& opts, IntegratorStats* stats) {
  const double tr = angle(opts, tau);
  if (opts.order == SolveOrder::tau_first) {
    CharEnd a = char_back(pair.A, pair.alpha, y, t, opts.integ, stats);
    CharEnd b = char_back(pair.B, pair.beta, a.z, tr, opts.integ, stats);
    return f0(b.z);
  }
  CharEnd b = char_back(pair.B, pair.beta, y, tr, opts.integ, stats);
  CharEnd a = char_back(pair.A, pair.alpha, b.z, t, opts.integ, stats);
  return f0(a.z);
}

double solve_S(const CommutingPair& pair, double t, double tau, const Vec& y, const PhaseOptions& opts,
               IntegratorStats* stats) {
  const double tr = angle(opts, tau);
  if (opts.order == SolveOrder::tau_first) {
    CharEnd a = char_back(pair.A, pair.alpha, y, t, opts.integ, stats);
    CharEnd b = char_back(pair.B, pair.beta, a.z, tr, opts.integ, stats);
    return a.S + b.S;
  }
  CharEnd b = char_back(pair.B, pair.beta, y, tr, opts.integ, stats);
  CharEnd a = char_back(pair.A, pair.alpha, b.z, t, opts.integ, stats);
  return a.S + b.S;
}

namespace {

// Root of g(tau) = eps tau - S(tau mod 2pi) on the branch nearest tau_start.
double find_tau(const std::function<double(double)>& S_red, double eps, double tau_start, double tol) {
  auto S = [&](double tau) { return S_red(reduce_angle(tau)); };
  auto g = [&](double tau) { return eps * tau - S(tau); };
  // fixed point
  double tau = tau_start, step_prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 60; ++it) {
    double next = S(tau) / eps;
    if (std::abs(g(next)) <= 0.25 * tol) return next;
    double step = std::abs(next - tau);
    if (step > step_prev) break;
    step_prev = step;
    tau = next;
  }
  // bracketing over the range where roots can lie
  const int M = 256;
  double smin = std::numeric_limits<double>::infinity(), smax = -smin;
  for (int j = 0; j < M; ++j) {
    double s = S_red(kTwoPi * j / M);
    smin = std::min(smin, s);
    smax = std::max(smax, s);
  }
  double pad = 0.05 * (smax - smin) + 1e-9 * (1 + std::abs(smax));
  double lo = (smin - pad) / eps, hi = (smax + pad) / eps;
  const double h = std::min(kTwoPi / M, hi - lo);
  double c = std::clamp(tau_start, lo, hi);
  for (int k = 0;; ++k) {
    bool any = false;
    for (int side = 0; side < 2; ++side) {
      double a = side == 0 ? c + k * h : c - (k + 1) * h;
      double b = a + h;
      if (b < lo || a > hi) continue;
      a = std::max(a, lo);
      b = std::min(b, hi);
      any = true;
      double ga = g(a), gb = g(b);
      if (ga == 0) return a;
      if (gb == 0) return b;
      if ((ga < 0) != (gb < 0)) {
        boost::uintmax_t iters = 200;
        auto r = boost::math::tools::toms748_solve(g, a, b, ga, gb,
                                                   boost::math::tools::eps_tolerance<double>(52), iters);
        double ra = r.first, rb = r.second;
        return std::abs(g(ra)) <= std::abs(g(rb)) ? ra : rb;
      }
    }
    if (!any) break;
  }
  std::ostringstream os;
  os << "no solution of eps*tau = S found in [" << lo << ", " << hi << "]";
  throw NumericError(os.str());
}

}  // namespace

Reconstruction reconstruct(const CommutingPair& pair, const InitialDensity& f0, double t, const Vec& y, double eps,
                           const PhaseOptions& opts, std::optional<double> warm, IntegratorStats* stats) {
  if (!(eps > 0)) throw UsageError("eps must be positive");
  Reconstruction R;
  if (opts.order == SolveOrder::t_first) {
    PhaseOptions o = opts;
    o.reduce_tau = true;
    auto S_red = [&](double tr) { return solve_S(pair, t, tr, y, o, stats); };
    double start = warm ? *warm : S_red(0.0) / eps;
    R.tau = find_tau(S_red, eps, start, opts.residual_tol);
    R.S = S_red(reduce_angle(R.tau));
    R.residual = std::abs(eps * R.tau - R.S);
    R.f = solve_h(pair, f0, t, R.tau, y, o, stats);
  } else {
    const int d = pair.A.dim();
    CharEnd a = char_back(pair.A, pair.alpha, y, t, opts.integ, stats);
    DenseSolution traj =
        Dopri5(opts.integ).integrate_dense(char_rhs(pair.B, pair.beta), 0.0, char_start(a.z), kTwoPi, stats);
    auto S_red = [&](double tr) { return a.S + traj(tr)[d]; };
    double start = warm ? *warm : a.S / eps;
    double tau = find_tau(S_red, eps, start, opts.residual_tol);
    // re-evaluate on a direct integration and polish with Newton steps
    CharEnd b{};
    for (int it = 0; it < 8; ++it) {
      b = char_back(pair.B, pair.beta, a.z, reduce_angle(tau), opts.integ, stats);
      double gval = eps * tau - (a.S + b.S);
      if (std::abs(gval) <= opts.residual_tol) break;
      double dg = eps - pair.beta(b.z);
      if (!(std::abs(dg) > 0)) break;
      tau -= gval / dg;
    }
    R.tau = tau;
    R.S = a.S + b.S;
    R.residual = std::abs(eps * tau - R.S);
    R.f = f0(b.z);
  }
  if (!(R.residual <= opts.residual_tol)) {
    std::ostringstream os;
    os << "phase equation residual " << R.residual << " above " << opts.residual_tol << " at t=" << t;
    throw NumericError(os.str());
  }
  return R;
}

double solve_tau(const CommutingPair& pair, double t, const Vec& y, double eps, const PhaseOptions& opts,
                 std::optional<double> warm, IntegratorStats* stats) {
  auto f0 = [](const Vec&) { return 0.0; };
  return reconstruct(pair, f0, t, y, eps, opts, warm, stats).tau;
}

double tilde_S(const CommutingPair& pair, const ScalarField& leading_phase, double t, double tau, const Vec& y,
               double eps, const PhaseOptions& opts) {
  if (!leading_phase.valid()) throw UsageError("tilde_S needs a problem with a leading phase");
  return (solve_S(pair, t, tau, y, opts) - leading_phase(y) * t) / eps;
}

PhaseProfile::PhaseProfile(CommutingPair pair, InitialDensity f0, double eps, PhaseOptions opts)
    : pair_(std::move(pair)), f0_(std::move(f0)), eps_(eps), opts_(opts) {}

double PhaseProfile::S(double t, double tau, const Vec& y) const { return solve_S(pair_, t, tau, y, opts_); }
double PhaseProfile::h(double t, double tau, const Vec& y) const { return solve_h(pair_, f0_, t, tau, y, opts_); }
double PhaseProfile::tau(double t, const Vec& y) const { return solve_tau(pair_, t, y, eps_, opts_); }
double PhaseProfile::f(double t, const Vec& y) const { return reconstruct(pair_, f0_, t, y, eps_, opts_).f; }

}  // namespace strobo
