#include "strobo/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace strobo {

namespace {

// Dormand-Prince coefficients
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;
// dense output
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

double rms(const State& v) { return v.size() ? std::sqrt(v.squaredNorm() / v.size()) : 0.0; }

}  // namespace

State DenseSolution::operator()(double t) const {
  if (segs_.empty()) throw UsageError("empty dense solution");
  const bool fwd = t1_ >= t0_;
  // locate segment
  std::size_t lo = 0, hi = segs_.size() - 1;
  while (lo < hi) {
    std::size_t mid = (lo + hi + 1) / 2;
    if (fwd ? segs_[mid].t <= t : segs_[mid].t >= t)
      lo = mid;
    else
      hi = mid - 1;
  }
  const Segment& s = segs_[lo];
  double th = (t - s.t) / s.h, th1 = 1 - th;
  return s.r1 + th * (s.r2 + th1 * (s.r3 + th * (s.r4 + th1 * s.r5)));
}

State Dopri5::run(const OdeRhs& f, double t0, const State& y0, double t1, double& h_io, IntegratorStats* stats,
                  DenseSolution* dense) const {
  const int n = static_cast<int>(y0.size());
  State y = y0;
  if (t1 == t0) return y;
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  const double hmax = std::min(opts_.max_step, span);
  IntegratorStats local;

  State k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yt(n), y5(n), err(n), sc(n);
  auto scale = [&](const State& a, const State& b) {
    for (int i = 0; i < n; ++i) sc[i] = opts_.abs_tol + opts_.rel_tol * std::max(std::abs(a[i]), std::abs(b[i]));
  };

  f(t0, y, k1);
  ++local.rhs_evals;

  double h = std::abs(h_io);
  if (h <= 0) h = opts_.initial_step;
  if (h <= 0) {
    scale(y, y);
    double dn0 = rms(y.cwiseQuotient(sc)), dn1 = rms(k1.cwiseQuotient(sc));
    double h0 = (dn0 < 1e-10 || dn1 < 1e-10) ? 1e-6 : 0.01 * dn0 / dn1;
    h0 = std::min(h0, hmax);
    yt = y + dir * h0 * k1;
    f(t0 + dir * h0, yt, k2);
    ++local.rhs_evals;
    double dn2 = rms((k2 - k1).cwiseQuotient(sc)) / h0;
    double m = std::max(dn1, dn2);
    double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 0.2);
    h = std::min({100 * h0, h1, hmax});
  }
  h = std::min(h, hmax);

  double t = t0;
  bool last_rejected = false;
  std::size_t steps = 0;
  const double h_min = 1e-14 * std::max({1.0, std::abs(t0), std::abs(t1)});
  while (dir * (t1 - t) > 0) {
    if (++steps > opts_.max_steps) {
      std::ostringstream os;
      os << "integrator exceeded " << opts_.max_steps << " steps at t=" << t;
      throw NumericError(os.str());
    }
    double hs = h;
    bool final_step = false;
    if (hs >= std::abs(t1 - t)) {
      hs = std::abs(t1 - t);
      final_step = true;
    }
    const double hh = dir * hs;
    yt = y + hh * a21 * k1;
    f(t + c2 * hh, yt, k2);
    yt = y + hh * (a31 * k1 + a32 * k2);
    f(t + c3 * hh, yt, k3);
    yt = y + hh * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * hh, yt, k4);
    yt = y + hh * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * hh, yt, k5);
    yt = y + hh * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + hh, yt, k6);
    y5 = y + hh * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    f(t + hh, y5, k7);
    local.rhs_evals += 6;
    err = hh * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    scale(y, y5);
    double en = rms(err.cwiseQuotient(sc));
    if (!std::isfinite(en)) {
      en = 1e10;
      if (!y5.allFinite() && hs <= h_min) throw NumericError("non-finite state in integrator");
    }
    if (en <= 1.0) {
      if (dense) {
        DenseSolution::Segment s;
        s.t = t;
        s.h = hh;
        s.r1 = y;
        s.r2 = y5 - y;
        s.r3 = hh * k1 - s.r2;
        s.r4 = s.r2 - hh * k7 - s.r3;
        s.r5 = hh * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        dense->segs_.push_back(std::move(s));
      }
      ++local.accepted;
      t = final_step ? t1 : t + hh;
      y.swap(y5);
      k1.swap(k7);
      double fac = en == 0 ? 10.0 : std::min(10.0, std::max(0.2, 0.9 * std::pow(en, -0.2)));
      if (last_rejected) fac = std::min(fac, 1.0);
      // keep the natural step when the last one was shortened to hit t1
      if (!final_step || hs == h) h = std::min(hs * fac, hmax);
      last_rejected = false;
    } else {
      ++local.rejected;
      h = hs * std::max(0.2, 0.9 * std::pow(en, -0.2));
      last_rejected = true;
      if (h < h_min) {
        std::ostringstream os;
        os << "step size underflow (h=" << h << ") at t=" << t;
        throw NumericError(os.str());
      }
    }
  }
  h_io = h;
  if (stats) *stats += local;
  return y;
}

State Dopri5::integrate(const OdeRhs& f, double t0, const State& y0, double t1, IntegratorStats* stats) const {
  double h = 0;
  return run(f, t0, y0, t1, h, stats, nullptr);
}

DenseSolution Dopri5::integrate_dense(const OdeRhs& f, double t0, const State& y0, double t1,
                                      IntegratorStats* stats) const {
  DenseSolution d;
  d.t0_ = t0;
  d.t1_ = t1;
  double h = 0;
  State y1 = run(f, t0, y0, t1, h, stats, &d);
  if (d.segs_.empty()) {
    // zero-length interval: constant extension
    DenseSolution::Segment s{t0, 1.0, y0, State::Zero(y0.size()), State::Zero(y0.size()), State::Zero(y0.size()),
                             State::Zero(y0.size())};
    d.segs_.push_back(std::move(s));
  }
  return d;
}

std::vector<State> Dopri5::integrate_to(const OdeRhs& f, double t0, const State& y0, const std::vector<double>& times,
                                        IntegratorStats* stats) const {
  std::vector<State> out;
  out.reserve(times.size());
  State y = y0;
  double t = t0, h = 0;
  for (double tn : times) {
    if (tn != t) y = run(f, t, y, tn, h, stats, nullptr);
    t = tn;
    out.push_back(y);
  }
  return out;
}

Vec flow(const VectorField& F, const Vec& y0, double t, const IntegratorOptions& opts, IntegratorStats* stats) {
  OdeRhs rhs = [&F](double, const State& y, State& dy) { dy = F(Vec(y)); };
  return Vec(Dopri5(opts).integrate(rhs, 0.0, State(y0), t, stats));
}

}  // namespace strobo
