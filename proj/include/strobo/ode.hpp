#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "strobo/fields.hpp"

namespace strobo {

struct IntegratorOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0;  // 0: automatic
  std::size_t max_steps = 20'000'000;
};

struct IntegratorStats {
  std::size_t rhs_evals = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;

  IntegratorStats& operator+=(const IntegratorStats& o) {
    rhs_evals += o.rhs_evals;
    accepted += o.accepted;
    rejected += o.rejected;
    return *this;
  }
};

using State = Eigen::VectorXd;
using OdeRhs = std::function<void(double t, const State& y, State& dy)>;

// Continuous extension over the accepted steps of one integration.
class DenseSolution {
 public:
  double t_begin() const { return t0_; }
  double t_end() const { return t1_; }
  State operator()(double t) const;
  std::size_t segments() const { return segs_.size(); }

 private:
  friend class Dopri5;
  struct Segment {
    double t, h;
    State r1, r2, r3, r4, r5;
  };
  double t0_ = 0, t1_ = 0;
  std::vector<Segment> segs_;
};

// Dormand-Prince 5(4) with FSAL and the standard 4th-order dense output.
class Dopri5 {
 public:
  explicit Dopri5(IntegratorOptions opts = {}) : opts_(opts) {}
  const IntegratorOptions& options() const { return opts_; }

  State integrate(const OdeRhs& f, double t0, const State& y0, double t1, IntegratorStats* stats = nullptr) const;
  DenseSolution integrate_dense(const OdeRhs& f, double t0, const State& y0, double t1,
                                IntegratorStats* stats = nullptr) const;
  // States at each of the (monotone) output times, stepping exactly onto them.
  std::vector<State> integrate_to(const OdeRhs& f, double t0, const State& y0, const std::vector<double>& times,
                                  IntegratorStats* stats = nullptr) const;

 private:
  State run(const OdeRhs& f, double t0, const State& y0, double t1, double& h_io, IntegratorStats* stats,
            DenseSolution* dense) const;
  IntegratorOptions opts_;
};

// Flow of an autonomous field: y(t) with y(0) = y0; t may be negative.
Vec flow(const VectorField& F, const Vec& y0, double t, const IntegratorOptions& opts = {},
         IntegratorStats* stats = nullptr);

inline State to_state(const Vec& v) { return State(v); }
inline Vec to_vec(const State& s) { return Vec(s); }

}  // namespace strobo
