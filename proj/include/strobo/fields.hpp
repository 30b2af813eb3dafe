#pragma once

#include <cfloat>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "strobo/types.hpp"

namespace strobo {

// Central finite-difference scheme. Step along coordinate i is rel_step * max(1, |y_i|).
struct FdScheme {
  int order = 2;  // 2, 4 or 6
  double rel_step = std::cbrt(DBL_EPSILON);

  static FdScheme standard() { return {}; }
  // Used for derived fields (modes, brackets, assembled terms) whose derivatives are nested.
  static FdScheme nested() { return {6, 5e-3}; }
};

namespace fd {

struct Stencil {
  int size;
  int offsets[6];
  double weights[6];
};

const Stencil& stencil(int order);

inline double step(const FdScheme& s, double yi) {
  double h = s.rel_step * std::max(1.0, std::abs(yi));
  volatile double tmp = yi + h;
  return tmp - yi;
}

// Partial derivatives of a vector-space valued map. axpy(acc, w, x) performs acc += w*x.
template <class T, class Fn, class Axpy>
std::vector<T> partials(Fn&& f, const Vec& y, const FdScheme& s, const T& zero, Axpy&& axpy) {
  const Stencil& st = stencil(s.order);
  std::vector<T> out(y.size(), zero);
  Vec p = y;
  for (int i = 0; i < y.size(); ++i) {
    double h = step(s, y[i]);
    for (int m = 0; m < st.size; ++m) {
      p[i] = y[i] + st.offsets[m] * h;
      axpy(out[i], st.weights[m] / h, f(p));
    }
    p[i] = y[i];
  }
  return out;
}

template <class S, class Fn>
MatT<S> jacobian(Fn&& f, const Vec& y, int out_dim, const FdScheme& s) {
  const Stencil& st = stencil(s.order);
  MatT<S> J = MatT<S>::Zero(out_dim, y.size());
  Vec p = y;
  for (int i = 0; i < y.size(); ++i) {
    double h = step(s, y[i]);
    for (int m = 0; m < st.size; ++m) {
      p[i] = y[i] + st.offsets[m] * h;
      J.col(i) += (st.weights[m] / h) * f(p);
    }
    p[i] = y[i];
  }
  return J;
}

inline double derivative(const std::function<double(double)>& f, double x, const FdScheme& s) {
  const Stencil& st = stencil(s.order);
  double h = step(s, x), acc = 0;
  for (int m = 0; m < st.size; ++m) acc += st.weights[m] * f(x + st.offsets[m] * h);
  return acc / h;
}

}  // namespace fd

// Second derivatives stored as H[l](i,j) = d^2 F_i / dy_j dy_l.
template <class S>
using HessT = std::vector<MatT<S>>;

// Contract H along its last slot: (H[u])_{ij} = sum_l H[l](i,j) u_l.
template <class S, class U>
MatT<S> contract(const HessT<S>& H, const U& u) {
  MatT<S> out = MatT<S>::Zero(H[0].rows(), H[0].cols());
  for (std::size_t l = 0; l < H.size(); ++l) out += H[l] * u[l];
  return out;
}

template <class S>
class BasicField {
 public:
  using Value = VecT<S>;
  using Jac = MatT<S>;
  using EvalFn = std::function<Value(const Vec&)>;
  using JacFn = std::function<Jac(const Vec&)>;
  using HessFn = std::function<HessT<S>(const Vec&)>;

  BasicField() = default;
  BasicField(int dim, EvalFn eval, JacFn jac = {}, std::string label = {},
             FdScheme fd = FdScheme::standard(), HessFn hess = {}) {
    if (dim < 1 || dim > kMaxDim) throw UsageError("field dimension out of range: " + std::to_string(dim));
    if (!eval) throw UsageError("field without evaluator");
    impl_ = std::make_shared<const Impl>(Impl{dim, std::move(eval), std::move(jac), std::move(hess), std::move(label), fd});
  }

  bool valid() const { return static_cast<bool>(impl_); }
  int dim() const { return impl().dim; }
  const std::string& label() const { return impl().label; }
  const FdScheme& fd_scheme() const { return impl().fd; }
  bool has_analytic_jacobian() const { return static_cast<bool>(impl().jac); }
  bool has_analytic_hessian() const { return static_cast<bool>(impl().hess); }

  Value operator()(const Vec& y) const {
    check(y);
    return impl().eval(y);
  }

  Jac jacobian(const Vec& y) const {
    check(y);
    if (impl().jac) return impl().jac(y);
    return fd_jacobian(y, impl().fd);
  }

  Jac fd_jacobian(const Vec& y, const FdScheme& s) const {
    check(y);
    const auto& f = impl().eval;
    return fd::jacobian<S>([&](const Vec& p) { return f(p); }, y, impl().dim, s);
  }

  HessT<S> hessian(const Vec& y) const {
    check(y);
    if (impl().hess) return impl().hess(y);
    Jac zero = Jac::Zero(impl().dim, impl().dim);
    return fd::partials<Jac>([this](const Vec& p) { return jacobian(p); }, y, impl().fd, zero,
                             [](Jac& acc, double w, const Jac& x) { acc += w * x; });
  }

  BasicField with_label(std::string label) const {
    BasicField out = *this;
    Impl copy = impl();
    copy.label = std::move(label);
    out.impl_ = std::make_shared<const Impl>(std::move(copy));
    return out;
  }

  BasicField with_fd(FdScheme s) const {
    BasicField out = *this;
    Impl copy = impl();
    copy.fd = s;
    out.impl_ = std::make_shared<const Impl>(std::move(copy));
    return out;
  }

  // Drop analytic derivatives (forces finite differences).
  BasicField numeric_only() const {
    Impl copy = impl();
    return BasicField(copy.dim, copy.eval, {}, copy.label, copy.fd);
  }

 private:
  struct Impl {
    int dim;
    EvalFn eval;
    JacFn jac;
    HessFn hess;
    std::string label;
    FdScheme fd;
  };

  const Impl& impl() const {
    if (!impl_) throw UsageError("use of empty field");
    return *impl_;
  }
  void check(const Vec& y) const {
    if (y.size() != impl().dim)
      throw UsageError("point of dimension " + std::to_string(y.size()) + " passed to field '" + impl().label +
                       "' of dimension " + std::to_string(impl().dim));
  }

  std::shared_ptr<const Impl> impl_;
};

using VectorField = BasicField<double>;
using ComplexVectorField = BasicField<Complex>;
using Hess = HessT<double>;

class ScalarField {
 public:
  using Fn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&)>;
  using HessFn = std::function<Mat(const Vec&)>;

  ScalarField() = default;
  ScalarField(int dim, Fn f, GradFn grad = {}, HessFn hess = {}, std::string label = {},
              FdScheme fd = FdScheme::standard());

  static ScalarField constant(int dim, double c, std::string label = {});

  bool valid() const { return static_cast<bool>(impl_); }
  int dim() const;
  const std::string& label() const;
  bool has_analytic_gradient() const;
  double operator()(const Vec& y) const;
  Vec gradient(const Vec& y) const;
  Mat hessian(const Vec& y) const;

 private:
  struct Impl {
    int dim;
    Fn f;
    GradFn grad;
    HessFn hess;
    std::string label;
    FdScheme fd;
  };
  const Impl& impl() const;
  std::shared_ptr<const Impl> impl_;
};

template <class S>
VecT<S> bracket_value(const MatT<S>& J1, const VecT<S>& F1, const MatT<S>& J2, const VecT<S>& F2) {
  return J1 * F2 - J2 * F1;
}

// D[W,K] = H_W[K] + DW DK - H_K[W] - DK DW
template <class S>
MatT<S> bracket_jacobian(const VecT<S>& W, const MatT<S>& DW, const HessT<S>& HW, const VecT<S>& K,
                         const MatT<S>& DK, const HessT<S>& HK) {
  return contract(HW, K) + DW * DK - contract(HK, W) - DK * DW;
}

template <class S>
BasicField<S> lie_bracket(const BasicField<S>& F1, const BasicField<S>& F2, FdScheme fd = FdScheme::nested()) {
  if (F1.dim() != F2.dim())
    throw UsageError("lie_bracket: dimension mismatch " + std::to_string(F1.dim()) + " vs " + std::to_string(F2.dim()));
  auto eval = [F1, F2](const Vec& y) {
    return bracket_value<S>(F1.jacobian(y), F1(y), F2.jacobian(y), F2(y));
  };
  typename BasicField<S>::JacFn jac;
  if (F1.has_analytic_hessian() && F2.has_analytic_hessian() && F1.has_analytic_jacobian() &&
      F2.has_analytic_jacobian()) {
    jac = [F1, F2](const Vec& y) {
      return bracket_jacobian<S>(F1(y), F1.jacobian(y), F1.hessian(y), F2(y), F2.jacobian(y), F2.hessian(y));
    };
  }
  return BasicField<S>(F1.dim(), eval, jac, "[" + F1.label() + "," + F2.label() + "]", fd);
}

template <class S>
BasicField<S> combine(std::vector<S> coeffs, std::vector<BasicField<S>> fields, std::string label = {}) {
  if (coeffs.size() != fields.size() || fields.empty()) throw UsageError("combine: coefficient/field count mismatch");
  const int d = fields[0].dim();
  bool analytic_jac = true, analytic_hess = true;
  for (const auto& f : fields) {
    if (f.dim() != d) throw UsageError("combine: dimension mismatch");
    analytic_jac = analytic_jac && f.has_analytic_jacobian();
    analytic_hess = analytic_hess && f.has_analytic_hessian();
  }
  auto eval = [coeffs, fields](const Vec& y) {
    VecT<S> acc = VecT<S>::Zero(y.size());
    for (std::size_t i = 0; i < fields.size(); ++i)
      if (coeffs[i] != S(0)) acc += coeffs[i] * fields[i](y);
    return acc;
  };
  typename BasicField<S>::JacFn jac;
  if (analytic_jac) {
    jac = [coeffs, fields](const Vec& y) {
      MatT<S> acc = MatT<S>::Zero(y.size(), y.size());
      for (std::size_t i = 0; i < fields.size(); ++i)
        if (coeffs[i] != S(0)) acc += coeffs[i] * fields[i].jacobian(y);
      return acc;
    };
  }
  typename BasicField<S>::HessFn hess;
  if (analytic_jac && analytic_hess) {
    hess = [coeffs, fields](const Vec& y) {
      HessT<S> acc(y.size(), MatT<S>::Zero(y.size(), y.size()));
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (coeffs[i] == S(0)) continue;
        HessT<S> h = fields[i].hessian(y);
        for (std::size_t l = 0; l < acc.size(); ++l) acc[l] += coeffs[i] * h[l];
      }
      return acc;
    };
  }
  FdScheme fd = fields[0].fd_scheme();
  for (const auto& f : fields)
    if (f.fd_scheme().order > fd.order) fd = f.fd_scheme();
  return BasicField<S>(d, eval, jac, label, fd, hess);
}

double divergence(const VectorField& F, const Vec& y);

VectorField zero_field(int dim);

// Real field from a complex one whose imaginary part is round-off; throws NumericError when
// |Im| > rel_tol * max(1, |Re|).
VectorField real_part(const ComplexVectorField& F, double rel_tol = 1e-10);

ComplexVectorField complexify(const VectorField& F);

// Point helpers
Vec make_vec(std::initializer_list<double> xs);
Vec make_vec(std::span<const double> xs);

}  // namespace strobo
