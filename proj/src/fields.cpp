#include "strobo/fields.hpp"

#include <sstream>

namespace strobo {

namespace fd {

const Stencil& stencil(int order) {
  static const Stencil s2{2, {-1, 1}, {-0.5, 0.5}};
  static const Stencil s4{4, {-2, -1, 1, 2}, {1.0 / 12, -8.0 / 12, 8.0 / 12, -1.0 / 12}};
  static const Stencil s6{6, {-3, -2, -1, 1, 2, 3}, {-1.0 / 60, 9.0 / 60, -45.0 / 60, 45.0 / 60, -9.0 / 60, 1.0 / 60}};
  switch (order) {
    case 2: return s2;
    case 4: return s4;
    case 6: return s6;
    default: throw UsageError("finite-difference order must be 2, 4 or 6");
  }
}

}  // namespace fd

ScalarField::ScalarField(int dim, Fn f, GradFn grad, HessFn hess, std::string label, FdScheme fd) {
  if (dim < 1 || dim > kMaxDim) throw UsageError("scalar field dimension out of range");
  if (!f) throw UsageError("scalar field without evaluator");
  impl_ = std::make_shared<const Impl>(Impl{dim, std::move(f), std::move(grad), std::move(hess), std::move(label), fd});
}

ScalarField ScalarField::constant(int dim, double c, std::string label) {
  return ScalarField(
      dim, [c](const Vec&) { return c; }, [dim](const Vec&) { return Vec::Zero(dim).eval(); },
      [dim](const Vec&) { return Mat::Zero(dim, dim).eval(); }, std::move(label));
}

const ScalarField::Impl& ScalarField::impl() const {
  if (!impl_) throw UsageError("use of empty scalar field");
  return *impl_;
}

int ScalarField::dim() const { return impl().dim; }
const std::string& ScalarField::label() const { return impl().label; }
bool ScalarField::has_analytic_gradient() const { return static_cast<bool>(impl().grad); }

double ScalarField::operator()(const Vec& y) const {
  if (y.size() != impl().dim) throw UsageError("scalar field '" + impl().label + "': dimension mismatch");
  return impl().f(y);
}

Vec ScalarField::gradient(const Vec& y) const {
  if (y.size() != impl().dim) throw UsageError("scalar field '" + impl().label + "': dimension mismatch");
  if (impl().grad) return impl().grad(y);
  const auto& f = impl().f;
  auto row = fd::jacobian<double>([&](const Vec& p) { return Vec::Constant(1, f(p)); }, y, 1, impl().fd);
  return row.transpose();
}

Mat ScalarField::hessian(const Vec& y) const {
  if (y.size() != impl().dim) throw UsageError("scalar field '" + impl().label + "': dimension mismatch");
  if (impl().hess) return impl().hess(y);
  Mat H = fd::jacobian<double>([this](const Vec& p) { return gradient(p); }, y, impl().dim,
                               impl().grad ? impl().fd : FdScheme::nested());
  return 0.5 * (H + H.transpose());
}

double divergence(const VectorField& F, const Vec& y) { return F.jacobian(y).trace(); }

VectorField zero_field(int dim) {
  return VectorField(
      dim, [dim](const Vec&) { return Vec::Zero(dim).eval(); }, [dim](const Vec&) { return Mat::Zero(dim, dim).eval(); },
      "0", FdScheme::standard(), [dim](const Vec&) { return Hess(dim, Mat::Zero(dim, dim)); });
}

VectorField real_part(const ComplexVectorField& F, double rel_tol) {
  auto eval = [F, rel_tol](const Vec& y) {
    CVec z = F(y);
    Vec re = z.real(), im = z.imag();
    double scale = std::max(1.0, re.norm());
    if (im.norm() > rel_tol * scale) {
      std::ostringstream os;
      os << "imaginary residue " << im.norm() << " exceeds tolerance in field '" << F.label() << "'";
      throw NumericError(os.str());
    }
    return re;
  };
  return VectorField(F.dim(), eval, {}, F.label(), F.fd_scheme());
}

ComplexVectorField complexify(const VectorField& F) {
  ComplexVectorField::JacFn jac;
  if (F.has_analytic_jacobian()) jac = [F](const Vec& y) { return CMat(F.jacobian(y).cast<Complex>()); };
  return ComplexVectorField(
      F.dim(), [F](const Vec& y) { return CVec(F(y).cast<Complex>()); }, jac, F.label(), F.fd_scheme());
}

Vec make_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Vec make_vec(std::span<const double> xs) {
  Vec v(static_cast<int>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) v[static_cast<int>(i)] = xs[i];
  return v;
}

}  // namespace strobo
