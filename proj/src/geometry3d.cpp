#include "strobo/geometry3d.hpp"

#include <cmath>
#include <sstream>

namespace strobo {

namespace {

V3 to3(const Vec& y, int off) { return y.segment<3>(off); }

M3 fd_DB(const std::function<V3(const V3&)>& B, const V3& x) {
  M3 D;
  for (int j = 0; j < 3; ++j) {
    double h = std::cbrt(DBL_EPSILON) * std::max(1.0, std::abs(x[j]));
    V3 p = x, m = x;
    p[j] += h;
    m[j] -= h;
    D.col(j) = (B(p) - B(m)) / (2 * h);
  }
  return D;
}

M3 skew(const V3& v) {  // w -> v x w
  M3 S;
  S << 0, -v[2], v[1], v[2], 0, -v[0], -v[1], v[0], 0;
  return S;
}

const V3 kE0(0, 0, 1);

void require_b(const FieldGeometry& g, double b) {
  if (!(b > 0) || b < g.B_min) {
    std::ostringstream os;
    os << "|B| = " << b << " below the lower bound " << g.B_min;
    throw DomainError(os.str());
  }
}

}  // namespace

V3 FieldGeometry::e(const V3& x) const {
  V3 Bx = B(x);
  double n = Bx.norm();
  if (!(n > 0)) throw DomainError("magnetic field vanishes");
  return Bx / n;
}

M3 FieldGeometry::De(const V3& x) const {
  V3 Bx = B(x);
  double n = Bx.norm();
  if (!(n > 0)) throw DomainError("magnetic field vanishes");
  V3 ex = Bx / n;
  return (M3::Identity() - ex * ex.transpose()) * DB(x) / n;
}

V3 FieldGeometry::E(const V3& x) const { return -U.gradient(Vec(x)).head<3>(); }

M3 FieldGeometry::DE(const V3& x) const { return -U.hessian(Vec(x)).topLeftCorner<3, 3>(); }

V3 FieldGeometry::grad_b(const V3& x) const { return DB(x).transpose() * e(x); }

FieldGeometry make_geometry(std::function<V3(const V3&)> B, std::function<M3(const V3&)> DB, ScalarField U,
                            const std::vector<V3>& samples, bool constant_direction, double B_min,
                            double div_tol) {
  if (B_min < 0) throw UsageError("B_min must be non-negative");
  if (!B) throw UsageError("geometry without magnetic field");
  if (!U.valid() || U.dim() != 3) throw UsageError("geometry potential must be a scalar field over R^3");
  FieldGeometry g;
  g.B = B;
  if (DB)
    g.DB = std::move(DB);
  else
    g.DB = [B](const V3& x) { return fd_DB(B, x); };
  g.U = std::move(U);
  g.constant_direction = constant_direction;
  g.B_min = B_min;
  for (const V3& x : samples) {
    V3 Bx = g.B(x);
    double n = Bx.norm();
    if (!(n > 0) || !std::isfinite(n)) throw DomainError("magnetic field vanishes or is not finite at a sample point");
    if (n < B_min) {
      std::ostringstream os;
      os << "|B| = " << n << " at a sample point is below B_min = " << B_min;
      throw DomainError(os.str());
    }
    double div = g.DB(x).trace();
    if (std::abs(div) > div_tol) {
      std::ostringstream os;
      os << "div B = " << div << " at sample point exceeds " << div_tol;
      throw DomainError(os.str());
    }
    if (constant_direction) {
      if (std::abs(Bx[0]) + std::abs(Bx[1]) > 1e-14 * n || Bx[2] <= 0)
        throw DomainError("constant-direction geometry needs B = (0, 0, b) with b > 0");
    }
  }
  return g;
}

V3 projector_apply(const V3& e, const V3& v) { return e.dot(v) * e; }
V3 cross_apply(const V3& e, const V3& v) { return v.cross(e); }
M3 projector_matrix(const V3& e) { return e * e.transpose(); }
M3 cross_matrix(const V3& e) {
  M3 J;
  J << 0, e[2], -e[1], -e[2], 0, e[0], e[1], -e[0], 0;
  return J;
}

M3 q_tau(const V3& e, double tau) {
  double c = std::cos(tau), s = std::sin(tau);
  return c * M3::Identity() + (1 - c) * projector_matrix(e) + s * cross_matrix(e);
}

M3 dPv_dx(const FieldGeometry& g, const V3& x, const V3& v) {
  V3 ex = g.e(x);
  M3 De = g.De(x);
  return ex * (De.transpose() * v).transpose() + ex.dot(v) * De;
}

M3 dJv_dx(const FieldGeometry& g, const V3& x, const V3& v) { return skew(v) * g.De(x); }

M3 r_tau(const FieldGeometry& g, const V3& x, const V3& v, double tau) {
  return (1 - std::cos(tau)) * dPv_dx(g, x, v) + std::sin(tau) * dJv_dx(g, x, v);
}

V3 khat0_v(const FieldGeometry& g, const V3& x, const V3& v) {
  using C3 = Eigen::Matrix3cd;
  const Complex I(0, 1);
  V3 ex = g.e(x);
  M3 P = projector_matrix(ex), J = cross_matrix(ex);
  M3 M = dPv_dx(g, x, v), N = dJv_dx(g, x, v);
  C3 a0 = P.cast<Complex>();
  C3 a = 0.5 * ((M3::Identity() - P).cast<Complex>() - I * J.cast<Complex>());
  C3 ab = a.conjugate();
  C3 al0 = M.cast<Complex>();
  C3 al = -0.5 * (M.cast<Complex>() + I * N.cast<Complex>());
  C3 alb = al.conjugate();
  C3 sum = a0 * al0 * a0 + a0 * al * ab + a0 * alb * a + ab * al0 * ab + ab * alb * a0 + a * al0 * a + a * al * a0;
  return P * g.E(x) - sum.real() * v;
}

V3 khat0_v_expanded(const FieldGeometry& g, const V3& x, const V3& v, double c) {
  V3 ex = g.e(x);
  M3 P = projector_matrix(ex), J = cross_matrix(ex);
  M3 M = dPv_dx(g, x, v), N = dJv_dx(g, x, v);
  M3 T = c * P * M * P + 0.5 * P * N * J - 0.5 * J * M * J - 0.5 * J * N * P - P * M - M * P + 0.5 * M;
  return P * g.E(x) - T * v;
}

Vec khat0_3d(const FieldGeometry& g, const V3& x, const V3& v) {
  double b = g.b(x);
  require_b(g, b);
  Vec out(7);
  out[0] = 1.0 / b;
  out.segment<3>(1) = projector_apply(g.e(x), v) / b;
  out.segment<3>(4) = khat0_v(g, x, v) / b;
  return out;
}

VectorField vlasov3d_G(const FieldGeometry& g) {
  auto eval = [g](const Vec& y) {
    Vec out = Vec::Zero(6);
    out.segment<3>(3) = cross_apply(g.e(to3(y, 0)), to3(y, 3));
    return out;
  };
  auto jac = [g](const Vec& y) {
    V3 x = to3(y, 0), v = to3(y, 3);
    Mat D = Mat::Zero(6, 6);
    D.block<3, 3>(3, 0) = dJv_dx(g, x, v);
    D.block<3, 3>(3, 3) = cross_matrix(g.e(x));
    return D;
  };
  return VectorField(6, eval, jac, "G3d");
}

VectorField vlasov3d_K(const FieldGeometry& g) {
  auto eval = [g](const Vec& y) {
    Vec out(6);
    out.head<3>() = to3(y, 3);
    out.segment<3>(3) = g.E(to3(y, 0));
    return out;
  };
  auto jac = [g](const Vec& y) {
    Mat D = Mat::Zero(6, 6);
    D.block<3, 3>(0, 3) = M3::Identity();
    D.block<3, 3>(3, 0) = g.DE(to3(y, 0));
    return D;
  };
  return VectorField(6, eval, jac, "K3d");
}

PeriodicFlow vlasov3d_flow(const FieldGeometry& g) {
  return PeriodicFlow::analytic(
      6,
      [g](double tau, const Vec& y) {
        V3 x = to3(y, 0), v = to3(y, 3);
        M3 Q = q_tau(g.e(x), tau);
        FlowJet j;
        j.point = y;
        j.point.segment<3>(3) = Q * v;
        j.jacobian = Mat::Identity(6, 6);
        j.jacobian.block<3, 3>(3, 0) = r_tau(g, x, v, tau);
        j.jacobian.block<3, 3>(3, 3) = Q;
        return j;
      },
      "rotation3d");
}

namespace {

struct ConstDirJet {
  double b;
  V3 gb;    // grad b
  V3 E;
  M3 DEb;   // d_x (E / b)
};

ConstDirJet const_dir_jet(const FieldGeometry& g, const V3& x) {
  ConstDirJet j;
  j.b = g.b(x);
  require_b(g, j.b);
  j.gb = g.grad_b(x);
  j.E = g.E(x);
  j.DEb = g.DE(x) / j.b - j.E * j.gb.transpose() / (j.b * j.b);
  return j;
}

// b K^[2] over (t, x, v)
Vec k2_scaled(const ConstDirJet& j, const V3& v) {
  const M3 P = projector_matrix(kE0), J = cross_matrix(kE0);
  const M3 I3 = M3::Identity() - 3 * P;
  const double b2 = j.b * j.b;
  V3 Jv = J * v;
  double c = Jv.dot(j.gb) / b2;
  Vec out(7);
  out[0] = -c;
  out.segment<3>(1) = 0.5 * c * (I3 * v) - 0.5 * ((I3 * v).dot(j.gb) / b2) * Jv + J * j.E / j.b;
  out.segment<3>(4) = -0.5 * I3 * j.DEb * Jv - 0.5 * J * j.DEb * (I3 * v);
  return out;
}

}  // namespace

FirstOrderFields first_order_fields_constant_direction(const FieldGeometry& g, double eps) {
  if (!g.constant_direction) throw DomainError("first-order closed forms need a constant-direction field");
  const FdScheme fd = FdScheme::nested();
  FirstOrderFields out;
  auto k1 = [g](const Vec& Y) {
    V3 x = to3(Y, 1), v = to3(Y, 4);
    double b = g.b(x);
    require_b(g, b);
    const M3 P = projector_matrix(kE0);
    Vec o(7);
    o[0] = 1;
    o.segment<3>(1) = P * v;
    o.segment<3>(4) = P * g.E(x);
    return Vec(o / b);
  };
  auto k2 = [g](const Vec& Y) {
    ConstDirJet j = const_dir_jet(g, to3(Y, 1));
    return Vec(k2_scaled(j, to3(Y, 4)) / j.b);
  };
  out.K1 = VectorField(7, k1, {}, "K1_cd", fd);
  out.K2 = VectorField(7, k2, {}, "K2_cd", fd);
  out.Kcheck = VectorField(
      7, [k1, k2, eps](const Vec& Y) { return Vec(k1(Y) + eps * k2(Y)); }, {}, "Kcheck_cd", fd);
  out.Gcheck = VectorField(
      7,
      [g, eps](const Vec& Y) {
        V3 x = to3(Y, 1), v = to3(Y, 4);
        double b = g.b(x);
        require_b(g, b);
        const M3 P = projector_matrix(kE0), J = cross_matrix(kE0);
        V3 vp = v - P * v, Ep = g.E(x) - P * g.E(x);
        Vec o = Vec::Zero(7);
        o.segment<3>(1) = eps / b * vp;
        o.segment<3>(4) = J * v + eps / b * Ep;
        return o;
      },
      {}, "Gcheck_cd", fd);
  return out;
}

FirstOrderCoefficients first_order_coefficients(const FieldGeometry& g, const V3& x, const V3& v, double eps) {
  if (!g.constant_direction) throw DomainError("first-order closed forms need a constant-direction field");
  ConstDirJet j = const_dir_jet(g, x);
  const M3 P = projector_matrix(kE0), J = cross_matrix(kE0);
  Vec k2 = k2_scaled(j, v);
  double c = -k2[0];
  FirstOrderCoefficients o;
  o.ax = P * v + eps * (k2.segment<3>(1) + c * P * v);
  o.av = P * j.E + eps * (k2.segment<3>(4) + c * P * j.E);
  o.source = j.b + eps * c * j.b;
  o.bx = eps / j.b * (v - P * v);
  o.bv = J * v + eps / j.b * (j.E - P * j.E);
  return o;
}

FirstOrderCoefficients first_order_coefficients_display(const FieldGeometry& g, const V3& x, const V3& v,
                                                        double eps) {
  if (!g.constant_direction) throw DomainError("first-order closed forms need a constant-direction field");
  ConstDirJet j = const_dir_jet(g, x);
  const M3 P = projector_matrix(kE0), J = cross_matrix(kE0);
  const double b = j.b, b2 = b * b;
  V3 vp = v - P * v, Ep = j.E - P * j.E, gbp = j.gb - P * j.gb;
  double vpar = v[2], Epar = j.E[2];
  V3 Jv = J * v, JE = J * j.E;
  FirstOrderCoefficients o;
  o.ax = vpar * kE0 - eps / (2 * b) * (vp.squaredNorm() * gbp / b - 2 * JE);
  V3 dEpar = j.DEb.row(2).transpose();  // d_x (E_par / b)
  V3 dpar_Eperp = j.DEb.col(2);         // d_{x_par} (E / b)
  dpar_Eperp[2] = 0;
  M3 DEb_pp = j.DEb;
  DEb_pp.row(2).setZero();
  DEb_pp.col(2).setZero();
  double avpar = Epar + eps * Epar * Jv.dot(gbp) / b2 + eps * (dEpar - P * dEpar).dot(vp);
  V3 avperp = 0.5 * eps * ((gbp / b2).dot(JE) * vp + 2 * vpar * dpar_Eperp - DEb_pp * Jv);
  o.av = avperp + avpar * kE0;
  o.source = b + eps * Jv.dot(gbp) / b;
  o.bx = eps / b * vp;
  o.bv = Jv + eps / b * Ep;
  return o;
}

}  // namespace strobo
