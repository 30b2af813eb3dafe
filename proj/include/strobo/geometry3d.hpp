#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "strobo/averaging.hpp"
#include "strobo/fields.hpp"

namespace strobo {

using V3 = Eigen::Vector3d;
using M3 = Eigen::Matrix3d;

struct FieldGeometry {
  std::function<V3(const V3&)> B;
  std::function<M3(const V3&)> DB;  // analytic, or central differences when built without one
  ScalarField U;                    // potential over x in R^3, E = -grad U
  double B_min = 0;  // declared lower bound, checked wherever |B| is used
  bool constant_direction = false;  // B = (0, 0, b(x1, x2))

  double b(const V3& x) const { return B(x).norm(); }
  V3 e(const V3& x) const;
  M3 De(const V3& x) const;  // (I - e e^T) DB / |B|
  V3 E(const V3& x) const;
  M3 DE(const V3& x) const;
  V3 grad_b(const V3& x) const;  // DB^T e
};

// Checks |B| >= B_min (> 0) and div B ~ 0 on the samples. B_min = 0 only asks for |B| > 0.
FieldGeometry make_geometry(std::function<V3(const V3&)> B, std::function<M3(const V3&)> DB, ScalarField U,
                            const std::vector<V3>& samples, bool constant_direction = false, double B_min = 0.0,
                            double div_tol = 1e-6);

V3 projector_apply(const V3& e, const V3& v);  // (e.v) e
V3 cross_apply(const V3& e, const V3& v);      // v x e
M3 projector_matrix(const V3& e);
M3 cross_matrix(const V3& e);  // J_e with J_e v = v x e

M3 q_tau(const V3& e, double tau);
M3 dPv_dx(const FieldGeometry& g, const V3& x, const V3& v);  // d_x (P_e(x) v)
M3 dJv_dx(const FieldGeometry& g, const V3& x, const V3& v);  // d_x (J_e(x) v)
M3 r_tau(const FieldGeometry& g, const V3& x, const V3& v, double tau);

// |B| (K0)_3 from the seven products of Fourier coefficients of Q and R
V3 khat0_v(const FieldGeometry& g, const V3& x, const V3& v);
// |B| (K0)_3 in the expanded projector form, coefficient c on P M P (the published value is 4)
V3 khat0_v_expanded(const FieldGeometry& g, const V3& x, const V3& v, double pmp_coeff = 4.0);

// (1/|B|) (1, P_e v, (K0)_3) as a 7-vector over (t, x, v)
Vec khat0_3d(const FieldGeometry& g, const V3& x, const V3& v);

// Fields over y = (x, v) in R^6 and the rotation flow
VectorField vlasov3d_G(const FieldGeometry& g);  // (0, J_e v)
VectorField vlasov3d_K(const FieldGeometry& g);  // (v, E)
PeriodicFlow vlasov3d_flow(const FieldGeometry& g);

// Y = (t, x, v); first-order averaged fields for B = (0, 0, b(x_perp))
struct FirstOrderFields {
  VectorField K1, K2;          // K^[1], K^[2]
  VectorField Kcheck, Gcheck;  // K^[1] + eps K^[2];  (0,0,Jv) + (eps/b)(0, v_perp, E_perp)
};
FirstOrderFields first_order_fields_constant_direction(const FieldGeometry& g, double eps);

// Transport coefficients of the t-equation normalized by the t-slot, at first order in eps.
struct FirstOrderCoefficients {
  V3 ax, av;        // multiply grad_x, grad_v
  double source;    // right-hand side of the S equation
  V3 bx, bv;        // tau-equation
};
// Taylor coefficients of the fields above: a0 + eps a1 with a = Kcheck_{x,v} / Kcheck_t
FirstOrderCoefficients first_order_coefficients(const FieldGeometry& g, const V3& x, const V3& v, double eps);
// the literal published displays (for comparison)
FirstOrderCoefficients first_order_coefficients_display(const FieldGeometry& g, const V3& x, const V3& v, double eps);

}  // namespace strobo
