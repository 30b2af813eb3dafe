#include "strobo/problems.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <sstream>

namespace strobo {

namespace {

using M2 = Eigen::Matrix2d;
using V2 = Eigen::Vector2d;

const M2 kJ = (M2() << 0, 1, -1, 0).finished();

M2 rot(double tau) {  // exp(tau J)
  double c = std::cos(tau), s = std::sin(tau);
  return (M2() << c, s, -s, c).finished();
}

std::vector<double> default_eps() { return {1e-1, std::pow(10.0, -1.5), 1e-2, std::pow(10.0, -2.5), 1e-3}; }

// potential or intensity given as an expression, with derivatives up to third order
struct Scalar {
  int dim = 0;
  Expr f;
  std::vector<Expr> g;
  std::vector<std::vector<Expr>> h;
  std::vector<std::vector<std::vector<Expr>>> t;

  Scalar() = default;
  Scalar(const std::string& text, int d, bool third = false) : dim(d) {
    static const std::vector<std::string> names{"x1", "x2", "x3"};
    std::vector<std::string> vars(names.begin(), names.begin() + d);
    f = Expr::parse(text, vars);
    for (int i = 0; i < d; ++i) g.push_back(f.diff(i));
    h.assign(d, {});
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) h[i].push_back(g[i].diff(j));
    if (third) {
      t.assign(d, std::vector<std::vector<Expr>>(d));
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          for (int l = 0; l < d; ++l) t[i][j].push_back(h[i][j].diff(l));
    }
  }
  double val(const Vec& x) const { return f.eval(x); }
  Vec grad(const Vec& x) const {
    Vec o(dim);
    for (int i = 0; i < dim; ++i) o[i] = g[i].eval(x);
    return o;
  }
  Mat hess(const Vec& x) const {
    Mat o(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) o(i, j) = h[i][j].eval(x);
    return o;
  }
  // d^3 f / dx_i dx_j dx_l
  double third(int i, int j, int l, const Vec& x) const { return t[i][j][l].eval(x); }
};

// G = (0, J v) over (x, v) in R^4
VectorField gyro_G() {
  return VectorField(
      4,
      [](const Vec& y) {
        Vec o = Vec::Zero(4);
        o.tail<2>() = kJ * y.tail<2>();
        return o;
      },
      [](const Vec&) {
        Mat D = Mat::Zero(4, 4);
        D.bottomRightCorner<2, 2>() = kJ;
        return D;
      },
      "G", FdScheme::standard(), [](const Vec&) { return Hess(4, Mat::Zero(4, 4)); });
}

// K = (v, -grad U(x)) over (x, v) in R^4
VectorField vlasov_K2d(const Scalar& U) {
  return VectorField(
      4,
      [U](const Vec& y) {
        Vec o(4);
        o.head<2>() = y.tail<2>();
        o.tail<2>() = -U.grad(Vec(y.head<2>()));
        return o;
      },
      [U](const Vec& y) {
        Mat D = Mat::Zero(4, 4);
        D.topRightCorner<2, 2>() = M2::Identity();
        D.bottomLeftCorner<2, 2>() = -U.hess(Vec(y.head<2>()));
        return D;
      },
      "K", FdScheme::standard(),
      [U](const Vec& y) {
        Vec x = y.head<2>();
        Hess H(4, Mat::Zero(4, 4));
        for (int l = 0; l < 2; ++l)
          for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) H[l](2 + i, j) = -U.third(i, j, l, x);
        return H;
      });
}

PeriodicFlow gyro_flow() {
  return PeriodicFlow::analytic(
      4,
      [](double tau, const Vec& y) {
        M2 R = rot(tau);
        FlowJet j;
        j.point = y;
        j.point.tail<2>() = R * y.tail<2>();
        j.jacobian = Mat::Identity(4, 4);
        j.jacobian.bottomRightCorner<2, 2>() = R;
        return j;
      },
      "rotation(v)");
}

VectorField constant_field(const Vec& c, const std::string& label) {
  const int d = static_cast<int>(c.size());
  return VectorField(
      d, [c](const Vec&) { return c; }, [d](const Vec&) { return Mat::Zero(d, d).eval(); }, label,
      FdScheme::standard(), [d](const Vec&) { return Hess(d, Mat::Zero(d, d)); });
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double parse_double(const ParamMap& p, const std::string& key) {
  const std::string& s = p.at(key);
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    // allow expressions without coordinates, e.g. "10^-1.5"
    Expr e = Expr::parse(s, {});
    return e.eval(Vec());
  }
}

// "0" or one number per coordinate, comma separated
Vec parse_center(const std::string& text, int dim) {
  std::vector<double> c;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used == 0 || used != item.size()) throw ConfigError("center: bad number '" + item + "'");
    c.push_back(v);
  }
  if (c.size() == 1 && c[0] == 0) return Vec();
  if (static_cast<int>(c.size()) != dim)
    throw ConfigError("center needs " + std::to_string(dim) + " components, got " + std::to_string(c.size()));
  return Eigen::Map<const Eigen::VectorXd>(c.data(), dim);
}

std::vector<V3> box_samples(int n, std::uint64_t seed, double box) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-box, box);
  std::vector<V3> out;
  for (int i = 0; i < n; ++i) out.emplace_back(u(rng), u(rng), u(rng));
  return out;
}

}  // namespace

// ------------------------------------------------------------------ Problem members

VectorField Problem::full_field(double eps) const {
  if (!(eps > 0)) throw UsageError("eps must be positive");
  if (constant_frequency) return combine<double>({1.0 / eps, 1.0}, {G, K}, "F_eps");
  ScalarField w = omega;
  VectorField g = G, k = K;
  VectorField::JacFn jac;
  if (g.has_analytic_jacobian() && k.has_analytic_jacobian())
    jac = [w, g, k, eps](const Vec& y) {
      return Mat((w(y) * g.jacobian(y) + g(y) * w.gradient(y).transpose()) / eps + k.jacobian(y));
    };
  return VectorField(
      dim_y, [w, g, k, eps](const Vec& y) { return Vec(w(y) / eps * g(y) + k(y)); }, jac, "F_eps");
}

AugmentedProblem Problem::augmented(const std::vector<Vec>& samples) const {
  if (constant_frequency) throw UsageError("problem '" + name + "' has constant frequency; nothing to augment");
  return augment(omega, G, K, samples, &flow);
}

AveragingInput Problem::averaging_input(ModeOptions mode_opts) const {
  AveragingInput in;
  in.name = name;
  in.mode_opts = mode_opts;
  in.exact_terms = exact_terms;
  if (constant_frequency) {
    in.G = G;
    in.K = K;
    in.flow = flow;
  } else {
    AugmentedProblem a = augmented();
    in.G = a.Gcheck;
    in.K = a.Kcheck;
    in.flow = a.flow;
  }
  return in;
}

AveragingInput Problem::phase_input(ModeOptions mode_opts) const {
  if (!constant_frequency) return averaging_input(mode_opts);
  AugmentedProblem a = augment(ScalarField::constant(dim_y, 1.0, "1"), G, K, {}, &flow);
  AveragingInput in;
  in.name = name;
  in.mode_opts = mode_opts;
  in.G = a.Gcheck;
  in.K = a.Kcheck;
  in.flow = a.flow;
  const int d = dim_y;
  for (std::size_t r = 0; r < exact_terms.size(); ++r) {
    VectorField k = exact_terms[r];
    const double head = r == 0 ? 1.0 : 0.0;
    VectorField::JacFn jac;
    if (k.has_analytic_jacobian())
      jac = [k, d](const Vec& Y) {
        Mat M = Mat::Zero(d + 1, d + 1);
        M.bottomRightCorner(d, d) = k.jacobian(Vec(Y.tail(d)));
        return M;
      };
    in.exact_terms.push_back(VectorField(
        d + 1,
        [k, d, head](const Vec& Y) {
          Vec o(d + 1);
          o[0] = head;
          o.tail(d) = k(Vec(Y.tail(d)));
          return o;
        },
        jac, k.label(), FdScheme::nested()));
  }
  return in;
}

Vec Problem::averaging_point(const Vec& y, double t) const {
  if (y.size() != dim_y) throw UsageError("point dimension does not match problem '" + name + "'");
  return constant_frequency ? y : lift(y, t);
}

std::vector<Vec> Problem::sample_points(int count, std::uint64_t seed) const {
  if (count < 0) throw UsageError("negative point count");
  // standard normal components kept inside the box: where f0 is not negligible
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<Vec> out;
  out.reserve(count);
  const int half = dim_y / 2;
  while (static_cast<int>(out.size()) < count) {
    Vec y(dim_y);
    for (int i = 0; i < dim_y; ++i) y[i] = nd(rng);
    bool inside = half == 0 || (y.head(half).norm() <= box && y.tail(dim_y - half).norm() <= box);
    if (inside) out.push_back(y);
  }
  return out;
}

double solve_reference(const Problem& p, double eps, double t, const Vec& y, const ReferenceOptions& opts,
                       IntegratorStats* stats) {
  ReferenceOptions o = opts;
  if (!p.constant_frequency) {
    // the fast period shrinks where omega is large
    double w = p.omega(y);
    o.step_factor = opts.step_factor / std::max(1.0, w);
  }
  return solve_reference(p.full_field(eps), eps, p.f0, t, y, o, stats);
}

// ------------------------------------------------------------------ constructors

Problem const_eb_2d(double E1, double E2, double sigma, const Vec& center) {
  Problem p;
  p.name = "const_eb_2d";
  p.dim_y = 4;
  p.constant_frequency = true;
  p.omega = ScalarField::constant(4, 1.0, "1");
  const V2 E(E1, E2);
  p.G = gyro_G();
  p.K = VectorField(
      4,
      [E](const Vec& y) {
        Vec o(4);
        o.head<2>() = y.tail<2>();
        o.tail<2>() = E;
        return o;
      },
      [](const Vec&) {
        Mat D = Mat::Zero(4, 4);
        D.topRightCorner<2, 2>() = M2::Identity();
        return D;
      },
      "K", FdScheme::standard(), [](const Vec&) { return Hess(4, Mat::Zero(4, 4)); });
  p.flow = gyro_flow();
  p.f0 = gaussian_density(sigma, center);
  p.eps_default = default_eps();
  InitialDensity f0 = p.f0;
  // backward characteristic: the forward map with s = -t
  p.exact_solution = [E, f0](double t, const Vec& y, double eps) {
    const double s = -t;
    M2 R = rot(s / eps);
    V2 x = y.head<2>(), v = y.tail<2>();
    V2 x0 = x - eps * kJ * (R - M2::Identity()) * v - eps * eps * (R * E - E) + eps * s * kJ * E;
    V2 v0 = R * v - eps * kJ * (R - M2::Identity()) * E;
    Vec z(4);
    z << x0, v0;
    return f0(z);
  };
  Vec k2 = Vec::Zero(4);
  k2.head<2>() = kJ * E;
  p.exact_terms = {constant_field(Vec::Zero(4), "K1"), constant_field(k2, "K2"), constant_field(Vec::Zero(4), "K3")};
  p.parameters = {{"E1", num(E1)}, {"E2", num(E2)}, {"sigma", num(sigma)}};
  return p;
}

Problem elementary_rotation(double sigma, const Vec& center) {
  Problem p;
  p.name = "elementary_rotation";
  p.dim_y = 2;
  p.constant_frequency = false;
  p.omega = ScalarField(
      2, [](const Vec& y) { return 1 + y.squaredNorm(); }, [](const Vec& y) { return Vec(2 * y); },
      [](const Vec&) { return Mat(2 * Mat::Identity(2, 2)); }, "1+|y|^2");
  p.G = VectorField(
      2, [](const Vec& y) { return Vec(kJ * y.head<2>()); }, [](const Vec&) { return Mat(kJ); }, "Jy",
      FdScheme::standard(), [](const Vec&) { return Hess(2, Mat::Zero(2, 2)); });
  p.K = VectorField(
      2, [](const Vec& y) { return y; }, [](const Vec&) { return Mat(Mat::Identity(2, 2)); }, "y",
      FdScheme::standard(), [](const Vec&) { return Hess(2, Mat::Zero(2, 2)); });
  p.flow = PeriodicFlow::analytic(
      2,
      [](double tau, const Vec& y) {
        M2 R = rot(tau);
        return FlowJet{Vec(R * y.head<2>()), Mat(R)};
      },
      "rotation");
  p.f0 = gaussian_density(sigma, center);
  p.eps_default = default_eps();
  InitialDensity f0 = p.f0;
  p.exact_solution = [f0](double t, const Vec& y, double eps) {
    double th = (t + (1 - std::exp(-2 * t)) * y.squaredNorm() / 2) / eps;
    return f0(Vec(std::exp(-t) * rot(-th) * y.head<2>()));
  };
  p.exact_h = [f0](double t, double tau, const Vec& y) { return f0(Vec(std::exp(-t) * rot(-tau) * y.head<2>())); };
  p.exact_S = [](double t, double, const Vec& y) { return t + (1 - std::exp(-2 * t)) * y.squaredNorm() / 2; };
  // Kcheck already commutes with Gcheck
  VectorField K1(
      3,
      [](const Vec& Y) {
        Vec y = Y.tail<2>();
        double w = 1 + y.squaredNorm();
        Vec o(3);
        o[0] = 1 / w;
        o.tail<2>() = y / w;
        return o;
      },
      {}, "K1", FdScheme::nested());
  p.exact_terms = {K1, constant_field(Vec::Zero(3), "K2"), constant_field(Vec::Zero(3), "K3")};
  p.leading_phase = p.omega;
  p.parameters = {{"sigma", num(sigma)}};
  return p;
}

Problem vlasov_const_b_2d(const std::string& Utext, double sigma, const Vec& center) {
  Scalar U(Utext, 2, true);
  Problem p;
  p.name = "vlasov_const_b_2d";
  p.dim_y = 4;
  p.constant_frequency = true;
  p.omega = ScalarField::constant(4, 1.0, "1");
  p.G = gyro_G();
  p.K = vlasov_K2d(U);
  p.flow = gyro_flow();
  p.f0 = gaussian_density(sigma, center);
  p.eps_default = default_eps();
  VectorField K2(
      4,
      [U](const Vec& y) {
        Vec x = y.head<2>();
        V2 E = -U.grad(x);
        Mat H = U.hess(x);
        Vec o(4);
        o.head<2>() = kJ * E;
        o.tail<2>() = 0.5 * H.trace() * (kJ * y.tail<2>());
        return o;
      },
      {}, "K2", FdScheme::nested());
  p.exact_terms = {constant_field(Vec::Zero(4), "K1"), K2};
  p.parameters = {{"U", Utext}, {"sigma", num(sigma)}};
  return p;
}

Problem vlasov_varying_b_2d(const std::string& btext, const std::string& Utext, double sigma, const Vec& center) {
  Scalar b(btext, 2), U(Utext, 2, true);
  Problem p;
  p.name = "vlasov_varying_b_2d";
  p.dim_y = 4;
  p.constant_frequency = false;
  p.omega = ScalarField(
      4, [b](const Vec& y) { return b.val(Vec(y.head<2>())); },
      [b](const Vec& y) {
        Vec g = Vec::Zero(4);
        g.head<2>() = b.grad(Vec(y.head<2>()));
        return g;
      },
      [b](const Vec& y) {
        Mat H = Mat::Zero(4, 4);
        H.topLeftCorner<2, 2>() = b.hess(Vec(y.head<2>()));
        return H;
      },
      "b");
  p.G = gyro_G();
  p.K = vlasov_K2d(U);
  p.flow = gyro_flow();
  p.f0 = gaussian_density(sigma, center);
  p.eps_default = default_eps();
  auto bcheck = [b](const Vec& x) {
    double bx = b.val(x);
    if (!(bx > 0)) throw DomainError("b(x) must stay positive");
    return bx;
  };
  VectorField K1(
      5,
      [bcheck](const Vec& Y) {
        Vec o = Vec::Zero(5);
        o[0] = 1 / bcheck(Vec(Y.segment<2>(1)));
        return o;
      },
      {}, "K1", FdScheme::nested());
  VectorField K2(
      5,
      [b, U, bcheck](const Vec& Y) {
        Vec x = Y.segment<2>(1);
        V2 v = Y.tail<2>();
        double bx = bcheck(x), b2 = bx * bx;
        V2 gb = b.grad(x), E = -U.grad(x), Jv = kJ * v;
        double lapU = U.hess(x).trace();
        Vec o(5);
        o[0] = -gb.dot(Jv) / b2;
        o.segment<2>(1) = -gb.dot(v) / (2 * b2) * Jv + gb.dot(Jv) / (2 * b2) * v + kJ * E / bx;
        o.tail<2>() = gb.dot(v) / (2 * b2) * (kJ * E) + gb.dot(Jv) / (2 * b2) * E + lapU / (2 * bx) * Jv;
        return Vec(o / bx);
      },
      {}, "K2", FdScheme::nested());
  p.exact_terms = {K1, K2};
  p.leading_phase = p.omega;
  p.parameters = {{"b", btext}, {"U", Utext}, {"sigma", num(sigma)}};
  return p;
}

Problem vlasov_3d(const std::string& direction, const std::vector<std::string>& Btext, const std::string& btext,
                  const std::string& Utext, double sigma, const Vec& center) {
  if (direction != "general" && direction != "constant")
    throw ConfigError("direction must be 'general' or 'constant', got '" + direction + "'");
  const bool cd = direction == "constant";
  std::vector<std::string> Bs = Btext;
  if (cd)
    Bs = {"0", "0", btext};
  else if (Bs.empty())
    Bs = {"-0.5*x2", "0.5*x1", "2"};
  if (Bs.size() != 3) throw ConfigError("B needs three components");
  std::vector<Scalar> Bc;
  for (const auto& s : Bs) Bc.emplace_back(s, 3);
  Scalar U(Utext, 3);
  auto B = [Bc](const V3& x) {
    Vec xv(x);
    return V3(Bc[0].val(xv), Bc[1].val(xv), Bc[2].val(xv));
  };
  auto DB = [Bc](const V3& x) {
    Vec xv(x);
    M3 D;
    for (int i = 0; i < 3; ++i) D.row(i) = Bc[i].grad(xv).transpose();
    return D;
  };
  ScalarField Uf(
      3, [U](const Vec& x) { return U.val(x); }, [U](const Vec& x) { return U.grad(x); },
      [U](const Vec& x) { return U.hess(x); }, "U");
  FieldGeometry g = make_geometry(B, DB, Uf, box_samples(64, 11, 4.0), cd);

  Problem p;
  p.name = "vlasov_3d";
  p.dim_y = 6;
  p.constant_frequency = false;
  p.omega = ScalarField(
      6, [g](const Vec& y) { return g.b(V3(y.head<3>())); },
      [g](const Vec& y) {
        Vec o = Vec::Zero(6);
        o.head<3>() = g.grad_b(V3(y.head<3>()));
        return o;
      },
      {}, "|B|");
  p.G = vlasov3d_G(g);
  p.K = vlasov3d_K(g);
  p.flow = vlasov3d_flow(g);
  p.f0 = gaussian_density(sigma, center);
  p.eps_default = default_eps();
  VectorField K1(
      7, [g](const Vec& Y) { return khat0_3d(g, V3(Y.segment<3>(1)), V3(Y.tail<3>())); }, {}, "K1",
      FdScheme::nested());
  p.exact_terms = {K1};
  if (cd) p.exact_terms.push_back(first_order_fields_constant_direction(g, 0.0).K2);
  p.leading_phase = p.omega;
  p.geometry = g;
  p.parameters = {{"direction", direction}, {"U", Utext}, {"sigma", num(sigma)}};
  if (cd)
    p.parameters["b"] = btext;
  else {
    p.parameters["B1"] = Bs[0];
    p.parameters["B2"] = Bs[1];
    p.parameters["B3"] = Bs[2];
  }
  return p;
}

// ------------------------------------------------------------------ registry

std::vector<std::string> problem_names() {
  return {"const_eb_2d", "elementary_rotation", "vlasov_const_b_2d", "vlasov_varying_b_2d", "vlasov_3d"};
}

ParamMap default_parameters(const std::string& name) {
  ParamMap p;
  if (name == "const_eb_2d")
    p = {{"E1", "1"}, {"E2", "0"}, {"center", "0"}};
  else if (name == "elementary_rotation")
    p = {{"center", "0"}};
  else if (name == "vlasov_const_b_2d")
    p = {{"U", "0.5*(x1^2 + x2^2)"}, {"center", "0.5,0,0,0"}};
  else if (name == "vlasov_varying_b_2d")
    p = {{"b", "2 + sin(x1)*cos(x2)"}, {"U", "0.5*(x1^2 + x2^2)"}, {"center", "0.5,0,0,0"}};
  else if (name == "vlasov_3d")
    p = {{"direction", "general"},
         {"B1", "-0.5*x2"},
         {"B2", "0.5*x1"},
         {"B3", "2"},
         {"b", "2 + sin(x1)*cos(x2)"},
         {"U", "0.5*(x1^2 + x2^2 + x3^2)"},
         {"center", "0.5,0,0,0,0,0"}};
  else
    throw ConfigError("unknown problem '" + name + "'");
  p["sigma"] = "1";
  return p;
}

Problem make_problem(const std::string& name, const ParamMap& overrides) {
  ParamMap p = default_parameters(name);
  for (const auto& [k, v] : overrides) {
    if (!p.count(k)) throw ConfigError("problem '" + name + "' has no parameter '" + k + "'");
    p[k] = v;
  }
  const double sigma = parse_double(p, "sigma");
  if (!(sigma > 0)) throw ConfigError("sigma must be positive");
  const Vec center = parse_center(p["center"], name == "elementary_rotation" ? 2 : name == "vlasov_3d" ? 6 : 4);
  Problem pr;
  if (name == "const_eb_2d")
    pr = const_eb_2d(parse_double(p, "E1"), parse_double(p, "E2"), sigma, center);
  else if (name == "elementary_rotation")
    pr = elementary_rotation(sigma, center);
  else if (name == "vlasov_const_b_2d")
    pr = vlasov_const_b_2d(p["U"], sigma, center);
  else if (name == "vlasov_varying_b_2d") {
    pr = vlasov_varying_b_2d(p["b"], p["U"], sigma, center);
    // b must stay positive on the box
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-pr.box, pr.box);
    for (int i = 0; i < 256; ++i) {
      Vec y = Vec::Zero(4);
      y[0] = u(rng);
      y[1] = u(rng);
      if (!(pr.omega(y) > 0)) throw DomainError("b(x) must stay positive on the domain box");
    }
  } else if (p["direction"] == "constant")
    pr = vlasov_3d("constant", {}, p["b"], p["U"], sigma, center);
  else
    pr = vlasov_3d(p["direction"], {p["B1"], p["B2"], p["B3"]}, p["b"], p["U"], sigma, center);
  pr.parameters["center"] = p["center"];
  return pr;
}

// ------------------------------------------------------------------ self test

std::vector<SelfTestEntry> self_test(const Problem& p, int points, std::uint64_t seed) {
  std::vector<SelfTestEntry> out;
  const std::vector<Vec> ys = p.sample_points(points, seed);
  auto add = [&](std::string name, double dev, double tol) { out.push_back({std::move(name), dev, tol}); };

  {
    PeriodicFlow num = PeriodicFlow::numeric(p.G);
    double dev = 0;
    for (const auto& y : ys) {
      for (double tau : {1.3, kTwoPi}) {
        FlowJet a = p.flow(tau, y), b = num(tau, y);
        dev = std::max(dev, (a.point - b.point).norm() / (1 + y.norm()));
        dev = std::max(dev, (a.jacobian - b.jacobian).norm() / (1 + a.jacobian.norm()));
      }
      dev = std::max(dev, (p.flow(kTwoPi, y).point - y).norm() / (1 + y.norm()));
    }
    add("analytic flow vs numeric flow", dev, 1e-8);
  }
  {
    double dev = 0;
    for (const auto& y : ys)
      for (const VectorField* F : {&p.G, &p.K}) {
        Mat a = F->jacobian(y), f = F->fd_jacobian(y, FdScheme::standard());
        dev = std::max(dev, (a - f).norm() / std::max(1.0, a.norm()));
      }
    add("analytic jacobians vs finite differences", dev, 1e-6);
  }
  if (!p.exact_terms.empty()) {
    AveragingInput in = p.averaging_input();
    ModeSet modes(in.flow, in.K, in.mode_opts);
    const int rmax = std::min<int>(static_cast<int>(p.exact_terms.size()), 3);
    for (int r = 1; r <= rmax; ++r) {
      VectorField pipe = assemble_explicit(modes, r);
      double dev = 0;
      for (const auto& y : ys) {
        Vec Y = p.averaging_point(y);
        dev = std::max(dev, (pipe(Y) - p.exact_terms[r - 1](Y)).norm());
      }
      add("closed-form K^[" + std::to_string(r) + "] vs pipeline", dev, r < 3 ? 1e-8 : 1e-7);
    }
  }
  if (p.exact_solution) {
    // residual of d_t f + F . grad f at eps = 0.1, t = 0.4
    const double eps = 0.1, t = 0.4;
    VectorField F = p.full_field(eps);
    const FdScheme s{6, 1e-3};
    double dev = 0;
    for (const auto& y : ys) {
      Vec z(p.dim_y + 1);
      z[0] = t;
      z.tail(p.dim_y) = y;
      auto f = [&](const Vec& q) { return Vec::Constant(1, p.exact_solution(q[0], Vec(q.tail(p.dim_y)), eps)); };
      Mat grad = fd::jacobian<double>(f, z, 1, s);
      double res = grad(0, 0) + (grad.block(0, 1, 1, p.dim_y) * F(y))(0, 0);
      dev = std::max(dev, std::abs(res));
    }
    add("exact solution PDE residual", dev, 1e-6);
    double d0 = 0;
    for (const auto& y : ys) d0 = std::max(d0, std::abs(p.exact_solution(0.0, y, eps) - p.f0(y)));
    add("exact solution at t = 0", d0, 1e-14);
  }
  return out;
}

}  // namespace strobo
