#include "strobo/averaging.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "bundle_jet.hpp"

namespace strobo {

// ---------------------------------------------------------------- flows

IntegratorOptions PeriodicFlow::tight_options() {
  IntegratorOptions o;
  o.rel_tol = 1e-13;
  o.abs_tol = 1e-14;
  return o;
}

PeriodicFlow PeriodicFlow::analytic(int dim, Fn fn, std::string label) {
  if (!fn) throw UsageError("analytic flow without evaluator");
  PeriodicFlow p;
  p.dim_ = dim;
  p.analytic_ = true;
  p.label_ = std::move(label);
  p.fn_ = fn;
  p.batch_ = [fn](const Vec& y, const std::vector<double>& taus) {
    std::vector<FlowJet> out;
    out.reserve(taus.size());
    for (double t : taus) out.push_back(fn(t, y));
    return out;
  };
  return p;
}

namespace {

OdeRhs variational_rhs(const VectorField& G) {
  const int d = G.dim();
  return [G, d](double, const State& s, State& ds) {
    Vec y = s.head(d);
    Mat J = G.jacobian(y);
    ds.resize(s.size());
    ds.head(d) = G(y);
    Eigen::Map<const Eigen::MatrixXd> M(s.data() + d, d, d);
    Eigen::Map<Eigen::MatrixXd> dM(ds.data() + d, d, d);
    dM = J * M;
  };
}

State variational_start(const Vec& y) {
  const int d = static_cast<int>(y.size());
  State s(d + d * d);
  s.head(d) = y;
  Eigen::Map<Eigen::MatrixXd>(s.data() + d, d, d).setIdentity();
  return s;
}

FlowJet variational_unpack(const State& s, int d) {
  FlowJet j;
  j.point = s.head(d);
  j.jacobian = Eigen::Map<const Eigen::MatrixXd>(s.data() + d, d, d);
  return j;
}

}  // namespace

PeriodicFlow PeriodicFlow::numeric(VectorField G, IntegratorOptions opts) {
  PeriodicFlow p;
  p.dim_ = G.dim();
  p.analytic_ = false;
  p.label_ = "numeric flow of " + G.label();
  const int d = G.dim();
  OdeRhs rhs = variational_rhs(G);
  p.fn_ = [rhs, opts, d](double tau, const Vec& y) {
    return variational_unpack(Dopri5(opts).integrate(rhs, 0.0, variational_start(y), tau), d);
  };
  p.batch_ = [rhs, opts, d](const Vec& y, const std::vector<double>& taus) {
    auto states = Dopri5(opts).integrate_to(rhs, 0.0, variational_start(y), taus);
    std::vector<FlowJet> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(variational_unpack(s, d));
    return out;
  };
  return p;
}

FlowJet PeriodicFlow::operator()(double tau, const Vec& y) const {
  if (!fn_) throw UsageError("use of empty flow");
  if (y.size() != dim_) throw UsageError("flow: dimension mismatch");
  return fn_(tau, y);
}

std::vector<FlowJet> PeriodicFlow::samples(const Vec& y, const std::vector<double>& taus) const {
  if (!batch_) throw UsageError("use of empty flow");
  if (y.size() != dim_) throw UsageError("flow: dimension mismatch");
  return batch_(y, taus);
}

std::vector<FlowJet> PeriodicFlow::uniform_samples(const Vec& y, int n) const {
  std::vector<double> taus(n);
  for (int j = 0; j < n; ++j) taus[j] = kTwoPi * j / n;
  return samples(y, taus);
}

FlowJet flow_with_jacobian(const PeriodicFlow& flow, double tau, const Vec& y) { return flow(tau, y); }

FlowJet flow_with_jacobian(const VectorField& G, double tau, const Vec& y, const IntegratorOptions& opts) {
  return PeriodicFlow::numeric(G, opts)(tau, y);
}

Vec pullback_K(const FlowJet& jet, const VectorField& K) {
  Eigen::PartialPivLU<Mat> lu(jet.jacobian);
  Vec out = lu.solve(K(jet.point));
  if (!out.allFinite() || !(std::abs(lu.determinant()) > 1e-300))
    throw NumericError("singular flow Jacobian in pullback");
  return out;
}

Vec pullback_K(const PeriodicFlow& flow, const VectorField& K, double tau, const Vec& y) {
  return pullback_K(flow(tau, y), K);
}

VectorField pulled_back_field(const PeriodicFlow& flow, const VectorField& K, double tau) {
  std::ostringstream os;
  os << "K_tau(" << tau << ")";
  return VectorField(
      K.dim(), [flow, K, tau](const Vec& y) { return pullback_K(flow, K, tau, y); }, {}, os.str(),
      FdScheme::nested());
}

// ---------------------------------------------------------------- modes

namespace {

bool pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

ModeSet::ModeSet(PeriodicFlow flow, VectorField K, ModeOptions opts)
    : flow_(std::move(flow)), K_(std::move(K)), opts_(opts) {
  const int Nmin = 4 * opts_.k_max + 4;
  if (opts_.samples < Nmin || !pow2(opts_.samples))
    throw UsageError("mode extraction needs a power-of-two sample count >= 4 k_max + 4");
  if (opts_.adaptive && (!pow2(opts_.min_samples) || opts_.min_samples > opts_.samples))
    throw UsageError("min_samples must be a power of two not above samples");
  if (flow_.dim() != K_.dim()) throw UsageError("flow and field dimensions differ");
  int first = opts_.adaptive ? std::max(opts_.min_samples, 1) : opts_.samples;
  while (first < Nmin) first *= 2;
  opts_.min_samples = first;
  for (int N = first; N <= opts_.samples; N *= 2) {
    Table tw(N + 1, std::vector<Complex>(N));
    for (int k = -N / 2; k <= N / 2; ++k)
      for (int j = 0; j < N; ++j) {
        // exact reduction of k j mod N keeps the twiddles symmetric
        int m = ((k * j) % N + N) % N;
        double a = kTwoPi * m / N;
        tw[k + N / 2][j] = Complex(std::cos(a), -std::sin(a)) / static_cast<double>(N);
      }
    twiddle_.emplace_back(N, std::move(tw));
  }
}

const ModeSet::Table& ModeSet::table(int N) const {
  for (const auto& [n, t] : twiddle_)
    if (n == N) return t;
  throw UsageError("sample count " + std::to_string(N) + " not available in this mode set");
}

std::vector<Vec> ModeSet::samples(const Vec& y, int N) const {
  auto jets = flow_.uniform_samples(y, N);
  std::vector<Vec> out;
  out.reserve(jets.size());
  for (const auto& j : jets) out.push_back(pullback_K(j, K_));
  return out;
}

std::vector<CVec> ModeSet::spectrum(const Vec& y, int N) const {
  const Table& tw = table(N);
  const int d = K_.dim();
  auto s = samples(y, N);
  std::vector<CVec> out(N + 1);
  for (int k = -N / 2; k <= N / 2; ++k) {
    CVec acc = CVec::Zero(d);
    for (int j = 0; j < N; ++j) acc += tw[k + N / 2][j] * s[j].cast<Complex>();
    out[k + N / 2] = acc;
  }
  return out;
}

bool ModeSet::resolved(const std::vector<CVec>& spec) const {
  const int N = static_cast<int>(spec.size()) - 1;
  const double thr = opts_.alias_rel * spec[N / 2].norm() + opts_.alias_abs;
  for (int k = -N / 2; k <= N / 2; ++k)
    if (std::abs(k) > opts_.k_max && spec[k + N / 2].norm() > thr) return false;
  return true;
}

int ModeSet::sample_count(const Vec& y) const {
  if (!opts_.adaptive) return opts_.samples;
  int N = opts_.min_samples;
  while (N < opts_.samples && !resolved(spectrum(y, N))) N *= 2;
  return N;
}

std::vector<CVec> ModeSet::values(const Vec& y, int N) const {
  const Table& tw = table(N);
  const int km = opts_.k_max, d = K_.dim();
  auto s = samples(y, N);
  std::vector<CVec> out(2 * km + 1);
  for (int k = -km; k <= km; ++k) {
    CVec acc = CVec::Zero(d);
    for (int j = 0; j < N; ++j) acc += tw[k + N / 2][j] * s[j].cast<Complex>();
    out[k + km] = acc;
  }
  return out;
}

std::vector<CVec> ModeSet::values(const Vec& y) const {
  const int km = opts_.k_max;
  int N = opts_.adaptive ? opts_.min_samples : opts_.samples;
  for (;;) {
    if (N >= opts_.samples) return values(y, opts_.samples);
    auto spec = spectrum(y, N);
    if (resolved(spec)) {
      std::vector<CVec> out(2 * km + 1);
      for (int k = -km; k <= km; ++k) out[k + km] = spec[k + N / 2];
      return out;
    }
    N *= 2;
  }
}

ModeValues ModeSet::extract(const Vec& y) const {
  const int N = opts_.samples, km = opts_.k_max;
  auto spec = spectrum(y, N);
  ModeValues mv;
  mv.k_max = km;
  mv.modes.resize(2 * km + 1);
  for (int k = -km; k <= km; ++k) mv.modes[k + km] = spec[k + N / 2];
  const double thr = opts_.alias_rel * spec[N / 2].norm() + opts_.alias_abs;
  for (int k = -N / 2; k <= N / 2; ++k) {
    if (std::abs(k) <= km) continue;
    double n = spec[k + N / 2].norm();
    mv.discarded_max = std::max(mv.discarded_max, n);
    if (n > thr) mv.aliased.push_back(k);
  }
  mv.aliasing_warning = !mv.aliased.empty();
  return mv;
}

ModeJet ModeSet::jet(const Vec& y, int derivatives) const {
  // one sample count for the whole stencil
  const int N = sample_count(y);
  auto bundle = [this, N](const Vec& p) { return values(p, N); };
  auto bj = detail::bundle_jet<Complex>(bundle, y, derivatives, opts_.fd);
  ModeJet J;
  J.k_max = opts_.k_max;
  J.v = std::move(bj.v);
  J.d = std::move(bj.d);
  J.h = std::move(bj.h);
  return J;
}

ComplexVectorField ModeSet::field(int k) const {
  if (std::abs(k) > opts_.k_max) throw UsageError("mode index beyond k_max");
  ModeSet self = *this;
  std::ostringstream os;
  os << "K^_" << k;
  return ComplexVectorField(
      K_.dim(), [self, k](const Vec& y) { return self.values(y)[k + self.k_max()]; }, {}, os.str(), opts_.fd);
}

ModeValues extract_modes(const PeriodicFlow& flow, const VectorField& K, const Vec& y, int N, int k_max) {
  ModeOptions o;
  o.samples = N;
  o.k_max = k_max;
  o.adaptive = false;
  return ModeSet(flow, K, o).extract(y);
}

CVec fourier_series(const std::vector<CVec>& modes, int k_max, double tau) {
  CVec acc = CVec::Zero(modes.at(0).size());
  for (int k = -k_max; k <= k_max; ++k) acc += std::exp(Complex(0, k * tau)) * modes[k + k_max];
  return acc;
}

// ---------------------------------------------------------------- assembly

namespace {

// Bracket algebra on a mode jet; modes outside +-k_max are zero.
struct BracketAlgebra {
  const ModeJet& J;
  int d;
  CVec zv;
  CMat zm;

  explicit BracketAlgebra(const ModeJet& j)
      : J(j), d(static_cast<int>(j.v.at(0).size())), zv(CVec::Zero(d)), zm(CMat::Zero(d, d)) {}

  const CVec& v(int k) const { return J.has(k) ? J.v[J.idx(k)] : zv; }
  const CMat& D(int k) const { return J.has(k) ? J.d[J.idx(k)] : zm; }

  // [K_a, K_b]
  CVec br(int a, int b) const {
    if (!J.has(a) || !J.has(b)) return zv;
    return D(a) * v(b) - D(b) * v(a);
  }
  // D [K_a, K_b]
  CMat dbr(int a, int b) const {
    if (!J.has(a) || !J.has(b)) return zm;
    const auto& Ha = J.h[J.idx(a)];
    const auto& Hb = J.h[J.idx(b)];
    return bracket_jacobian<Complex>(v(a), D(a), Ha, v(b), D(b), Hb);
  }
  // [[K_a, K_b], K_c]
  CVec br2(int a, int b, int c) const {
    if (!J.has(a) || !J.has(b) || !J.has(c)) return zv;
    return dbr(a, b) * v(c) - D(c) * br(a, b);
  }
};

}  // namespace

CVec explicit_term(const ModeJet& J, int r) {
  const int km = J.k_max;
  const Complex I(0, 1);
  BracketAlgebra A(J);
  if (r == 1) return A.v(0);
  if (r == 2) {
    CVec acc = CVec::Zero(A.d);
    for (int k = 1; k <= km; ++k)
      acc += (I / double(k)) * (A.br(k, -k) + A.br(0, k) - A.br(0, -k));
    return acc;
  }
  if (r != 3) throw UsageError("explicit assembly supports r = 1, 2, 3");
  if (J.h.empty()) throw UsageError("K^[3] needs second derivatives of the modes");
  // index range wide enough that every out-of-range mode reads as zero
  const int L = 2 * km + 1;
  CVec acc = CVec::Zero(A.d);
  for (int k = -km; k <= km; ++k) {
    if (k == 0) continue;
    double w = 1.0 / (k * k);
    acc += w * (A.br2(k, 0, 0) + A.br2(-k, k, k) - 0.5 * A.br2(-2 * k, k, k) + A.br2(0, k, -k));
  }
  for (int m = -km; m <= km; ++m)
    for (int l = -km; l <= km; ++l) {
      if (m == 0 || l == 0 || m + l == 0) continue;
      acc -= (1.0 / (l * (m + l))) * A.br2(0, l, m);
    }
  for (int l = -km; l <= km; ++l)
    for (int k = -L; k <= L; ++k) {
      if (l == 0 || !(k < -std::abs(l))) continue;
      acc += (1.0 / (l * k)) * A.br2(k, l, -l);
    }
  for (int k = -km; k <= km; ++k)
    for (int m = -km; m <= km; ++m) {
      if (!(k < 0 && k < m) || m == 0 || m + k == 0) continue;
      acc -= (1.0 / (k * m)) * A.br2(k, -k, m);
    }
  for (int m = -km; m <= km; ++m)
    for (int l = -km; l <= km; ++l) {
      if (m == 0 || l == 0 || m == l || m == -l) continue;
      int n = -m - l;
      if (!(n < m && n < l)) continue;
      acc -= (1.0 / (m * (m + l))) * A.br2(n, l, m);
    }
  return acc;
}

CVec word_term(const ModeJet& J, int r, const BetaTable& betas, WordSign sign) {
  if (r < 1 || r > 3) throw UsageError("word assembly supports r = 1, 2, 3");
  if (r == 3 && J.h.empty()) throw UsageError("K^[3] needs second derivatives of the modes");
  BracketAlgebra A(J);
  CVec acc = CVec::Zero(A.d);
  for (const Word& w : enumerate_words(r, J.k_max)) {
    GaussianRational b = betas.exact(w);
    if (b.is_zero()) continue;
    Complex c = b.to_complex();
    if (r == 1)
      acc += c * A.v(w[0]);
    else if (r == 2)
      acc += c * A.br(w[0], w[1]);
    else
      acc += c * A.br2(w[0], w[1], w[2]);
  }
  double s = 1.0 / r;
  if (sign == WordSign::resolved && r % 2 == 0) s = -s;
  return s * acc;
}

namespace {

VectorField real_term(const ModeSet& modes, int r, std::function<CVec(const ModeJet&)> term, std::string label) {
  auto eval = [modes, r, term, label](const Vec& y) {
    CVec z = term(modes.jet(y, r - 1));
    Vec re = z.real(), im = z.imag();
    if (im.norm() > 1e-10 * std::max(1.0, re.norm())) {
      std::ostringstream os;
      os << label << ": imaginary residue " << im.norm() << " at y=" << y.transpose();
      throw NumericError(os.str());
    }
    return re;
  };
  return VectorField(modes.dim(), eval, {}, std::move(label), modes.options().fd);
}

}  // namespace

VectorField assemble_explicit(const ModeSet& modes, int r) {
  if (r < 1 || r > 3) throw UsageError("assemble_explicit: r must be 1, 2 or 3");
  return real_term(modes, r, [r](const ModeJet& J) { return explicit_term(J, r); }, "K^[" + std::to_string(r) + "]");
}

VectorField assemble_words(const ModeSet& modes, int r, const BetaTable& betas, WordSign sign) {
  if (r < 1 || r > 3) throw UsageError("assemble_words: r must be 1, 2 or 3");
  const BetaTable* bt = &betas;
  return real_term(
      modes, r, [r, bt, sign](const ModeJet& J) { return word_term(J, r, *bt, sign); },
      "K^[" + std::to_string(r) + "]w");
}

// ---------------------------------------------------------------- integral oracle

namespace {

struct Panelled {
  std::vector<double> t, w;  // nodes and weights on [0, 2 pi]
  Eigen::MatrixXd C;         // cumulative integration within a panel (per-panel, reference)
  int panels, m;
};

Panelled make_nodes(int panels, int m) {
  // Golub-Welsch for Gauss-Legendre on [-1,1]
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  for (int k = 1; k < m; ++k) {
    double b = k / std::sqrt(4.0 * k * k - 1.0);
    T(k, k - 1) = T(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  Eigen::VectorXd x = es.eigenvalues();
  Eigen::VectorXd wq(m);
  for (int k = 0; k < m; ++k) wq[k] = 2.0 * es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
  // Newton polish of the nodes, weights from P_m'
  for (int k = 0; k < m; ++k) {
    for (int it = 0; it < 3; ++it) {
      double p0 = 1, p1 = x[k];
      for (int n = 2; n <= m; ++n) {
        double p2 = ((2 * n - 1) * x[k] * p1 - (n - 1) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      double dp = m * (x[k] * p1 - p0) / (x[k] * x[k] - 1);
      x[k] -= p1 / dp;
      if (it == 2) wq[k] = 2.0 / ((1 - x[k] * x[k]) * dp * dp);
    }
  }
  // Legendre values P_n(x_i), n = 0..m
  Eigen::MatrixXd P(m, m + 1);
  for (int i = 0; i < m; ++i) {
    P(i, 0) = 1;
    P(i, 1) = x[i];
    for (int n = 2; n <= m; ++n) P(i, n) = ((2 * n - 1) * x[i] * P(i, n - 1) - (n - 1) * P(i, n - 2)) / n;
  }
  // C_ij = int_{-1}^{x_i} l_j
  Eigen::MatrixXd C(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double s = 0.5 * (x[i] + 1);
      for (int n = 1; n < m; ++n) s += 0.5 * P(j, n) * (P(i, n + 1) - P(i, n - 1));
      C(i, j) = wq[j] * s;
    }
  Panelled out;
  out.panels = panels;
  out.m = m;
  const double hw = kTwoPi / panels / 2;
  for (int p = 0; p < panels; ++p)
    for (int k = 0; k < m; ++k) {
      out.t.push_back(hw * (2 * p + 1 + x[k]));
      out.w.push_back(hw * wq[k]);
    }
  out.C = hw * C;
  return out;
}

// Running integral of node values: out_i = int_0^{t_i} f.
template <class T>
std::vector<T> cumulative(const Panelled& P, const std::vector<T>& f, const T& zero) {
  std::vector<T> out(f.size(), zero);
  T base = zero;
  for (int p = 0; p < P.panels; ++p) {
    const int o = p * P.m;
    for (int i = 0; i < P.m; ++i) {
      T acc = base;
      for (int j = 0; j < P.m; ++j) acc += P.C(i, j) * f[o + j];
      out[o + i] = acc;
    }
    for (int j = 0; j < P.m; ++j) base += P.w[o + j] * f[o + j];
  }
  return out;
}

}  // namespace

Vec integral_oracle(const PeriodicFlow& flow, const VectorField& K, int r, const Vec& y, const OracleOptions& opts) {
  if (r < 1 || r > 3) throw UsageError("integral_oracle: r must be 1, 2 or 3");
  const Panelled P = make_nodes(opts.panels, opts.nodes);
  const int n = static_cast<int>(P.t.size()), d = K.dim();
  auto bundle = [&](const Vec& p) {
    auto jets = flow.samples(p, P.t);
    std::vector<Vec> out;
    out.reserve(jets.size());
    for (const auto& j : jets) out.push_back(pullback_K(j, K));
    return out;
  };
  auto J = detail::bundle_jet<double>(bundle, y, r - 1, opts.fd);
  if (r == 1) {
    Vec acc = Vec::Zero(d);
    for (int j = 0; j < n; ++j) acc += P.w[j] * J.v[j];
    return acc / kTwoPi;
  }
  const Vec zv = Vec::Zero(d);
  const Mat zm = Mat::Zero(d, d);
  auto W = cumulative(P, J.v, zv);
  auto DW = cumulative(P, J.d, zm);
  std::vector<Vec> C2(n);
  for (int j = 0; j < n; ++j) C2[j] = DW[j] * J.v[j] - J.d[j] * W[j];
  if (r == 2) {
    Vec acc = Vec::Zero(d);
    for (int j = 0; j < n; ++j) acc += P.w[j] * C2[j];
    return acc * (-1.0 / (2 * kTwoPi));
  }
  // second derivatives of W, one slot at a time
  std::vector<Mat> DC2(n);
  for (int j = 0; j < n; ++j) DC2[j] = DW[j] * J.d[j] - J.d[j] * DW[j] - contract(J.h[j], W[j]);
  for (int l = 0; l < d; ++l) {
    std::vector<Mat> Hl(n);
    for (int j = 0; j < n; ++j) Hl[j] = J.h[j][l];
    auto HWl = cumulative(P, Hl, zm);
    for (int j = 0; j < n; ++j) DC2[j] += HWl[j] * J.v[j][l];
  }
  auto V = cumulative(P, C2, zv);
  auto DV = cumulative(P, DC2, zm);
  Vec t1 = Vec::Zero(d), t2 = Vec::Zero(d);
  for (int j = 0; j < n; ++j) {
    t1 += P.w[j] * (DV[j] * J.v[j] - J.d[j] * V[j]);
    t2 += P.w[j] * (DW[j] * C2[j] - DC2[j] * W[j]);
  }
  return t1 / (4 * kTwoPi) + t2 / (12 * kTwoPi);
}

// ---------------------------------------------------------------- splits

VectorField geps(const VectorField& F_eps, const VectorField& Keps, double eps) {
  return combine<double>({eps, -eps}, {F_eps, Keps}, "G^eps");
}

std::string to_string(Route r) {
  switch (r) {
    case Route::pipeline: return "pipeline";
    case Route::words: return "words";
    case Route::closed_form: return "closed_form";
  }
  return "?";
}

Route parse_route(const std::string& s) {
  if (s == "pipeline") return Route::pipeline;
  if (s == "words") return Route::words;
  if (s == "closed_form") return Route::closed_form;
  throw ConfigError("unknown route '" + s + "' (pipeline, words, closed_form)");
}

std::vector<VectorField> averaged_terms(const AveragingInput& in, int n, Route route) {
  if (n < 1 || n > 3) throw UsageError("averaging order must be 1, 2 or 3");
  std::vector<VectorField> out;
  ModeSet modes(in.flow, in.K, in.mode_opts);
  static const BetaTable betas;
  for (int r = 1; r <= n; ++r) {
    if (route == Route::closed_form && static_cast<int>(in.exact_terms.size()) >= r && in.exact_terms[r - 1].valid())
      out.push_back(in.exact_terms[r - 1]);
    else if (route == Route::words)
      out.push_back(assemble_words(modes, r, betas));
    else
      out.push_back(assemble_explicit(modes, r));
  }
  return out;
}

AveragedSplit make_split(const AveragingInput& in, const std::vector<VectorField>& terms, double eps, Route route) {
  if (!(eps > 0)) throw UsageError("eps must be positive");
  AveragedSplit s;
  s.order = static_cast<int>(terms.size());
  s.eps = eps;
  s.route = route;
  s.K_terms = terms;
  std::vector<double> c;
  double p = 1;
  for (std::size_t r = 0; r < terms.size(); ++r, p *= eps) c.push_back(p);
  s.Keps = combine<double>(c, terms, "K^eps");
  // eps (G/eps + K - K^eps), written without the 1/eps
  s.Geps = combine<double>({1.0, eps, -eps}, {in.G, in.K, s.Keps}, "G^eps");
  return s;
}

AveragedSplit make_split(const AveragingInput& in, int n, double eps, Route route) {
  return make_split(in, averaged_terms(in, n, route), eps, route);
}

double commutator_defect(const AveragedSplit& split, const std::vector<Vec>& points) {
  VectorField br = lie_bracket(split.Geps, split.Keps);
  double m = 0;
  for (const auto& y : points) m = std::max(m, br(y).norm());
  return m;
}

}  // namespace strobo
