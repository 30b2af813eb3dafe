#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "strobo/fields.hpp"
#include "strobo/ode.hpp"
#include "strobo/words.hpp"

namespace strobo {

struct FlowJet {
  Vec point;
  Mat jacobian;
};

// 2pi-periodic flow Phi_tau of G together with its Jacobian in y.
class PeriodicFlow {
 public:
  using Fn = std::function<FlowJet(double tau, const Vec& y)>;

  PeriodicFlow() = default;
  static PeriodicFlow analytic(int dim, Fn fn, std::string label = {});
  // Integrates G together with its variational equation.
  static PeriodicFlow numeric(VectorField G, IntegratorOptions opts = tight_options());

  static IntegratorOptions tight_options();

  bool valid() const { return static_cast<bool>(fn_); }
  int dim() const { return dim_; }
  bool is_analytic() const { return analytic_; }
  const std::string& label() const { return label_; }

  FlowJet operator()(double tau, const Vec& y) const;
  // Jets at tau_j = 2 pi j / n, j = 0..n-1.
  std::vector<FlowJet> uniform_samples(const Vec& y, int n) const;
  // Jets at an increasing list of angles in [0, 2 pi].
  std::vector<FlowJet> samples(const Vec& y, const std::vector<double>& taus) const;

 private:
  int dim_ = 0;
  bool analytic_ = false;
  std::string label_;
  Fn fn_;
  std::function<std::vector<FlowJet>(const Vec&, const std::vector<double>&)> batch_;
};

FlowJet flow_with_jacobian(const PeriodicFlow& flow, double tau, const Vec& y);
FlowJet flow_with_jacobian(const VectorField& G, double tau, const Vec& y,
                           const IntegratorOptions& opts = PeriodicFlow::tight_options());

// K_tau(y) = (D Phi_tau)^{-1} K(Phi_tau(y))
Vec pullback_K(const PeriodicFlow& flow, const VectorField& K, double tau, const Vec& y);
Vec pullback_K(const FlowJet& jet, const VectorField& K);
VectorField pulled_back_field(const PeriodicFlow& flow, const VectorField& K, double tau);

struct ModeOptions {
  int k_max = 3;
  int samples = 128;  // largest sample count (power of two)
  // start at min_samples and double while discarded modes exceed the aliasing threshold
  bool adaptive = true;
  int min_samples = 16;
  FdScheme fd = FdScheme::nested();
  // discarded modes above alias_rel * |K0| + alias_abs raise the aliasing flag
  double alias_rel = 1e-10;
  double alias_abs = 1e-12;
};

struct ModeValues {
  int k_max = 0;
  std::vector<CVec> modes;  // index k + k_max
  double discarded_max = 0;
  std::vector<int> aliased;  // |k| > k_max above threshold
  bool aliasing_warning = false;

  const CVec& operator[](int k) const { return modes.at(static_cast<std::size_t>(k + k_max)); }
};

// Values, Jacobians and (optionally) second derivatives of every mode at one point.
struct ModeJet {
  int k_max = 0;
  std::vector<CVec> v;
  std::vector<CMat> d;
  std::vector<HessT<Complex>> h;

  bool has(int k) const { return k >= -k_max && k <= k_max; }
  std::size_t idx(int k) const { return static_cast<std::size_t>(k + k_max); }
};

class ModeSet {
 public:
  ModeSet(PeriodicFlow flow, VectorField K, ModeOptions opts = {});

  int k_max() const { return opts_.k_max; }
  int dim() const { return K_.dim(); }
  const ModeOptions& options() const { return opts_; }
  const PeriodicFlow& flow() const { return flow_; }
  const VectorField& K() const { return K_; }

  // modes -k_max..k_max at y
  std::vector<CVec> values(const Vec& y) const;
  // with a fixed sample count
  std::vector<CVec> values(const Vec& y, int N) const;
  // sample count used at y (adaptive search, or options().samples)
  int sample_count(const Vec& y) const;
  // full diagnostics (aliasing, discarded energy)
  ModeValues extract(const Vec& y) const;
  ModeJet jet(const Vec& y, int derivatives) const;
  // samples K_{tau_j}(y), j < N
  std::vector<Vec> samples(const Vec& y, int N) const;

  ComplexVectorField field(int k) const;

 private:
  PeriodicFlow flow_;
  VectorField K_;
  ModeOptions opts_;
  using Table = std::vector<std::vector<Complex>>;  // [k + N/2][j] = exp(-i k tau_j) / N
  std::vector<std::pair<int, Table>> twiddle_;       // one table per power of two
  const Table& table(int N) const;
  // all modes |k| <= N/2 at sample count N
  std::vector<CVec> spectrum(const Vec& y, int N) const;
  bool resolved(const std::vector<CVec>& spec) const;
};

ModeValues extract_modes(const PeriodicFlow& flow, const VectorField& K, const Vec& y, int N = 128, int k_max = 3);

// Sum over k of exp(i k tau) K_k
CVec fourier_series(const std::vector<CVec>& modes, int k_max, double tau);

// Averaged terms K^[r] from the modes: the explicit bracket display.
VectorField assemble_explicit(const ModeSet& modes, int r);

// Averaged terms from the word sum with beta coefficients.
enum class WordSign {
  raw,       // (1/r) sum beta_w [..[K_i1,K_i2],..,K_ir] as written
  resolved,  // bracket orientation fixed against the integral oracle: multiplied by (-1)^{r-1}
};
VectorField assemble_words(const ModeSet& modes, int r, const BetaTable& betas, WordSign sign = WordSign::resolved);

struct OracleOptions {
  int panels = 4;
  int nodes = 32;
  FdScheme fd = FdScheme::nested();
};

// Iterated-integral formulas over the pulled-back field (no Fourier modes).
Vec integral_oracle(const PeriodicFlow& flow, const VectorField& K, int r, const Vec& y, const OracleOptions& opts = {});

VectorField geps(const VectorField& F_eps, const VectorField& Keps, double eps);

// Evaluation of K^[r] through assemble_explicit at a ModeJet (shared by assemble_explicit).
CVec explicit_term(const ModeJet& J, int r);
CVec word_term(const ModeJet& J, int r, const BetaTable& betas, WordSign sign);

enum class Route { pipeline, words, closed_form };

std::string to_string(Route r);
Route parse_route(const std::string& s);

// Ingredients of an averaging problem with constant frequency: F^eps = G/eps + K.
struct AveragingInput {
  std::string name;
  VectorField G, K;
  PeriodicFlow flow;
  ModeOptions mode_opts;
  // closed-form K^[r], r = 1.. (may be shorter than the requested order)
  std::vector<VectorField> exact_terms;
};

struct AveragedSplit {
  int order = 0;
  double eps = 0;
  Route route = Route::pipeline;
  std::vector<VectorField> K_terms;
  VectorField Keps, Geps;
};

// K^[1..n] by the requested route; closed_form falls back to pipeline when a term is missing.
std::vector<VectorField> averaged_terms(const AveragingInput& in, int n, Route route);
AveragedSplit make_split(const AveragingInput& in, int n, double eps, Route route = Route::pipeline);
AveragedSplit make_split(const AveragingInput& in, const std::vector<VectorField>& terms, double eps,
                         Route route = Route::pipeline);

// sup over points of |[Geps, Keps](y)|
double commutator_defect(const AveragedSplit& split, const std::vector<Vec>& points);

}  // namespace strobo
