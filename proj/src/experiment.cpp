#include "strobo/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace strobo {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string normalise_key(std::string k) {
  k = trim(k);
  std::replace(k.begin(), k.end(), '-', '_');
  return k;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

// plain numbers, or constant expressions such as 10^-1.5
double parse_number(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) throw ConfigError(key + ": empty value");
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  try {
    return Expr::parse(s, {}).eval(Vec());
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

long parse_int(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (s.empty() || pos != s.size()) throw ConfigError(key + ": expected an integer, got '" + text + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::string join_numbers(const std::vector<double>& v, const char* sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + format_number(v[i]);
  return out;
}

std::string points_text(const std::vector<Vec>& pts) {
  std::string out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out += i ? ";" : "";
    out += join_numbers(std::vector<double>(pts[i].data(), pts[i].data() + pts[i].size()));
  }
  return out;
}

nlohmann::json vec_json(const Vec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

nlohmann::json cvec_json(const CVec& v) {
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) {
    re.push_back(v[i].real());
    im.push_back(v[i].imag());
  }
  return {{"re", re}, {"im", im}};
}

const std::set<std::string>& command_names() {
  static const std::set<std::string> n{"beta", "modes", "avg-fields", "convergence", "defect", "reconstruct"};
  return n;
}

bool is_table(const std::string& command) {
  return command == "convergence" || command == "defect" || command == "reconstruct";
}

ModeOptions mode_options(const ExperimentConfig& c) {
  ModeOptions m;
  m.k_max = c.k_max;
  m.samples = c.samples;
  m.min_samples = std::min(m.min_samples, c.samples);
  return m;
}

IntegratorOptions integ_options(const ExperimentConfig& c) {
  IntegratorOptions o;
  o.rel_tol = c.rtol;
  o.abs_tol = c.atol;
  return o;
}

ReferenceOptions reference_options(const ExperimentConfig& c) {
  ReferenceOptions r;
  r.allow_expensive = c.allow_expensive;
  r.max_fast_periods = c.max_fast_periods;
  return r;
}

std::string resolved_method(const ExperimentConfig& c, const Problem& p) {
  if (c.method != "auto") return c.method;
  return p.constant_frequency ? "diagonal" : "reconstruct";
}

std::string resolved_reference(const ExperimentConfig& c, const Problem& p) {
  if (c.reference != "auto") return c.reference;
  return p.exact_solution ? "exact" : "stiff";
}

}  // namespace

// ------------------------------------------------------------------ settings

KeyValues parse_key_values(const std::string& text, const std::string& origin) {
  KeyValues out;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = normalise_key(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (!seen.insert(key).second) throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    out.emplace_back(key, value);
  }
  return out;
}

KeyValues read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_key_values(ss.str(), path);
}

KeyValues merge_settings(const KeyValues& a, const KeyValues& b) {
  KeyValues out;
  for (const auto& [k, v] : a) out.emplace_back(normalise_key(k), v);
  for (const auto& [k0, v] : b) {
    std::string k = normalise_key(k0);
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) { return e.first == k; });
    if (it != out.end())
      it->second = v;
    else
      out.emplace_back(k, v);
  }
  return out;
}

const std::vector<std::string>& ExperimentConfig::keys() {
  static const std::vector<std::string> k{"problem", "order",  "eps",     "t_final",         "points",
                                          "seed",    "route",  "method",  "reference",       "rtol",
                                          "atol",    "k_max",  "samples", "word",            "out",
                                          "format",  "workers", "allow_expensive", "max_fast_periods"};
  return k;
}

ExperimentConfig resolve_config(const std::string& command, const KeyValues& settings) {
  if (!command_names().count(command)) throw ConfigError("unknown command '" + command + "'");
  ExperimentConfig c;
  c.command = command;
  const auto& known = ExperimentConfig::keys();
  std::map<std::string, std::string> top;
  ParamMap problem_params;
  for (const auto& [k0, v] : settings) {
    const std::string k = normalise_key(k0);
    if (std::find(known.begin(), known.end(), k) != known.end())
      top[k] = v;
    else
      problem_params[k] = v;  // checked against the problem below
  }
  if (top.count("problem")) c.problem = trim(top["problem"]);
  ParamMap defaults = default_parameters(c.problem);  // unknown problem -> ConfigError
  for (const auto& [k, v] : problem_params)
    if (!defaults.count(k)) throw ConfigError("unknown key '" + k + "' (not a setting nor a parameter of '" + c.problem + "')");
  c.params = defaults;
  for (const auto& [k, v] : problem_params) c.params[k] = v;

  int order = -1;
  if (top.count("order")) order = static_cast<int>(parse_int("order", top["order"]));
  if (top.count("eps") && trim(top["eps"]) != "default") {
    for (const auto& s : split(top["eps"], ',')) {
      double e = parse_number("eps", s);
      if (!(e > 0) || !std::isfinite(e)) throw ConfigError("eps values must be positive");
      c.eps.push_back(e);
    }
  }
  if (top.count("t_final")) c.t_final = parse_number("t_final", top["t_final"]);
  if (!(c.t_final >= 0) || !std::isfinite(c.t_final)) throw ConfigError("t_final must be finite and >= 0");
  if (top.count("points")) {
    const std::string s = trim(top["points"]);
    bool count = !s.empty() && std::all_of(s.begin(), s.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); });
    if (count) {
      c.points = static_cast<int>(parse_int("points", s));
    } else {
      for (const auto& row : split(s, ';')) {
        std::vector<double> xs;
        for (const auto& t : split(row, ',')) xs.push_back(parse_number("points", t));
        if (xs.empty() || static_cast<int>(xs.size()) > kMaxDim) throw ConfigError("points: bad coordinate list");
        c.explicit_points.push_back(Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size())));
      }
      c.points = static_cast<int>(c.explicit_points.size());
    }
  }
  if (c.points < 1 || c.points > 100000) throw ConfigError("points must be between 1 and 100000");
  if (top.count("seed")) {
    long s = parse_int("seed", top["seed"]);
    if (s < 0) throw ConfigError("seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (top.count("route")) {
    try {
      c.route = parse_route(trim(top["route"]));
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  if (top.count("method")) c.method = trim(top["method"]);
  if (c.method != "auto" && c.method != "diagonal" && c.method != "reconstruct")
    throw ConfigError("method must be auto, diagonal or reconstruct");
  if (top.count("reference")) c.reference = trim(top["reference"]);
  if (c.reference != "auto" && c.reference != "exact" && c.reference != "stiff")
    throw ConfigError("reference must be auto, exact or stiff");
  if (top.count("rtol")) c.rtol = parse_number("rtol", top["rtol"]);
  if (top.count("atol")) c.atol = parse_number("atol", top["atol"]);
  if (!(c.rtol > 0) || !(c.atol > 0)) throw ConfigError("tolerances must be positive");
  if (top.count("k_max")) c.k_max = static_cast<int>(parse_int("k_max", top["k_max"]));
  if (top.count("samples")) c.samples = static_cast<int>(parse_int("samples", top["samples"]));
  if (c.k_max < 1 || c.k_max > 16) throw ConfigError("k_max must be between 1 and 16");
  if (c.samples < 4 * c.k_max + 4 || (c.samples & (c.samples - 1)) != 0 || c.samples > 4096)
    throw ConfigError("samples must be a power of two >= 4 k_max + 4 (and <= 4096)");
  if (top.count("word")) c.word = trim(top["word"]);
  if (top.count("out")) c.out = trim(top["out"]);
  if (top.count("format")) c.format = trim(top["format"]);
  if (top.count("workers")) c.workers = static_cast<int>(parse_int("workers", top["workers"]));
  if (c.workers < 1 || c.workers > 256) throw ConfigError("workers must be between 1 and 256");
  if (top.count("allow_expensive")) c.allow_expensive = parse_bool("allow_expensive", top["allow_expensive"]);
  if (top.count("max_fast_periods")) c.max_fast_periods = parse_number("max_fast_periods", top["max_fast_periods"]);
  if (!(c.max_fast_periods > 0)) throw ConfigError("max_fast_periods must be positive");

  // command specific
  if (c.format.empty()) c.format = command == "beta" ? "text" : is_table(command) ? "csv" : "json";
  if (command == "beta") {
    if (c.format != "text" && c.format != "json") throw ConfigError("beta: format must be text or json");
    if (c.word.empty()) throw ConfigError("beta: a word is required (e.g. --word 1,-1)");
    try {
      parse_word(c.word);
    } catch (const Error& e) {
      throw ConfigError(std::string("beta: ") + e.what());
    }
  } else if (is_table(command)) {
    if (c.format != "csv" && c.format != "json") throw ConfigError(command + ": format must be csv or json");
  } else if (c.format != "json") {
    throw ConfigError(command + ": dumps are written as json");
  }

  if (order < 0 && command != "convergence") order = (command == "reconstruct" || command == "defect") ? 1 : 2;
  c.order = order;
  if (command == "avg-fields" && (order < 1 || order > 3)) throw ConfigError("avg-fields: order must be 1..3");
  if ((command == "reconstruct" || command == "defect") && (order < 0 || order > 2))
    throw ConfigError(command + ": epsilon order must be 0..2");
  if ((command == "convergence" || command == "defect") && !c.eps.empty() && c.eps.size() < 3)
    throw ConfigError(command + ": needs at least three eps values");

  // problem construction validates the parameters and expressions
  Problem p;
  try {
    p = make_problem(c.problem, c.params);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("problem '") + c.problem + "': " + e.what());
  }
  c.params = p.parameters;
  for (const auto& [k, v] : defaults)
    if (!c.params.count(k)) c.params[k] = problem_params.count(k) ? problem_params[k] : v;
  for (const auto& y : c.explicit_points)
    if (y.size() != p.dim_y)
      throw ConfigError("points: problem '" + c.problem + "' needs " + std::to_string(p.dim_y) + " coordinates");
  if (command == "convergence") {
    if (c.method == "auto") c.method = resolved_method(c, p);
    if (c.order < 0) c.order = c.method == "diagonal" ? 2 : 1;
    if (c.method == "diagonal") {
      if (!p.constant_frequency) throw ConfigError("convergence: diagonal evaluation needs a constant-frequency problem");
      if (c.order < 1 || c.order > 3) throw ConfigError("convergence: diagonal order must be 1..3");
    } else if (c.order < 0 || c.order > 2) {
      throw ConfigError("convergence: reconstruction epsilon order must be 0..2");
    }
    if (c.reference == "auto") c.reference = resolved_reference(c, p);
    if (c.reference == "exact" && !p.exact_solution)
      throw ConfigError("problem '" + c.problem + "' has no exact solution; use reference = stiff");
  }
  if (command == "reconstruct" && c.reference == "auto") c.reference = resolved_reference(c, p);
  if (command == "reconstruct" && c.reference == "exact" && !p.exact_solution)
    throw ConfigError("problem '" + c.problem + "' has no exact solution; use reference = stiff");
  if (c.eps.empty() && command != "beta") c.eps = p.eps_default;
  return c;
}

KeyValues resolved_entries(const ExperimentConfig& c) {
  KeyValues e;
  e.emplace_back("command", c.command);
  e.emplace_back("problem", c.problem);
  for (const auto& [k, v] : c.params) e.emplace_back(k, v);
  e.emplace_back("order", std::to_string(c.order));
  e.emplace_back("eps", join_numbers(c.eps));
  e.emplace_back("t_final", format_number(c.t_final));
  e.emplace_back("points", c.explicit_points.empty() ? std::to_string(c.points) : points_text(c.explicit_points));
  e.emplace_back("seed", std::to_string(c.seed));
  e.emplace_back("route", to_string(c.route));
  e.emplace_back("method", c.method);
  e.emplace_back("reference", c.reference);
  e.emplace_back("rtol", format_number(c.rtol));
  e.emplace_back("atol", format_number(c.atol));
  e.emplace_back("k_max", std::to_string(c.k_max));
  e.emplace_back("samples", std::to_string(c.samples));
  e.emplace_back("word", c.word);
  e.emplace_back("format", c.format);
  e.emplace_back("workers", std::to_string(c.workers));
  e.emplace_back("allow_expensive", c.allow_expensive ? "true" : "false");
  e.emplace_back("max_fast_periods", format_number(c.max_fast_periods));
  return e;
}

// ------------------------------------------------------------------ helpers

std::string format_number(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

SlopeFit fit_slope(const std::vector<double>& eps, const std::vector<double>& err) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < eps.size() && i < err.size(); ++i) {
    if (!(err[i] > 0) || !(eps[i] > 0)) continue;
    double x = std::log(eps[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  SlopeFit f;
  double den = n * sxx - sx * sx;
  if (n < 2 || !(std::abs(den) > 0)) return f;
  f.slope = (n * sxy - sx * sy) / den;
  f.defined = true;
  return f;
}

std::vector<Vec> evaluation_points(const Problem& p, const ExperimentConfig& c) {
  if (!c.explicit_points.empty()) return c.explicit_points;
  return p.sample_points(c.points, c.seed);
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const CostGuardError*>(&e)) return 4;
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  return 3;
}

// ------------------------------------------------------------------ commands

nlohmann::json cmd_beta(const ExperimentConfig& c) {
  Word w = parse_word(c.word);
  GaussianRational b = beta_exact(w);
  std::ostringstream re, im;
  re << b.re;
  im << b.im;
  return {{"word", word_to_string(w)}, {"value", b.to_string()}, {"re", re.str()}, {"im", im.str()},
          {"re_float", b.to_complex().real()}, {"im_float", b.to_complex().imag()}};
}

nlohmann::json cmd_modes(const ExperimentConfig& c) {
  Problem p = make_problem(c.problem, c.params);
  AveragingInput in = p.averaging_input(mode_options(c));
  ModeSet ms(in.flow, in.K, in.mode_opts);
  auto pts = evaluation_points(p, c);
  auto entries = parallel_map<nlohmann::json>(pts.size(), c.workers, [&](std::size_t i) {
    Vec Y = p.averaging_point(pts[i], 0.0);
    ModeValues mv = ms.extract(Y);
    nlohmann::json modes = nlohmann::json::array();
    for (int k = -mv.k_max; k <= mv.k_max; ++k) {
      nlohmann::json m = cvec_json(mv[k]);
      m["k"] = k;
      modes.push_back(m);
    }
    return nlohmann::json{{"index", i},
                          {"y", vec_json(pts[i])},
                          {"averaging_point", vec_json(Y)},
                          {"samples", ms.sample_count(Y)},
                          {"discarded_max", mv.discarded_max},
                          {"aliasing_warning", mv.aliasing_warning},
                          {"modes", modes}};
  });
  return {{"space", p.constant_frequency ? "y" : "(t, y)"}, {"k_max", c.k_max}, {"points", entries}};
}

nlohmann::json cmd_avg_fields(const ExperimentConfig& c) {
  Problem p = make_problem(c.problem, c.params);
  AveragingInput in = p.averaging_input(mode_options(c));
  auto terms = averaged_terms(in, c.order, c.route);
  auto pts = evaluation_points(p, c);
  auto entries = parallel_map<nlohmann::json>(pts.size(), c.workers, [&](std::size_t i) {
    Vec Y = p.averaging_point(pts[i], 0.0);
    nlohmann::json ts = nlohmann::json::array();
    for (int r = 1; r <= c.order; ++r) {
      Vec v = terms[r - 1](Y);
      nlohmann::json t{{"r", r}, {"value", vec_json(v)}};
      if (static_cast<int>(in.exact_terms.size()) >= r && in.exact_terms[r - 1].valid()) {
        Vec e = in.exact_terms[r - 1](Y);
        t["closed_form"] = vec_json(e);
        t["deviation"] = (v - e).norm();
      }
      ts.push_back(t);
    }
    return nlohmann::json{{"index", i}, {"y", vec_json(pts[i])}, {"averaging_point", vec_json(Y)}, {"terms", ts}};
  });
  return {{"space", p.constant_frequency ? "y" : "(t, y)"}, {"points", entries}};
}

namespace {

struct PointResult {
  double approx = 0, ref = 0;
  Reconstruction rec;
};

// f at every point for one eps, by the configured method
std::vector<PointResult> evaluate(const ExperimentConfig& c, const Problem& p, const AveragingInput& in,
                                  const std::vector<VectorField>& terms, double eps, const std::vector<Vec>& pts,
                                  bool want_ref) {
  const ReferenceOptions ropts = reference_options(c);
  std::function<PointResult(std::size_t)> fn;
  AveragedSplit split = make_split(in, terms, eps, c.route);
  std::optional<CommutingPair> pair;
  if (c.method == "diagonal") {
    SplitOptions so;
    so.integ = integ_options(c);
    fn = [&, split, so](std::size_t i) {
      PointResult r;
      r.approx = diagonal_eval(split, p.f0, c.t_final, pts[i], so);
      return r;
    };
  } else {
    pair = commuting_pair(split, pts);
    PhaseOptions po;
    po.integ = integ_options(c);
    fn = [&, po](std::size_t i) {
      PointResult r;
      r.rec = reconstruct(*pair, p.f0, c.t_final, pts[i], eps, po);
      r.approx = r.rec.f;
      return r;
    };
  }
  return parallel_map<PointResult>(pts.size(), c.workers, [&](std::size_t i) {
    PointResult r = fn(i);
    if (want_ref)
      r.ref = c.reference == "exact" ? p.exact_solution(c.t_final, pts[i], eps)
                                     : solve_reference(p, eps, c.t_final, pts[i], ropts);
    return r;
  });
}

void guard_reference(const ExperimentConfig& c) {
  if (c.reference != "stiff") return;
  for (double e : c.eps) check_reference_cost(e, c.t_final, reference_options(c));
}

AveragingInput method_input(const ExperimentConfig& c, const Problem& p) {
  return c.method == "diagonal" ? p.averaging_input(mode_options(c)) : p.phase_input(mode_options(c));
}

int method_terms(const ExperimentConfig& c) { return c.method == "diagonal" ? c.order : c.order + 1; }

void add_slope(KeyValues& s, const std::string& name, const std::vector<double>& eps, const std::vector<double>& err) {
  const bool floor = std::all_of(err.begin(), err.end(), [](double e) { return e <= kFloor; });
  SlopeFit f = fit_slope(eps, err);
  s.emplace_back(name, floor ? "exact" : f.defined ? format_number(f.slope) : "undefined");
  s.emplace_back(name + "_fit", f.defined ? format_number(f.slope) : "undefined");
}

}  // namespace

Table cmd_convergence(const ExperimentConfig& c) {
  Problem p = make_problem(c.problem, c.params);
  guard_reference(c);
  auto pts = evaluation_points(p, c);
  AveragingInput in = method_input(c, p);
  auto terms = averaged_terms(in, method_terms(c), c.route);
  Table t;
  t.columns = {"eps", "max_err", "rms_err"};
  std::vector<double> maxe, rmse;
  for (double eps : c.eps) {
    auto res = evaluate(c, p, in, terms, eps, pts, true);
    double m = 0, s = 0;
    for (const auto& r : res) {
      double e = std::abs(r.approx - r.ref);
      m = std::max(m, e);
      s += e * e;
    }
    s = std::sqrt(s / static_cast<double>(res.size()));
    maxe.push_back(m);
    rmse.push_back(s);
    t.rows.push_back({eps, m, s});
  }
  add_slope(t.summary, "slope_max", c.eps, maxe);
  add_slope(t.summary, "slope_rms", c.eps, rmse);
  return t;
}

Table cmd_defect(const ExperimentConfig& c) {
  Problem p = make_problem(c.problem, c.params);
  auto pts = evaluation_points(p, c);
  AveragingInput in = p.phase_input(mode_options(c));
  auto terms = averaged_terms(in, c.order + 1, c.route);
  Table t;
  t.columns = {"eps", "bracket_max", "lie_max"};
  std::vector<double> br, li;
  for (double eps : c.eps) {
    AveragedSplit split = make_split(in, terms, eps, c.route);
    CommutingPair pair = commuting_pair(split, pts);
    auto d = parallel_map<PairDefect>(pts.size(), c.workers, [&](std::size_t i) { return pair_defect(pair, pts[i]); });
    double b = 0, l = 0;
    for (const auto& x : d) {
      b = std::max(b, x.bracket);
      l = std::max(l, x.lie);
    }
    br.push_back(b);
    li.push_back(l);
    t.rows.push_back({eps, b, l});
  }
  add_slope(t.summary, "slope_bracket", c.eps, br);
  add_slope(t.summary, "slope_lie", c.eps, li);
  return t;
}

Table cmd_reconstruct(const ExperimentConfig& c) {
  ExperimentConfig cc = c;
  cc.method = "reconstruct";
  Problem p = make_problem(cc.problem, cc.params);
  guard_reference(cc);
  auto pts = evaluation_points(p, cc);
  AveragingInput in = p.phase_input(mode_options(cc));
  auto terms = averaged_terms(in, cc.order + 1, cc.route);
  Table t;
  t.columns = {"eps", "point", "tau", "S", "residual", "f", "f_ref", "abs_err"};
  std::vector<double> maxe;
  for (double eps : cc.eps) {
    auto res = evaluate(cc, p, in, terms, eps, pts, true);
    double m = 0;
    for (std::size_t i = 0; i < res.size(); ++i) {
      double e = std::abs(res[i].approx - res[i].ref);
      m = std::max(m, e);
      t.rows.push_back({eps, static_cast<int>(i), res[i].rec.tau, res[i].rec.S, res[i].rec.residual, res[i].approx,
                        res[i].ref, e});
    }
    maxe.push_back(m);
  }
  if (cc.eps.size() >= 2) add_slope(t.summary, "slope_max", cc.eps, maxe);
  return t;
}

// ------------------------------------------------------------------ rendering

namespace {

std::string cell_text(const nlohmann::json& v) {
  if (v.is_number_float()) return format_number(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

nlohmann::json config_json(const ExperimentConfig& c) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : resolved_entries(c)) j[k] = v;
  return j;
}

}  // namespace

std::string render_table(const Table& t, const ExperimentConfig& c) {
  if (c.format == "json") {
    nlohmann::json doc{{"version", kVersion}, {"command", c.command}, {"config", config_json(c)}};
    nlohmann::json s = nlohmann::json::object();
    for (const auto& [k, v] : t.summary) s[k] = v;
    doc["summary"] = s;
    doc["columns"] = t.columns;
    doc["rows"] = t.rows;
    return doc.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "# strobo " << kVersion << "\n";
  for (const auto& [k, v] : resolved_entries(c)) os << "# config " << k << " = " << v << "\n";
  for (const auto& [k, v] : t.summary) os << "# summary " << k << " = " << v << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
    os << "\n";
  }
  return os.str();
}

std::string render_dump(nlohmann::json doc, const ExperimentConfig& c) {
  doc["version"] = kVersion;
  doc["command"] = c.command;
  doc["config"] = config_json(c);
  return doc.dump(2) + "\n";
}

std::string run_command(const ExperimentConfig& c) {
  if (c.command == "beta") {
    nlohmann::json b = cmd_beta(c);
    if (c.format == "text") return b["value"].get<std::string>() + "\n";
    return render_dump(b, c);
  }
  if (c.command == "modes") return render_dump(cmd_modes(c), c);
  if (c.command == "avg-fields") return render_dump(cmd_avg_fields(c), c);
  if (c.command == "convergence") return render_table(cmd_convergence(c), c);
  if (c.command == "defect") return render_table(cmd_defect(c), c);
  if (c.command == "reconstruct") return render_table(cmd_reconstruct(c), c);
  throw ConfigError("unknown command '" + c.command + "'");
}

}  // namespace strobo
