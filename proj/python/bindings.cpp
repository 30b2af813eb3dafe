#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "strobo/experiment.hpp"
#include "strobo/phase.hpp"
#include "strobo/transport.hpp"
#include "strobo/words.hpp"

namespace py = pybind11;
using namespace strobo;

namespace {

using Points = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<Vec> rows_of(const Points& m, int dim) {
  if (m.cols() != dim)
    throw ConfigError("points need " + std::to_string(dim) + " columns, got " + std::to_string(m.cols()));
  std::vector<Vec> out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).transpose());
  return out;
}

Points stack(const std::vector<Vec>& v, int dim) {
  Points m(v.size(), dim);
  for (std::size_t i = 0; i < v.size(); ++i) m.row(i) = v[i].transpose();
  return m;
}

KeyValues settings_of(const std::map<std::string, std::string>& s) { return KeyValues(s.begin(), s.end()); }

ExperimentConfig resolved(const std::string& command, const std::map<std::string, std::string>& s) {
  return resolve_config(command, merge_settings({}, settings_of(s)));
}

AveragedSplit split_for(const Problem& p, const AveragingInput& in, int n, double eps, const std::string& route) {
  return make_split(in, averaged_terms(in, n, parse_route(route)), eps, parse_route(route));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "stroboscopic averaging for highly oscillatory transport";
  m.attr("__version__") = kVersion;

  auto base = py::register_exception<Error>(m, "StroboError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<CostGuardError>(m, "CostGuardError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<UsageError>(m, "UsageError", base.ptr());

  m.def("problem_names", &problem_names);
  m.def("default_parameters", &default_parameters, py::arg("name"));

  m.def(
      "beta",
      [](const std::string& word) {
        GaussianRational b = beta_exact(parse_word(word));
        std::ostringstream re, im;
        re << b.re;
        im << b.im;
        return py::make_tuple(re.str(), im.str(), b.to_complex());
      },
      py::arg("word"), "exact beta of a word such as '1,-1': (re, im, complex)");

  m.def(
      "resolve",
      [](const std::string& command, const std::map<std::string, std::string>& s) {
        return resolved_entries(resolved(command, s));
      },
      py::arg("command"), py::arg("settings") = std::map<std::string, std::string>{});
  m.def(
      "run",
      [](const std::string& command, const std::map<std::string, std::string>& s) {
        ExperimentConfig c = resolved(command, s);
        py::gil_scoped_release nogil;
        return run_command(c);
      },
      py::arg("command"), py::arg("settings") = std::map<std::string, std::string>{},
      "run a CLI command; returns the rendered text");

  m.def(
      "sample_points",
      [](const std::string& problem, int count, std::uint64_t seed, const ParamMap& params) {
        Problem p = make_problem(problem, params);
        return stack(p.sample_points(count, seed), p.dim_y);
      },
      py::arg("problem"), py::arg("count"), py::arg("seed") = 1, py::arg("params") = ParamMap{});

  m.def(
      "averaged_fields",
      [](const std::string& problem, int order, const Points& pts, const ParamMap& params, const std::string& route) {
        Problem p = make_problem(problem, params);
        AveragingInput in = p.averaging_input();
        auto ys = rows_of(pts, p.dim_y);
        auto terms = averaged_terms(in, order, parse_route(route));
        std::vector<Points> out;
        for (const auto& K : terms) {
          std::vector<Vec> v;
          for (const auto& y : ys) v.push_back(K(p.averaging_point(y, 0.0)));
          out.push_back(stack(v, p.averaging_dim()));
        }
        return out;
      },
      py::arg("problem"), py::arg("order"), py::arg("points"), py::arg("params") = ParamMap{},
      py::arg("route") = "pipeline", "K^[1..order] at the averaging points of each row");

  m.def(
      "diagonal_eval",
      [](const std::string& problem, int order, double eps, double t, const Points& pts, const ParamMap& params,
         const std::string& route) {
        Problem p = make_problem(problem, params);
        if (!p.constant_frequency) throw ConfigError("diagonal evaluation needs a constant-frequency problem");
        auto ys = rows_of(pts, p.dim_y);
        AveragedSplit s = split_for(p, p.averaging_input(), order, eps, route);
        Eigen::VectorXd out(ys.size());
        for (std::size_t i = 0; i < ys.size(); ++i) out[i] = diagonal_eval(s, p.f0, t, ys[i]);
        return out;
      },
      py::arg("problem"), py::arg("order"), py::arg("eps"), py::arg("t"), py::arg("points"),
      py::arg("params") = ParamMap{}, py::arg("route") = "pipeline");

  m.def(
      "reconstruct",
      [](const std::string& problem, int order, double eps, double t, const Points& pts, const ParamMap& params,
         const std::string& route) {
        Problem p = make_problem(problem, params);
        auto ys = rows_of(pts, p.dim_y);
        AveragedSplit s = split_for(p, p.phase_input(), order + 1, eps, route);
        CommutingPair pair = commuting_pair(s, ys);
        const auto n = static_cast<Eigen::Index>(ys.size());
        Eigen::VectorXd f(n), tau(n), S(n), res(n);
        for (Eigen::Index i = 0; i < n; ++i) {
          Reconstruction r = reconstruct(pair, p.f0, t, ys[i], eps);
          f[i] = r.f;
          tau[i] = r.tau;
          S[i] = r.S;
          res[i] = r.residual;
        }
        py::dict d;
        d["f"] = f;
        d["tau"] = tau;
        d["S"] = S;
        d["residual"] = res;
        return d;
      },
      py::arg("problem"), py::arg("order"), py::arg("eps"), py::arg("t"), py::arg("points"),
      py::arg("params") = ParamMap{}, py::arg("route") = "pipeline",
      "f through the phase S, profile h and root tau at epsilon order 'order'");

  m.def(
      "reference",
      [](const std::string& problem, double eps, double t, const Points& pts, const ParamMap& params,
         bool allow_expensive) {
        Problem p = make_problem(problem, params);
        auto ys = rows_of(pts, p.dim_y);
        ReferenceOptions o;
        o.allow_expensive = allow_expensive;
        Eigen::VectorXd out(ys.size());
        for (std::size_t i = 0; i < ys.size(); ++i)
          out[i] = p.exact_solution ? p.exact_solution(t, ys[i], eps) : solve_reference(p, eps, t, ys[i], o);
        return out;
      },
      py::arg("problem"), py::arg("eps"), py::arg("t"), py::arg("points"), py::arg("params") = ParamMap{},
      py::arg("allow_expensive") = false, "exact solution when known, stiff integration otherwise");
}
