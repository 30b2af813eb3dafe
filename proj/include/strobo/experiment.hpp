#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "strobo/problems.hpp"

namespace strobo {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// flat "key = value" lines, '#' starts a comment; duplicate keys are an error
KeyValues parse_key_values(const std::string& text, const std::string& origin = "config");
KeyValues read_config_file(const std::string& path);
// b overrides a, keys normalised ('-' -> '_')
KeyValues merge_settings(const KeyValues& a, const KeyValues& b);

struct ExperimentConfig {
  std::string command;
  std::string problem = "const_eb_2d";
  ParamMap params;  // every parameter of the problem, resolved
  int order = 2;    // n for diagonal, epsilon order p for reconstruct / defect
  std::vector<double> eps;
  double t_final = 1.0;
  int points = 20;
  std::vector<Vec> explicit_points;  // overrides the seeded draw when non-empty
  std::uint64_t seed = 1;
  Route route = Route::pipeline;
  std::string method = "auto";     // diagonal | reconstruct
  std::string reference = "auto";  // exact | stiff
  double rtol = 1e-10, atol = 1e-12;
  int k_max = 3, samples = 128;
  std::string word;
  std::string out;
  std::string format;  // csv | json | text; empty: command default
  int workers = 1;
  bool allow_expensive = false;
  double max_fast_periods = 1e5;

  static const std::vector<std::string>& keys();
};

// unknown keys, bad values -> ConfigError; runs before any computation
ExperimentConfig resolve_config(const std::string& command, const KeyValues& settings);
// every setting in a fixed order, values in canonical text
KeyValues resolved_entries(const ExperimentConfig& c);

// --------------------------------------------------------------- worker pool

// out[i] = fn(i); completion order never leaks into the result. First failing index rethrows.
template <class R, class Fn>
std::vector<R> parallel_map(std::size_t n, int workers, Fn&& fn) {
  std::vector<R> out(n);
  std::vector<std::exception_ptr> errs(n);
  auto work = [&](std::size_t w, std::size_t stride) {
    for (std::size_t i = w; i < n; i += stride) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  const std::size_t k = std::max<std::size_t>(1, std::min<std::size_t>(workers < 1 ? 1 : workers, n));
  if (k == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < k; ++w) pool.emplace_back(work, w, k);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

// --------------------------------------------------------------- results

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
  KeyValues summary;
};

struct SlopeFit {
  double slope = 0;
  bool defined = false;
};
// least squares of log err against log eps; undefined if fewer than two positive errors
SlopeFit fit_slope(const std::vector<double>& eps, const std::vector<double>& err);

// errors at or below this are treated as integrator floor
inline constexpr double kFloor = 1e-8;

std::string format_number(double v);

nlohmann::json cmd_beta(const ExperimentConfig& c);
nlohmann::json cmd_modes(const ExperimentConfig& c);
nlohmann::json cmd_avg_fields(const ExperimentConfig& c);
Table cmd_convergence(const ExperimentConfig& c);
Table cmd_defect(const ExperimentConfig& c);
Table cmd_reconstruct(const ExperimentConfig& c);

std::string render_table(const Table& t, const ExperimentConfig& c);
std::string render_dump(nlohmann::json doc, const ExperimentConfig& c);
// runs a command and renders it in the configured format
std::string run_command(const ExperimentConfig& c);

// 0 ok, 2 config, 3 numeric, 4 cost guard
int exit_code_for(const std::exception& e);

std::vector<Vec> evaluation_points(const Problem& p, const ExperimentConfig& c);

}  // namespace strobo
