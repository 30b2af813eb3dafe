#include <atomic>
#include <chrono>
#include <stdexcept>
#include <thread>

#include "doctest.h"
#include "strobo/experiment.hpp"

using namespace strobo;

namespace {
ExperimentConfig cfg(const std::string& cmd, const KeyValues& kv) { return resolve_config(cmd, kv); }
}  // namespace

TEST_CASE("key value documents") {
  KeyValues kv = parse_key_values("# comment\nproblem = const_eb_2d\n\neps = 0.1, 0.05 , 0.02  # trailing\n");
  REQUIRE(kv.size() == 2);
  CHECK(kv[0].first == "problem");
  CHECK(kv[1].second == "0.1, 0.05 , 0.02");
  CHECK_THROWS_AS(parse_key_values("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_key_values("just words\n"), ConfigError);
  CHECK_THROWS_AS(read_config_file("/nonexistent/strobo.cfg"), ConfigError);
}

TEST_CASE("merge normalises keys and lets the second argument win") {
  KeyValues m = merge_settings({{"t-final", "2"}, {"seed", "3"}}, {{"t_final", "5"}});
  ExperimentConfig c = cfg("convergence", m);
  CHECK(c.t_final == 5);
  CHECK(c.seed == 3);
}

TEST_CASE("expressions in numeric settings") {
  ExperimentConfig c = cfg("convergence", {{"t_final", "2*pi/4"}, {"eps", "1/10, 1/20, 2^-5"}});
  CHECK(c.t_final == doctest::Approx(kTwoPi / 4));
  REQUIRE(c.eps.size() == 3);
  CHECK(c.eps[2] == 1.0 / 32);
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(cfg("convergence", {{"frobnicate", "1"}}), ConfigError);
  CHECK_THROWS_AS(cfg("nonsense", {}), ConfigError);
  CHECK_THROWS_AS(cfg("convergence", {{"eps", "0.1, 0.05"}}), ConfigError);
  CHECK_THROWS_AS(cfg("convergence", {{"eps", "0.1, -1, 0.2"}}), ConfigError);
  CHECK_THROWS_AS(cfg("convergence", {{"format", "text"}}), ConfigError);
  CHECK_THROWS_AS(cfg("modes", {{"format", "csv"}}), ConfigError);
  CHECK_THROWS_AS(cfg("beta", {}), ConfigError);
  CHECK_THROWS_AS(cfg("beta", {{"word", "1,x"}}), ConfigError);
  CHECK_THROWS_AS(cfg("convergence", {{"workers", "0"}}), ConfigError);
  CHECK_THROWS_AS(cfg("convergence", {{"samples", "100"}}), ConfigError);
  CHECK_THROWS_AS(cfg("convergence", {{"points", "1,2"}}), ConfigError);
  CHECK_THROWS_AS(cfg("convergence", {{"problem", "vlasov_varying_b_2d"}, {"method", "diagonal"}}), ConfigError);
  CHECK_THROWS_AS(cfg("convergence", {{"problem", "vlasov_3d"}, {"reference", "exact"}}), ConfigError);
  // problem parameters are keys too
  CHECK_NOTHROW(cfg("convergence", {{"problem", "vlasov_const_b_2d"}, {"U", "x1^2"}}));
  CHECK_THROWS_AS(cfg("convergence", {{"U", "x1^2"}}), ConfigError);
}

TEST_CASE("defaults resolve") {
  ExperimentConfig c = cfg("convergence", {});
  CHECK(c.method == "diagonal");
  CHECK(c.order == 2);
  CHECK(c.reference == "exact");
  CHECK(c.format == "csv");
  CHECK(c.eps.size() >= 3);
  ExperimentConfig r = cfg("convergence", {{"problem", "vlasov_varying_b_2d"}});
  CHECK(r.method == "reconstruct");
  CHECK(r.order == 1);
  CHECK(r.reference == "stiff");
  ExperimentConfig p = cfg("reconstruct", {{"points", "0.1,0.2,0.3,0.4; 0,0,0,0"}});
  CHECK(p.explicit_points.size() == 2);
}

TEST_CASE("worker pool keeps index order and propagates the first failure") {
  auto out = parallel_map<int>(37, 4, [](std::size_t i) {
    std::this_thread::sleep_for(std::chrono::microseconds((37 - i) * 20));
    return static_cast<int>(i * i);
  });
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i * i));
  std::atomic<int> calls{0};
  try {
    parallel_map<int>(10, 3, [&](std::size_t i) -> int {
      ++calls;
      if (i == 7) throw std::runtime_error("seven");
      if (i == 4) throw std::runtime_error("four");
      return 0;
    });
    FAIL("expected a throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "four");
  }
  CHECK(calls == 10);
  CHECK(parallel_map<int>(0, 4, [](std::size_t) { return 1; }).empty());
}

TEST_CASE("slope fit") {
  std::vector<double> eps{0.1, 0.05, 0.025}, err;
  for (double e : eps) err.push_back(3 * e * e);
  SlopeFit f = fit_slope(eps, err);
  CHECK(f.defined);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK_FALSE(fit_slope(eps, {0.0, 0.0, 1e-3}).defined);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {1e-12, 0.1, 1.0 / 3, -2.5e300, 0.0}) CHECK(std::stod(format_number(v)) == v);
  CHECK(format_number(1e-12) == "1e-12");
}

TEST_CASE("beta command") {
  ExperimentConfig c = cfg("beta", {{"word", "1,-1"}, {"format", "json"}});
  nlohmann::json b = cmd_beta(c);
  CHECK(b["re"] == "0");
  CHECK(b["im"] == "-1");
  std::string out = run_command(c);
  CHECK(out.find("\"version\"") != std::string::npos);
  CHECK(out.find("\"config\"") != std::string::npos);
}

TEST_CASE("tables embed config and version and are reproducible") {
  KeyValues kv{{"eps", "0.1,0.05,0.025"}, {"points", "6"}, {"order", "1"}, {"seed", "5"}};
  ExperimentConfig one = cfg("convergence", kv);
  kv.emplace_back("workers", "3");
  ExperimentConfig three = cfg("convergence", kv);
  std::string a = run_command(one), b = run_command(one), c3 = run_command(three);
  CHECK(a == b);
  CHECK(a.rfind("# strobo " + std::string(kVersion), 0) == 0);
  CHECK(a.find("# config seed = 5") != std::string::npos);
  CHECK(a.find("# summary slope_max") != std::string::npos);
  // rows do not depend on the worker count
  auto rows = [](const std::string& s) { return s.substr(s.find("\neps,")); };
  CHECK(rows(a) == rows(c3));
  Table t = cmd_convergence(one);
  CHECK(t.rows.size() == 3);
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(CostGuardError("x")) == 4);
  CHECK(exit_code_for(NumericError("x")) == 3);
  CHECK(exit_code_for(std::runtime_error("x")) == 3);
  ExperimentConfig c =
      cfg("convergence", {{"problem", "vlasov_varying_b_2d"}, {"eps", "1e-3,1e-5,1e-7"}, {"points", "1"}});
  try {
    run_command(c);
    FAIL("expected the cost guard");
  } catch (const std::exception& e) {
    CHECK(exit_code_for(e) == 4);
  }
}
