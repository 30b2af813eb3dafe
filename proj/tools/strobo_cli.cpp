#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "strobo/experiment.hpp"

namespace {

struct Flags {
  std::string config;
  std::map<std::string, std::string> values;  // only flags actually given
  std::vector<std::string> sets;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "flat key = value file; flags override it");
  for (const char* name : {"problem", "order", "eps", "t-final", "points", "seed", "out", "format", "workers", "route",
                           "method", "reference", "rtol", "atol", "k-max", "samples"}) {
    std::string key = name;
    sub->add_option_function<std::string>(
        "--" + key, [&f, key](const std::string& v) { f.values[key] = v; }, "setting '" + key + "'");
  }
  sub->add_option("--set", f.sets, "extra key=value settings (problem parameters such as U, b, B1)");
  sub->add_flag_function(
      "--allow-expensive", [&f](std::int64_t) { f.values["allow-expensive"] = "true"; },
      "lift the stiff reference cost guard");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stroboscopic averaging experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", strobo::kVersion);

  Flags flags;
  std::string word_pos;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"beta", "exact beta coefficient of a word"},
      {"modes", "Fourier modes of the pulled-back field at points (json)"},
      {"avg-fields", "averaged terms K^[r] at points (json)"},
      {"convergence", "error against the reference over eps, with slopes (csv)"},
      {"defect", "commutator defect over eps, with slopes (csv)"},
      {"reconstruct", "f through (S, h, tau) against the reference (csv)"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, flags);
    if (name == "beta") {
      sub->add_option("WORD", word_pos, "word, e.g. 1,-1");
      sub->add_option_function<std::string>(
          "--word", [&flags](const std::string& v) { flags.values["word"] = v; }, "word, e.g. 1,-1");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  if (!word_pos.empty() && !flags.values.count("word")) flags.values["word"] = word_pos;

  strobo::ExperimentConfig cfg;
  try {
    strobo::KeyValues file;
    if (!flags.config.empty()) file = strobo::read_config_file(flags.config);
    strobo::KeyValues cli;
    for (const auto& s : flags.sets) {
      auto eq = s.find('=');
      if (eq == std::string::npos) throw strobo::ConfigError("--set expects key=value, got '" + s + "'");
      cli.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [k, v] : flags.values) cli.emplace_back(k, v);
    cfg = strobo::resolve_config(command, strobo::merge_settings(file, cli));
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return strobo::exit_code_for(e) == 4 ? 4 : 2;
  }

  std::string text;
  try {
    text = strobo::run_command(cfg);
  } catch (const std::exception& e) {
    int code = strobo::exit_code_for(e);
    std::cerr << (code == 4 ? "refused: " : code == 2 ? "config error: " : "numeric failure: ") << e.what() << "\n";
    return code;
  }
  if (cfg.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(cfg.out, std::ios::binary);
    if (!(f << text)) {
      std::cerr << "cannot write '" << cfg.out << "'\n";
      return 3;
    }
  }
  return 0;
}
