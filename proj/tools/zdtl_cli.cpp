// zdtl: command-line runner for the experiments. Settings come from a flat
// key=value file (--config) and from flags; flags win.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "zdtl/experiment.hpp"

namespace ex = zdtl::experiment;

namespace {

const std::map<std::string, std::string>& key_help() {
  static const std::map<std::string, std::string> h = {
      {"d", "rank of the action (1 or 2)"},
      {"m", "torus dimension"},
      {"alpha", "rotation matrix, d*m comma-separated entries row by row"},
      {"center", "marker center, comma-separated torus coordinates"},
      {"r_inner", "marker inner radius"},
      {"r_outer", "marker outer radius"},
      {"H", "slice height"},
      {"s", "ratio of the two slice heights"},
      {"N", "tower size / ocap window"},
      {"epsilon", "target fraction (lattice, towers) or cut level (certify)"},
      {"seed", "random seed"},
      {"samples", "sampled points"},
      {"trials", "tiling invariant draws or lattice bodies"},
      {"r", "lattice neighbourhood radius"},
      {"M_cap", "largest N tried by the density search"},
      {"x", "tiling base point"},
      {"nudge", "continuity check: distance of the nearby point"},
      {"viewport", "SVG viewport x0,y0,x1,y1"},
      {"stroke", "SVG stroke width"},
      {"radius", "SVG overlay ball radius"},
      {"set", "ocap set: balls c1,c2:r separated by ';'"},
      {"E", "certify: the small open set"},
      {"F", "certify: the large open set"},
      {"out", "output path, - for stdout"},
      {"format", "json or svg"}};
  return h;
}

const std::map<std::string, std::string>& command_help() {
  static const std::map<std::string, std::string> h = {
      {"marker", "compute and verify the marker constants M and L"},
      {"tiling", "origin cells and the tiling invariant suite, or an SVG drawing"},
      {"tower", "tower disjointness and coverage reports"},
      {"two-towers", "the two-tower decomposition and its checks"},
      {"lattice", "N0 and the boundary-counting lemma on random bodies"},
      {"ocap", "orbit capacity estimate of a union of balls"},
      {"certify", "comparison certificate for open sets E and F"}};
  return h;
}

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

struct Command {
  CLI::App* app = nullptr;
  std::string config_path;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ex::ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equivariant tilings, Rokhlin towers and comparison certificates for Z^d rotations"};
  app.require_subcommand(1);
  std::map<std::string, Command> cmds;
  for (const auto& name : ex::commands()) {
    Command& c = cmds[name];
    c.app = app.add_subcommand(name, command_help().at(name));
    c.app->add_option("--config", c.config_path, "key=value config file");
    for (const auto& key : ex::known_keys())
      c.options[key] = c.app->add_option(flag_name(key), c.values[key], key_help().at(key));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  for (auto& [name, c] : cmds) {
    if (!c.app->parsed()) continue;
    try {
      ex::Settings settings;
      if (!c.config_path.empty()) settings = ex::parse_config_text(read_file(c.config_path));
      for (const auto& [key, opt] : c.options)
        if (opt->count() > 0) settings[key] = c.values[key];
      const auto cfg = ex::load_config(settings);
      const auto result = ex::run(name, cfg);
      if (cfg.out == "-") {
        std::cout << result.output;
      } else {
        std::ofstream out(cfg.out, std::ios::binary);
        if (!out) throw ex::ConfigError("cannot write " + cfg.out);
        out << result.output;
      }
      return result.exit_code;
    } catch (const std::exception& e) {
      std::cerr << "zdtl " << name << ": " << e.what() << "\n";
      return 2;
    }
  }
  return 2;
}
