#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "esgopt/experiments.hpp"
#include "esgopt/model_params.hpp"
#include "esgopt/row_decoupled_limit.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string config;
  std::string out;
  std::optional<double> gamma_p;
  std::string grid;
  std::string preset;
  std::uint64_t seed = 42;
  long paths = 100000;
  int row = 0;
  std::string bracket = "0.001,10";
  double tol = 1e-4;
  std::string decades = "2:4";
  std::string gamma_list;
};

esg::ModelParams load(const Options& o) {
  if (o.config.empty()) throw esg::ConfigError("--config is required");
  esg::ModelParams p = esg::load_config_file(o.config);
  if (o.gamma_p) p = esg::with_gamma_P(p, *o.gamma_p);
  return p;
}

/// Writes to --out when given, otherwise to stdout.
void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw esg::ConfigError("cannot open output file '" + o.out + "'");
  f << text;
  if (!f) throw esg::ConfigError("write failed for '" + o.out + "'");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw esg::ValidationError("gamma_list", static_cast<int>(v.size()),
                                 "cannot parse number '" + item + "'");
    }
  }
  return v;
}

std::vector<double> convergence_list(const Options& o) {
  if (!o.gamma_list.empty()) return parse_list(o.gamma_list);
  const auto colon = o.decades.find(':');
  int lo = 0, hi = 0;
  try {
    if (colon == std::string::npos) {
      lo = hi = std::stoi(o.decades);
    } else {
      lo = std::stoi(o.decades.substr(0, colon));
      hi = std::stoi(o.decades.substr(colon + 1));
    }
  } catch (const std::exception&) {
    throw esg::ValidationError("decades", -1, "expected a or a:b with integer exponents");
  }
  std::vector<double> v;
  for (int k = lo; k <= hi; ++k) v.push_back(std::pow(10.0, k));
  if (v.empty()) throw esg::ValidationError("decades", -1, "grid must increase");
  return v;
}

void cmd_solve(const Options& o) {
  const esg::ModelParams p = load(o);
  std::ostringstream os;
  esg::write_solve_csv(os, p, esg::optimal_sensitivities(p));
  emit(o, os.str());
}

void cmd_sweep(Options o) {
  std::vector<double> grid;
  if (!o.preset.empty()) {
    const esg::FigurePreset fp = esg::figure_preset(o.preset);
    if (o.config.empty()) o.config = fp.config_path;
    grid = fp.grid;
  }
  if (!o.grid.empty()) grid = esg::parse_grid(o.grid);
  if (grid.empty()) throw esg::ConfigError("--grid or --preset is required");
  std::ostringstream os;
  esg::write_sweep_csv(os, esg::sweep(load(o), grid));
  emit(o, os.str());
}

void cmd_flip(const Options& o) {
  const esg::ModelParams p = load(o);
  const auto [a, b] = esg::parse_bracket(o.bracket);
  const esg::FlipResult r = esg::flip_threshold(p, o.row - 1, a, b, o.tol);
  std::ostringstream os;
  os.precision(15);
  os << "row,gamma_P_dagger,lo,hi,iterations,sign_changes_in_scan\n"
     << o.row << ',' << r.gamma_P_dagger << ',' << r.lo << ',' << r.hi << ',' << r.iterations << ','
     << r.sign_changes_in_scan << '\n';
  if (r.sign_changes_in_scan > 1) {
    std::cerr << "warning: " << r.sign_changes_in_scan
              << " sign changes in the bracket; reporting the first crossing\n";
  }
  emit(o, os.str());
}

void cmd_constrained(const Options& o) {
  std::ostringstream os;
  esg::write_constrained_csv(os, load(o));
  emit(o, os.str());
}

void cmd_convergence(const Options& o) {
  std::ostringstream os;
  esg::write_convergence_csv(os, load(o), convergence_list(o));
  emit(o, os.str());
}

void cmd_simulate(const Options& o) {
  const esg::ModelParams p = load(o);
  if (o.paths < 1) throw esg::ValidationError("paths", -1, "must be >= 1");
  const std::vector<double> grid = esg::default_deviation_grid();
  const esg::SimulationReport rep = esg::run_simulation(p, o.paths, o.seed, grid);
  std::ostringstream os;
  esg::write_simulate_csv(os, p, rep);
  emit(o, os.str());

  std::ostream& log = o.out.empty() ? std::cerr : std::cout;
  log.precision(10);
  log << "principal: mc " << rep.principal.mc << " se " << rep.principal.se << " analytic "
      << rep.principal.analytic << '\n';
  for (const esg::DeviationCurve& c : rep.deviations) {
    log << "agent " << c.agent + 1 << " constant-deviation argmax " << c.argmax_delta << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal ESG-disclosure contracts: solver and experiment runner"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Economy JSON file");
    sub->add_option("--out", o.out, "Output CSV path (default stdout)");
    sub->add_option("--gamma-p", o.gamma_p, "Override principal risk aversion");
  };

  CLI::App* solve = app.add_subcommand("solve", "Optimal sensitivities, actions and f*");
  add_common(solve);

  CLI::App* sw = app.add_subcommand("sweep", "Maximiser along a gamma_P grid");
  add_common(sw);
  sw->add_option("--grid", o.grid, "start:stop:step");
  sw->add_option("--preset", o.preset, "fig3 | fig4 | fig5");

  CLI::App* flip = app.add_subcommand("flip-threshold", "gamma_P at which a diagonal loading changes sign");
  add_common(flip);
  flip->add_option("--row", o.row, "1-based row")->required();
  flip->add_option("--bracket", o.bracket, "a,b");
  flip->add_option("--tol", o.tol, "Bracket width tolerance");

  CLI::App* con = app.add_subcommand("constrained", "gamma_P -> infinity limit and diagnostics");
  add_common(con);

  CLI::App* conv = app.add_subcommand("convergence", "Penalty-rate table");
  add_common(conv);
  conv->add_option("--decades", o.decades, "Exponent range a:b (gamma_P = 10^a .. 10^b)");
  conv->add_option("--gamma-list", o.gamma_list, "Explicit comma-separated gamma_P list");

  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo verification of the optimal contract");
  add_common(sim);
  sim->add_option("--paths", o.paths, "Number of paths");
  sim->add_option("--seed", o.seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (solve->parsed()) cmd_solve(o);
    else if (sw->parsed()) cmd_sweep(o);
    else if (flip->parsed()) cmd_flip(o);
    else if (con->parsed()) cmd_constrained(o);
    else if (conv->parsed()) cmd_convergence(o);
    else if (sim->parsed()) cmd_simulate(o);
  } catch (const esg::NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
