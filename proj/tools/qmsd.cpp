// Command line front end: scenario runs, bound-curve sweeps and device
// certification. Exit codes: 0 pass, 2 bound violation, 3 expectation
// mismatch, 4 bad input.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qmsd/scenario.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitViolation = 2;
constexpr int kExitMismatch = 3;
constexpr int kExitInput = 4;

qmsd::Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw qmsd::ValidationError("cannot open '" + path + "'");
  }
  qmsd::Json j;
  in >> j;
  return j;
}

// A scenario argument is either a built-in name or a path to a JSON file.
qmsd::Json resolve_scenario(const std::string& arg) {
  const auto names = qmsd::builtin_scenario_names();
  for (const std::string& name : names) {
    if (arg == name) return qmsd::builtin_scenario(name);
  }
  return load_json(arg);
}

std::vector<double> parse_grid(const std::string& spec) {
  double lo = 0.0;
  double hi = 0.0;
  int n = 0;
  char tail = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%d%c", &lo, &hi, &n, &tail) != 3 ||
      n < 1) {
    throw qmsd::ValidationError("--grid expects a:b:n with n >= 1, got '" +
                                spec + "'");
  }
  if (n == 1) return {lo};
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  }
  return grid;
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    throw qmsd::ValidationError("cannot write '" + out_path + "'");
  }
  out << text;
}

int emit_outcome(const qmsd::RunOutcome& outcome, const std::string& format,
                 const std::string& out_path) {
  if (format != "json" && format != "csv") {
    throw qmsd::ValidationError("--format must be csv or json");
  }
  // Reports are JSON only; the human summary goes wherever the JSON does not.
  const std::string text = outcome.report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cerr << outcome.summary;
    std::cout << text;
  } else {
    write_output(text, out_path);
    std::cout << outcome.summary;
  }
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Bayesian deviation toolkit: joint-measurement trade-off numerics"};
  app.name("qmsd");

  std::string scenario_arg;
  std::string certify_path;
  bool curves = false;
  double big_g = 1.0;
  double lambda = 0.0;
  std::vector<double> s_values;
  std::vector<double> t_values;
  std::string grid_spec = "0.05:4:80";
  std::string method;
  std::optional<long long> seed;
  std::optional<int> cutoff;
  std::string out_path;
  std::string format = "csv";

  app.add_option("--scenario", scenario_arg,
                 "Scenario JSON file, or a built-in name (halfbs-saturation, "
                 "heterodyne-mp, loss-covariant)");
  app.add_flag("--curves", curves,
               "Emit bound curves over a vx grid instead of running a "
               "scenario");
  app.add_option("--certify", certify_path,
                 "Certify the device (channel or estimator) in a JSON file");
  app.add_option("--g", big_g, "Probe gain G");
  app.add_option("--lambda", lambda, "Prior precision lambda");
  app.add_option("--s", s_values,
                 "Skew parameter; repeatable for extra trade-off curves");
  app.add_option("--t", t_values,
                 "Tangent-line slope; repeatable (curves mode)");
  app.add_option("--grid", grid_spec, "vx grid as a:b:n (curves mode)");
  app.add_option("--method", method,
                 "Override scenario method: quad, mc, choi, all, analytic");
  app.add_option("--seed", seed, "Override the Monte Carlo seed");
  app.add_option("--cutoff", cutoff, "Override the Fock cutoff");
  app.add_option("--out", out_path, "Write machine output to this file");
  app.add_option("--format", format, "Output format: csv or json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  try {
    const int selected = (scenario_arg.empty() ? 0 : 1) + (curves ? 1 : 0) +
                         (certify_path.empty() ? 0 : 1);
    if (selected != 1) {
      throw qmsd::ValidationError(
          "choose exactly one of --scenario, --curves, --certify");
    }

    if (curves) {
      qmsd::CurveRequest req;
      req.big_g = big_g;
      req.lambda = lambda;
      req.s_values = s_values;
      req.t_values = t_values;
      req.vx_grid = parse_grid(grid_spec);
      if (format == "csv") {
        write_output(qmsd::curves_csv(req), out_path);
      } else if (format == "json") {
        write_output(qmsd::curves_json(req).dump(2) + "\n", out_path);
      } else {
        throw qmsd::ValidationError("--format must be csv or json");
      }
      return kExitPass;
    }

    if (!certify_path.empty()) {
      const double s = s_values.empty() ? 1.0 : s_values.front();
      const double lam = app.count("--lambda") > 0 ? lambda : 1.0;
      const auto outcome =
          qmsd::certify(load_json(certify_path), big_g, s, lam);
      return emit_outcome(outcome, format == "csv" ? "json" : format,
                          out_path);
    }

    qmsd::Json config = resolve_scenario(scenario_arg);
    for (const auto* flag : {"--g", "--lambda", "--s"}) {
      if (app.count(flag) == 0) continue;
      if (std::string(flag) == "--lambda") {
        config["lambda"] = lambda;
      } else if (std::string(flag) == "--g") {
        config["gain"]["g"] = big_g;
      } else {
        config["gain"]["s"] = s_values.front();
        config["gain"].erase("r");
      }
    }
    if (!method.empty()) config["method"] = method;
    if (seed) config["seed"] = *seed;
    if (cutoff) config["cutoff"] = *cutoff;

    const auto outcome = qmsd::run_scenario(config);
    return emit_outcome(outcome, format == "csv" ? "json" : format, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}
