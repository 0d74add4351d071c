#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "qmsd/bounds.hpp"
#include "qmsd/estimation.hpp"

namespace qmsd {

// Key order in emitted documents is fixed so that identical configs produce
// byte-identical output.
using Json = nlohmann::ordered_json;

// {"re": [[..]], "im": [[..]]}; "im" may be omitted on input for real
// matrices and is always emitted.
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

// Scenario configs: version, name, channel or estimator, gain {g, s or r},
// lambda, cutoff, method quad|mc|choi|all|analytic, observables, optional
// seed/samples, optional bound check and expectations. See the built-ins
// for complete documents.
Json builtin_scenario(const std::string& name);
std::vector<std::string> builtin_scenario_names();

struct RunOutcome {
  Json report;
  std::string summary;  // human-readable text
  int exit_code = 0;    // 0 pass, 2 bound violation, 3 expectation mismatch
};

// Evaluates the scenario's MSD routes, runs the declared bound check and
// expectation comparisons. Throws (ValidationError, DimensionError,
// TruncationError, parse errors) on malformed input; the CLI maps those to
// exit code 4.
RunOutcome run_scenario(const Json& config);

// Fig-1 style sweep: for each deviation value vx, the minimal partner
// deviation on every requested bound family.
struct CurveRequest {
  double big_g = 1.0;
  double lambda = 0.0;
  std::vector<double> s_values;  // skewed trade-off curves
  std::vector<double> t_values;  // tangent lines, anchored at the first s
  std::vector<double> vx_grid;   // strictly positive, ascending
};

void validate(const CurveRequest& req);
std::string curves_csv(const CurveRequest& req);
Json curves_json(const CurveRequest& req);

// Device certification: a document holding either an estimator (POVM plus
// value lists) or a channel-plus-observables model, checked against every
// applicable bound at the given gain and prior.
RunOutcome certify(const Json& device, double big_g, double s, double lambda);

}  // namespace qmsd
