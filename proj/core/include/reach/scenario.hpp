#pragma once

// Scenario registry and JSON config ingestion: built-in inclusions, file
// configs with expression drifts, and assembly into the RHS / initial set /
// parameter triple the steppers consume.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "reach/scheme.hpp"

namespace reach {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct DisturbanceSpec {
  std::string type = "box";  // box | hpolytope
  double radius = 0.0;       // box
  std::vector<Halfspace> halfspaces;
  std::optional<Box> bbox;

  friend bool operator==(const DisturbanceSpec&, const DisturbanceSpec&);
};

struct X0Spec {
  std::string type = "point";  // point | box | annulus | cells
  Vec point;
  std::optional<Box> box;
  double r_in = 0.0, r_out = 0.0;              // annulus
  std::vector<std::vector<std::int32_t>> cells;  // lattice indices at the run's rho

  friend bool operator==(const X0Spec&, const X0Spec&);
};

struct ScenarioConfig {
  std::string name;
  int dim = 0;
  std::vector<std::string> drift;
  DisturbanceSpec disturbance;
  X0Spec x0;
  std::optional<double> lipschitz;   // certified L; estimated when absent
  double h = 0.0;
  double T = 0.0;
  std::optional<double> rho;         // defaults to h*h
  double beta_star = 0.0;
  std::string scheme = "boundary";
  bool strict_connectivity = true;
  std::optional<double> kappa_override;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&);
};

std::vector<std::string> builtin_scenario_names();
ScenarioConfig builtin_scenario(const std::string& name);

// JSON text <-> config; schema violations cite JSON-pointer-style paths and
// expression errors carry 1-based character positions.
ScenarioConfig parse_config_json(const std::string& text);
std::string emit_config_json(const ScenarioConfig& config);
ScenarioConfig load_config(const std::string& path);

double resolved_rho(const ScenarioConfig& config);
long resolved_steps(const ScenarioConfig& config);

struct BuiltScenario {
  InclusionRHS rhs;
  InitialSet x0;
  SchemeParams params;
};

// Parses drifts, constructs the disturbance body and initial set, and
// validates parameters. Missing L is filled by the sampler over the given
// domain (branded as estimated).
BuiltScenario build_scenario(const ScenarioConfig& config);

}  // namespace reach
