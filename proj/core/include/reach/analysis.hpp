#pragma once

// Error measurement against the closed-form linear reachable set,
// convergence/cost studies, topology reports, and the full-vs-boundary
// oracle comparator.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "reach/scheme.hpp"

namespace reach {

class AnalysisError : public std::runtime_error {
 public:
  explicit AnalysisError(const std::string& what) : std::runtime_error(what) {}
};

// Closed-form reachable set of x' in x + B_1(0): the box of radius e^T - 1.
ConvexBody exact_linear_reachable(double T, int dim = 2);

// Symmetric max-norm Hausdorff distance between the discrete state and the
// exact reachable box at time T. The full-state version requires the state
// to be a solid index box (always the case on the linear scenario) and is
// exact; anything else raises AnalysisError, which is how unsupported
// scenarios surface.
double error_vs_exact(const FullState& state, double T);

// Boundary states compare layer 0 against the exact box's boundary shell
// (Hausdorff of boundaries, equivalent to the set distance up to rho for
// these convex targets). Planar only.
double error_vs_exact(const BoundaryState& state, double T);

struct ErrorRecord {
  double h = 0.0;
  double rho = 0.0;
  double T = 0.0;
  double hausdorff_error = 0.0;
  std::optional<double> wall_ms_full;
  double wall_ms_boundary = 0.0;
  std::optional<std::size_t> cells_touched_full;
  std::size_t cells_touched_boundary = 0;
};

struct StudyResult {
  std::vector<ErrorRecord> records;
  double order_vs_h = 0.0;             // slope of ln(error) against ln(h)
  double order_vs_cost_full = 0.0;     // |slope| of ln(error) against ln(seconds)
  double order_vs_cost_boundary = 0.0;
};

// Runs full and boundary variants for each h with rho = h*h (unless the
// template says otherwise via rho_of_h) and T fixed, filling one record
// per step size and fitting log-log slopes. Scenarios are run sequentially
// so the timings stay honest.
StudyResult convergence_study(const std::vector<double>& h_list, const InclusionRHS& rhs,
                              const InitialSet& x0, double T, double beta_star = 0.0,
                              const RunOptions& options = {});

std::string study_csv(const StudyResult& study);
std::string study_json(const StudyResult& study);

struct TopologyReport {
  long boundary_components = 0;
  std::optional<long> enclosed_voids;  // planar sets only
};

// Chain components of layer 0, and for d = 2 the number of complement
// regions enclosed by layer 0 that carry exterior markers (layer-1 cells):
// the discrete holes of the tracked set.
TopologyReport topology_report(const BoundaryState& state);

struct StepComparison {
  long index = 0;
  double t = 0.0;
  bool boundary_equal = true;
  bool outer_equal = true;
  GridSet boundary_diff;  // symmetric difference, empty when equal
  GridSet outer_diff;
};

struct CompareReport {
  std::vector<StepComparison> steps;
  bool all_equal = true;
};

// Per-step exact equality of (layer 0, layer 1) between stored runs.
CompareReport compare_runs(const std::vector<FullState>& full_states,
                           const std::vector<BoundaryState>& boundary_states,
                           double h);

// Steps the full scheme and the chosen boundary variant in lockstep and
// compares layers at every step, without storing run history.
CompareReport compare_lockstep(Variant boundary_variant, const InclusionRHS& rhs,
                               const InitialSet& x0, const SchemeParams& params,
                               const RunOptions& options, RunReport* full_report = nullptr,
                               RunReport* boundary_report = nullptr);

}  // namespace reach
