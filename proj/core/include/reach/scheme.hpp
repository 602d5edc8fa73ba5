#pragma once

// Parameter derivation/validation and the three reachable-set steppers:
// the classical fully discrete Euler scheme, the preliminary boundary
// Euler scheme, and the boundary Euler scheme in its final form. The two
// boundary steppers evolve only the pair (layer 0, layer 1) and reproduce
// the full scheme's layers exactly for chain-connected initial sets and
// validated parameters.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "reach/grid.hpp"
#include "reach/inclusion.hpp"

namespace reach {

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

class SchemeError : public std::runtime_error {
 public:
  explicit SchemeError(const std::string& what) : std::runtime_error(what) {}
};

// Validated parameter set. All derived quantities are fixed here:
//   h_star     = 1/(4L)                       (admissible step sizes)
//   alpha_star = (1 + Lh) rho / 2             (image blowup)
//   beta_star in [0, min{(1-3Lh)rho, (1-Lh)rho/2})   (overapprox budget)
//   kappa_hat  = (2+2Lh)/(1-Lh) alpha* + (3+Lh)/(1-Lh) beta* + (1+Lh) 2rho
// The final term instantiates the exterior-distance contribution at its
// worst case over the two exterior layers the stepper feeds in
// (dist(y, M) <= 2 rho there); kappa_override replaces kappa_hat wholesale
// for experiments.
struct SchemeParams {
  double lipschitz = 0.0;  // L
  double h = 0.0;
  double rho = 0.0;
  double beta_star = 0.0;
  long n_steps = 0;
  std::optional<double> kappa_override;

  // derived
  double h_star = 0.0;
  double alpha_star = 0.0;
  double kappa_hat = 0.0;
  std::vector<std::string> warnings;

  double effective_kappa() const { return kappa_override.value_or(kappa_hat); }
};

// Enforces every constraint above; throws ValidationError with the
// admissible range spelled out. Emits a warning when h is within 5% of
// h_star.
SchemeParams validate_params(double lipschitz, double h, double rho, double beta_star,
                             long n_steps,
                             std::optional<double> kappa_override = std::nullopt);

struct FullState {
  GridSet cells;
  long step_index = 0;
};

// Initial set: a union of convex bodies (rasterized with the alpha* blowup)
// or an explicit cell set taken verbatim.
struct InitialSet {
  std::vector<ConvexBody> bodies;
  std::optional<GridSet> explicit_cells;
};

struct StepStats {
  std::size_t sources_touched = 0;
  double wall_ms = 0.0;
};

struct RunOptions {
  int threads = 1;
  bool pooled_s00 = false;        // debug: pooled instead of per-cell intersection
  bool record_components = false; // per-step chain-component counts in the report
  bool strict_connectivity = true;
};

FullState init_full(const InitialSet& x0, const SchemeParams& params);

struct BoundaryInit {
  BoundaryState state;
  bool chain_connected = true;
};

// Layers of the rasterized initial set. In strict mode a chain-disconnected
// initial set is an error; otherwise the flag is recorded and the caller
// proceeds at its own risk.
BoundaryInit init_boundary(const InitialSet& x0, const SchemeParams& params, bool strict);

FullState step_full(const FullState& state, const InclusionRHS& rhs,
                    const SchemeParams& params, double t, int threads = 1,
                    StepStats* stats = nullptr);

BoundaryState step_boundary_preliminary(const BoundaryState& state, const InclusionRHS& rhs,
                                        const SchemeParams& params, double t,
                                        int threads = 1, StepStats* stats = nullptr);

BoundaryState step_boundary(const BoundaryState& state, const InclusionRHS& rhs,
                            const SchemeParams& params, double t, int threads = 1,
                            StepStats* stats = nullptr, bool pooled_s00 = false);

enum class Variant { Full, Preliminary, Boundary };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct StepRecord {
  long index = 0;
  double t = 0.0;
  std::size_t boundary_cells = 0;          // layers for boundary variants
  std::size_t outer_cells = 0;
  std::optional<std::size_t> full_cells;   // full variant only
  double wall_ms = 0.0;
  std::optional<long> components;
  std::size_t sources_touched = 0;
};

struct RunReport {
  Variant variant = Variant::Full;
  std::string scenario;
  SchemeParams params;
  bool strict = true;
  bool init_chain_connected = true;
  bool pooled_s00 = false;
  int threads = 1;
  std::vector<StepRecord> steps;
  std::size_t total_sources_touched = 0;
  double total_wall_ms = 0.0;
};

// Called after the initial state and after every step; exactly one of the
// two state pointers is non-null depending on the variant.
using StepEmit = std::function<void(long step, const FullState*, const BoundaryState*)>;

// Runs n_steps steps of the chosen variant from the initial set, collecting
// per-step counters and timings. Identical outputs for any thread count.
RunReport run(Variant variant, const InclusionRHS& rhs, const InitialSet& x0,
              const SchemeParams& params, const RunOptions& options,
              const StepEmit& emit = nullptr);

std::string run_report_json(const RunReport& report);

}  // namespace reach
