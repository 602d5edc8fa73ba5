#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "reach/analysis.hpp"

using namespace reach;

namespace {

InclusionRHS linear_rhs() {
  return make_rhs(2, {parse_expr("x1", 2), parse_expr("x2", 2)},
                  ConvexBody::from_box(box_at(Vec{0.0, 0.0}, 1.0)), 1.0);
}

InclusionRHS still_rhs(double radius) {
  return make_rhs(2, {parse_expr("0", 2), parse_expr("0", 2)},
                  ConvexBody::from_box(box_at(Vec{0.0, 0.0}, radius)), 1e-6);
}

InitialSet origin_point() {
  InitialSet x0;
  x0.bodies.push_back(ConvexBody::from_point(Vec{0.0, 0.0}));
  return x0;
}

InitialSet annulus_x0() {
  InitialSet x0;
  x0.bodies.push_back(ConvexBody::from_box(make_box(Vec{-2.0, 1.0}, Vec{2.0, 2.0})));
  x0.bodies.push_back(ConvexBody::from_box(make_box(Vec{-2.0, -2.0}, Vec{2.0, -1.0})));
  x0.bodies.push_back(ConvexBody::from_box(make_box(Vec{-2.0, -2.0}, Vec{-1.0, 2.0})));
  x0.bodies.push_back(ConvexBody::from_box(make_box(Vec{1.0, -2.0}, Vec{2.0, 2.0})));
  return x0;
}

double brute_point_to_cells(const Vec& p, const GridSet& s) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& g : s) {
    const Vec w = world_point(g, s.dim(), s.spacing());
    best = std::min(best, norm_inf(p - w));
  }
  return best;
}

// 10^4 boundary points of the square [-r, r]^2
std::vector<Vec> sample_box_boundary(double r, int per_face = 2500) {
  std::vector<Vec> out;
  out.reserve(static_cast<size_t>(4 * per_face));
  for (int i = 0; i < per_face; ++i) {
    const double t = -r + 2.0 * r * static_cast<double>(i) / (per_face - 1);
    out.push_back(Vec{r, t});
    out.push_back(Vec{-r, t});
    out.push_back(Vec{t, r});
    out.push_back(Vec{t, -r});
  }
  return out;
}

}  // namespace

TEST_CASE("exact linear reachable set radii") {
  CHECK(exact_linear_reachable(0.0).baked_box().hi[0] == 0.0);
  CHECK(exact_linear_reachable(1.0).baked_box().hi[0] ==
        doctest::Approx(1.718281828459045));
  CHECK(exact_linear_reachable(0.2).baked_box().hi[0] == doctest::Approx(0.221402758));
}

TEST_CASE("error of the rasterized exact box") {
  // lattice-aligned radius: pure rasterization slack <= rho/2
  const double T = 1.0;
  const double r = std::exp(T) - 1.0;
  const double rho_aligned = r / 43.0;
  GridSet aligned = rasterize(exact_linear_reachable(T), 0.0, rho_aligned);
  CHECK(error_vs_exact(FullState{aligned, 0}, T) <= rho_aligned / 2.0 + 1e-12);

  // generic radius: slack can approach a full cell but never exceed it
  GridSet generic = rasterize(exact_linear_reachable(T), 0.0, 0.04);
  const double err = error_vs_exact(FullState{generic, 0}, T);
  CHECK(err <= 0.04 + 1e-12);
  CHECK(err >= 0.0);

  GridSet empty(2, 0.04);
  CHECK_THROWS_AS(static_cast<void>(error_vs_exact(FullState{empty, 0}, T)), AnalysisError);
}

TEST_CASE("full-state error agrees with dense sampling on a linear run") {
  SchemeParams p = validate_params(1.0, 0.2, 0.04, 0.0, 5);
  InclusionRHS rhs = linear_rhs();
  FullState fs = init_full(origin_point(), p);
  for (long n = 0; n < p.n_steps; ++n)
    fs = step_full(fs, rhs, p, static_cast<double>(n) * p.h);

  const double T = 1.0;
  const double exact = error_vs_exact(fs, T);

  // oracle: per-cell distance to the box plus sampled boundary distances
  const double r = std::exp(T) - 1.0;
  const Box box = exact_linear_reachable(T).baked_box();
  double sampled = 0.0;
  for (const auto& g : fs.cells) {
    const Vec w = world_point(g, 2, p.rho);
    double excess = 0.0;
    for (int i = 0; i < 2; ++i)
      excess = std::max({excess, box.lo[i] - w[i], w[i] - box.hi[i]});
    sampled = std::max(sampled, excess);
  }
  const auto samples = sample_box_boundary(r);
  for (const auto& s : samples) sampled = std::max(sampled, brute_point_to_cells(s, fs.cells));

  const double sample_slack = 4.0 * r / 2500.0;
  CHECK(exact >= sampled - 1e-9);
  CHECK(exact <= sampled + sample_slack);
}

TEST_CASE("boundary-state error against the exact shell") {
  SchemeParams p = validate_params(1.0, 0.2, 0.04, 0.0, 5);
  InclusionRHS rhs = linear_rhs();
  BoundaryState bs = init_boundary(origin_point(), p, true).state;
  for (long n = 0; n < p.n_steps; ++n)
    bs = step_boundary(bs, rhs, p, static_cast<double>(n) * p.h);

  const double T = 1.0;
  const double exact = error_vs_exact(bs, T);

  const double r = std::exp(T) - 1.0;
  const ConvexBody body = exact_linear_reachable(T);
  double sampled = 0.0;
  for (const auto& g : bs.boundary)
    sampled = std::max(sampled, dist_boundary(body, world_point(g, 2, p.rho)));
  for (const auto& s : sample_box_boundary(r))
    sampled = std::max(sampled, brute_point_to_cells(s, bs.boundary));

  const double sample_slack = 4.0 * r / 2500.0;
  CHECK(exact >= sampled - 1e-9);
  CHECK(exact <= sampled + sample_slack);

  // boundary error and set error agree up to one cell for this convex target
  FullState fs = init_full(origin_point(), p);
  for (long n = 0; n < p.n_steps; ++n)
    fs = step_full(fs, rhs, p, static_cast<double>(n) * p.h);
  CHECK(std::fabs(exact - error_vs_exact(fs, T)) <= p.rho + 1e-12);
}

TEST_CASE("non-box states are rejected as unsupported") {
  // the annulus state is not a solid index box
  SchemeParams p = validate_params(1e-6, 0.2, 0.04, 0.0, 0);
  FullState ring = init_full(annulus_x0(), p);
  CHECK_THROWS_AS(static_cast<void>(error_vs_exact(ring, 1.0)), AnalysisError);
}

TEST_CASE("convergence study over a short ladder") {
  StudyResult study =
      convergence_study({0.2, 0.1}, linear_rhs(), origin_point(), 1.0);
  REQUIRE(study.records.size() == 2);
  CHECK(study.records[0].rho == doctest::Approx(0.04));
  CHECK(study.records[1].rho == doctest::Approx(0.01));
  CHECK(study.records[1].hausdorff_error < study.records[0].hausdorff_error);
  CHECK(study.records[0].cells_touched_boundary <
        *study.records[0].cells_touched_full);

  StudyResult empty = convergence_study({}, linear_rhs(), origin_point(), 1.0);
  CHECK(empty.records.empty());

  const std::string csv = study_csv(study);
  CHECK(csv.find("time_full_s") != std::string::npos);
  CHECK(csv.find("order_vs_h") != std::string::npos);
  const std::string json = study_json(study);
  CHECK(json.find("order_vs_h") != std::string::npos);
}

TEST_CASE("topology report on the annulus") {
  SchemeParams p = validate_params(1e-6, 0.2, 0.04, 0.0, 6);
  InclusionRHS rhs = still_rhs(1.0);
  BoundaryState bs = init_boundary(annulus_x0(), p, true).state;

  TopologyReport t0 = topology_report(bs);
  CHECK(t0.boundary_components == 2);
  REQUIRE(t0.enclosed_voids.has_value());
  CHECK(*t0.enclosed_voids == 1);

  // the hole of inradius 1 closes by t <= 1.2
  long close_step = -1;
  for (long n = 0; n < p.n_steps; ++n) {
    bs = step_boundary(bs, rhs, p, static_cast<double>(n) * p.h);
    TopologyReport t = topology_report(bs);
    if (*t.enclosed_voids == 0 && close_step < 0) close_step = bs.step_index;
  }
  TopologyReport tend = topology_report(bs);
  CHECK(tend.boundary_components == 1);
  CHECK(*tend.enclosed_voids == 0);
  CHECK(close_step > 0);
  CHECK(static_cast<double>(close_step) * p.h <= 1.2 + 1e-12);
}

TEST_CASE("topology report on a solid block") {
  GridSet block(2, 1.0);
  for (int x = 0; x <= 5; ++x)
    for (int y = 0; y <= 5; ++y) block.insert(GridIndex{x, y});
  Layers l = extract_layers(block, 0, 1);
  TopologyReport t = topology_report(BoundaryState{l.layer(0), l.layer(1), 0});
  CHECK(t.boundary_components == 1);
  REQUIRE(t.enclosed_voids.has_value());
  CHECK(*t.enclosed_voids == 0);
}

TEST_CASE("compare_runs on stored states") {
  SchemeParams p = validate_params(1.0, 0.2, 0.04, 0.0, 5);
  InclusionRHS rhs = linear_rhs();
  std::vector<FullState> fulls;
  std::vector<BoundaryState> bounds;
  FullState fs = init_full(origin_point(), p);
  BoundaryState bs = init_boundary(origin_point(), p, true).state;
  fulls.push_back(fs);
  bounds.push_back(bs);
  for (long n = 0; n < p.n_steps; ++n) {
    const double t = static_cast<double>(n) * p.h;
    fs = step_full(fs, rhs, p, t);
    bs = step_boundary(bs, rhs, p, t);
    fulls.push_back(fs);
    bounds.push_back(bs);
  }
  CompareReport rep = compare_runs(fulls, bounds, p.h);
  CHECK(rep.all_equal);
  CHECK(rep.steps.size() == 6);

  // zero-step comparison: a single equal entry
  CompareReport zero = compare_runs({fulls[0]}, {bounds[0]}, p.h);
  CHECK(zero.all_equal);
  CHECK(zero.steps.size() == 1);

  bounds.pop_back();
  CHECK_THROWS_AS(compare_runs(fulls, bounds, p.h), AnalysisError);
}

TEST_CASE("twopoints failure reproduction") {
  // disconnected initial set: strict mode refuses, non-strict mode runs and
  // the comparison detects inner cells marked as boundary. The band radius
  // is the literal kappa(h, rho, beta*) of the algorithm box (no
  // exterior-distance slack); the padded default is robust enough to mask
  // the failure on this coarse grid.
  SchemeParams p = validate_params(1e-6, 0.25, 1.0 / 16.0, 0.0, 1, 1.0 / 16.0);
  InclusionRHS rhs = still_rhs(1.0);
  GridSet cells(2, 1.0 / 16.0);
  cells.insert(GridIndex{0, 16});
  cells.insert(GridIndex{16, 0});
  InitialSet x0;
  x0.explicit_cells = cells;

  RunOptions strict;
  CHECK_THROWS_AS(static_cast<void>(compare_lockstep(Variant::Boundary, rhs, x0, p, strict)),
                  SchemeError);

  RunOptions loose;
  loose.strict_connectivity = false;
  RunReport frep, brep;
  CompareReport rep = compare_lockstep(Variant::Boundary, rhs, x0, p, loose, &frep, &brep);
  CHECK_FALSE(rep.all_equal);
  REQUIRE(rep.steps.size() == 2);
  CHECK(rep.steps[0].boundary_equal);  // initial layers agree by construction
  CHECK_FALSE(rep.steps[1].boundary_equal);
  CHECK(rep.steps[1].boundary_diff.size() > 0);
  CHECK_FALSE(brep.init_chain_connected);
}

TEST_CASE("lockstep comparison confirms equality for chain-connected initial sets") {
  SchemeParams p = validate_params(1.0, 0.2, 0.04, 0.0, 5);
  RunOptions opt;
  CompareReport rep =
      compare_lockstep(Variant::Preliminary, linear_rhs(), origin_point(), p, opt);
  CHECK(rep.all_equal);
}
