#include "reach/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace reach {

namespace {

struct IndexBounds {
  std::array<std::int64_t, kMaxDim> lo{}, hi{};
};

IndexBounds bounds_of(const GridSet& s) {
  IndexBounds b;
  for (int i = 0; i < s.dim(); ++i) {
    b.lo[static_cast<size_t>(i)] = std::numeric_limits<std::int64_t>::max();
    b.hi[static_cast<size_t>(i)] = std::numeric_limits<std::int64_t>::min();
  }
  for (const auto& g : s)
    for (int i = 0; i < s.dim(); ++i) {
      b.lo[static_cast<size_t>(i)] = std::min<std::int64_t>(b.lo[static_cast<size_t>(i)], g[i]);
      b.hi[static_cast<size_t>(i)] = std::max<std::int64_t>(b.hi[static_cast<size_t>(i)], g[i]);
    }
  return b;
}

// sup over the world interval [wlo, whi] of the distance to the 1-D lattice
// slice {rho*m, ..., rho*M}; exact via endpoints and gap midpoints
double sup_axis_gap(double wlo, double whi, std::int64_t m, std::int64_t M, double rho) {
  const auto dist_1d = [&](double w) {
    std::int64_t j = std::llround(w / rho);
    j = std::clamp(j, m, M);
    return std::fabs(w - rho * static_cast<double>(j));
  };
  double best = std::max(dist_1d(wlo), dist_1d(whi));
  const auto j_lo = static_cast<std::int64_t>(std::floor(wlo / rho));
  const auto j_hi = static_cast<std::int64_t>(std::ceil(whi / rho));
  for (std::int64_t j = std::max(m, j_lo); j < std::min(M, j_hi); ++j) {
    const double mid = rho * (static_cast<double>(j) + 0.5);
    if (mid >= wlo && mid <= whi) best = std::max(best, dist_1d(mid));
  }
  return best;
}

}  // namespace

ConvexBody exact_linear_reachable(double T, int dim) {
  if (T < 0.0) throw AnalysisError("exact_linear_reachable: negative time");
  const double r = std::exp(T) - 1.0;
  return ConvexBody::from_box(box_at(Vec(dim), r));
}

double error_vs_exact(const FullState& state, double T) {
  const GridSet& s = state.cells;
  if (s.empty()) throw AnalysisError("error_vs_exact: empty state");
  const int d = s.dim();
  const double rho = s.spacing();
  const Box exact = exact_linear_reachable(T, d).baked_box();

  IndexBounds b = bounds_of(s);
  std::size_t volume = 1;
  for (int i = 0; i < d; ++i)
    volume *= static_cast<std::size_t>(b.hi[static_cast<size_t>(i)] -
                                       b.lo[static_cast<size_t>(i)] + 1);
  if (volume != s.size())
    throw AnalysisError(
        "error_vs_exact: state is not a solid index box; the exact comparison "
        "supports the linear scenario only");

  // both directions decompose per axis for product sets under the max-norm
  double dist_state_to_exact = 0.0;
  double dist_exact_to_state = 0.0;
  for (int i = 0; i < d; ++i) {
    const double cell_lo = rho * static_cast<double>(b.lo[static_cast<size_t>(i)]);
    const double cell_hi = rho * static_cast<double>(b.hi[static_cast<size_t>(i)]);
    dist_state_to_exact = std::max({dist_state_to_exact, exact.lo[i] - cell_lo,
                                    cell_hi - exact.hi[i]});
    dist_exact_to_state =
        std::max(dist_exact_to_state,
                 sup_axis_gap(exact.lo[i], exact.hi[i], b.lo[static_cast<size_t>(i)],
                              b.hi[static_cast<size_t>(i)], rho));
  }
  return std::max({dist_state_to_exact, dist_exact_to_state, 0.0});
}

double error_vs_exact(const BoundaryState& state, double T) {
  const GridSet& ring = state.boundary;
  if (ring.empty()) throw AnalysisError("error_vs_exact: empty boundary");
  if (ring.dim() != 2)
    throw AnalysisError("error_vs_exact: boundary comparison is planar only");
  const double rho = ring.spacing();
  const double r = std::exp(T) - 1.0;
  const ConvexBody exact = exact_linear_reachable(T, 2);

  // ring -> shell: distance of each cell to the box boundary
  double ring_to_shell = 0.0;
  for (const auto& g : ring)
    ring_to_shell = std::max(ring_to_shell, dist_boundary(exact, world_point(g, 2, rho)));

  // shell -> ring: per face, exact sup of the lower envelope of the
  // per-cell distance cones; local maxima sit at face endpoints, midpoints
  // of consecutive cells and plateau edges
  const auto face_sup = [&](int fix_axis, double fix_val) {
    const int free_axis = 1 - fix_axis;
    struct Cone {
      double pos;    // cell coordinate along the face
      double base;   // |fix_val - cell coordinate across|
    };
    std::vector<Cone> cones;
    cones.reserve(ring.size());
    for (const auto& g : ring) {
      const Vec w = world_point(g, 2, rho);
      cones.push_back({w[free_axis], std::fabs(fix_val - w[fix_axis])});
    }
    std::sort(cones.begin(), cones.end(),
              [](const Cone& a, const Cone& b) { return a.pos < b.pos; });

    const auto envelope_at = [&](double y) {
      // nearest cones first, expanding outward until |y - pos| alone
      // exceeds the best value so far
      auto it = std::lower_bound(cones.begin(), cones.end(), y,
                                 [](const Cone& c, double v) { return c.pos < v; });
      double best = std::numeric_limits<double>::infinity();
      auto fwd = it;
      auto bwd = it;
      for (;;) {
        bool progressed = false;
        if (fwd != cones.end() && fwd->pos - y < best) {
          best = std::min(best, std::max(fwd->base, fwd->pos - y));
          ++fwd;
          progressed = true;
        }
        if (bwd != cones.begin() && y - std::prev(bwd)->pos < best) {
          --bwd;
          best = std::min(best, std::max(bwd->base, y - bwd->pos));
          progressed = true;
        }
        if (!progressed) break;
      }
      return best;
    };

    std::vector<double> candidates{-r, r};
    for (std::size_t i = 0; i + 1 < cones.size(); ++i)
      candidates.push_back(0.5 * (cones[i].pos + cones[i + 1].pos));
    for (const auto& c : cones) {
      candidates.push_back(c.pos - c.base);
      candidates.push_back(c.pos + c.base);
    }
    double best = 0.0;
    for (double y : candidates)
      if (y >= -r && y <= r) best = std::max(best, envelope_at(y));
    return best;
  };

  double shell_to_ring = 0.0;
  for (int axis = 0; axis < 2; ++axis)
    for (double side : {-r, r})
      shell_to_ring = std::max(shell_to_ring, face_sup(axis, side));

  return std::max(ring_to_shell, shell_to_ring);
}

namespace {

double regression_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (xs[i] - mx) * (ys[i] - my);
    den += (xs[i] - mx) * (xs[i] - mx);
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace

StudyResult convergence_study(const std::vector<double>& h_list, const InclusionRHS& rhs,
                              const InitialSet& x0, double T, double beta_star,
                              const RunOptions& options) {
  StudyResult out;
  for (double h : h_list) {
    const double rho = h * h;
    const long n_steps = std::lround(T / h);
    SchemeParams params = validate_params(rhs.lipschitz, h, rho, beta_star, n_steps);

    FullState full_final{GridSet(rhs.dim, rho), 0};
    RunReport full_rep =
        run(Variant::Full, rhs, x0, params, options,
            [&](long, const FullState* fs, const BoundaryState*) {
              if (fs) full_final = *fs;
            });
    RunReport boundary_rep = run(Variant::Boundary, rhs, x0, params, options);

    ErrorRecord rec;
    rec.h = h;
    rec.rho = rho;
    rec.T = static_cast<double>(n_steps) * h;
    rec.hausdorff_error = error_vs_exact(full_final, rec.T);
    rec.wall_ms_full = full_rep.total_wall_ms;
    rec.wall_ms_boundary = boundary_rep.total_wall_ms;
    rec.cells_touched_full = full_rep.total_sources_touched;
    rec.cells_touched_boundary = boundary_rep.total_sources_touched;
    out.records.push_back(rec);
  }

  std::vector<double> ln_h, ln_err, ln_cost_full, ln_cost_boundary;
  for (const auto& r : out.records) {
    if (r.hausdorff_error <= 0.0) continue;
    ln_h.push_back(std::log(r.h));
    ln_err.push_back(std::log(r.hausdorff_error));
    if (r.wall_ms_full && *r.wall_ms_full > 0.0)
      ln_cost_full.push_back(std::log(*r.wall_ms_full / 1000.0));
    if (r.wall_ms_boundary > 0.0)
      ln_cost_boundary.push_back(std::log(r.wall_ms_boundary / 1000.0));
  }
  out.order_vs_h = regression_slope(ln_h, ln_err);
  if (ln_cost_full.size() == ln_err.size())
    out.order_vs_cost_full = std::fabs(regression_slope(ln_cost_full, ln_err));
  if (ln_cost_boundary.size() == ln_err.size())
    out.order_vs_cost_boundary = std::fabs(regression_slope(ln_cost_boundary, ln_err));
  return out;
}

std::string study_csv(const StudyResult& study) {
  std::ostringstream os;
  os << "h,rho,time_full_s,time_boundary_s,hausdorff_error,cells_touched_full,"
        "cells_touched_boundary\n";
  for (const auto& r : study.records) {
    os << r.h << ',' << r.rho << ',';
    if (r.wall_ms_full)
      os << *r.wall_ms_full / 1000.0;
    os << ',' << r.wall_ms_boundary / 1000.0 << ',' << r.hausdorff_error << ',';
    if (r.cells_touched_full)
      os << *r.cells_touched_full;
    os << ',' << r.cells_touched_boundary << "\n";
  }
  os << "# order_vs_h=" << study.order_vs_h << "\n";
  os << "# order_vs_cost_full=" << study.order_vs_cost_full << "\n";
  os << "# order_vs_cost_boundary=" << study.order_vs_cost_boundary << "\n";
  return os.str();
}

std::string study_json(const StudyResult& study) {
  nlohmann::json j;
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : study.records) {
    nlohmann::json e;
    e["h"] = r.h;
    e["rho"] = r.rho;
    e["T"] = r.T;
    e["hausdorff_error"] = r.hausdorff_error;
    if (r.wall_ms_full) e["wall_ms_full"] = *r.wall_ms_full;
    e["wall_ms_boundary"] = r.wall_ms_boundary;
    if (r.cells_touched_full) e["cells_touched_full"] = *r.cells_touched_full;
    e["cells_touched_boundary"] = r.cells_touched_boundary;
    records.push_back(std::move(e));
  }
  j["records"] = std::move(records);
  j["order_vs_h"] = study.order_vs_h;
  j["order_vs_cost_full"] = study.order_vs_cost_full;
  j["order_vs_cost_boundary"] = study.order_vs_cost_boundary;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// topology

namespace {

struct UnionFind {
  std::vector<int> parent;
  int add() {
    parent.push_back(static_cast<int>(parent.size()));
    return parent.back();
  }
  int find(int a) {
    while (parent[static_cast<size_t>(a)] != a) {
      parent[static_cast<size_t>(a)] = parent[static_cast<size_t>(parent[static_cast<size_t>(a)])];
      a = parent[static_cast<size_t>(a)];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<size_t>(b)] = a;
  }
};

}  // namespace

TopologyReport topology_report(const BoundaryState& state) {
  TopologyReport out;
  out.boundary_components = static_cast<long>(connected_components(state.boundary).size());
  if (state.boundary.dim() != 2 || state.boundary.empty()) return out;

  // Scanline labeling of the complement of layer 0 inside the padded frame,
  // with Chebyshev connectivity between row intervals. Regions reachable
  // from the frame are exterior; enclosed regions containing a layer-1 cell
  // are holes of the tracked set; enclosed regions without exterior markers
  // are its interior.
  IndexBounds bb = bounds_of(state.boundary);
  if (!state.outer.empty()) {
    IndexBounds ob = bounds_of(state.outer);
    for (int i = 0; i < 2; ++i) {
      bb.lo[static_cast<size_t>(i)] = std::min(bb.lo[static_cast<size_t>(i)], ob.lo[static_cast<size_t>(i)]);
      bb.hi[static_cast<size_t>(i)] = std::max(bb.hi[static_cast<size_t>(i)], ob.hi[static_cast<size_t>(i)]);
    }
  }
  const std::int64_t xmin = bb.lo[0] - 1, xmax = bb.hi[0] + 1;
  const std::int64_t ymin = bb.lo[1] - 1, ymax = bb.hi[1] + 1;

  std::unordered_map<std::int64_t, std::vector<std::int64_t>> wall_rows;
  for (const auto& g : state.boundary) wall_rows[g[1]].push_back(g[0]);
  for (auto& [y, xs] : wall_rows) std::sort(xs.begin(), xs.end());

  struct Interval {
    std::int64_t lo, hi;
    int id;
  };
  UnionFind uf;
  const int exterior = uf.add();
  std::vector<Interval> prev;
  std::unordered_map<std::int64_t, std::vector<Interval>> intervals_by_row;

  for (std::int64_t y = ymin; y <= ymax; ++y) {
    std::vector<Interval> cur;
    const auto wit = wall_rows.find(y);
    std::int64_t cursor = xmin;
    if (wit != wall_rows.end()) {
      for (std::int64_t wx : wit->second) {
        if (wx > cursor) cur.push_back({cursor, wx - 1, uf.add()});
        cursor = wx + 1;
      }
    }
    if (cursor <= xmax) cur.push_back({cursor, xmax, uf.add()});

    for (auto& iv : cur) {
      if (iv.lo == xmin || iv.hi == xmax || y == ymin || y == ymax)
        uf.unite(exterior, iv.id);
    }
    // Chebyshev adjacency between rows: intervals connect when they overlap
    // with a one-cell diagonal slack
    std::size_t pi = 0;
    for (const auto& iv : cur) {
      while (pi < prev.size() && prev[pi].hi < iv.lo - 1) ++pi;
      for (std::size_t k = pi; k < prev.size() && prev[k].lo <= iv.hi + 1; ++k)
        uf.unite(prev[k].id, iv.id);
    }
    intervals_by_row.emplace(y, cur);
    prev = std::move(cur);
  }

  std::unordered_map<int, bool> region_has_marker;
  for (const auto& g : state.outer) {
    const auto rit = intervals_by_row.find(g[1]);
    if (rit == intervals_by_row.end()) continue;
    const auto& ivs = rit->second;
    auto it = std::upper_bound(ivs.begin(), ivs.end(), static_cast<std::int64_t>(g[0]),
                               [](std::int64_t x, const Interval& iv) { return x < iv.lo; });
    if (it == ivs.begin()) continue;
    --it;
    if (g[0] >= it->lo && g[0] <= it->hi) region_has_marker[uf.find(it->id)] = true;
  }

  const int ext_root = uf.find(exterior);
  long voids = 0;
  std::vector<int> seen;
  for (auto& [root, marked] : region_has_marker) {
    const int r = uf.find(root);
    if (r == ext_root || !marked) continue;
    if (std::find(seen.begin(), seen.end(), r) == seen.end()) {
      seen.push_back(r);
      ++voids;
    }
  }
  out.enclosed_voids = voids;
  return out;
}

// ---------------------------------------------------------------------------
// oracle comparison

namespace {

StepComparison compare_states(const FullState& full, const BoundaryState& boundary, double h) {
  Layers layers = extract_layers(full.cells, 0, 1);
  StepComparison c;
  c.index = full.step_index;
  c.t = static_cast<double>(full.step_index) * h;
  c.boundary_diff = symmetric_difference(layers.layer(0), boundary.boundary);
  c.outer_diff = symmetric_difference(layers.layer(1), boundary.outer);
  c.boundary_equal = c.boundary_diff.empty();
  c.outer_equal = c.outer_diff.empty();
  return c;
}

}  // namespace

CompareReport compare_runs(const std::vector<FullState>& full_states,
                           const std::vector<BoundaryState>& boundary_states, double h) {
  if (full_states.size() != boundary_states.size())
    throw AnalysisError("compare_runs: run lengths differ (" +
                        std::to_string(full_states.size()) + " vs " +
                        std::to_string(boundary_states.size()) + ")");
  CompareReport rep;
  for (std::size_t i = 0; i < full_states.size(); ++i) {
    StepComparison c = compare_states(full_states[i], boundary_states[i], h);
    rep.all_equal = rep.all_equal && c.boundary_equal && c.outer_equal;
    rep.steps.push_back(std::move(c));
  }
  return rep;
}

CompareReport compare_lockstep(Variant boundary_variant, const InclusionRHS& rhs,
                               const InitialSet& x0, const SchemeParams& params,
                               const RunOptions& options, RunReport* full_report,
                               RunReport* boundary_report) {
  if (boundary_variant == Variant::Full)
    throw AnalysisError("compare_lockstep: pick a boundary variant to compare against full");

  CompareReport rep;
  RunReport frep, brep;
  frep.variant = Variant::Full;
  brep.variant = boundary_variant;
  frep.params = brep.params = params;
  frep.threads = brep.threads = std::max(1, options.threads);

  FullState fs = init_full(x0, params);
  BoundaryInit bi = init_boundary(x0, params, options.strict_connectivity);
  brep.init_chain_connected = bi.chain_connected;
  BoundaryState bs = std::move(bi.state);

  StepComparison c0 = compare_states(fs, bs, params.h);
  rep.all_equal = c0.boundary_equal && c0.outer_equal;
  rep.steps.push_back(std::move(c0));

  for (long n = 0; n < params.n_steps; ++n) {
    const double t = static_cast<double>(n) * params.h;
    StepStats fstats, bstats;
    fs = step_full(fs, rhs, params, t, options.threads, &fstats);
    bs = boundary_variant == Variant::Preliminary
             ? step_boundary_preliminary(bs, rhs, params, t, options.threads, &bstats)
             : step_boundary(bs, rhs, params, t, options.threads, &bstats,
                             options.pooled_s00);
    StepRecord fr, br;
    fr.index = br.index = fs.step_index;
    fr.t = br.t = static_cast<double>(fs.step_index) * params.h;
    fr.full_cells = fs.cells.size();
    fr.wall_ms = fstats.wall_ms;
    fr.sources_touched = fstats.sources_touched;
    br.boundary_cells = bs.boundary.size();
    br.outer_cells = bs.outer.size();
    br.wall_ms = bstats.wall_ms;
    br.sources_touched = bstats.sources_touched;
    frep.steps.push_back(fr);
    brep.steps.push_back(br);

    StepComparison c = compare_states(fs, bs, params.h);
    rep.all_equal = rep.all_equal && c.boundary_equal && c.outer_equal;
    rep.steps.push_back(std::move(c));
  }
  for (const auto& s : frep.steps) {
    frep.total_sources_touched += s.sources_touched;
    frep.total_wall_ms += s.wall_ms;
  }
  for (const auto& s : brep.steps) {
    brep.total_sources_touched += s.sources_touched;
    brep.total_wall_ms += s.wall_ms;
  }
  if (full_report) *full_report = std::move(frep);
  if (boundary_report) *boundary_report = std::move(brep);
  return rep;
}

}  // namespace reach
