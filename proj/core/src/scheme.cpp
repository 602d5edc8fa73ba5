#include "reach/scheme.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "json.hpp"

namespace reach {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

int clamp_threads(int threads) { return std::clamp(threads, 1, 64); }

// Shards the (sorted) source list over worker threads, accumulating rows
// per shard and merging in shard order. The normalized union is a set and
// therefore independent of the sharding.
template <typename Emit>
RowUnion parallel_accumulate(const std::vector<GridIndex>& sources, int dim, double rho,
                             int threads, const Emit& emit) {
  RowUnion acc(dim, rho);
  const std::size_t n = sources.size();
  const std::size_t min_chunk = 2048;
  if (threads <= 1 || n < 2 * min_chunk) {
    for (const auto& s : sources) emit(s, acc);
    return acc;
  }
  const int k = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(threads), n / min_chunk));
  std::vector<RowUnion> parts;
  parts.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) parts.emplace_back(dim, rho);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(k));
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    workers.emplace_back([&, i] {
      const std::size_t lo = n * static_cast<std::size_t>(i) / static_cast<std::size_t>(k);
      const std::size_t hi =
          n * (static_cast<std::size_t>(i) + 1) / static_cast<std::size_t>(k);
      try {
        for (std::size_t j = lo; j < hi; ++j) emit(sources[j], parts[static_cast<size_t>(i)]);
      } catch (...) {
        errors[static_cast<size_t>(i)] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (int i = 0; i < k; ++i) acc.absorb(std::move(parts[static_cast<size_t>(i)]));
  return acc;
}

}  // namespace

SchemeParams validate_params(double lipschitz, double h, double rho, double beta_star,
                             long n_steps, std::optional<double> kappa_override) {
  if (!(lipschitz > 0.0))
    throw ValidationError(
        "L must be positive (use a small floor such as 1e-6 for constant drifts)");
  if (!(h > 0.0)) throw ValidationError("h must be positive");
  if (!(rho > 0.0)) throw ValidationError("rho must be positive");
  if (n_steps < 0) throw ValidationError("n_steps must be non-negative");

  SchemeParams p;
  p.lipschitz = lipschitz;
  p.h = h;
  p.rho = rho;
  p.beta_star = beta_star;
  p.n_steps = n_steps;
  p.kappa_override = kappa_override;

  p.h_star = 1.0 / (4.0 * lipschitz);
  if (h > p.h_star)
    throw ValidationError("h exceeds h* = " + std::to_string(p.h_star) +
                          " (h* = 1/(4L), L = " + std::to_string(lipschitz) + ")");

  const double lh = lipschitz * h;
  p.alpha_star = (1.0 + lh) * rho / 2.0;

  const double beta_cap = std::min((1.0 - 3.0 * lh) * rho, (1.0 - lh) * rho / 2.0);
  if (beta_star < 0.0 || beta_star >= beta_cap)
    throw ValidationError("beta* must lie in [0, " + std::to_string(beta_cap) +
                          ") = [0, min{(1-3Lh)rho, (1-Lh)rho/2})");

  // exterior-layer distance term instantiated at its 2*rho worst case
  p.kappa_hat = (2.0 + 2.0 * lh) / (1.0 - lh) * p.alpha_star +
                (3.0 + lh) / (1.0 - lh) * beta_star + (1.0 + lh) * 2.0 * rho;

  if (h >= 0.95 * p.h_star)
    p.warnings.push_back("h is within 5% of h* = " + std::to_string(p.h_star) +
                         "; boundary tracking degrades near the step-size limit");
  if (kappa_override) {
    if (*kappa_override < 0.0) throw ValidationError("kappa override must be non-negative");
    p.warnings.push_back("kappa_hat overridden: " + std::to_string(*kappa_override) +
                         " replaces derived " + std::to_string(p.kappa_hat));
  }
  return p;
}

FullState init_full(const InitialSet& x0, const SchemeParams& params) {
  if (x0.explicit_cells) {
    if (x0.explicit_cells->empty()) throw SchemeError("initial set: no cells");
    if (x0.explicit_cells->spacing() != params.rho)
      throw SchemeError("initial set: explicit cells use a different spacing");
    return FullState{*x0.explicit_cells, 0};
  }
  if (x0.bodies.empty()) throw SchemeError("initial set: no bodies");
  RowUnion acc(x0.bodies.front().dim(), params.rho);
  for (const auto& body : x0.bodies)
    accumulate_cells(body, params.alpha_star, params.rho, acc);
  acc.normalize();
  GridSet cells = acc.materialize();
  if (cells.empty()) throw SchemeError("initial set: rasterization is empty");
  return FullState{std::move(cells), 0};
}

BoundaryInit init_boundary(const InitialSet& x0, const SchemeParams& params, bool strict) {
  FullState full = init_full(x0, params);
  BoundaryInit out;
  out.chain_connected = is_chain_connected(full.cells);
  if (strict && !out.chain_connected)
    throw SchemeError("initial set not chain-connected (required by the boundary scheme)");
  Layers layers = extract_layers(full.cells, 0, 1);
  out.state.boundary = layers.layer(0);
  out.state.outer = layers.layer(1);
  out.state.step_index = 0;
  return out;
}

FullState step_full(const FullState& state, const InclusionRHS& rhs,
                    const SchemeParams& params, double t, int threads, StepStats* stats) {
  const auto start = Clock::now();
  const auto sources = state.cells.sorted_cells();
  const auto emit = [&](const GridIndex& src, RowUnion& acc) {
    accumulate_cells(euler_image(rhs, t, world_point(src, rhs.dim, params.rho), params.h),
                     params.alpha_star, params.rho, acc);
  };
  RowUnion acc =
      parallel_accumulate(sources, rhs.dim, params.rho, clamp_threads(threads), emit);
  acc.normalize();
  GridSet next = acc.materialize();
  if (next.empty())
    throw SchemeError("full scheme: empty state after step " +
                      std::to_string(state.step_index));
  if (stats) {
    stats->sources_touched = sources.size();
    stats->wall_ms = elapsed_ms(start);
  }
  return FullState{std::move(next), state.step_index + 1};
}

namespace {

struct LayerSources {
  std::vector<GridIndex> boundary;  // layer 0
  std::vector<GridIndex> inner;     // layer -1
  std::vector<GridIndex> exterior;  // layer 1 followed by layer 2

  std::size_t total() const { return boundary.size() + inner.size() + exterior.size(); }
};

LayerSources gather_sources(const BoundaryState& state) {
  auto [inner, outer2] = derive_adjacent_layers(state.boundary, state.outer);
  LayerSources s;
  s.boundary = state.boundary.sorted_cells();
  s.inner = inner.sorted_cells();
  s.exterior = state.outer.sorted_cells();
  auto ring2 = outer2.sorted_cells();
  s.exterior.insert(s.exterior.end(), ring2.begin(), ring2.end());
  return s;
}

BoundaryState finish_boundary_step(const GridSet& s0, const GridSet& s1, long step_index) {
  BoundaryState next;
  next.outer = adjacent_filter(s1, s0);
  next.boundary = adjacent_filter(s0, next.outer);
  next.step_index = step_index + 1;
  if (next.boundary.empty())
    throw SchemeError("boundary scheme: boundary collapsed below grid resolution after step " +
                      std::to_string(step_index));
  return next;
}

}  // namespace

BoundaryState step_boundary_preliminary(const BoundaryState& state, const InclusionRHS& rhs,
                                        const SchemeParams& params, double t, int threads,
                                        StepStats* stats) {
  const auto start = Clock::now();
  const int workers = clamp_threads(threads);
  LayerSources src = gather_sources(state);

  const auto image_at = [&](const GridIndex& g) {
    return euler_image(rhs, t, world_point(g, rhs.dim, params.rho), params.h);
  };

  RowUnion s0_acc = parallel_accumulate(
      src.boundary, rhs.dim, params.rho, workers, [&](const GridIndex& g, RowUnion& acc) {
        accumulate_cells(image_at(g), params.alpha_star, params.rho, acc);
      });
  s0_acc.absorb(parallel_accumulate(
      src.inner, rhs.dim, params.rho, workers, [&](const GridIndex& g, RowUnion& acc) {
        accumulate_boundary_cells(image_at(g), params.alpha_star, params.rho, acc);
      }));
  s0_acc.normalize();
  const GridSet s0 = s0_acc.materialize();

  RowUnion s1_acc = parallel_accumulate(
      src.exterior, rhs.dim, params.rho, workers, [&](const GridIndex& g, RowUnion& acc) {
        accumulate_boundary_cells(image_at(g), params.alpha_star, params.rho, acc);
      });
  s1_acc.normalize();
  const GridSet s1 = s1_acc.materialize();

  if (stats) {
    stats->sources_touched = src.total();
    stats->wall_ms = elapsed_ms(start);
  }
  return finish_boundary_step(s0, s1, state.step_index);
}

BoundaryState step_boundary(const BoundaryState& state, const InclusionRHS& rhs,
                            const SchemeParams& params, double t, int threads,
                            StepStats* stats, bool pooled_s00) {
  const auto start = Clock::now();
  const int workers = clamp_threads(threads);
  const double kappa = params.effective_kappa();
  LayerSources src = gather_sources(state);

  const auto image_at = [&](const GridIndex& g) {
    return euler_image(rhs, t, world_point(g, rhs.dim, params.rho), params.h);
  };

  RowUnion s0_acc(rhs.dim, params.rho);
  if (!pooled_s00 || !std::isfinite(kappa)) {
    // per-source-cell intersection: the image of x clipped to x's own
    // kappa-band around the image boundary
    s0_acc = parallel_accumulate(
        src.boundary, rhs.dim, params.rho, workers, [&](const GridIndex& g, RowUnion& acc) {
          accumulate_band_clipped_cells(image_at(g), params.alpha_star, kappa, params.rho, acc);
        });
  } else {
    // pooled debug variant: union of images intersected with union of bands
    RowUnion images = parallel_accumulate(
        src.boundary, rhs.dim, params.rho, workers, [&](const GridIndex& g, RowUnion& acc) {
          accumulate_cells(image_at(g), params.alpha_star, params.rho, acc);
        });
    RowUnion bands = parallel_accumulate(
        src.boundary, rhs.dim, params.rho, workers, [&](const GridIndex& g, RowUnion& acc) {
          accumulate_boundary_cells(image_at(g), params.alpha_star + kappa, params.rho, acc);
        });
    images.normalize();
    bands.normalize();
    const GridSet pooled = set_intersection(images.materialize(), bands.materialize());
    for (const auto& g : pooled) s0_acc.add_cell(g);
  }
  s0_acc.absorb(parallel_accumulate(
      src.inner, rhs.dim, params.rho, workers, [&](const GridIndex& g, RowUnion& acc) {
        accumulate_boundary_cells(image_at(g), params.alpha_star, params.rho, acc);
      }));
  s0_acc.normalize();
  const GridSet s0 = s0_acc.materialize();

  RowUnion s1_acc = parallel_accumulate(
      src.exterior, rhs.dim, params.rho, workers, [&](const GridIndex& g, RowUnion& acc) {
        accumulate_boundary_cells(image_at(g), params.alpha_star, params.rho, acc);
      });
  s1_acc.normalize();
  const GridSet s1 = s1_acc.materialize();

  if (stats) {
    stats->sources_touched = src.total();
    stats->wall_ms = elapsed_ms(start);
  }
  return finish_boundary_step(s0, s1, state.step_index);
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::Preliminary: return "preliminary";
    case Variant::Boundary: return "boundary";
  }
  return "?";
}

Variant variant_from_name(const std::string& name) {
  if (name == "full") return Variant::Full;
  if (name == "preliminary") return Variant::Preliminary;
  if (name == "boundary") return Variant::Boundary;
  throw ValidationError("unknown scheme variant '" + name +
                        "' (expected full, preliminary or boundary)");
}

RunReport run(Variant variant, const InclusionRHS& rhs, const InitialSet& x0,
              const SchemeParams& params, const RunOptions& options, const StepEmit& emit) {
  RunReport rep;
  rep.variant = variant;
  rep.params = params;
  rep.strict = options.strict_connectivity;
  rep.pooled_s00 = options.pooled_s00;
  rep.threads = clamp_threads(options.threads);

  const auto record_full = [&](const FullState& st, double wall_ms, std::size_t touched) {
    StepRecord r;
    r.index = st.step_index;
    r.t = static_cast<double>(st.step_index) * params.h;
    r.full_cells = st.cells.size();
    r.wall_ms = wall_ms;
    r.sources_touched = touched;
    if (options.record_components)
      r.components = static_cast<long>(connected_components(st.cells).size());
    rep.steps.push_back(std::move(r));
  };
  const auto record_boundary = [&](const BoundaryState& st, double wall_ms,
                                   std::size_t touched) {
    StepRecord r;
    r.index = st.step_index;
    r.t = static_cast<double>(st.step_index) * params.h;
    r.boundary_cells = st.boundary.size();
    r.outer_cells = st.outer.size();
    r.wall_ms = wall_ms;
    r.sources_touched = touched;
    if (options.record_components)
      r.components = static_cast<long>(connected_components(st.boundary).size());
    rep.steps.push_back(std::move(r));
  };

  try {
    if (variant == Variant::Full) {
      auto t0 = Clock::now();
      FullState st = init_full(x0, params);
      rep.init_chain_connected = is_chain_connected(st.cells);
      record_full(st, elapsed_ms(t0), 0);
      if (emit) emit(0, &st, nullptr);
      for (long n = 0; n < params.n_steps; ++n) {
        StepStats stats;
        st = step_full(st, rhs, params, static_cast<double>(n) * params.h, rep.threads,
                       &stats);
        record_full(st, stats.wall_ms, stats.sources_touched);
        if (emit) emit(st.step_index, &st, nullptr);
      }
    } else {
      auto t0 = Clock::now();
      BoundaryInit init = init_boundary(x0, params, options.strict_connectivity);
      rep.init_chain_connected = init.chain_connected;
      BoundaryState st = std::move(init.state);
      record_boundary(st, elapsed_ms(t0), 0);
      if (emit) emit(0, nullptr, &st);
      for (long n = 0; n < params.n_steps; ++n) {
        StepStats stats;
        const double t = static_cast<double>(n) * params.h;
        st = variant == Variant::Preliminary
                 ? step_boundary_preliminary(st, rhs, params, t, rep.threads, &stats)
                 : step_boundary(st, rhs, params, t, rep.threads, &stats,
                                 options.pooled_s00);
        record_boundary(st, stats.wall_ms, stats.sources_touched);
        if (emit) emit(st.step_index, nullptr, &st);
      }
    }
  } catch (const SchemeError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemeError(std::string("run(") + variant_name(variant) +
                      ") failed at step " + std::to_string(rep.steps.size()) + ": " +
                      e.what());
  }

  for (const auto& s : rep.steps) {
    rep.total_sources_touched += s.sources_touched;
    rep.total_wall_ms += s.wall_ms;
  }
  return rep;
}

std::string run_report_json(const RunReport& report) {
  nlohmann::json j;
  j["variant"] = variant_name(report.variant);
  if (!report.scenario.empty()) j["scenario"] = report.scenario;
  j["threads"] = report.threads;
  j["strict_connectivity"] = report.strict;
  j["init_chain_connected"] = report.init_chain_connected;
  if (report.pooled_s00) j["pooled_s00"] = true;

  nlohmann::json p;
  p["L"] = report.params.lipschitz;
  p["h"] = report.params.h;
  p["rho"] = report.params.rho;
  p["h_star"] = report.params.h_star;
  p["alpha_star"] = report.params.alpha_star;
  p["beta_star"] = report.params.beta_star;
  p["kappa_hat"] = report.params.kappa_hat;
  if (report.params.kappa_override) p["kappa_override"] = *report.params.kappa_override;
  p["n_steps"] = report.params.n_steps;
  if (!report.params.warnings.empty()) p["warnings"] = report.params.warnings;
  j["params"] = std::move(p);

  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : report.steps) {
    nlohmann::json e;
    e["index"] = s.index;
    e["t"] = s.t;
    if (s.full_cells) {
      e["full_cells"] = *s.full_cells;
    } else {
      e["boundary_cells"] = s.boundary_cells;
      e["outer_cells"] = s.outer_cells;
    }
    e["wall_ms"] = s.wall_ms;
    if (s.components) e["components"] = *s.components;
    e["sources_touched"] = s.sources_touched;
    steps.push_back(std::move(e));
  }
  j["steps"] = std::move(steps);
  j["total_sources_touched"] = report.total_sources_touched;
  j["total_wall_ms"] = report.total_wall_ms;
  return j.dump(2) + "\n";
}

}  // namespace reach
