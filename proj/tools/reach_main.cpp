// Command-line frontend: scenario runs, full-vs-boundary comparison,
// convergence studies, topology tracking and parameter validation.
//
// Exit codes: 0 success, 2 validation/config error, 3 runtime scheme error,
// 4 equivalence mismatch in `compare` (or an expected mismatch that did not
// occur).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "reach/analysis.hpp"
#include "reach/scenario.hpp"

namespace fs = std::filesystem;
using namespace reach;

namespace {

struct CommonOpts {
  std::string scenario;
  std::string config_path;
  std::string out_dir = "out";
  std::string variant = "boundary";
  double h = 0.0, T = 0.0, rho = 0.0, lipschitz = 0.0, beta = -1.0;
  double kappa_override = std::numeric_limits<double>::quiet_NaN();
  int threads = 1;
  bool no_strict = false;
  bool pooled_s00 = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_variant) {
  cmd->set_help_flag("--help", "print help");  // frees -h/--h for the step size
  cmd->add_option("--scenario", o.scenario, "built-in scenario name");
  cmd->add_option("--config", o.config_path, "JSON config file");
  cmd->add_option("--h", o.h, "time step");
  cmd->add_option("--T", o.T, "final time (integer multiple of h)");
  cmd->add_option("--rho", o.rho, "grid spacing (default h^2)");
  cmd->add_option("--L", o.lipschitz, "Lipschitz constant override");
  cmd->add_option("--beta", o.beta, "overapproximation budget beta*");
  cmd->add_option("--kappa-override", o.kappa_override, "replace the derived kappa_hat");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--threads", o.threads, "worker threads")
      ->envname("INCLUSION_REACH_THREADS");
  cmd->add_flag("--no-strict", o.no_strict,
                "proceed on chain-disconnected initial sets (records a warning)");
  cmd->add_flag("--pooled-s00", o.pooled_s00,
                "debug: pooled instead of per-cell band intersection");
  if (with_variant)
    cmd->add_option("--variant", o.variant, "full | preliminary | boundary");
}

ScenarioConfig resolve_config(const CommonOpts& o) {
  if (o.config_path.empty() && o.scenario.empty())
    throw ConfigError("pass --scenario <name> or --config <path>");
  ScenarioConfig c = o.config_path.empty() ? builtin_scenario(o.scenario)
                                           : load_config(o.config_path);
  if (o.h > 0.0) c.h = o.h;
  if (o.T > 0.0) c.T = o.T;
  if (o.rho > 0.0) c.rho = o.rho;
  if (o.lipschitz > 0.0) c.lipschitz = o.lipschitz;
  if (o.beta >= 0.0) c.beta_star = o.beta;
  if (!std::isnan(o.kappa_override)) c.kappa_override = o.kappa_override;
  if (o.no_strict) c.strict_connectivity = false;
  if (c.name.empty()) c.name = "scenario";
  return c;
}

RunOptions run_options(const ScenarioConfig& c, const CommonOpts& o, bool components) {
  RunOptions opt;
  opt.threads = o.threads;
  opt.pooled_s00 = o.pooled_s00;
  opt.strict_connectivity = c.strict_connectivity;
  opt.record_components = components;
  return opt;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

void dump_state(const fs::path& dir, const std::string& stem, long step,
                const FullState* fsv, const BoundaryState* bsv) {
  char suffix[32];
  std::snprintf(suffix, sizeof(suffix), "_step_%04ld", step);
  if (fsv) {
    std::ostringstream os;
    write_cells_csv(os, fsv->cells, "full");
    write_file(dir / (stem + suffix + "_full.csv"), os.str());
  } else {
    std::ostringstream ob, oo;
    write_cells_csv(ob, bsv->boundary, "boundary");
    write_cells_csv(oo, bsv->outer, "outer");
    write_file(dir / (stem + suffix + "_boundary.csv"), ob.str());
    write_file(dir / (stem + suffix + "_outer.csv"), oo.str());
  }
}

int cmd_validate(const CommonOpts& o) {
  ScenarioConfig c = resolve_config(o);
  BuiltScenario built = build_scenario(c);
  nlohmann::json j;
  j["scenario"] = c.name;
  j["L"] = built.params.lipschitz;
  j["h"] = built.params.h;
  j["rho"] = built.params.rho;
  j["h_star"] = built.params.h_star;
  j["alpha_star"] = built.params.alpha_star;
  j["beta_star"] = built.params.beta_star;
  j["kappa_hat"] = built.params.kappa_hat;
  if (built.params.kappa_override) j["kappa_override"] = *built.params.kappa_override;
  j["n_steps"] = built.params.n_steps;
  j["lipschitz_estimated"] = built.rhs.lipschitz_estimated;
  if (!built.params.warnings.empty()) j["warnings"] = built.params.warnings;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_run(const CommonOpts& o, bool dump_steps, bool components) {
  ScenarioConfig c = resolve_config(o);
  BuiltScenario built = build_scenario(c);
  const Variant variant = variant_from_name(o.variant.empty() ? c.scheme : o.variant);
  fs::create_directories(o.out_dir);
  const std::string stem = c.name + "_" + variant_name(variant);

  RunReport rep = run(variant, built.rhs, built.x0, built.params,
                      run_options(c, o, components),
                      [&](long step, const FullState* fsv, const BoundaryState* bsv) {
                        if (dump_steps || step == built.params.n_steps)
                          dump_state(o.out_dir, stem, step, fsv, bsv);
                      });
  rep.scenario = c.name;
  write_file(fs::path(o.out_dir) / (stem + "_report.json"), run_report_json(rep));
  std::cout << "run " << c.name << " variant=" << variant_name(variant)
            << " steps=" << rep.params.n_steps
            << " sources_touched=" << rep.total_sources_touched
            << " wall_ms=" << rep.total_wall_ms << "\n";
  return 0;
}

int cmd_compare(const CommonOpts& o, bool expect_mismatch) {
  ScenarioConfig c = resolve_config(o);
  BuiltScenario built = build_scenario(c);
  const Variant variant =
      variant_from_name(o.variant.empty() ? std::string("boundary") : o.variant);
  fs::create_directories(o.out_dir);

  RunReport full_rep, boundary_rep;
  CompareReport rep =
      compare_lockstep(variant, built.rhs, built.x0, built.params,
                       run_options(c, o, false), &full_rep, &boundary_rep);

  nlohmann::json j;
  j["scenario"] = c.name;
  j["variant"] = variant_name(variant);
  j["all_equal"] = rep.all_equal;
  j["full_sources_touched"] = full_rep.total_sources_touched;
  j["boundary_sources_touched"] = boundary_rep.total_sources_touched;
  j["full_wall_ms"] = full_rep.total_wall_ms;
  j["boundary_wall_ms"] = boundary_rep.total_wall_ms;
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : rep.steps) {
    steps.push_back({{"index", s.index},
                     {"t", s.t},
                     {"boundary_equal", s.boundary_equal},
                     {"outer_equal", s.outer_equal},
                     {"boundary_diff_cells", s.boundary_diff.size()},
                     {"outer_diff_cells", s.outer_diff.size()}});
    if (!s.boundary_equal || !s.outer_equal) {
      char suffix[48];
      std::snprintf(suffix, sizeof(suffix), "_mismatch_step_%04ld", s.index);
      std::ostringstream ob, oo;
      write_cells_csv(ob, s.boundary_diff, "boundary");
      write_cells_csv(oo, s.outer_diff, "outer");
      write_file(fs::path(o.out_dir) / (c.name + suffix + "_boundary.csv"), ob.str());
      write_file(fs::path(o.out_dir) / (c.name + suffix + "_outer.csv"), oo.str());
    }
  }
  j["steps"] = std::move(steps);
  write_file(fs::path(o.out_dir) / (c.name + "_compare_" + variant_name(variant) + ".json"),
             j.dump(2) + "\n");

  for (const auto& s : rep.steps)
    std::cout << "step " << s.index << " t=" << s.t << " "
              << (s.boundary_equal && s.outer_equal ? "equal" : "MISMATCH") << "\n";
  std::cout << (rep.all_equal ? "all steps equal" : "mismatch detected") << "\n";

  if (expect_mismatch) return rep.all_equal ? 4 : 0;
  return rep.all_equal ? 0 : 4;
}

int cmd_study(const CommonOpts& o, const std::string& h_list_text) {
  ScenarioConfig c = resolve_config(o);
  BuiltScenario built = build_scenario(c);

  std::vector<double> h_list;
  std::stringstream ss(h_list_text);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) h_list.push_back(std::stod(tok));
  if (h_list.empty()) throw ConfigError("--h-list: no step sizes given");
  for (double h : h_list)  // reject the whole ladder before any work
    static_cast<void>(validate_params(built.rhs.lipschitz, h, h * h, c.beta_star,
                                      std::lround(c.T / h)));

  StudyResult study = convergence_study(h_list, built.rhs, built.x0, c.T, c.beta_star,
                                        run_options(c, o, false));
  fs::create_directories(o.out_dir);
  write_file(fs::path(o.out_dir) / (c.name + "_study.csv"), study_csv(study));
  write_file(fs::path(o.out_dir) / (c.name + "_study.json"), study_json(study));
  std::cout << study_csv(study);
  return 0;
}

int cmd_topology(const CommonOpts& o) {
  ScenarioConfig c = resolve_config(o);
  BuiltScenario built = build_scenario(c);
  const Variant variant =
      variant_from_name(o.variant.empty() ? std::string("boundary") : o.variant);
  if (variant == Variant::Full)
    throw ConfigError("topology tracks layer states; pick a boundary variant");
  fs::create_directories(o.out_dir);

  std::ostringstream csv;
  csv << "step,t,components,voids\n";
  run(variant, built.rhs, built.x0, built.params, run_options(c, o, false),
      [&](long step, const FullState*, const BoundaryState* bsv) {
        TopologyReport t = topology_report(*bsv);
        csv << step << ',' << static_cast<double>(step) * built.params.h << ','
            << t.boundary_components << ',';
        if (t.enclosed_voids) csv << *t.enclosed_voids;
        csv << "\n";
      });
  write_file(fs::path(o.out_dir) / (c.name + "_topology.csv"), csv.str());
  std::cout << csv.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse-grid reachable sets for differential inclusions"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);

  CommonOpts run_o, cmp_o, study_o, topo_o, val_o;
  bool dump_steps = false, components = false, expect_mismatch = false;
  std::string h_list = "0.2,0.1,0.05";

  CLI::App* c_run = app.add_subcommand("run", "run one scenario/variant");
  add_common(c_run, run_o, true);
  c_run->add_flag("--dump-steps", dump_steps, "write per-step cell CSVs (default: final only)");
  c_run->add_flag("--components", components, "record per-step chain-component counts");

  CLI::App* c_cmp = app.add_subcommand("compare", "full vs boundary, per-step equality");
  add_common(c_cmp, cmp_o, true);
  c_cmp->add_flag("--expect-mismatch", expect_mismatch,
                  "succeed only if a mismatch is detected");

  CLI::App* c_study = app.add_subcommand("study", "convergence ladder, Table-1-style CSV");
  add_common(c_study, study_o, false);
  c_study->add_option("--h-list", h_list, "comma-separated step sizes");

  CLI::App* c_topo = app.add_subcommand("topology", "per-step component/void counts");
  add_common(c_topo, topo_o, true);

  CLI::App* c_val = app.add_subcommand("validate", "echo derived parameters");
  add_common(c_val, val_o, false);

  CLI11_PARSE(app, argc, argv);

  const auto guarded = [](auto&& body) {
    try {
      return body();
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    } catch (const ValidationError& e) {
      std::cerr << "validation error: " << e.what() << "\n";
      return 2;
    } catch (const ParseError& e) {
      std::cerr << "expression error: " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 3;
    }
  };

  if (c_run->parsed())
    return guarded([&] { return cmd_run(run_o, dump_steps, components); });
  if (c_cmp->parsed())
    return guarded([&] { return cmd_compare(cmp_o, expect_mismatch); });
  if (c_study->parsed()) return guarded([&] { return cmd_study(study_o, h_list); });
  if (c_topo->parsed()) return guarded([&] { return cmd_topology(topo_o); });
  if (c_val->parsed()) return guarded([&] { return cmd_validate(val_o); });
  return 1;
}
