#include "decolab/commands.hpp"

#include "decolab/analysis.hpp"
#include "decolab/collapse.hpp"
#include "decolab/localization.hpp"
#include "decolab/master.hpp"
#include "decolab/parallel.hpp"
#include "decolab/unravel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

namespace decolab {

namespace fs = std::filesystem;

bool CommandOutcome::passed() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.pass; });
}

void CommandOutcome::check(const std::string& name, double expected, double actual, double tol) {
  assertions.push_back({name, expected, actual, tol, std::abs(actual - expected) <= tol});
}

void CommandOutcome::check_range(const std::string& name, double lo, double hi, double actual) {
  assertions.push_back({name, 0.5 * (lo + hi), actual, 0.5 * (hi - lo), actual >= lo && actual <= hi});
}

void CommandOutcome::check_at_least(const std::string& name, double lo, double actual) {
  assertions.push_back({name, lo, actual, 0.0, actual >= lo, true});
}

void CommandOutcome::check_true(const std::string& name, bool condition) {
  assertions.push_back({name, 1.0, condition ? 1.0 : 0.0, 0.0, condition});
}

namespace {

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw Error(std::string("config key '") + key + "' has the wrong type");
  }
}

std::uint64_t resolve_seed(const Json& cfg, const CommandOptions& opts) {
  if (opts.seed) return *opts.seed;
  return get_or<std::uint64_t>(cfg, "seed", kDefaultSeed);
}

std::string padded(std::size_t k, int width = 3) {
  std::ostringstream os;
  os << std::setw(width) << std::setfill('0') << k;
  return os.str();
}

void add_file(CommandOutcome& out, const CommandOptions& opts, const std::string& name, const Json& doc) {
  write_json_file(opts.out_dir / name, doc);
  out.files.push_back(name);
}

std::string assertion_lines(const std::vector<Assertion>& as) {
  std::ostringstream os;
  for (const auto& a : as) {
    os << (a.pass ? "PASS " : "FAIL ") << a.name << ": " << format_number(a.actual)
       << (a.lower_bound ? " (expected >= " : " (expected ") << format_number(a.expected);
    if (!a.lower_bound) os << " +/- " << format_number(a.tolerance);
    os << ")\n";
  }
  return os.str();
}

// ---------------------------------------------------------------- localize

PotentialSpec potential_from_json(const Json& j) {
  check_keys(j, {"kind", "omega", "lyapunov"}, "potential");
  const std::string kind = get_or<std::string>(j, "kind", "free");
  if (kind == "free") return PotentialSpec::free();
  if (kind == "harmonic") return PotentialSpec::harmonic(get_or(j, "omega", 1.0));
  if (kind == "inverted") return PotentialSpec::inverted(get_or(j, "lyapunov", 1.0));
  throw Error("potential.kind must be free, harmonic or inverted");
}

struct LocalizeRun {
  TrajectoryRecord record;
  std::vector<std::pair<double, WaveFunction>> snapshots;
};

LocalizeRun run_localize_trajectory(const WaveFunction& psi0, const LocalizationParams& params, double t_final,
                                    RngStream& rng, const EvolveOptions& eo, std::vector<double> snap_times) {
  LocalizeRun out;
  const auto total = static_cast<long long>(std::llround(t_final / params.dt));
  std::vector<long long> stops;
  for (double t : snap_times) {
    const long long s = std::llround(t / params.dt);
    if (s < 0 || s > total) throw Error("snapshot time outside [0, t_final]");
    stops.push_back(s);
  }
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  if (stops.empty() || stops.back() != total) stops.push_back(total);
  const std::size_t n_snap = snap_times.size();
  std::set<long long> wanted;
  for (double t : snap_times) wanted.insert(std::llround(t / params.dt));

  WaveFunction psi = psi0;
  long long at = 0;
  bool first = true;
  for (long long stop : stops) {
    if (stop > at) {
      TrajectoryResult seg = evolve_trajectory(psi, params, static_cast<double>(stop - at) * params.dt, rng, eo);
      const double offset = static_cast<double>(at) * params.dt;
      for (std::size_t k = first ? 0 : 1; k < seg.record.size(); ++k)
        out.record.push(seg.record.t[k] + offset, seg.record.mean_x[k], seg.record.mean_p[k], seg.record.var_x[k],
                        seg.record.var_p[k], seg.record.jumped[k] != 0);
      out.record.seed = seg.record.seed;
      out.record.stream = seg.record.stream;
      psi = std::move(seg.final_state);
      first = false;
      at = stop;
    }
    if (n_snap > 0 && wanted.count(stop)) out.snapshots.emplace_back(static_cast<double>(stop) * params.dt, psi);
  }
  return out;
}

}  // namespace

CommandOutcome cmd_localize(const Json& cfg, const CommandOptions& opts) {
  check_keys(cfg, {"seed", "threads", "mass", "lambda", "dt", "potential", "grid", "initial", "t_final",
                   "record_every", "recenter", "jumps", "trajectories", "write_trajectories", "snapshots", "assert"},
             "localize config");
  CommandOutcome out;
  out.command = "localize";
  const std::uint64_t seed = resolve_seed(cfg, opts);
  LocalizationParams params;
  params.mass = get_or(cfg, "mass", 1.0);
  params.lambda_loc = get_or(cfg, "lambda", 10.0);
  if (cfg.contains("potential")) params.potential = potential_from_json(cfg["potential"]);
  params.dt = get_or(cfg, "dt", params.lambda_loc > 0.0 ? params.t_loc() / 200.0 : 1e-3);
  params.validate();

  Json grid_cfg = cfg.value("grid", Json::object());
  check_keys(grid_cfg, {"n", "dx"}, "grid");
  const Grid1D grid = Grid1D::centered(get_or<std::size_t>(grid_cfg, "n", 512), get_or(grid_cfg, "dx", 0.05));
  Json init_cfg = cfg.value("initial", Json::object());
  check_keys(init_cfg, {"center", "sigma_x", "p0"}, "initial");
  const WaveFunction psi0 = WaveFunction::gaussian(grid, get_or(init_cfg, "center", 0.0),
                                                   get_or(init_cfg, "sigma_x", 1.0), get_or(init_cfg, "p0", 0.0));
  const double t_loc = params.lambda_loc > 0.0 ? params.t_loc() : 0.0;
  const double t_final = get_or(cfg, "t_final", t_loc > 0.0 ? 10.0 * t_loc : 1.0);
  EvolveOptions eo;
  eo.record_every = get_or<std::size_t>(cfg, "record_every", 1);
  eo.recenter = get_or(cfg, "recenter", true);
  eo.allow_jumps = get_or(cfg, "jumps", true);
  const std::size_t n_traj = get_or<std::size_t>(cfg, "trajectories", 1);
  if (n_traj == 0) throw Error("trajectories must be at least 1");
  const std::size_t n_write = std::min(n_traj, get_or<std::size_t>(cfg, "write_trajectories", 1));
  const std::vector<double> snaps = get_or(cfg, "snapshots", std::vector<double>{});
  Json assert_cfg = cfg.value("assert", Json::object());
  check_keys(assert_cfg, {"fit_factor", "langevin_factor", "min_jumps"}, "assert");

  std::vector<LocalizeRun> runs(n_traj);
  parallel_for(
      n_traj,
      [&](std::size_t k) {
        RngStream rng(seed, k);
        runs[k] = run_localize_trajectory(psi0, params, t_final, rng, eo, k == 0 ? snaps : std::vector<double>{});
      },
      get_or<std::size_t>(cfg, "threads", 0));

  for (std::size_t k = 0; k < n_write; ++k) {
    const std::string name = n_write == 1 ? "trajectory.csv" : "trajectory_" + padded(k) + ".csv";
    write_trajectory_csv(opts.out_dir / name, runs[k].record);
    out.files.push_back(name);
  }
  for (std::size_t s = 0; s < runs[0].snapshots.size(); ++s) {
    const std::string name = "snapshot_" + padded(s) + ".csv";
    write_wavefunction_csv(opts.out_dir / name, runs[0].snapshots[s].second);
    out.files.push_back(name);
  }

  Json summary;
  summary["seed"] = seed;
  summary["mass"] = params.mass;
  summary["lambda"] = params.lambda_loc;
  summary["potential"] = params.potential.name();
  summary["dt"] = params.dt;
  summary["t_final"] = t_final;
  summary["trajectories"] = n_traj;
  summary["t_loc"] = t_loc;
  if (params.lambda_loc > 0.0 && params.potential.kind != PotentialSpec::Kind::Sampled) {
    try {
      summary["pointer_var_x"] = attractor_var_x(params);
      summary["pointer_var_p"] = attractor_var_p(params);
    } catch (const Error& e) {
      summary["pointer_note"] = e.what();
    }
  }
  Json jumps = Json::array();
  double mean_jumps = 0.0;
  for (const auto& r : runs) {
    jumps.push_back(r.record.jump_count());
    mean_jumps += static_cast<double>(r.record.jump_count());
  }
  mean_jumps /= static_cast<double>(n_traj);
  summary["jump_count"] = runs[0].record.jump_count();
  summary["mean_jump_count"] = mean_jumps;
  if (n_traj <= 1000) summary["jump_counts"] = jumps;
  Json snap_times = Json::array();
  for (const auto& s : runs[0].snapshots) snap_times.push_back(s.first);
  summary["snapshot_times"] = snap_times;

  std::ostringstream table;
  table << "localize: " << n_traj << " trajectories, t_final " << format_number(t_final) << ", T_loc "
        << format_number(t_loc) << ", jumps (first trajectory) " << runs[0].record.jump_count() << "\n";

  if (params.lambda_loc > 0.0) {
    try {
      LocalizationFit fit = localization_fit(runs[0].record, params);
      summary["localization_fit"] = Json{{"t_loc_measured", fit.t_loc_measured}, {"r_squared", fit.r_squared},
                                         {"samples", fit.samples}, {"ratio", fit.t_loc_measured / t_loc}};
      table << "fitted localization time " << format_number(fit.t_loc_measured) << " (ratio "
            << format_number(fit.t_loc_measured / t_loc) << ")\n";
      if (assert_cfg.contains("fit_factor")) {
        const double f = assert_cfg["fit_factor"].get<double>();
        out.check_range("fitted localization time / T_loc", 1.0 / f, f, fit.t_loc_measured / t_loc);
      }
    } catch (const Error& e) {
      summary["localization_fit"] = Json{{"error", e.what()}};
      if (assert_cfg.contains("fit_factor")) out.check_true(std::string("localization fit: ") + e.what(), false);
    }
  }

  if (n_traj >= 2) {
    std::vector<TrajectoryRecord> records;
    records.reserve(n_traj);
    for (const auto& r : runs) records.push_back(r.record);
    try {
      LangevinFit lf = langevin_fit(records, std::min<std::size_t>(n_traj, 500));
      std::vector<std::vector<double>> rows;
      for (std::size_t k = 0; k < lf.t.size(); ++k) rows.push_back({lf.t[k], lf.variance[k]});
      write_csv(opts.out_dir / "momentum_variance.csv", {"t", "var_mean_p"}, rows);
      out.files.push_back("momentum_variance.csv");
      const double ref = params.hbar * std::sqrt(params.lambda_loc);
      summary["langevin_fit"] = Json{{"sigma_p", lf.sigma_p},
                                     {"r_squared", lf.r_squared},
                                     {"reference_sigma_p", ref},
                                     {"ratio", ref > 0.0 ? lf.sigma_p / ref : 0.0},
                                     {"full_ensemble", n_traj >= 500}};
      table << "Langevin fit sigma_p " << format_number(lf.sigma_p) << " (R^2 " << format_number(lf.r_squared)
            << ", hbar sqrt(Lambda) = " << format_number(ref) << ")\n";
      if (assert_cfg.contains("langevin_factor")) {
        const double f = assert_cfg["langevin_factor"].get<double>();
        out.check_range("sigma_p / (hbar sqrt(Lambda))", 1.0 / f, f, lf.sigma_p / ref);
        out.check_range("Langevin R^2", 0.9, 1.0, lf.r_squared);
      }
    } catch (const Error& e) {
      summary["langevin_fit"] = Json{{"error", e.what()}};
    }
  }
  if (assert_cfg.contains("min_jumps"))
    out.check_at_least("jumps in first trajectory", assert_cfg["min_jumps"].get<double>(),
                       static_cast<double>(runs[0].record.jump_count()));
  summary["assertions"] = Json::array();
  for (const auto& a : out.assertions) summary["assertions"].push_back(to_json(a));
  add_file(out, opts, "summary.json", summary);
  out.summary = summary;
  out.table = table.str() + assertion_lines(out.assertions);
  return out;
}

// ---------------------------------------------------------------- collapse

CommandOutcome cmd_collapse(const Json& cfg, const CommandOptions& opts) {
  check_keys(cfg, {"seed", "threads", "lambda", "separation", "threshold", "paths", "ensembles", "runs",
                   "checkpoints", "checkpoint_span", "assert"},
             "collapse config");
  CommandOutcome out;
  out.command = "collapse";
  const std::uint64_t seed = resolve_seed(cfg, opts);
  const double lambda = get_or(cfg, "lambda", 1.0);
  const double sep = get_or(cfg, "separation", 1.0);
  const std::size_t threads = get_or<std::size_t>(cfg, "threads", 0);
  CollapseOptions co;
  co.threshold = get_or(cfg, "threshold", 1.0 - 1e-6);
  co.record_path = true;
  Json assert_cfg = cfg.value("assert", Json::object());
  check_keys(assert_cfg, {"born_sigma", "jump_tolerance", "martingale_sigma"}, "assert");

  Json summary;
  summary["seed"] = seed;
  summary["lambda"] = lambda;
  summary["separation"] = sep;
  std::ostringstream table;

  const std::vector<double> paths = get_or(cfg, "paths", std::vector<double>{});
  Json path_info = Json::array();
  for (std::size_t k = 0; k < paths.size(); ++k) {
    RngStream rng(seed, 1000000 + k);
    CollapseRun run = simulate_collapse(WeightState::two_packets(paths[k], sep, lambda), rng, co);
    const std::string name = "path_" + padded(k) + ".csv";
    write_collapse_path_csv(opts.out_dir / name, run.path);
    out.files.push_back(name);
    path_info.push_back(Json{{"w1_initial", paths[k]},
                             {"winner", run.winner + 1},
                             {"jumps", run.n_jumps},
                             {"t_final", run.t_final},
                             {"file", name}});
  }
  summary["paths"] = path_info;

  const std::vector<double> ens = get_or(cfg, "ensembles", std::vector<double>{});
  const std::size_t n_runs = get_or<std::size_t>(cfg, "runs", 10000);
  const std::size_t n_check = get_or<std::size_t>(cfg, "checkpoints", 10);
  std::vector<std::vector<double>> born_rows, mart_rows;
  Json ens_info = Json::array();
  for (std::size_t e = 0; e < ens.size(); ++e) {
    const WeightState s0 = WeightState::two_packets(ens[e], sep, lambda);
    const double span = get_or(cfg, "checkpoint_span", 5.0) / s0.drift_scale();
    std::vector<double> checks;
    for (std::size_t c = 0; c < n_check; ++c)
      checks.push_back(n_check > 1 ? span * static_cast<double>(c) / static_cast<double>(n_check - 1) : 0.0);
    CollapseEnsemble ce = collapse_ensemble(s0, n_runs, seed + e, checks, threads);
    const double f1 = static_cast<double>(ce.winner_counts[0]) / static_cast<double>(n_runs);
    const double sem = std::sqrt(ens[e] * (1.0 - ens[e]) / static_cast<double>(n_runs));
    const bool has_formula = std::abs(2.0 * ens[e] - 1.0) >= 0.1;
    const double formula = has_formula ? mean_jump_count_formula(ens[e]) : std::nan("");
    born_rows.push_back({ens[e], static_cast<double>(n_runs), f1, 1.0 - f1, sem, ce.mean_jumps, formula});
    for (std::size_t c = 0; c < ce.checkpoints.size(); ++c)
      mart_rows.push_back({ens[e], ce.checkpoints[c], ce.mean_w1[c], ce.sem_w1[c]});
    Json info{{"w1_initial", ens[e]},
              {"runs", n_runs},
              {"winner1_frequency", f1},
              {"winner2_frequency", 1.0 - f1},
              {"binomial_sem", sem},
              {"mean_jumps", ce.mean_jumps},
              {"jump_time_correlation", ce.jump_time_correlation},
              {"t_final_variance", ce.t_final_variance}};
    if (has_formula) {
      info["mean_jumps_formula"] = formula;
      info["mean_jumps_quadrature"] = mean_jump_count_quadrature(ens[e], co.threshold);
    }
    ens_info.push_back(info);
    table << "w1(0) = " << format_number(ens[e]) << ": winner-1 frequency " << format_number(f1) << ", mean jumps "
          << format_number(ce.mean_jumps) << "\n";
    std::ostringstream tag;
    tag << "w1(0)=" << format_number(ens[e]);
    if (assert_cfg.contains("born_sigma"))
      out.check("winner-1 frequency " + tag.str(), ens[e], f1, assert_cfg["born_sigma"].get<double>() * sem);
    if (assert_cfg.contains("jump_tolerance") && has_formula)
      out.check("mean jumps " + tag.str(), formula, ce.mean_jumps, assert_cfg["jump_tolerance"].get<double>());
    if (assert_cfg.contains("martingale_sigma")) {
      const double k = assert_cfg["martingale_sigma"].get<double>();
      for (std::size_t c = 0; c < ce.checkpoints.size(); ++c)
        out.check("mean w1 at t=" + format_number(ce.checkpoints[c]) + " " + tag.str(), ens[e], ce.mean_w1[c],
                  k * ce.sem_w1[c] + 1e-12);
    }
  }
  if (!ens.empty()) {
    write_csv(opts.out_dir / "born.csv",
              {"w1_initial", "runs", "winner1_frequency", "winner2_frequency", "binomial_sem", "mean_jumps",
               "mean_jumps_formula"},
              born_rows);
    write_csv(opts.out_dir / "martingale.csv", {"w1_initial", "t", "mean_w1", "sem_w1"}, mart_rows);
    out.files.push_back("born.csv");
    out.files.push_back("martingale.csv");
  }
  summary["ensembles"] = ens_info;
  summary["assertions"] = Json::array();
  for (const auto& a : out.assertions) summary["assertions"].push_back(to_json(a));
  add_file(out, opts, "collapse_report.json", summary);
  out.summary = summary;
  out.table = table.str() + assertion_lines(out.assertions);
  return out;
}

// ---------------------------------------------------------------- unravel

CommandOutcome cmd_unravel(const Json& cfg, const CommandOptions& opts) {
  check_keys(cfg, {"seed", "threads", "model", "random", "psi0", "t_final", "dt", "trajectories", "defect_dt",
                   "assert"},
             "unravel config");
  CommandOutcome out;
  out.command = "unravel";
  const std::uint64_t seed = resolve_seed(cfg, opts);
  std::vector<LindbladModel> models;
  if (cfg.contains("model") == cfg.contains("random")) throw Error("unravel config: give exactly one of model or random");
  if (cfg.contains("model")) {
    models.push_back(model_from_json(cfg["model"]));
  } else {
    const Json& rc = cfg["random"];
    check_keys(rc, {"dim", "count", "operators", "rate_scale"}, "random");
    const std::size_t count = get_or<std::size_t>(rc, "count", 1);
    for (std::size_t k = 0; k < count; ++k) {
      RngStream rng(seed + k, 0x6d6f64656cULL);
      models.push_back(LindbladModel::random(get_or<std::size_t>(rc, "dim", 3), rng,
                                             get_or<std::size_t>(rc, "operators", 0), get_or(rc, "rate_scale", 1.0)));
    }
  }
  const double t_final = get_or(cfg, "t_final", 1.0);
  const double dt = get_or(cfg, "dt", 2e-3);
  const std::size_t n_traj = get_or<std::size_t>(cfg, "trajectories", 5000);
  const double defect_dt = get_or(cfg, "defect_dt", 1e-3);
  const std::size_t threads = get_or<std::size_t>(cfg, "threads", 0);
  Json assert_cfg = cfg.value("assert", Json::object());
  check_keys(assert_cfg, {"trace_distance", "defect_ratio"}, "assert");
  const double td_tol = get_or(assert_cfg, "trace_distance", n_traj > 0 ? 5.0 / std::sqrt(double(n_traj)) : 0.0);

  Json per_model = Json::array();
  std::vector<std::vector<double>> defect_rows;
  std::ostringstream table;
  for (std::size_t k = 0; k < models.size(); ++k) {
    const LindbladModel& m = models[k];
    ComplexVector psi0;
    if (cfg.contains("psi0")) {
      psi0 = vector_from_json(cfg["psi0"], "psi0");
      if (psi0.size() != m.H.rows()) throw Error("psi0 dimension differs from the model");
      psi0 /= psi0.norm();
    } else {
      RngStream rng(seed + k, 0x70736930ULL);
      psi0 = random_state(m.dim(), rng);
    }
    const double d1 = verify_unravelling(m, psi0, defect_dt);
    const double d2 = verify_unravelling(m, psi0, 0.5 * defect_dt);
    defect_rows.push_back({static_cast<double>(k), defect_dt, d1});
    defect_rows.push_back({static_cast<double>(k), 0.5 * defect_dt, d2});
    Json info{{"model", k}, {"dim", m.dim()}, {"defect", d1}, {"defect_half_dt", d2}, {"defect_ratio", d1 / d2}};
    if (!cfg.contains("model")) {
      const std::string name = "model_" + padded(k) + ".json";
      add_file(out, opts, name, to_json(m));
      info["file"] = name;
    }
    const std::string tag = "model " + std::to_string(k);
    if (assert_cfg.contains("defect_ratio"))
      out.check_at_least(tag + " defect ratio on halving dt", assert_cfg["defect_ratio"].get<double>(), d1 / d2);
    if (n_traj > 0) {
      UnravelEnsemble ue = unravel_ensemble(m, psi0, t_final, dt, n_traj, seed + k, threads);
      ComplexMatrix rho = integrate_lindblad(m, psi0 * psi0.adjoint(), t_final, dt);
      const double td = trace_distance(ue.mean_rho, rho);
      info["trace_distance"] = td;
      info["trace_distance_bound"] = td_tol;
      info["mean_jumps"] = ue.mean_jumps;
      out.check_range(tag + " trace distance to master solution", 0.0, td_tol, td);
      table << tag << ": defect ratio " << format_number(d1 / d2) << ", trace distance " << format_number(td)
            << "\n";
    } else {
      table << tag << ": defect ratio " << format_number(d1 / d2) << "\n";
    }
    per_model.push_back(info);
  }
  write_csv(opts.out_dir / "defect.csv", {"model", "dt", "defect"}, defect_rows);
  out.files.push_back("defect.csv");
  Json summary{{"seed", seed}, {"t_final", t_final}, {"dt", dt}, {"trajectories", n_traj}, {"models", per_model}};
  summary["assertions"] = Json::array();
  for (const auto& a : out.assertions) summary["assertions"].push_back(to_json(a));
  add_file(out, opts, "unravel_report.json", summary);
  out.summary = summary;
  out.table = table.str() + assertion_lines(out.assertions);
  return out;
}

// ---------------------------------------------------------------- frames

namespace {

// Decoherence-functional diagonal against tree probabilities, and Krauss completeness where defined.
Json history_checks(const EventScript& script, const BranchTree& tree) {
  double diag = 0.0;
  for (const BranchNode* leaf : tree.leaves())
    diag = std::max(diag, std::abs(decoherence_functional(script, tree, leaf->label, leaf->label) - leaf->prob));
  Json j{{"functional_diagonal_defect", diag}};
  double krauss = 0.0;
  try {
    for (std::size_t step = 1; step <= tree.depth; ++step)
      for (const BranchNode* parent : tree.level(step - 1))
        krauss = std::max(krauss, krauss_completeness_defect(krauss_operators(script, tree, step, parent->label)));
    j["krauss_completeness_defect"] = krauss;
  } catch (const Error& e) {
    j["krauss_note"] = e.what();
  }
  return j;
}

std::string frame_table(const ScenarioReport& r) {
  std::ostringstream os;
  os << "scenario " << r.scenario << "\n";
  for (const auto& f : r.frames) {
    os << "  frame " << f.name << ": " << (f.decoherence.decoherent ? "decoherent" : "recoherent")
       << " (max overlap " << format_number(f.decoherence.max_violation) << ")\n";
    for (const BranchNode* leaf : f.tree.leaves()) {
      os << "    branch";
      for (std::size_t l : leaf->label) os << " " << l;
      os << "  p = " << format_number(leaf->prob) << "\n";
    }
  }
  for (const auto& [k, c] : r.consistency) os << "  consistency " << k << ": " << (c.consistent ? "yes" : "no") << "\n";
  for (const auto& [k, v] : r.values) os << "  " << k << " = " << format_number(v) << "\n";
  return os.str();
}

}  // namespace

CommandOutcome cmd_frames(const Json& cfg, const CommandOptions& opts) {
  check_keys(cfg, {"seed", "scenario", "phi", "theta", "script", "frames", "consistency", "history_checks"},
             "frames config");
  CommandOutcome out;
  out.command = "frames";
  std::string scenario = opts.scenario ? *opts.scenario : get_or<std::string>(cfg, "scenario", "");
  ScenarioReport report;
  if (!scenario.empty()) {
    if (cfg.contains("script")) throw Error("frames config: give a scenario or a script, not both");
    if (scenario == "epr") report = run_epr();
    else if (scenario == "wigner") report = run_wigner(get_or(cfg, "phi", 0.3));
    else if (scenario == "chsh") report = run_chsh(get_or(cfg, "theta", kPi / 8.0));
    else if (scenario == "fr" || scenario == "frauchiger-renner") report = run_frauchiger_renner();
    else throw Error("unknown scenario '" + scenario + "' (epr, wigner, chsh, fr)");
  } else {
    if (!cfg.contains("script") || !cfg.contains("frames")) throw Error("frames config: needs scenario, or script and frames");
    report.scenario = "script";
    report.script = script_from_json(cfg["script"]);
    for (const auto& item : cfg["frames"].items()) {
      FrameResult f;
      f.name = item.key();
      f.tree = build_branch_tree(report.script, item.value().get<std::vector<std::string>>());
      f.decoherence = decoherence_check(f.tree);
      report.check("leaf probability sum " + f.name, 1.0, f.tree.leaf_probability_sum(), 1e-9);
      report.frames.push_back(std::move(f));
    }
    if (cfg.contains("consistency")) {
      for (const auto& triple : cfg["consistency"]) {
        auto names = triple.get<std::vector<std::string>>();
        if (names.size() != 3) throw Error("consistency entries are [frame_a, frame_b, joint_frame]");
        report.consistency[names[0] + "," + names[1]] =
            joint_consistency(report.frame(names[0]).tree, report.frame(names[1]).tree, report.frame(names[2]).tree);
      }
    }
  }
  Json doc = to_json(report);
  if (get_or(cfg, "history_checks", true)) {
    Json hc = Json::object();
    for (const auto& f : report.frames) {
      Json c = history_checks(report.script, f.tree);
      hc[f.name] = c;
      report.check("functional diagonal " + f.name, 0.0, c["functional_diagonal_defect"].get<double>(), 1e-9);
      if (c.contains("krauss_completeness_defect"))
        report.check("Krauss completeness " + f.name, 0.0, c["krauss_completeness_defect"].get<double>(), 1e-9);
    }
    doc["history_checks"] = hc;
    doc["passed"] = report.passed();
    doc["assertions"] = Json::array();
    for (const auto& a : report.assertions) doc["assertions"].push_back(to_json(a));
  }
  out.assertions = report.assertions;
  add_file(out, opts, "report.json", doc);
  out.summary = doc;
  out.table = frame_table(report) + assertion_lines(out.assertions);
  write_text_file(opts.out_dir / "summary.txt", out.table);
  out.files.push_back("summary.txt");
  return out;
}

// ---------------------------------------------------------------- scales

CommandOutcome cmd_scales(const Json& cfg, const CommandOptions& opts) {
  check_keys(cfg, {"seed", "reference", "rows", "assert"}, "scales config");
  CommandOutcome out;
  out.command = "scales";
  std::vector<ScaleRow> rows;
  if (get_or(cfg, "reference", !cfg.contains("rows"))) rows = reference_scale_rows();
  if (cfg.contains("rows")) {
    for (const auto& r : cfg["rows"]) {
      check_keys(r, {"name", "inertia", "lambda", "lyapunov", "hbar"}, "scales row");
      ScaleRow row;
      row.name = get_or<std::string>(r, "name", "row " + std::to_string(rows.size() + 1));
      row.input.inertia = r.at("inertia").get<double>();
      row.input.lambda_loc = r.at("lambda").get<double>();
      row.input.hbar = get_or(r, "hbar", row.input.hbar);
      if (r.contains("lyapunov")) row.lyapunov = r["lyapunov"].get<double>();
      rows.push_back(row);
    }
  }
  Json assert_cfg = cfg.value("assert", Json::object());
  check_keys(assert_cfg, {"decades"}, "assert");
  const double decades = get_or(assert_cfg, "decades", 1.0);
  std::vector<std::vector<double>> csv;
  Json jrows = Json::array();
  std::ostringstream table;
  table << std::left << std::setw(10) << "row" << std::setw(14) << "inertia" << std::setw(12) << "Lambda"
        << std::setw(14) << "dx" << std::setw(14) << "dp" << std::setw(14) << "T_loc" << "lambda*T_loc\n";
  for (const auto& row : rows) {
    PointerScales ps = pointer_scales(row.input);
    Json jr{{"name", row.name}, {"inertia", row.input.inertia}, {"lambda", row.input.lambda_loc},
            {"dx", ps.dx},      {"dp", ps.dp},                   {"t_loc", ps.t_loc},
            {"dx_dp_over_hbar", ps.dx * ps.dp / row.input.hbar}};
    double ratio = std::nan("");
    if (row.lyapunov) {
      ChaosMargin cm = chaos_margin(row.input, *row.lyapunov);
      ratio = cm.ratio;
      jr["lyapunov"] = *row.lyapunov;
      jr["chaos_ratio"] = cm.ratio;
      jr["localizes"] = cm.localizes;
    }
    csv.push_back({row.input.inertia, row.input.lambda_loc, ps.dx, ps.dp, ps.t_loc, row.lyapunov.value_or(0.0), ratio});
    auto decade_check = [&](const char* what, const std::optional<double>& ref, double v) {
      if (!ref) return;
      out.check(row.name + " " + what + " decades from reference", 0.0, decades_apart(v, *ref), decades);
    };
    decade_check("dx", row.ref_dx, ps.dx);
    decade_check("dp", row.ref_dp, ps.dp);
    decade_check("T_loc", row.ref_t_loc, ps.t_loc);
    if (row.lyapunov) decade_check("lambda*T_loc", row.ref_ratio, ratio);
    out.check_range(row.name + " dx*dp/hbar", 0.1, 10.0, ps.dx * ps.dp / row.input.hbar);
    jrows.push_back(jr);
    table << std::setw(10) << row.name << std::setw(14) << format_number(row.input.inertia) << std::setw(12)
          << format_number(row.input.lambda_loc) << std::setw(14) << format_number(ps.dx) << std::setw(14)
          << format_number(ps.dp) << std::setw(14) << format_number(ps.t_loc)
          << (row.lyapunov ? format_number(ratio) : std::string("-")) << "\n";
  }
  std::vector<std::string> header{"inertia", "lambda", "dx", "dp", "t_loc", "lyapunov", "chaos_ratio"};
  write_csv(opts.out_dir / "scales.csv", header, csv);
  out.files.push_back("scales.csv");
  Json summary{{"rows", jrows}};
  summary["assertions"] = Json::array();
  for (const auto& a : out.assertions) summary["assertions"].push_back(to_json(a));
  add_file(out, opts, "scales.json", summary);
  out.summary = summary;
  out.table = table.str() + assertion_lines(out.assertions);
  return out;
}

// ---------------------------------------------------------------- dispatch

Json failure_report(const CommandOutcome& outcome) {
  Json failed = Json::array();
  for (const auto& a : outcome.assertions)
    if (!a.pass) failed.push_back(to_json(a));
  return Json{{"command", outcome.command}, {"passed", outcome.passed()}, {"failed", failed}};
}

CommandOutcome run_command(const std::string& name, const Json& config, const CommandOptions& opts) {
  fs::create_directories(opts.out_dir);
  CommandOutcome out;
  if (name == "localize") out = cmd_localize(config, opts);
  else if (name == "collapse") out = cmd_collapse(config, opts);
  else if (name == "unravel") out = cmd_unravel(config, opts);
  else if (name == "frames") out = cmd_frames(config, opts);
  else if (name == "scales") out = cmd_scales(config, opts);
  else throw Error("unknown command '" + name + "'");
  const fs::path failures = opts.out_dir / "failures.json";
  if (out.passed()) {
    fs::remove(failures);
  } else {
    write_json_file(failures, failure_report(out));
  }
  return out;
}

}  // namespace decolab
