#include "dnls/experiments.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <fstream>
#include <future>
#include <random>
#include <thread>

#include "dnls/errors.hpp"
#include "dnls/io.hpp"
#include "dnls/simd.hpp"

namespace dnls {

using nlohmann::json;
namespace fs = std::filesystem;

Field initial_data(const RunConfig& rc, BoundStateSolver& solver) {
  const GridPtr& g = solver.hamiltonian().grid();
  if (!rc.initial.file.empty()) {
    const SnapshotFile f = read_snapshots(rc.initial.file);
    if (f.rows.empty() || f.header.N != g->N() || f.header.L != g->L())
      throw ConfigError("initial data file does not match the configured grid");
    return Field(g, f.rows.back());
  }
  Field u = solver.solve(rc.initial.z0).Q;
  if (rc.initial.shape == "none" || rc.initial.amplitude == 0) return u;
  std::mt19937_64 rng(rc.seed);
  std::uniform_real_distribution<double> width(0.5, 1.5), phase(0.0, 2 * M_PI);
  const double sigma = rc.initial.width > 0 ? rc.initial.width : width(rng);
  const cplx rot = std::exp(cplx(0, phase(rng)));
  const bool odd = rc.initial.shape == "odd_gaussian";
  Field pert = sample(g, [&](double x) {
    const double s = x / sigma;
    return rot * std::exp(-0.5 * s * s) * (odd ? s : 1.0);
  });
  pert *= rc.initial.amplitude / h1_norm(pert);
  return u + pert;
}

StabilityResult run_stability(const RunConfig& rc) {
  const auto start = std::chrono::steady_clock::now();
  StabilityResult r;
  r.delta = rc.initial.amplitude;
  auto g = make_grid(rc.L, rc.N);
  DeltaHamiltonian H(g, rc.params.q);
  BoundStateSolver solver(H, rc.params, rc.bound);
  const Field u0 = initial_data(rc, solver);
  r.u0_h1 = h1_norm(u0);

  EvolutionConfig ec = rc.evolution;
  ec.keep_snapshots = false;
  const double dt_out = ec.time.dt * ec.time.stride;
  const long outputs = ec.time.outputs();
  const long every = std::max(1L, (outputs - 1) / rc.checkpoints);

  XNormAccumulator xacc(dt_out);
  ScatteringAccumulator scat(H);
  long index = 0;
  Tracker tracker(solver, TrackOptions{rc.extract, true}, [&](double t, const Decomposition& dec) {
    xacc.add(dec.v);
    if (index % every == 0 || index == outputs - 1) scat.add(t, dec.v);
    const double denom = l2_norm(dec.v) * std::abs(dec.z);
    if (denom > 0) r.max_phi0_ratio = std::max(r.max_phi0_ratio, std::abs(inner(H.phi0_discrete(), dec.v)) / denom);
  });
  try {
    r.traj = evolve(H, u0, ec, rc.params, [&](double t, const Field& u) {
      if (!tracker.push(t, u)) throw NumericalError(tracker.finish().message);
      ++index;
    });
  } catch (const NumericalError& e) {
    r.failure = e.what();
  }
  r.mt = tracker.finish();
  r.completed = r.failure.empty() && !r.mt.truncated;
  if (!r.mt.t.empty()) {
    r.z0_abs = std::abs(r.mt.z.front());
    for (double v : r.mt.v_h1) r.sup_v_h1 = std::max(r.sup_v_h1, v);
    for (double v : r.mt.ode_residual) r.max_ode_residual = std::max(r.max_ode_residual, v);
    for (const cplx& v : r.mt.rhs) r.max_rhs = std::max(r.max_rhs, std::abs(v));
    r.x = xacc.result();
    r.y = y_norm(r.mt);
    r.zw = zw_norms(r.mt, *g);
    r.za = z_asymptotic(r.mt);
    r.scat = scat.finish();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

json stability_json(const StabilityResult& r) {
  json j;
  j["completed"] = r.completed;
  j["failure"] = r.failure;
  j["delta"] = r.delta;
  j["u0_H1"] = r.u0_h1;
  j["z0_abs"] = r.z0_abs;
  j["sup_v_H1"] = r.sup_v_h1;
  j["X"] = {{"Linf_H1", r.x.linf_h1},
            {"L4_Linf", r.x.l4_linf},
            {"weighted_Lxinf_Lt2", r.x.weighted_lxinf_lt2},
            {"deriv_Lxinf_Lt2", r.x.deriv_lxinf_lt2},
            {"total", r.x.total()},
            {"over_delta", r.delta > 0 ? r.x.total() / r.delta : 0.0}};
  j["Y"] = {{"L1", r.y.l1}, {"L2", r.y.l2}, {"total", r.y.total()}, {"fd_L1", r.y.fd_l1}, {"fd_L2", r.y.fd_l2}};
  j["Z"] = r.zw.Z;
  j["W"] = r.zw.W;
  j["z_sup"] = r.zw.z_sup;
  j["Z_over_zsup"] = r.zw.Z_over_zsup;
  j["z_plus"] = {r.za.z_plus.real(), r.za.z_plus.imag()};
  j["z_plus_tail"] = r.za.tail;
  j["z_plus_converged"] = r.za.converged;
  j["abs_zplus_minus_abs_z0"] = std::abs(std::abs(r.za.z_plus) - r.z0_abs);
  j["max_ode_residual"] = r.max_ode_residual;
  j["max_rhs"] = r.max_rhs;
  j["phi0_coupling_constant"] = r.max_phi0_ratio;
  j["scattering"] = {{"times", r.scat.times},
                     {"cauchy_tail_H1", r.scat.cauchy_tail},
                     {"phi0_component_H1", r.scat.phi0_component},
                     {"spearman_late", r.scat.spearman_late}};
  j["mass_drift_rate"] = r.traj.mass_drift_rate;
  j["absorbed_mass"] = r.traj.absorbed.empty() ? 0.0 : r.traj.absorbed.back();
  j["seconds"] = r.seconds;
  return j;
}

namespace {

json check(const std::string& name, double value, double threshold, bool pass, const std::string& relation) {
  return {{"name", name}, {"value", value}, {"threshold", threshold}, {"relation", relation}, {"pass", pass},
          {"margin", threshold - value}};
}

json verdict(const StabilityResult& r) {
  json v = json::array();
  const double d = r.delta;
  v.push_back(check("decomposition_exists", r.completed ? 1 : 0, 1, r.completed, "=="));
  if (d == 0) {
    v.push_back(check("v_identically_zero", r.sup_v_h1, 1e-8, r.sup_v_h1 <= 1e-8, "<="));
    double spread = 0;
    for (const cplx& z : r.mt.zeta) spread = std::max(spread, std::abs(z - r.mt.zeta.front()));
    v.push_back(check("zeta_constant", spread, 1e-6, spread <= 1e-6, "<="));
    return v;
  }
  v.push_back(check("sup_v_H1_le_3delta", r.sup_v_h1, 3 * d, r.sup_v_h1 <= 3 * d, "<="));
  const double dz = std::abs(std::abs(r.za.z_plus) - r.z0_abs);
  v.push_back(check("zplus_shift_le_10delta2", dz, 10 * d * d, dz <= 10 * d * d, "<="));
  v.push_back(check("cauchy_tail_decreasing", r.scat.spearman_late, 0, r.scat.spearman_late < 0, "<"));
  const auto& pc = r.scat.phi0_component;
  const double ratio = pc.empty() || pc.back() == 0 ? INFINITY : pc.front() / pc.back();
  v.push_back(check("phi0_component_drop_factor", ratio, 2, ratio >= 2, ">="));
  const double ode = r.max_rhs > 0 ? r.max_ode_residual / r.max_rhs : 0;
  v.push_back(check("ode_consistency_relative", ode, 0.05, ode <= 0.05, "<="));
  v.push_back(check("zplus_tail_converged", r.za.tail, std::abs(r.za.z_plus) / 10, r.za.converged, "<="));
  return v;
}

RunConfig with_delta(RunConfig rc, double delta) {
  rc.initial.amplitude = delta;
  rc.raw["initial"]["amplitude"] = delta;
  return rc;
}

void mark_failed(const fs::path& out, const std::string& what) {
  std::ofstream f(out / "FAILED");
  f << what << '\n';
}

}  // namespace

int cmd_bound_state(const json& cfg, const fs::path& out) {
  const RunConfig rc = parse_run_config(cfg);
  const json& b = cfg.at("bound_state");
  auto g = make_grid(rc.L, rc.N);
  DeltaHamiltonian H(g, rc.params.q);
  json report;
  const double E = b.at("E").get<double>();
  const Field Qc = closed_form_Q(E, rc.params, g);
  write_profile_csv(out / "profile_closed_form.csv", cfg, Qc);
  report["closed_form"] = {{"E", E},
                           {"Q0", Qc.at_origin().real()},
                           {"elliptic_residual_L2", elliptic_residual(H, Qc, E, rc.params)},
                           {"jump_defect", jump_defect(Qc, rc.params.q)},
                           {"mass", closed_form_mass(E, rc.params)}};
  if (!b.at("z").is_null()) {
    cplx z = b.at("z").is_array() ? cplx(b["z"][0].get<double>(), b["z"][1].get<double>())
                                  : cplx(b["z"].get<double>(), 0.0);
    BoundStateSolver solver(H, rc.params, rc.bound);
    const BoundState st = solver.solve(z);
    write_profile_csv(out / "profile_fixed_point.csv", cfg, st.Q);
    json fp = {{"z", {z.real(), z.imag()}},
               {"E", st.E},
               {"Q0", {st.Q.at_origin().real(), st.Q.at_origin().imag()}},
               {"iterations", st.iterations},
               {"update_residual", st.update_residual},
               {"elliptic_residual_L2", st.elliptic_residual},
               {"h_H1", h1_norm(st.h)}};
    if (z != 0.0 && classify_branch(st.E, rc.params) == Branch::Focusing) {
      const Field Qr = std::conj(z / std::abs(z)) * st.Q;
      fp["sup_diff_closed_form"] = sup_norm(Qr - closed_form_Q(st.E, rc.params, g));
    }
    report["fixed_point"] = fp;
  }
  if (rc.params.mu < 0) {
    const double Eb = -0.5 * rc.params.q * rc.params.q;
    const double Emin = b.at("mass_curve").at("E_min").get<double>();
    const int n = b.at("mass_curve").at("points").get<int>();
    std::vector<double> Es;
    for (int i = 0; i < n; ++i) Es.push_back(Emin + (Eb - Emin) * i / n);
    CsvWriter w(out / "mass_curve.csv", cfg, {"E", "M"});
    for (const auto& pt : mass_curve(Es, rc.params)) w.row({pt.E, pt.M});
  }
  const E1Result e1 = find_E1(rc.params, b.at("E1_min").get<double>());
  report["E1"] = {{"found", e1.found},
                  {"E1", e1.found ? json(e1.E1) : json()},
                  {"bracket", e1.found ? json{e1.lo, e1.hi} : json()},
                  {"sign_changes", e1.sign_changes},
                  {"diagnostic", e1.diagnostic}};
  write_json_report(out / "bound_state_report.json", cfg, report);
  spdlog::info("bound-state: Q(0) = {:.6f} at E = {}; E1: {}", Qc.at_origin().real(), E, e1.diagnostic);
  return kExitOk;
}

int cmd_evolve(const json& cfg, const fs::path& out) {
  const RunConfig rc = parse_run_config(cfg);
  auto g = make_grid(rc.L, rc.N);
  DeltaHamiltonian H(g, rc.params.q);
  BoundStateSolver solver(H, rc.params, rc.bound);
  const Field u0 = initial_data(rc, solver);
  EvolutionConfig ec = rc.evolution;
  ec.keep_snapshots = false;
  std::unique_ptr<SnapshotWriter> snap;
  if (rc.write_snapshots) {
    SnapshotHeader h;
    h.L = rc.L;
    h.N = rc.N;
    h.q = rc.params.q;
    h.p = rc.params.p;
    h.mu = rc.params.mu;
    h.dt = ec.time.dt;
    h.stride = ec.time.stride;
    snap = std::make_unique<SnapshotWriter>(out / "snapshots.bin", h, cfg);
  }
  Field last = u0;
  json report;
  int code = kExitOk;
  Trajectory tr;
  try {
    tr = evolve(H, u0, ec, rc.params, [&](double, const Field& u) {
      if (snap) snap->write(u);
      last = u;
    });
  } catch (const NumericalError& e) {
    report["failure"] = e.what();
    mark_failed(out, e.what());
    code = kExitNumerical;
  }
  if (snap) snap->close();
  write_trajectory_csv(out / "trajectory.csv", cfg, tr);
  write_profile_csv(out / "final_profile.csv", cfg, last);
  report["scheme"] = tr.scheme;
  report["outputs"] = tr.times.size();
  report["mass_drift_rate"] = tr.mass_drift_rate;
  report["energy_drift_rate"] = tr.energy_drift_rate;
  report["absorbed_mass"] = tr.absorbed.empty() ? 0.0 : tr.absorbed.back();
  report["simd"] = simd::active_name();
  write_json_report(out / "evolve_report.json", cfg, report);
  return code;
}

int cmd_stability_experiment(const json& cfg, const fs::path& out) {
  const RunConfig rc = parse_run_config(cfg);
  const auto deltas = cfg.at("sweep").at("deltas").get<std::vector<double>>();
  if (!deltas.empty()) {
    // delta-sweep mode: scaling fits for Y and ||z_plus| - |z(0)||.
    json runs = json::array();
    RVec ds, ys, shifts;
    bool ok = true;
    for (double d : deltas) {
      if (!(d > 0)) throw ConfigError("sweep deltas must be positive");
      const StabilityResult r = run_stability(with_delta(rc, d));
      json j = stability_json(r);
      runs.push_back(j);
      ok = ok && r.completed;
      ds.push_back(d);
      ys.push_back(r.y.total());
      shifts.push_back(std::max(1e-300, std::abs(std::abs(r.za.z_plus) - r.z0_abs)));
      spdlog::info("delta {}: Y = {:.3e}, shift = {:.3e}, {:.0f}s", d, r.y.total(), shifts.back(), r.seconds);
    }
    json body = {{"runs", runs},
                 {"fitted_order_Y", ds.size() > 1 ? loglog_slope(ds, ys) : NAN},
                 {"fitted_order_zplus_shift", ds.size() > 1 ? loglog_slope(ds, shifts) : NAN}};
    write_json_report(out / "sweep_report.json", cfg, body);
    if (!ok) {
      mark_failed(out, "at least one sweep run did not complete");
      return kExitPartial;
    }
    return kExitOk;
  }
  const StabilityResult r = run_stability(rc);
  write_modulation_csv(out / "modulation.csv", cfg, r.mt);
  write_trajectory_csv(out / "trajectory.csv", cfg, r.traj);
  json norms = stability_json(r);
  if (cfg.at("diagnostics").value("refine", false)) {
    RunConfig fine = rc;
    fine.N = 2 * rc.N;
    const double fdt = cfg["diagnostics"].value("refine_dt", rc.evolution.time.dt / 2);
    const double dt_out = rc.evolution.time.dt * rc.evolution.time.stride;
    fine.evolution.time = TimeGrid(fdt, rc.evolution.time.T, static_cast<int>(std::lround(dt_out / fdt)));
    const StabilityResult rf = run_stability(fine);
    norms["refined"] = stability_json(rf);
    norms["X_refinement_change"] = std::abs(rf.x.total() - r.x.total()) / r.x.total();
  }
  write_json_report(out / "norms.json", cfg, norms);
  const json v = verdict(r);
  write_json_report(out / "verdict.json", cfg, {{"checks", v}});
  if (!r.scat.v_plus.grid()) {
    mark_failed(out, r.failure.empty() ? "no tracked snapshots" : r.failure);
    return kExitPartial;
  }
  SnapshotHeader h;
  h.L = rc.L;
  h.N = rc.N;
  h.q = rc.params.q;
  h.p = rc.params.p;
  h.mu = rc.params.mu;
  h.dt = rc.evolution.time.dt;
  h.stride = rc.evolution.time.stride;
  {
    SnapshotWriter w(out / "v_plus.bin", h, cfg);
    w.write(r.scat.v_plus);
  }
  if (!r.completed) {
    mark_failed(out, r.failure.empty() ? r.mt.message : r.failure);
    return kExitPartial;
  }
  return kExitOk;
}

int cmd_linear_checks(const json& cfg, const fs::path& out) {
  const json& l = cfg.at("linear_checks");
  LinearCheckConfig lc;
  lc.q = cfg.at("params").at("q").get<double>();
  lc.seed = cfg.at("seed").get<std::uint64_t>();
  lc.samples = l.at("samples");
  lc.dispersive_samples = l.at("dispersive_samples");
  lc.L = l.at("L");
  lc.N = l.at("N");
  lc.t_min = l.at("t_min");
  lc.t_max = l.at("t_max");
  lc.t_points = l.at("t_points");
  lc.smoothing_T = l.at("smoothing_T");
  lc.smoothing_dt = l.at("smoothing_dt");
  lc.smoothing_L = l.at("smoothing_L");
  lc.smoothing_N = l.at("smoothing_N");
  lc.refine = l.at("refine");
  if (!(lc.q < 0) || lc.samples < 1 || lc.dispersive_samples < 2 || lc.t_points < 2)
    throw ConfigError("invalid linear_checks configuration");
  const LinearCheckReport rep = check_linear_estimates(lc);
  json checks = json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name},
                      {"ensemble", c.ensemble},
                      {"ratios", c.ratios},
                      {"max_ratio", c.max_ratio},
                      {"fitted_exponent", std::isnan(c.fitted_exponent) ? json(nullptr) : json(c.fitted_exponent)}});
  write_json_report(out / "linear_checks.json", cfg, {{"checks", checks}, {"phi0_max_lhs", rep.trivial_lhs}});
  return kExitOk;
}

int cmd_sweep(const json& cfg, const fs::path& out) {
  const json& s = cfg.at("sweep");
  const std::string command = s.at("command").get<std::string>();
  const json runs = s.at("runs");
  if (!runs.is_array() || runs.empty()) throw ConfigError("sweep.runs must be a non-empty list of override sets");
  using Cmd = int (*)(const json&, const fs::path&);
  Cmd fn = command == "bound-state"            ? cmd_bound_state
           : command == "evolve"               ? cmd_evolve
           : command == "stability-experiment" ? cmd_stability_experiment
           : command == "linear-checks"        ? cmd_linear_checks
                                               : nullptr;
  if (!fn) throw ConfigError("sweep.command must name a single-run subcommand");
  // Validate every run's configuration up front; a malformed entry is a config error.
  std::vector<json> cfgs;
  for (const auto& r : runs) {
    json c = cfg;
    c["sweep"]["runs"] = json::array();
    if (r.is_object()) {
      for (auto it = r.begin(); it != r.end(); ++it) apply_override(c, it.key() + "=" + it.value().dump());
    } else if (r.is_array()) {
      for (const auto& a : r) apply_override(c, a.get<std::string>());
    } else {
      throw ConfigError("each sweep run must be an object of dot-path overrides or a list of key=value strings");
    }
    cfgs.push_back(std::move(c));
  }
  unsigned workers = s.value("workers", 0);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  struct Outcome {
    int code = 0;
    std::string message;
  };
  std::vector<Outcome> outcomes(cfgs.size());
  auto run_one = [&](size_t i) {
    const fs::path dir = out / ("run_" + std::to_string(i));
    fs::create_directories(dir);
    try {
      outcomes[i].code = fn(cfgs[i], dir);
    } catch (const ConfigError& e) {
      outcomes[i] = {kExitConfig, e.what()};
    } catch (const NumericalError& e) {
      outcomes[i] = {kExitNumerical, e.what()};
    } catch (const std::exception& e) {
      outcomes[i] = {kExitPartial, e.what()};
    }
    if (outcomes[i].code != kExitOk) mark_failed(dir, outcomes[i].message);
  };
  for (size_t base = 0; base < cfgs.size(); base += workers) {
    std::vector<std::future<void>> batch;
    for (size_t i = base; i < std::min(cfgs.size(), base + workers); ++i)
      batch.push_back(std::async(std::launch::async, run_one, i));
    for (auto& f : batch) f.get();
  }
  CsvWriter w(out / "summary.csv", cfg, {"run", "exit_code"});
  json summary = json::array();
  bool ok = true;
  for (size_t i = 0; i < outcomes.size(); ++i) {
    w.row({double(i), double(outcomes[i].code)});
    summary.push_back({{"run", i}, {"exit_code", outcomes[i].code}, {"message", outcomes[i].message}});
    ok = ok && outcomes[i].code == kExitOk;
  }
  write_json_report(out / "sweep_summary.json", cfg, {{"runs", summary}});
  return ok ? kExitOk : kExitPartial;
}

}  // namespace dnls
