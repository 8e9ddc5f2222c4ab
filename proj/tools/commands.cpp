#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "spde/error.hpp"
#include "spde/parallel.hpp"

namespace spde::app {

namespace fs = std::filesystem;

namespace {

std::string timestamp_comment(const CommandOptions& opts) {
  if (opts.no_timestamp) return {};
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[64];
  std::strftime(buf, sizeof buf, "generated %Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path output_dir(const RunConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create output directory '" + dir.string() + "'");
  return dir;
}

void write_json(const fs::path& path, nlohmann::json j, const CommandOptions& opts) {
  if (!opts.no_timestamp) j["generated"] = timestamp_comment(opts).substr(10);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

std::ofstream open_text(const fs::path& path, const CommandOptions& opts) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  const std::string c = timestamp_comment(opts);
  if (!c.empty()) out << "# " << c << '\n';
  return out;
}

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string describe_problem(const RunConfig& cfg, std::size_t points) {
  return cfg.problem + ", " + describe(cfg.noise) + ", n_points " + std::to_string(points);
}

nlohmann::json msd_summary(const MsdEstimate& est, std::size_t points, const std::string& csv) {
  return {{"n_points", points},
          {"csv", csv},
          {"n_paths", est.n_paths},
          {"blowup_fraction", est.blowup_fraction},
          {"steps_recorded", est.size()},
          {"msd_initial", est.msd.front()},
          {"msd_final", est.msd.back()}};
}

}  // namespace

RunConfig prepare(const CommandOptions& opts) {
  RunConfig cfg = load_config(opts.config_path);
  if (opts.out_dir) cfg.output_dir = *opts.out_dir;
  if (opts.paths) {
    if (*opts.paths < 2) throw ConfigError(ConfigErrorKind::kInvalidValue, "--paths must be >= 2");
    cfg.n_paths = *opts.paths;
    cfg.order.n_paths = *opts.paths;
  }
  if (opts.seed) cfg.scheme.seed = *opts.seed;
  return cfg;
}

int cmd_analyze(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  const std::size_t points = cfg.n_points.front();
  const SemiDiscreteProblem problem = cfg.make_problem(points);
  const auto [u0, y0] = sample_initial(problem, cfg.initial_condition());
  const AnalyzeConfig& a = cfg.analyze;
  const MVariant variant = cfg.effective_m_variant();

  nlohmann::json extra;
  AnalysisConstants c;
  const bool all_supplied = a.norm_A && a.M && a.mu && a.L_g;
  if (all_supplied) {
    c = AnalysisConstants::make(*a.norm_A, *a.M, variant, *a.L_g, *a.mu, *a.L_g * *a.L_g);
    extra["constants_source"] = "config";
  } else {
    const DerivedConstants d =
        derive_constants(problem, cfg.scheme, u0, a.m_paths, variant, cfg.scheme.seed);
    const double norm_A = a.norm_A.value_or(d.constants.norm_A);
    const double M = a.M.value_or(d.constants.M);
    const double mu = a.mu.value_or(d.constants.mu);
    const double L_g = a.L_g.value_or(d.constants.L_g);
    c = AnalysisConstants::make(norm_A, M, variant, L_g, mu, L_g * L_g);
    extra["constants_source"] = "estimated";
    extra["M_standard_error"] = d.m_estimate.standard_error;
    extra["M_argmax_step"] = d.m_estimate.argmax_step;
    extra["M_paths"] = d.m_estimate.n_paths;
    extra["M_blowup_fraction"] = d.m_estimate.blowup_fraction;
    extra["M_reliable"] = d.m_estimate.reliable;
    extra["mu_source"] = a.mu ? "config" : d.mu_source;
    extra["lipschitz_source"] = a.L_g ? "config" : d.lipschitz_source;
  }
  const int p = a.order_p.value_or(cfg.problem == "cahn_hilliard" ? 4 : 2);
  const NoiseClass nc = is_additive(cfg.noise) ? NoiseClass::kAdditive : NoiseClass::kMultiplicative;
  const ContractivityReport r =
      evaluate_predicates(c, cfg.scheme.scheme, nc, cfg.scheme.theta, cfg.scheme.dt,
                          problem.grid.dx, p, cfg.scheme.n_steps, a.framework);

  out << describe_problem(cfg, points) << "\n" << human_readable(r);
  nlohmann::json j = to_json(r);
  j["problem"] = cfg.problem;
  j["n_points"] = points;
  for (const auto& [k, v] : extra.items()) j[k] = v;
  const fs::path dir = output_dir(cfg);
  write_json(dir / "report.json", j, opts);
  out << "wrote " << (dir / "report.json").string() << "\n";
  return kExitOk;
}

int cmd_msd(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  const std::size_t points = cfg.n_points.front();
  const SemiDiscreteProblem problem = cfg.make_problem(points);
  const auto [u0, y0] = sample_initial(problem, cfg.initial_condition());
  MsdEstimate est = run_msd(problem, cfg.scheme, u0, y0, cfg.n_paths, default_worker_count());
  est.config_echo = cfg.echo();

  const fs::path dir = output_dir(cfg);
  export_csv(est, dir / "msd.csv", timestamp_comment(opts));
  const PlotCurve curve{"msd.csv", "n_points = " + std::to_string(points)};
  export_plot_script(std::span(&curve, 1), dir / "msd.gp", describe_problem(cfg, points));
  nlohmann::json summary = msd_summary(est, points, "msd.csv");
  summary["config"] = est.config_echo;
  write_json(dir / "msd.json", summary, opts);

  out << describe_problem(cfg, points) << ": msd " << est.msd.front() << " -> "
      << est.msd.back() << " over " << est.size() - 1 << " steps, blow-up fraction "
      << est.blowup_fraction << "\nwrote msd.csv, msd.gp, msd.json to " << dir.string() << "\n";
  return est.blowup_fraction > 0.5 ? kExitBlowUp : kExitOk;
}

int cmd_sweep(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  std::vector<GridSpec> grids;
  for (std::size_t n : cfg.n_points) grids.push_back(build_grid(cfg.x_left, cfg.x_right, n));
  const ProblemFactory factory = [&](const GridSpec& g) { return cfg.make_problem(g.n_points); };
  std::vector<MsdEstimate> ests = run_dx_sweep(factory, cfg.scheme, grids, cfg.n_paths,
                                               cfg.initial_condition(), default_worker_count());

  const fs::path dir = output_dir(cfg);
  std::vector<PlotCurve> curves;
  nlohmann::json summary;
  summary["config"] = cfg.echo();
  summary["grids"] = nlohmann::json::array();
  bool dominated = false;
  for (std::size_t i = 0; i < ests.size(); ++i) {
    const std::size_t n = cfg.n_points[i];
    const std::string name = "sweep_n" + std::to_string(n) + ".csv";
    ests[i].config_echo = cfg.echo();
    export_csv(ests[i], dir / name, timestamp_comment(opts));
    curves.push_back({name, "n_points = " + std::to_string(n)});
    summary["grids"].push_back(msd_summary(ests[i], n, name));
    dominated = dominated || ests[i].blowup_fraction > 0.5;
    out << "n_points " << n << ": msd " << ests[i].msd.front() << " -> " << ests[i].msd.back()
        << ", blow-up fraction " << ests[i].blowup_fraction << "\n";
  }
  export_plot_script(curves, dir / "sweep.gp", cfg.problem + ", " + describe(cfg.noise));
  write_json(dir / "sweep.json", summary, opts);
  out << "wrote " << ests.size() << " CSV files, sweep.gp, sweep.json to " << dir.string() << "\n";
  return dominated ? kExitBlowUp : kExitOk;
}

int cmd_order(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  const std::size_t points = cfg.n_points.front();
  const SemiDiscreteProblem problem = cfg.make_problem(points);
  const auto [u0, y0] = sample_initial(problem, cfg.initial_condition());
  StrongOrderOptions so;
  so.final_time = cfg.order.final_time.value_or(cfg.scheme.final_time());
  so.reference_refinement = cfg.order.reference_refinement;
  so.n_paths = cfg.order.n_paths;
  so.seed = cfg.scheme.seed;
  so.workers = default_worker_count();
  so.error_norm = cfg.order.error_norm;
  Vector dts;
  for (int k : cfg.order.dt_exponents) dts.push_back(std::ldexp(so.final_time, -k));
  const StrongOrderResult r = strong_order(problem, cfg.scheme, u0, dts, so);

  const fs::path dir = output_dir(cfg);
  std::ofstream csv = open_text(dir / "order.csv", opts);
  csv << "dt,error\n";
  for (std::size_t i = 0; i < r.dts.size(); ++i) csv << g17(r.dts[i]) << ',' << g17(r.errors[i]) << '\n';
  csv.close();
  if (!csv) throw Error(ErrorCode::kIoError, "write failed for order.csv");
  write_json(dir / "order.json",
             {{"config", cfg.echo()},
              {"final_time", so.final_time},
              {"reference_dt", r.reference_dt},
              {"n_paths", so.n_paths},
              {"error_norm", so.error_norm == ErrorNorm::kGridL2 ? "grid_l2" : "lowest_mode"},
              {"dt", r.dts},
              {"error", r.errors},
              {"slope", r.slope}},
             opts);

  out << describe_problem(cfg, points) << ", theta " << cfg.scheme.theta << ", T "
      << so.final_time << "\n";
  for (std::size_t i = 0; i < r.dts.size(); ++i) {
    out << "  dt " << r.dts[i] << "  error " << r.errors[i] << "\n";
  }
  out << "slope " << r.slope << "\n";
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  const std::size_t points = cfg.n_points.front();
  const SemiDiscreteProblem problem = cfg.make_problem(points);
  const auto [u0, y0] = sample_initial(problem, cfg.initial_condition());
  const PairTrajectory tr = simulate_pair(problem, cfg.scheme, u0, y0, true, 0);

  const fs::path dir = output_dir(cfg);
  {
    std::ofstream f = open_text(dir / "simulate.csv", opts);
    f << "step,time,z_sqnorm,newton_iters\n";
    for (std::size_t n = 0; n < tr.times.size(); ++n) {
      f << n << ',' << g17(tr.times[n]) << ',' << g17(tr.z_sqnorms[n]) << ','
        << tr.newton_iters[n] << '\n';
    }
    if (!f) throw Error(ErrorCode::kIoError, "write failed for simulate.csv");
  }
  auto dump_states = [&](const char* name, const std::vector<Vector>& states) {
    std::ofstream f = open_text(dir / name, opts);
    f << "step,time";
    for (std::size_t i = 0; i < problem.state_dim(); ++i) f << ",x" << i;
    f << '\n';
    for (std::size_t n = 0; n < states.size(); ++n) {
      f << n << ',' << g17(tr.times[n]);
      for (double v : states[n]) f << ',' << g17(v);
      f << '\n';
    }
    if (!f) throw Error(ErrorCode::kIoError, std::string("write failed for ") + name);
  };
  dump_states("u.csv", tr.u_states);
  dump_states("y.csv", tr.y_states);

  out << describe_problem(cfg, points) << ": |Z|^2 " << tr.z_sqnorms.front() << " -> "
      << tr.z_sqnorms.back() << " over " << tr.times.size() - 1 << " steps";
  if (tr.blowup_step) out << " (blew up at step " << *tr.blowup_step << ")";
  out << "\nwrote simulate.csv, u.csv, y.csv to " << dir.string() << "\n";
  return tr.blowup_step ? kExitBlowUp : kExitOk;
}

int run_command(const std::string& command, const CommandOptions& opts, std::ostream& out,
                std::ostream& err) {
  try {
    const RunConfig cfg = prepare(opts);
    if (command == "analyze") return cmd_analyze(cfg, opts, out);
    if (command == "msd") return cmd_msd(cfg, opts, out);
    if (command == "sweep") return cmd_sweep(cfg, opts, out);
    if (command == "order") return cmd_order(cfg, opts, out);
    if (command == "simulate") return cmd_simulate(cfg, opts, out);
    err << "spde: unknown subcommand '" << command << "'\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "spde: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "spde: " << to_string(e.code()) << ": " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::kIoError:
      case ErrorCode::kEmptyInput:
        return kExitIo;
      case ErrorCode::kBlowUp:
        return kExitBlowUp;
      case ErrorCode::kSingularMatrix:
      case ErrorCode::kNonConvergence:
      case ErrorCode::kDegenerateRegression:
      case ErrorCode::kDivisionByZero:
        return kExitNumerical;
      default:
        return kExitConfig;
    }
  } catch (const fs::filesystem_error& e) {
    err << "spde: io-error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "spde: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace spde::app
