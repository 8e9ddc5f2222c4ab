#include "spde/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "spde/error.hpp"
#include "spde/parallel.hpp"

namespace spde {

namespace {

nlohmann::json echo(const SemiDiscreteProblem& problem, const SchemeConfig& cfg,
                    std::size_t n_paths) {
  return {
      {"problem", problem.name},
      {"noise", describe(problem.noise)},
      {"x_left", problem.grid.x_left},
      {"x_right", problem.grid.x_right},
      {"n_points", problem.grid.n_points},
      {"scheme", to_string(cfg.scheme)},
      {"theta", cfg.theta},
      {"dt", cfg.dt},
      {"n_steps", cfg.n_steps},
      {"seed", cfg.seed},
      {"n_paths", n_paths},
  };
}

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

MsdEstimate run_msd(const SemiDiscreteProblem& problem, const SchemeConfig& cfg,
                    std::span<const double> u0, std::span<const double> y0,
                    std::size_t n_paths, std::size_t workers) {
  if (n_paths < 2) throw Error(ErrorCode::kInvalidArgument, "run_msd: n_paths must be >= 2");
  validate(cfg);

  std::vector<PairTrajectory> paths(n_paths);
  parallel_for(n_paths, workers == 0 ? default_worker_count() : workers, [&](std::size_t p) {
    paths[p] = simulate_pair(problem, cfg, u0, y0, false, p);
  });

  MsdEstimate est;
  est.n_paths = n_paths;
  est.config_echo = echo(problem, cfg, n_paths);
  std::size_t blown = 0;
  std::size_t longest = 0;
  for (const auto& tr : paths) {
    blown += tr.blowup_step ? 1 : 0;
    longest = std::max(longest, tr.z_sqnorms.size());
  }
  est.blowup_fraction = static_cast<double>(blown) / static_cast<double>(n_paths);

  for (std::size_t n = 0; n < longest; ++n) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& tr : paths) {
      if (n < tr.z_sqnorms.size()) {
        sum += tr.z_sqnorms[n];
        ++count;
      }
    }
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (const auto& tr : paths) {
      if (n < tr.z_sqnorms.size()) {
        const double d = tr.z_sqnorms[n] - mean;
        ss += d * d;
      }
    }
    const double se =
        count > 1 ? std::sqrt(ss / static_cast<double>(count - 1) / static_cast<double>(count))
                  : 0.0;
    est.times.push_back(static_cast<double>(n) * cfg.dt);
    est.msd.push_back(mean);
    est.std_error.push_back(se);
  }
  return est;
}

InitialCondition InitialCondition::sine(int mode, double u_amplitude, double y_amplitude) {
  const double k = static_cast<double>(mode) * std::numbers::pi;
  InitialCondition ic;
  ic.u0 = [=](double x, std::size_t) { return u_amplitude * std::sin(k * x); };
  ic.y0 = [=](double x, std::size_t) { return y_amplitude * std::sin(k * x); };
  return ic;
}

std::pair<Vector, Vector> sample_initial(const SemiDiscreteProblem& problem,
                                         const InitialCondition& ic) {
  const GridSpec& g = problem.grid;
  const std::size_t nc = problem.n_components;
  const double len = g.x_right - g.x_left;
  Vector u(problem.state_dim());
  Vector y(problem.state_dim());
  for (std::size_t i = 0; i < problem.nodes(); ++i) {
    const double xhat = (g.unknown_node(i) - g.x_left) / len;
    for (std::size_t c = 0; c < nc; ++c) {
      u[i * nc + c] = ic.u0(xhat, c);
      y[i * nc + c] = ic.y0(xhat, c);
    }
  }
  return {std::move(u), std::move(y)};
}

std::vector<MsdEstimate> run_dx_sweep(const ProblemFactory& factory, const SchemeConfig& cfg,
                                      std::span<const GridSpec> grids, std::size_t n_paths,
                                      const InitialCondition& ic, std::size_t workers) {
  if (grids.empty()) throw Error(ErrorCode::kEmptyInput, "run_dx_sweep: empty grid list");
  std::vector<MsdEstimate> out;
  out.reserve(grids.size());
  for (const auto& g : grids) {
    const SemiDiscreteProblem problem = factory(g);
    const auto [u0, y0] = sample_initial(problem, ic);
    out.push_back(run_msd(problem, cfg, u0, y0, n_paths, workers));
  }
  return out;
}

std::pair<double, double> least_squares_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::kDegenerateRegression, "regression needs at least two points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::kDegenerateRegression, "regression: x values coincide");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

StrongOrderResult strong_order(const SemiDiscreteProblem& problem, const SchemeConfig& cfg,
                               std::span<const double> u0, std::span<const double> dt_list,
                               const StrongOrderOptions& opts) {
  if (dt_list.size() < 2) {
    throw Error(ErrorCode::kDegenerateRegression, "strong_order: need at least two step sizes");
  }
  if (opts.n_paths == 0 || opts.reference_refinement == 0 || !(opts.final_time > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "strong_order: n_paths, reference_refinement and final_time must be positive");
  }
  if (u0.size() != problem.state_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "strong_order: initial state length mismatch");
  }
  const double finest = *std::min_element(dt_list.begin(), dt_list.end());
  if (!(finest > 0.0)) throw Error(ErrorCode::kInvalidArgument, "strong_order: dt must be > 0");
  const double dt_ref = finest / static_cast<double>(opts.reference_refinement);

  auto integer_ratio = [](double num, double den, const char* what) {
    const double r = num / den;
    const double k = std::round(r);
    if (k < 1.0 || std::abs(r - k) > 1e-9 * k) {
      throw Error(ErrorCode::kInvalidArgument, std::string("strong_order: ") + what);
    }
    return static_cast<std::size_t>(k);
  };
  const std::size_t fine_steps =
      integer_ratio(opts.final_time, dt_ref, "final_time must be a multiple of every dt");

  // Level 0 is the reference.
  std::vector<std::size_t> ratio{1};
  std::vector<Stepper> steppers;
  steppers.reserve(dt_list.size() + 1);
  auto level_cfg = [&](double dt, std::size_t steps) {
    SchemeConfig c = cfg;
    c.dt = dt;
    c.n_steps = steps;
    return c;
  };
  steppers.emplace_back(problem, level_cfg(dt_ref, fine_steps));
  for (double dt : dt_list) {
    const std::size_t r = integer_ratio(dt, dt_ref, "dt list must be a refinement chain");
    if (fine_steps % r != 0) {
      throw Error(ErrorCode::kInvalidArgument, "strong_order: final_time must be a multiple of dt");
    }
    ratio.push_back(r);
    steppers.emplace_back(problem, level_cfg(dt, fine_steps / r));
  }
  const std::size_t levels = ratio.size();
  const std::size_t dim = problem.state_dim();
  const double scale = steppers.front().noise_scale();

  const GridSpec& grid = problem.grid;
  const std::size_t nc = problem.n_components;
  Vector mode(problem.nodes());
  for (std::size_t i = 0; i < mode.size(); ++i) {
    const double len = grid.x_right - grid.x_left;
    mode[i] = std::sqrt(2.0 / len) *
              std::sin(std::numbers::pi * (grid.unknown_node(i) - grid.x_left) / len);
  }
  auto error_sq = [&](const Vector& a, const Vector& b) {
    if (opts.error_norm == ErrorNorm::kGridL2) {
      return deviation_sqnorm(a, b, NormScaling::kSqrtDx, grid.dx);
    }
    double total = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      double proj = 0.0;
      for (std::size_t i = 0; i < mode.size(); ++i) {
        proj += (a[i * nc + c] - b[i * nc + c]) * mode[i] * grid.dx;
      }
      total += proj * proj;
    }
    return total;
  };

  // sq_err[path * levels + l], level 0 unused
  std::vector<double> sq_err(opts.n_paths * levels, 0.0);
  std::vector<char> diverged(opts.n_paths, 0);
  const std::size_t workers = opts.workers == 0 ? default_worker_count() : opts.workers;
  parallel_for(opts.n_paths, workers, [&](std::size_t p) {
    auto rng = path_rng(opts.seed, p);
    std::vector<Vector> x(levels, Vector(u0.begin(), u0.end()));
    std::vector<Vector> acc(levels, Vector(dim, 0.0));
    for (std::size_t n = 1; n <= fine_steps; ++n) {
      Vector dw = sample_wiener_increments(rng, dim, dt_ref);
      for (auto& v : dw) v *= scale;
      for (std::size_t l = 0; l < levels; ++l) {
        for (std::size_t i = 0; i < dim; ++i) acc[l][i] += dw[i];
        if (n % ratio[l] != 0) continue;
        StepResult s = steppers[l].step(x[l], acc[l]);
        if (!s.ok()) {
          diverged[p] = 1;
          return;
        }
        x[l] = std::move(s.x);
        std::fill(acc[l].begin(), acc[l].end(), 0.0);
      }
    }
    for (std::size_t l = 1; l < levels; ++l) {
      sq_err[p * levels + l] = error_sq(x[l], x[0]);
    }
  });
  if (std::any_of(diverged.begin(), diverged.end(), [](char c) { return c != 0; })) {
    throw Error(ErrorCode::kBlowUp, "strong_order: a path diverged; reduce the step sizes");
  }

  StrongOrderResult res;
  res.reference_dt = dt_ref;
  Vector log_dt;
  Vector log_err;
  for (std::size_t l = 1; l < levels; ++l) {
    double s = 0.0;
    for (std::size_t p = 0; p < opts.n_paths; ++p) s += sq_err[p * levels + l];
    const double err = std::sqrt(s / static_cast<double>(opts.n_paths));
    if (!(err > 0.0) || !std::isfinite(err)) {
      throw Error(ErrorCode::kDegenerateRegression, "strong_order: error is zero or non-finite");
    }
    res.dts.push_back(dt_list[l - 1]);
    res.errors.push_back(err);
    log_dt.push_back(std::log(dt_list[l - 1]));
    log_err.push_back(std::log(err));
  }
  std::tie(res.slope, res.intercept) = least_squares_fit(log_dt, log_err);
  return res;
}

void export_csv(const MsdEstimate& est, const std::filesystem::path& path,
                const std::string& comment) {
  if (est.msd.empty()) throw Error(ErrorCode::kEmptyInput, "export_csv: estimate has no rows");
  if (est.times.size() != est.msd.size() || est.std_error.size() != est.msd.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "export_csv: column lengths differ");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  if (!comment.empty()) out << "# " << comment << "\n";
  out << "step,time,msd,stderr\n";
  for (std::size_t n = 0; n < est.msd.size(); ++n) {
    out << n << ',' << format_g17(est.times[n]) << ',' << format_g17(est.msd[n]) << ','
        << format_g17(est.std_error[n]) << '\n';
  }
  out.flush();
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

MsdEstimate parse_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  MsdEstimate est;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "step,time,msd,stderr") {
        throw Error(ErrorCode::kIoError, "unexpected CSV header in " + path.string());
      }
      header = true;
      continue;
    }
    std::istringstream row(line);
    std::string cell[4];
    for (auto& c : cell) std::getline(row, c, ',');
    try {
      est.times.push_back(std::stod(cell[1]));
      est.msd.push_back(std::stod(cell[2]));
      est.std_error.push_back(std::stod(cell[3]));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kIoError, "malformed CSV row: " + line);
    }
  }
  if (est.msd.empty()) throw Error(ErrorCode::kEmptyInput, "no data rows in " + path.string());
  return est;
}

void export_plot_script(std::span<const PlotCurve> curves, const std::filesystem::path& path,
                        const std::string& title) {
  if (curves.empty()) throw Error(ErrorCode::kEmptyInput, "export_plot_script: no curves");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  out << "# gnuplot script; run from this directory: gnuplot " << path.filename().string()
      << "\n"
      << "set datafile separator ','\n"
      << "set datafile commentschars '#'\n"
      << "set key autotitle columnhead\n"
      << "set terminal pngcairo size 900,600\n"
      << "set output '" << path.stem().string() << ".png'\n"
      << "set title '" << title << "'\n"
      << "set xlabel 't'\n"
      << "set ylabel 'E|U_n - Y_n|^2'\n"
      << "set logscale y\n"
      << "set format y '10^{%T}'\n"
      << "plot \\\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    out << "  '" << curves[i].csv_file << "' using 2:3 with lines lw 2 title '"
        << curves[i].label << "'" << (i + 1 < curves.size() ? ", \\\n" : "\n");
  }
  out.flush();
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

}  // namespace spde
