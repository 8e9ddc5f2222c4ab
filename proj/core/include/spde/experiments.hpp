#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spde/band_matrix.hpp"
#include "spde/grid.hpp"
#include "spde/integrators.hpp"
#include "spde/problems.hpp"

namespace spde {

struct MsdEstimate {
  Vector times;
  Vector msd;        // mean of |Z_n|^2 over paths alive at step n
  Vector std_error;  // standard error of that mean; 0 with a single live path
  std::size_t n_paths = 0;
  double blowup_fraction = 0.0;
  nlohmann::json config_echo;

  std::size_t size() const noexcept { return msd.size(); }
};

/// Runs n_paths pairs (path p uses path_rng(cfg.seed, p)) and averages
/// |Z_n|^2 per step. A path stops contributing at its blow-up step; the
/// estimate is truncated after the last step any path reached. A run where
/// every path blew up is returned, not thrown, with blowup_fraction = 1.
MsdEstimate run_msd(const SemiDiscreteProblem& problem, const SchemeConfig& cfg,
                    std::span<const double> u0, std::span<const double> y0,
                    std::size_t n_paths, std::size_t workers = 0);

/// Initial profiles as functions of the unit-normalized position xhat in
/// [0, 1] and the component index.
struct InitialCondition {
  std::function<double(double xhat, std::size_t comp)> u0;
  std::function<double(double xhat, std::size_t comp)> y0;

  /// u0 = a_u sin(k pi xhat), y0 = a_y sin(k pi xhat) for every component.
  static InitialCondition sine(int mode = 1, double u_amplitude = 1.0, double y_amplitude = -1.0);
};

/// Samples both profiles at the unknown nodes of `problem`, interleaved.
std::pair<Vector, Vector> sample_initial(const SemiDiscreteProblem& problem,
                                         const InitialCondition& ic);

using ProblemFactory = std::function<SemiDiscreteProblem(const GridSpec&)>;

/// One run_msd per grid with shared cfg; initial data resampled per grid.
std::vector<MsdEstimate> run_dx_sweep(const ProblemFactory& factory, const SchemeConfig& cfg,
                                      std::span<const GridSpec> grids, std::size_t n_paths,
                                      const InitialCondition& ic, std::size_t workers = 0);

/// Functional in which endpoint errors are measured. kGridL2 is the
/// dx-weighted Euclidean norm; kLowestMode is the modulus of the projection
/// onto sqrt(2/len) sin(pi xhat), summed over components.
enum class ErrorNorm { kGridL2, kLowestMode };

struct StrongOrderOptions {
  double final_time = 1.0;
  /// Reference step = min(dt_list) / reference_refinement.
  std::size_t reference_refinement = 8;
  std::size_t n_paths = 200;
  std::uint64_t seed = 1;
  std::size_t workers = 0;
  ErrorNorm error_norm = ErrorNorm::kGridL2;
};

struct StrongOrderResult {
  double slope = 0.0;
  double intercept = 0.0;
  Vector dts;
  Vector errors;  // RMS endpoint error in opts.error_norm
  double reference_dt = 0.0;
};

/// Every dt in dt_list and the reference step are driven by the same fine
/// Brownian path (fine increments summed over each coarse step). cfg supplies
/// theta, scheme, Newton settings and noise scaling; dt and n_steps are
/// overwritten per level. Throws kDegenerateRegression when fewer than two
/// distinct steps or a non-positive error occur, kBlowUp when any level diverges.
StrongOrderResult strong_order(const SemiDiscreteProblem& problem, const SchemeConfig& cfg,
                               std::span<const double> u0, std::span<const double> dt_list,
                               const StrongOrderOptions& opts);

/// Least-squares slope and intercept of y against x.
std::pair<double, double> least_squares_fit(std::span<const double> x, std::span<const double> y);

/// Writes `step,time,msd,stderr` with %.17g values. A non-empty comment is
/// written first as "# <comment>". Throws kEmptyInput, kIoError.
void export_csv(const MsdEstimate& est, const std::filesystem::path& path,
                const std::string& comment = {});

/// Reads a file written by export_csv (comment lines skipped).
MsdEstimate parse_csv(const std::filesystem::path& path);

struct PlotCurve {
  std::string csv_file;  // as referenced from the script's directory
  std::string label;
};

/// gnuplot script: log-scale y axis, msd against time, one curve per entry.
void export_plot_script(std::span<const PlotCurve> curves, const std::filesystem::path& path,
                        const std::string& title = "mean-square deviation");

}  // namespace spde
