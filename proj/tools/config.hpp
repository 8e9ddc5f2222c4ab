#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spde/analysis.hpp"
#include "spde/experiments.hpp"
#include "spde/integrators.hpp"
#include "spde/problems.hpp"

namespace spde::app {

enum class ConfigErrorKind { kParse, kMissingKey, kUnknownKey, kInvalidValue };

class ConfigError : public std::runtime_error {
 public:
  ConfigError(ConfigErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ConfigErrorKind kind() const noexcept { return kind_; }

 private:
  ConfigErrorKind kind_;
};

struct InitialConfig {
  int mode = 1;
  double u_amplitude = 1.0;
  double y_amplitude = -1.0;
};

struct OrderConfig {
  /// dt = final_time * 2^-k for each k.
  std::vector<int> dt_exponents{6, 7, 8, 9, 10};
  std::optional<double> final_time;  // defaults to the scheme's final time
  std::size_t reference_refinement = 8;
  std::size_t n_paths = 200;
  ErrorNorm error_norm = ErrorNorm::kGridL2;
};

struct AnalyzeConfig {
  Framework framework = Framework::kLemma;
  std::size_t m_paths = 50;
  std::optional<int> order_p;  // 4 for cahn_hilliard, 2 otherwise
  // Supplied constants skip the corresponding estimate.
  std::optional<double> norm_A;
  std::optional<double> M;
  std::optional<double> mu;
  std::optional<double> L_g;
};

struct RunConfig {
  std::string problem;  // ginzburg_landau | cahn_hilliard | uncoupled | dib
  std::optional<DibParams> dib;

  double x_left = 0.0;
  double x_right = 1.0;
  std::vector<std::size_t> n_points;  // one entry unless n_points_list was given

  SchemeConfig scheme;
  NoiseKind noise = noise::Additive{0.1};

  std::size_t n_paths = 500;
  /// Empty means: squared norm for theta-Maruyama with additive noise, plain otherwise.
  std::optional<MVariant> m_variant;
  InitialConfig initial;
  OrderConfig order;
  AnalyzeConfig analyze;

  std::string output_dir = "out";

  MVariant effective_m_variant() const;
  SemiDiscreteProblem make_problem(std::size_t n_points) const;
  InitialCondition initial_condition() const;
  nlohmann::json echo() const;
};

/// Strict parse: unknown keys, missing required keys and ill-typed values are
/// ConfigErrors naming the offending key path.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace spde::app
