#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <variant>

#include "spde/band_matrix.hpp"
#include "spde/grid.hpp"

namespace spde {

namespace noise {
/// g(u) = epsilon
struct Additive {
  double epsilon = 0.0;
};
/// g(u) = u
struct MultiplicativeLinear {};
/// g(u) = u^2
struct MultiplicativeQuadratic {};
/// Diffusion supplied by the problem's own callback.
struct Custom {
  std::string tag;
};
}  // namespace noise

using NoiseKind = std::variant<noise::Additive, noise::MultiplicativeLinear,
                               noise::MultiplicativeQuadratic, noise::Custom>;

bool is_additive(const NoiseKind& kind);
std::string describe(const NoiseKind& kind);

/// Entrywise diffusion map for the built-in noise kinds. Throws for Custom.
Vector apply_noise_map(const NoiseKind& kind, std::span<const double> state);

/// dU = (-A U + R(U)) dt + G(U) dW on an interleaved state vector:
/// component c of unknown node i lives at index i * n_components + c.
struct SemiDiscreteProblem {
  std::string name;
  GridSpec grid;
  BandMatrix op;  // A
  std::function<Vector(std::span<const double>)> reaction;
  std::function<BandMatrix(std::span<const double>)> reaction_jacobian;
  std::function<Vector(std::span<const double>)> diffusion;
  NoiseKind noise;
  std::size_t n_components = 1;

  std::size_t state_dim() const noexcept { return op.dim(); }
  std::size_t nodes() const noexcept { return grid.unknowns(); }

  /// Drift f(U) = -A U + R(U).
  Vector drift(std::span<const double> u) const;
};

/// Reaction parameters of the DIB electrodeposition model. No defaults.
struct DibParams {
  double d1, d2, rho, A1, A2, B, alpha, C, D, gamma, k2, k3;
};

void validate(const DibParams& p);

/// du = (Laplace u + u - u^3) dt + g(u) dW.  A = -Laplace_h, R(u) = u - u^3.
SemiDiscreteProblem make_ginzburg_landau(const GridSpec& grid, NoiseKind noise);

/// du = (-Laplace^2 u + Laplace V'(u)) dt + g(u) dW with V(u) = u - u^3.
/// A = (Laplace_h)^2, R(U) = Laplace_h (1 - 3 U^2) with Laplace_h = -neg_laplacian.
SemiDiscreteProblem make_cahn_hilliard(const GridSpec& grid, NoiseKind noise);

/// (u, v) with A = blockdiag(-Laplace_h, -Laplace_h), R = (u - u^3, v).
SemiDiscreteProblem make_uncoupled_system(const GridSpec& grid, NoiseKind noise);

/// (u, v) with A = blockdiag(-d1 Laplace_h, -d2 Laplace_h) and the DIB reaction.
SemiDiscreteProblem make_dib(const GridSpec& grid, const DibParams& params, NoiseKind noise);

struct CustomProblemSpec {
  std::string name = "custom";
  GridSpec grid;
  BandMatrix op;
  std::size_t n_components = 1;
  std::function<Vector(std::span<const double>)> reaction;
  std::function<BandMatrix(std::span<const double>)> reaction_jacobian;
  /// Optional; when empty the built-in map for `noise` is used.
  std::function<Vector(std::span<const double>)> diffusion;
  NoiseKind noise = noise::Additive{0.0};
};

/// Registration hook for user-defined systems. Validates dimensions.
SemiDiscreteProblem make_custom(CustomProblemSpec spec);

/// Strided view helpers for multi-component states.
Vector component(std::span<const double> state, std::size_t n_components, std::size_t c);
Vector interleave(std::span<const Vector> components);

}  // namespace spde
