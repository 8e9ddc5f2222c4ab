#pragma once

// Straight-line evaluations of the closed-form contractivity coefficients,
// written independently of core/src/analysis.cpp. Inputs are raw numbers.

#include <cmath>

namespace formula {

struct Params {
  double theta, dt, normA, M, Lg, mu, L;
};

// ((1 + (1-theta) dt (|A| + M)) / (1 - theta dt (|A| + M)))^2
inline double coeff1(const Params& p) {
  const double top = 1 + (1 - p.theta) * p.dt * (p.normA + p.M);
  const double bottom = 1 - p.theta * p.dt * (p.normA + p.M);
  return std::pow(top / bottom, 2);
}

// ((1 + (1-theta) dt (|A| + M))^2 + Lg^2 dt) / (1 - theta dt (|A| + M))^2
inline double coeff2(const Params& p) {
  const double top = std::pow(1 + (1 - p.theta) * p.dt * (p.normA + p.M), 2) + p.Lg * p.Lg * p.dt;
  return top / std::pow(1 - p.theta * p.dt * (p.normA + p.M), 2);
}

// ((1 + (1-theta) dt |A| + dt M) / (1 - theta dt |A|))^2
inline double coeff3(const Params& p) {
  return std::pow((1 + (1 - p.theta) * p.dt * p.normA + p.dt * p.M) / (1 - p.theta * p.dt * p.normA), 2);
}

// ((1 + (1-theta) dt |A| + dt M)^2 + Lg^2 dt) / (1 - theta dt |A|)^2
inline double coeff4(const Params& p) {
  const double top = std::pow(1 + (1 - p.theta) * p.dt * p.normA + p.dt * p.M, 2) + p.Lg * p.Lg * p.dt;
  return top / std::pow(1 - p.theta * p.dt * p.normA, 2);
}

// (1 + (1-theta)^2 dt^2 (|A|^2 + M + 2|A| mu) + L dt + (1-theta) dt mu*) / (1 - 2 theta dt mu*)
inline double gamma(const Params& p) {
  const double mu_star = p.normA + p.mu;
  const double top = 1 + std::pow(1 - p.theta, 2) * std::pow(p.dt, 2) *
                             (std::pow(p.normA, 2) + p.M + 2 * p.normA * p.mu) +
                     p.L * p.dt + (1 - p.theta) * p.dt * mu_star;
  return top / (1 - 2 * p.theta * p.dt * mu_star);
}

}  // namespace formula
