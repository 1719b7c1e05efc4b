#pragma once

// Splitting a potential into a convex part plus a Lipschitz part, and the
// resulting perturbation parameters for one-dimensional Gaussian mixtures.

#include <functional>
#include <optional>
#include <string>
#include <variant>

#include "logheat/measures.hpp"

namespace logheat {

struct GridSpec {
  double half_width = 0.0;  // 0 selects radius + 10
  double step = 1e-3;
};

/// U = V + H with H = -(alpha+beta) x^2 on |x| <= R and
/// -(2(alpha+beta) R |x| - (alpha+beta) R^2) outside.
struct Decomposition {
  std::function<double(double)> V;
  std::function<double(double)> H;
  double alpha = 0.0;
  double beta = 0.0;
  double radius = 0.0;
  double lip_cert = 0.0;  // 2 (alpha + beta) R

  // Grid diagnostics.
  double max_reconstruction_error = 0.0;  // sup |V + H - U|
  double min_v_second = 0.0;              // min V'' by finite differences
  double max_h_slope = 0.0;               // sup |H'|
  std::size_t grid_points = 0;
};

/// Checks U'' >= alpha on |x| >= R and U'' >= -beta on |x| < R over the
/// grid and throws PreconditionError at the first violation. `u_second`
/// defaults to a finite difference of U.
Decomposition lemma4_decompose(const std::function<double(double)>& U, double alpha,
                               double beta, double radius, GridSpec grid = {},
                               std::function<double(double)> u_second = {});

struct MixtureParams {
  double alpha = 0.0;
  double lip = 0.0;
  double radius = 0.0;
  double beta = 0.0;
  double k = 0.0;  // 1 / max component variance
};

struct Infeasible {
  std::string reason;
  double radius_reached = 0.0;
};

struct MixtureAnalysisOptions {
  double radius_cap = 1e4;
  double step_fraction = 1.0 / 50.0;  // grid step as a fraction of sigma
};

std::variant<MixtureParams, Infeasible> analyze_mixture_1d(
    const GaussianMixture& mix, const MixtureAnalysisOptions& opts = {});

}  // namespace logheat
