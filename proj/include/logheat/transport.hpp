#pragma once

// Heat-flow transport maps from the standard Gaussian, their Lipschitz
// certification, and the reverse-SDE sampler.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "logheat/measures.hpp"

namespace logheat {

/// v(t, x) = -grad log Q_t(dmu/dgamma)(x).
Point velocity_field(const Measure& m, double t, const Point& x);

struct FlowOptions {
  int n_points = 201;
  std::vector<double> inputs;     // overrides the Gaussian quantile inputs
  std::optional<double> t_max;    // default max(3, log(W2(mu, gamma) / 1e-4))
  double t_min = 1e-4;
  double steps_per_unit = 100.0;  // RK4 steps per unit of log(e^{2t} - 1)
  bool richardson = true;         // extrapolate images from t_min, 2 t_min to 0
  bool record = false;
};

struct FlowTrajectory {
  std::vector<double> t;
  std::vector<double> y;
};

struct FlowMap {
  double t_max = 0.0;
  double t_min = 0.0;
  std::vector<double> inputs;
  std::vector<double> images;
  std::vector<FlowTrajectory> trajectories;
  int steps = 0;
  double steps_per_unit = 0.0;
  bool richardson = false;
  bool monotone = true;

  /// Monotone piecewise-linear interpolation, extended linearly past the
  /// end points.
  double operator()(double x) const;
};

/// Integrates dy/dt = v(t, y) backward from t_max, started from the affine
/// map that matches the mean and variance of the OU marginal at t_max.
FlowMap build_flow_map(const Measure& m, const FlowOptions& opts = {});

void write_flow_csv(const FlowMap& flow, const std::string& path);
void write_trajectory_csvs(const FlowMap& flow, const std::string& dir);

struct LipschitzEstimate {
  double value = 0.0;
  double argmax = 0.0;  // midpoint of the maximising input pair
  std::size_t index = 0;
};

LipschitzEstimate empirical_lipschitz(const FlowMap& flow);

struct PushforwardReport {
  double ks_stat = 0.0;
  double mean_error = 0.0;
  double variance_error = 0.0;
};

PushforwardReport pushforward_validate(const FlowMap& flow, const Measure& target,
                                       std::size_t n_samples, std::uint64_t seed);

struct ThetaEnvelope {
  std::vector<double> times;
  std::vector<double> theta_min;
  std::vector<double> theta_max;
  double head = 0.0;  // contribution of (0, times.front())
  double tail = 0.0;  // contribution of (times.back(), inf)
  double integral_theta_max = 0.0;
  double certified_lipschitz = 0.0;  // exp(integral_theta_max)
};

/// Times equidistributed in log(e^{2t} - 1).
std::vector<double> default_time_grid(std::size_t n = 401, double t0 = 1e-4,
                                      double t1 = 12.0);
std::vector<double> default_space_grid(std::size_t n = 81, double half_width = 8.0);

/// Extremes over the space grid of the eigenvalues of Hess log Q_t(dmu/dgamma).
/// The integral uses the trapezoid rule in log(e^{2t} - 1). For perturbed
/// measures the ends are closed with the exact integral of the upper
/// envelope; otherwise with theta(t0) t0 and an e^{-2t} tail.
ThetaEnvelope theta_envelope(const Measure& m, const std::vector<double>& times,
                             const std::vector<double>& space);

struct ReverseSdeOptions {
  std::size_t n = 10000;
  int steps = 400;
  double t1 = 3.0;
  std::uint64_t seed = 0;
};

/// Euler–Maruyama for dY = (-Y + 2 grad log Q_{t1-s}(dmu/dgamma)(Y)) ds
/// + sqrt(2) dB, started from the exact OU marginal at t1.
std::vector<Point> reverse_sde_sample(const Measure& m, const ReverseSdeOptions& opts);

}  // namespace logheat
