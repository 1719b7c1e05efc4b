#pragma once

// Deterministic numerical kernels: Gaussian-weighted quadrature, bracketing
// root finding, classical RK4 and finite differences.

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "logheat/errors.hpp"

namespace logheat::numerics {

using RealFn = std::function<double(double)>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

/// Gauss–Hermite rule for the weight N(center, scale^2). Weights are
/// probabilities: sum_i w_i g(x_i) approximates E[g(X)], X ~ N(center, scale^2).
class QuadratureRule {
 public:
  explicit QuadratureRule(int node_count, double center = 0.0,
                          double scale = 1.0);

  int node_count() const noexcept { return static_cast<int>(nodes_.size()); }
  double center() const noexcept { return center_; }
  double scale() const noexcept { return scale_; }
  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }
  /// Weights divided by the reference density at each node, for plain
  /// integrals of f over the real line.
  std::span<const double> raw_weights() const noexcept { return raw_weights_; }

 private:
  double center_;
  double scale_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> raw_weights_;
};

/// Approximates the integral of f over R. The rule's Gaussian weight is
/// divided out, so f should decay at least like that Gaussian.
double quadrature_integrate(const RealFn& f, const QuadratureRule& rule);

/// E[g(X)] for X distributed as the rule's reference Gaussian.
double quadrature_expect(const RealFn& g, const QuadratureRule& rule);

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
struct LegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const LegendreRule& gauss_legendre(int n);

/// Moments of the positive density exp(log_f) found by recentred
/// Gauss–Hermite quadrature.
struct AdaptiveMoments {
  double log_mass = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  int node_count = 0;
  bool converged = false;
};

struct AdaptiveOptions {
  int base_nodes = 64;
  int escalated_nodes = 256;
  int recenter_passes = 2;
  int max_passes = 8;
  double agreement = 1e-9;
};

/// Integrates exp(log_f) after locating its mean and spread with a
/// fixed-point pass. Escalates to the larger rule when two successive rules
/// disagree; throws NumericalError when the recentring does not settle.
AdaptiveMoments integrate_adaptive(const RealFn& log_f, double center_guess,
                                   double scale_guess,
                                   const AdaptiveOptions& options = {});

double find_root_bisect(const RealFn& f, double lo, double hi, double tol);

/// Five-point central second difference. Throws on non-finite samples.
double finite_diff_second(const RealFn& f, double x, double h);

struct OdeConfig {
  double t_start = 0.0;
  double t_end = 1.0;
  std::optional<int> step_count;
  std::optional<double> tolerance;
  bool record = true;
};

template <typename State>
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  const State& final_state() const { return states.back(); }
};

namespace detail {

inline bool all_finite(double v) { return std::isfinite(v); }
template <typename V>
bool all_finite(const V& v) {
  return v.allFinite();
}

inline double sup_norm(double v) { return std::abs(v); }
template <typename V>
double sup_norm(const V& v) {
  return v.cwiseAbs().maxCoeff();
}

template <typename State, typename Field>
Trajectory<State> rk4_fixed(const Field& v, const State& x0, double t0,
                            double t1, int steps, bool record) {
  Trajectory<State> traj;
  const double h = (t1 - t0) / steps;
  State y = x0;
  double t = t0;
  if (record) {
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);
  }
  traj.times.push_back(t);
  traj.states.push_back(y);
  for (int k = 0; k < steps; ++k) {
    const State k1 = v(t, y);
    const State k2 = v(t + 0.5 * h, State(y + 0.5 * h * k1));
    const State k3 = v(t + 0.5 * h, State(y + 0.5 * h * k2));
    const State k4 = v(t + h, State(y + h * k3));
    y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = t0 + (k + 1) * h;
    if (!all_finite(y)) {
      throw NumericalError("ODE state became non-finite", t);
    }
    if (record) {
      traj.times.push_back(t);
      traj.states.push_back(y);
    }
  }
  if (!record) {
    traj.times.assign(1, t);
    traj.states.assign(1, y);
  }
  return traj;
}

}  // namespace detail

/// Classical fourth-order Runge–Kutta. t_end < t_start integrates backward.
/// With a tolerance, the step count doubles until two successive final
/// states agree to that tolerance in sup-norm.
template <typename State, typename Field>
Trajectory<State> integrate_ode(const Field& v, const State& x0,
                                const OdeConfig& cfg) {
  if (cfg.step_count && *cfg.step_count < 1) {
    throw ValidationError("step_count must be >= 1");
  }
  if (cfg.tolerance && !(*cfg.tolerance > 0.0)) {
    throw ValidationError("tolerance must be > 0");
  }
  if (!cfg.tolerance) {
    return detail::rk4_fixed<State>(v, x0, cfg.t_start, cfg.t_end,
                                    cfg.step_count.value_or(400), cfg.record);
  }
  int steps = cfg.step_count.value_or(16);
  auto prev = detail::rk4_fixed<State>(v, x0, cfg.t_start, cfg.t_end, steps,
                                       false);
  for (int round = 0; round < 20; ++round) {
    steps *= 2;
    auto next = detail::rk4_fixed<State>(v, x0, cfg.t_start, cfg.t_end, steps,
                                         false);
    const double diff =
        detail::sup_norm(State(next.final_state() - prev.final_state()));
    if (diff <= *cfg.tolerance) {
      if (!cfg.record) return next;
      return detail::rk4_fixed<State>(v, x0, cfg.t_start, cfg.t_end, steps,
                                      true);
    }
    prev = std::move(next);
  }
  throw NumericalError("ODE step doubling did not reach the tolerance");
}

// Scalar helpers shared across modules.

double log_sum_exp(std::span<const double> values);
double normal_cdf(double x);
/// log Phi(x), accurate far into the lower tail.
double log_normal_cdf(double x);
double normal_quantile(double u);

/// Kolmogorov–Smirnov distance between the empirical law of `samples`
/// and a continuous CDF. Sorts a copy of the samples.
double ks_statistic(std::vector<double> samples, const RealFn& cdf);

}  // namespace logheat::numerics
