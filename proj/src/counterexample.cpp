#include "logheat/counterexample.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "logheat/errors.hpp"
#include "logheat/heatflow.hpp"
#include "logheat/numerics.hpp"

namespace logheat {

namespace {

// log of w_i(z) / w_r(z), written as a product of differences so that large
// tilts do not cancel.
double tilted_log_weight(const CounterexampleMeasure& m, int i, int r, double t, double z) {
  const double x = 0.5 * i * (i + 1.0);
  const double xr = 0.5 * r * (r + 1.0);
  return (m.log_raw_weight(i) - m.log_raw_weight(r)) + (x - xr) * (2.0 * z - x - xr) / (2.0 * t);
}

struct Split {
  double lower = 0.0;  // log mass below j
  double upper = 0.0;  // log mass at or above j
};

Split split_masses(const CounterexampleMeasure& m, double t, int j, double z) {
  std::vector<double> lo;
  std::vector<double> hi;
  for (int i = 0; i <= m.truncation(); ++i) {
    (i < j ? lo : hi).push_back(tilted_log_weight(m, i, j, t, z));
  }
  return {numerics::log_sum_exp(lo), numerics::log_sum_exp(hi)};
}

}  // namespace

CounterexampleMeasure build_counterexample(Psi psi, int truncation) {
  return CounterexampleMeasure(psi, truncation);
}

double split_function_F(const CounterexampleMeasure& m, double t, int j, double z) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("t must be > 0");
  if (j < 1 || j > m.truncation()) throw ValidationError("need 1 <= j <= truncation");
  if (!std::isfinite(z)) throw ValidationError("z must be finite");
  const auto s = split_masses(m, t, j, z);
  if (!std::isfinite(s.lower) && !std::isfinite(s.upper)) {
    throw NumericalError("all tilted weights underflowed", z);
  }
  if (!std::isfinite(s.lower)) return -1.0;
  if (!std::isfinite(s.upper)) return 1.0;
  return std::tanh(0.5 * (s.lower - s.upper));
}

Certificate variance_certificate(const CounterexampleMeasure& m, double t,
                                 double target_m) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("t must be > 0");
  if (!(target_m > 0.0) || !std::isfinite(target_m)) {
    throw ValidationError("M must be > 0");
  }
  Certificate c;
  c.t = t;
  c.target_m = target_m;
  c.truncation = m.truncation();
  c.tail_bound = m.tail_bound();
  c.j = static_cast<int>(std::ceil(2.0 * target_m)) + 1;
  if (c.j > m.truncation()) {
    throw ValidationError("truncation too small for the requested M");
  }
  const double xj = 0.5 * c.j * (c.j + 1.0);
  const double z_cap = xj + t * (m.psi()(xj) + 4.0 * std::log(c.j + 1.0)) / c.j;
  const auto F = [&](double z) { return split_function_F(m, t, c.j, z); };
  if (F(0.0) < 0.0 || F(z_cap) >= 0.0) {
    throw SearchError("no sign change of F on [0, z_cap]");
  }
  // log-ratio of the two sides moves at rate about j / t in z
  const double tol = std::max(1e-12 * t / c.j, 8.0 * std::numeric_limits<double>::epsilon() * z_cap);
  c.z_star = numerics::find_root_bisect(F, 0.0, z_cap, tol);

  const auto s = split_masses(m, t, c.j, c.z_star);
  c.lower_mass = 1.0 / (1.0 + std::exp(s.upper - s.lower));
  if (!(std::abs(c.lower_mass - 0.5) <= 1e-9)) {
    throw NumericalError("half-mass split not reached", c.z_star);
  }

  // Tilted mass of the dropped atoms i > N relative to the kept atoms. Terms
  // decay superexponentially once x_i passes z*, so a finite sum suffices.
  const std::vector<double> kept{s.lower, s.upper};
  const double log_kept = numerics::log_sum_exp(kept);
  std::vector<double> dropped;
  for (int i = m.truncation() + 1;; ++i) {
    const double lw = tilted_log_weight(m, i, c.j, t, c.z_star);
    dropped.push_back(lw);
    const double x = 0.5 * i * (i + 1.0);
    if (x > c.z_star && lw < log_kept - 100.0) break;
    if (i > m.truncation() + 100000) break;
  }
  c.tilted_tail = std::exp(numerics::log_sum_exp(dropped) - log_kept);
  if (!(c.tilted_tail < 1e-12)) {
    throw SearchError("truncation too small: dropped atoms carry tilted mass");
  }

  const Measure mu = m;
  const auto tm = tilted_moments(mu, Point::Constant(1, c.z_star), t);
  c.variance = tm.covariance(0, 0);
  c.curvature = (1.0 - c.variance / t) / t;
  if (c.variance < target_m * target_m * (1.0 - 1e-6)) {
    throw SearchError("variance at the split tilt is below M^2");
  }
  return c;
}

TwoAtomReport two_atom_analysis(double x0, double w0, double w1, double t) {
  if (!std::isfinite(x0) || x0 == 0.0) throw ValidationError("x0 must be nonzero");
  if (!(w0 > 0.0) || !(w1 > 0.0) || !std::isfinite(w0) || !std::isfinite(w1)) {
    throw ValidationError("weights must be positive");
  }
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("t must be > 0");
  const Measure mu = AtomicMeasure(1, {{w0, Point::Zero(1)}, {w1, Point::Constant(1, x0)}});
  auto curvature = [&](double z) {
    return log_hessian_heat(mu, Point::Constant(1, z), t)(0, 0);
  };

  TwoAtomReport r;
  r.z_bar = 0.5 * x0 + t * std::log(w0 / w1) / x0;
  r.curvature_at_z_bar = curvature(r.z_bar);
  r.analytic_value = (1.0 - x0 * x0 / (4.0 * t)) / t;
  r.grid_min_curvature = r.curvature_at_z_bar;
  r.grid_argmin = r.z_bar;
  const double a = std::abs(x0);
  const int n = 2001;
  for (int k = 0; k < n; ++k) {
    const double z = -2.0 * a + 5.0 * a * k / (n - 1);
    const double c = curvature(z);
    if (c < r.grid_min_curvature) {
      r.grid_min_curvature = c;
      r.grid_argmin = z;
    }
  }
  return r;
}

}  // namespace logheat
