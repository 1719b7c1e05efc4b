#include "logheat/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "logheat/bounds.hpp"
#include "logheat/errors.hpp"
#include "logheat/numerics.hpp"

namespace logheat {

Decomposition lemma4_decompose(const std::function<double(double)>& U, double alpha,
                               double beta, double radius, GridSpec grid,
                               std::function<double(double)> u_second) {
  if (!std::isfinite(alpha) || !(beta >= 0.0) || !(radius >= 0.0) ||
      !std::isfinite(beta) || !std::isfinite(radius)) {
    throw ValidationError("need finite alpha, beta >= 0 and radius >= 0");
  }
  if (!(grid.step > 0.0)) throw ValidationError("grid step must be > 0");
  const double half = grid.half_width > 0.0 ? grid.half_width : radius + 10.0;
  const double fd_h = std::min(1e-3, 0.25 * grid.step);
  if (!u_second) {
    u_second = [U, fd_h](double x) { return numerics::finite_diff_second(U, x, fd_h); };
  }

  const double c = alpha + beta;
  const double R = radius;
  Decomposition d;
  d.alpha = alpha;
  d.beta = beta;
  d.radius = R;
  d.lip_cert = 2.0 * c * R;
  d.H = [c, R](double x) {
    const double ax = std::abs(x);
    return ax <= R ? -c * x * x : -(2.0 * c * R * ax - c * R * R);
  };
  auto h_slope = [c, R](double x) {
    const double ax = std::abs(x);
    const double s = x < 0.0 ? -1.0 : 1.0;
    return ax <= R ? -2.0 * c * x : -2.0 * c * R * s;
  };
  d.V = [U, H = d.H](double x) { return U(x) - H(x); };

  const auto n = static_cast<std::size_t>(std::ceil(2.0 * half / grid.step));
  const double tol = 1e-6;
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = -half + 2.0 * half * static_cast<double>(i) / static_cast<double>(n);
    const double u2 = u_second(x);
    const bool inside = std::abs(x) < R;
    if (inside ? u2 < -beta - tol : u2 < alpha - tol) {
      std::ostringstream msg;
      msg << "U'' = " << u2 << " violates the "
          << (inside ? "inner bound -beta" : "outer bound alpha") << " at x = " << x;
      throw PreconditionError(msg.str(), x);
    }
    d.max_reconstruction_error =
        std::max(d.max_reconstruction_error, std::abs(d.V(x) + d.H(x) - U(x)));
    const double v2 = numerics::finite_diff_second(d.V, x, fd_h);
    d.min_v_second = i == 0 ? v2 : std::min(d.min_v_second, v2);
    d.max_h_slope = std::max(d.max_h_slope, std::abs(h_slope(x)));
  }
  d.grid_points = n + 1;
  return d;
}

std::variant<MixtureParams, Infeasible> analyze_mixture_1d(
    const GaussianMixture& mix, const MixtureAnalysisOptions& opts) {
  if (mix.dim() != 1) throw CapabilityError("analyze_mixture_1d needs a 1D mixture");
  double vmax = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& c : mix.components()) {
    vmax = std::max(vmax, c.variance);
    lo = std::min(lo, c.mean(0));
    hi = std::max(hi, c.mean(0));
  }
  const double sigma = std::sqrt(vmax);
  const double k = 1.0 / vmax;
  const double step = sigma * opts.step_fraction;
  auto bound = [&](double x) {
    return mixture_hessian_lower(mix, Point::Constant(1, x)).refined(0, 0);
  };

  MixtureParams p;
  p.k = k;
  if (mix.components().size() == 1) {
    p.alpha = k;
    return p;
  }
  p.alpha = 0.5 * k;

  // Scan outward from the component means until the bound has stayed above
  // alpha for 10 sigma past the last violation on each side.
  double min_bound = std::numeric_limits<double>::infinity();
  double reach = 0.0;
  auto scan = [&](double start, double dir) -> bool {
    double last_bad = std::numeric_limits<double>::quiet_NaN();
    double x = start;
    for (;;) {
      const double b = bound(x);
      min_bound = std::min(min_bound, b);
      if (b < p.alpha) last_bad = x;
      const double anchor = std::isnan(last_bad) ? start : last_bad;
      if (dir * (x - anchor) > 10.0 * sigma) break;
      if (std::abs(x) > opts.radius_cap) return false;
      x += dir * step;
    }
    if (!std::isnan(last_bad)) reach = std::max(reach, std::abs(last_bad) + step);
    return true;
  };
  // Interior sweep across [lo - 10 sigma, hi + 10 sigma] then tails.
  for (double x = lo - 10.0 * sigma; x <= hi + 10.0 * sigma; x += step) {
    const double b = bound(x);
    min_bound = std::min(min_bound, b);
    if (b < p.alpha) reach = std::max(reach, std::abs(x) + step);
  }
  if (!scan(hi + 10.0 * sigma, 1.0) || !scan(lo - 10.0 * sigma, -1.0)) {
    return Infeasible{"bound stays below alpha beyond the radius cap", opts.radius_cap};
  }
  if (reach > opts.radius_cap) {
    return Infeasible{"required radius exceeds the cap", reach};
  }
  p.radius = reach;
  p.beta = std::max(0.0, -min_bound);
  p.lip = 2.0 * (p.alpha + p.beta) * p.radius;
  return p;
}

}  // namespace logheat
