#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace logheat::numerics {

struct QuadPiece {
  double c2 = 0.0;
  double c1 = 0.0;
  double c0 = 0.0;

  double value(double x) const { return (c2 * x + c1) * x + c0; }
  double slope(double x) const { return 2.0 * c2 * x + c1; }
};

/// Continuous piecewise quadratic on R with sorted breakpoints. Region r
/// spans [break_{r-1}, break_r); a point on a breakpoint belongs to the
/// region on its right.
class PiecewiseQuadratic {
 public:
  PiecewiseQuadratic() : pieces_(1) {}
  PiecewiseQuadratic(std::vector<double> breaks, std::vector<QuadPiece> pieces);

  std::size_t region(double x) const;
  double value(double x) const { return pieces_[region(x)].value(x); }
  double slope(double x) const { return pieces_[region(x)].slope(x); }
  double curvature(double x) const { return 2.0 * pieces_[region(x)].c2; }

  /// Adds a2 x^2 + a1 x + a0 to every piece.
  PiecewiseQuadratic plus(double a2, double a1, double a0) const;

  /// y -> W(y + z), re-expanded around z so coefficients stay O(W).
  PiecewiseQuadratic shifted(double z) const;

  const std::vector<double>& breaks() const noexcept { return breaks_; }
  const std::vector<QuadPiece>& pieces() const noexcept { return pieces_; }
  double region_lo(std::size_t r) const;
  double region_hi(std::size_t r) const;

 private:
  std::vector<double> breaks_;
  std::vector<QuadPiece> pieces_;
};

struct ExpIntegral {
  double log_mass = 0.0;   // log of the integral of exp(-W)
  double mean = 0.0;
  double variance = 0.0;
  double mode = 0.0;       // global minimiser of W
};

/// Integrates exp(-W) over R exactly up to rounding: the region where W is
/// within `cutoff` of its minimum is located analytically and covered by
/// Gauss–Legendre panels that never straddle a breakpoint. Throws
/// NumericalError when exp(-W) is not integrable.
ExpIntegral integrate_exp_neg(const PiecewiseQuadratic& w, double cutoff = 50.0);

/// Maximal intervals where W < min W + cutoff.
std::vector<std::pair<double, double>> sublevel_intervals(
    const PiecewiseQuadratic& w, double cutoff);

/// CDF of the density proportional to exp(-W), tabulated on cells that
/// respect the breakpoints. Inside a cell the density is treated as
/// exp-linear, which makes cdf/quantile analytic.
class TabulatedCdf {
 public:
  explicit TabulatedCdf(const PiecewiseQuadratic& w, int cells_per_panel = 16);

  double cdf(double x) const;
  double quantile(double u) const;
  double lo() const { return edges_.front(); }
  double hi() const { return edges_.back(); }

 private:
  std::vector<double> edges_;
  std::vector<double> cum_;      // normalised CDF at edges
  std::vector<double> w_edge_;   // W - W_min at edges
  std::vector<double> cell_mass_;
};

}  // namespace logheat::numerics
