#include "logheat/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "logheat/errors.hpp"
#include "logheat/numerics.hpp"

namespace logheat::numerics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
  double a;
  double b;
  std::size_t region;
};

// Real roots of c2 x^2 + c1 x + c0 = 0 for c2 != 0, ascending.
bool quadratic_roots(double c2, double c1, double c0, double& r1, double& r2) {
  const double disc = c1 * c1 - 4.0 * c2 * c0;
  if (disc <= 0.0) return false;
  const double sd = std::sqrt(disc);
  const double q = -0.5 * (c1 + std::copysign(sd, c1));
  if (q == 0.0) return false;
  r1 = q / c2;
  r2 = c0 / q;
  if (r1 > r2) std::swap(r1, r2);
  return true;
}

struct Minimum {
  double value;
  double at;
};

Minimum global_minimum(const PiecewiseQuadratic& w) {
  Minimum best{kInf, 0.0};
  auto consider = [&](const QuadPiece& q, double x) {
    const double v = q.value(x);
    if (v < best.value) best = {v, x};
  };
  for (std::size_t r = 0; r < w.pieces().size(); ++r) {
    const auto& q = w.pieces()[r];
    const double lo = w.region_lo(r);
    const double hi = w.region_hi(r);
    if (!std::isfinite(lo) && !(q.c2 > 0.0 || (q.c2 == 0.0 && q.c1 < 0.0))) {
      throw NumericalError("exp(-W) is not integrable at -infinity");
    }
    if (!std::isfinite(hi) && !(q.c2 > 0.0 || (q.c2 == 0.0 && q.c1 > 0.0))) {
      throw NumericalError("exp(-W) is not integrable at +infinity");
    }
    if (std::isfinite(lo)) consider(q, lo);
    if (std::isfinite(hi)) consider(q, hi);
    if (q.c2 > 0.0) {
      consider(q, std::clamp(-q.c1 / (2.0 * q.c2), lo, hi));
    }
  }
  if (!std::isfinite(best.value)) {
    throw NumericalError("potential has no finite minimum");
  }
  return best;
}

std::vector<Interval> region_sublevels(const PiecewiseQuadratic& w,
                                       double threshold) {
  std::vector<Interval> out;
  auto push = [&](double a, double b, std::size_t r) {
    if (b > a) out.push_back({a, b, r});
  };
  for (std::size_t r = 0; r < w.pieces().size(); ++r) {
    const auto& q = w.pieces()[r];
    const double lo = w.region_lo(r);
    const double hi = w.region_hi(r);
    const double c0 = q.c0 - threshold;
    double r1 = 0.0;
    double r2 = 0.0;
    if (q.c2 > 0.0) {
      if (quadratic_roots(q.c2, q.c1, c0, r1, r2)) {
        push(std::max(lo, r1), std::min(hi, r2), r);
      }
    } else if (q.c2 == 0.0) {
      if (q.c1 > 0.0) {
        push(lo, std::min(hi, -c0 / q.c1), r);
      } else if (q.c1 < 0.0) {
        push(std::max(lo, -c0 / q.c1), hi, r);
      } else if (c0 < 0.0) {
        push(lo, hi, r);
      }
    } else {
      if (quadratic_roots(q.c2, q.c1, c0, r1, r2)) {
        push(lo, std::min(hi, r1), r);
        push(std::max(lo, r2), hi, r);
      } else {
        push(lo, hi, r);
      }
    }
  }
  for (const auto& iv : out) {
    if (!std::isfinite(iv.a) || !std::isfinite(iv.b)) {
      throw NumericalError("unbounded sublevel set");
    }
  }
  return out;
}

// Spread of W over [a, b], used to size panels.
double variation(const QuadPiece& q, double a, double b) {
  double tv = std::abs(q.value(b) - q.value(a));
  if (q.c2 != 0.0) {
    const double s = -q.c1 / (2.0 * q.c2);
    if (s > a && s < b) {
      tv = std::abs(q.value(s) - q.value(a)) + std::abs(q.value(b) - q.value(s));
    }
  }
  return tv;
}

int panel_count(const QuadPiece& q, double a, double b) {
  const double tv = variation(q, a, b);
  return std::clamp(static_cast<int>(std::ceil(tv / 4.0)), 1, 4096);
}

}  // namespace

PiecewiseQuadratic::PiecewiseQuadratic(std::vector<double> breaks,
                                       std::vector<QuadPiece> pieces)
    : breaks_(std::move(breaks)), pieces_(std::move(pieces)) {
  if (pieces_.size() != breaks_.size() + 1) {
    throw ValidationError("piecewise quadratic needs one more piece than breaks");
  }
  for (std::size_t i = 1; i < breaks_.size(); ++i) {
    if (!(breaks_[i] > breaks_[i - 1])) {
      throw ValidationError("breakpoints must be strictly increasing");
    }
  }
}

std::size_t PiecewiseQuadratic::region(double x) const {
  return static_cast<std::size_t>(
      std::upper_bound(breaks_.begin(), breaks_.end(), x) - breaks_.begin());
}

double PiecewiseQuadratic::region_lo(std::size_t r) const {
  return r == 0 ? -kInf : breaks_[r - 1];
}

double PiecewiseQuadratic::region_hi(std::size_t r) const {
  return r == breaks_.size() ? kInf : breaks_[r];
}

PiecewiseQuadratic PiecewiseQuadratic::plus(double a2, double a1,
                                            double a0) const {
  auto pieces = pieces_;
  for (auto& p : pieces) {
    p.c2 += a2;
    p.c1 += a1;
    p.c0 += a0;
  }
  return PiecewiseQuadratic(breaks_, std::move(pieces));
}

PiecewiseQuadratic PiecewiseQuadratic::shifted(double z) const {
  std::vector<double> breaks(breaks_.size());
  for (std::size_t i = 0; i < breaks_.size(); ++i) breaks[i] = breaks_[i] - z;
  std::vector<QuadPiece> pieces(pieces_.size());
  for (std::size_t r = 0; r < pieces_.size(); ++r) {
    const auto& p = pieces_[r];
    pieces[r] = {p.c2, p.slope(z), p.value(z)};
  }
  return PiecewiseQuadratic(std::move(breaks), std::move(pieces));
}

std::vector<std::pair<double, double>> sublevel_intervals(
    const PiecewiseQuadratic& w, double cutoff) {
  const auto m = global_minimum(w);
  auto ivs = region_sublevels(w, m.value + cutoff);
  std::sort(ivs.begin(), ivs.end(),
            [](const Interval& l, const Interval& r) { return l.a < r.a; });
  std::vector<std::pair<double, double>> merged;
  for (const auto& iv : ivs) {
    if (!merged.empty() && iv.a <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, iv.b);
    } else {
      merged.emplace_back(iv.a, iv.b);
    }
  }
  return merged;
}

ExpIntegral integrate_exp_neg(const PiecewiseQuadratic& w, double cutoff) {
  const auto m = global_minimum(w);
  const auto ivs = region_sublevels(w, m.value + cutoff);
  const auto& gl = gauss_legendre(16);
  double m0 = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  for (const auto& iv : ivs) {
    const auto& q = w.pieces()[iv.region];
    const int panels = panel_count(q, iv.a, iv.b);
    const double width = (iv.b - iv.a) / panels;
    for (int p = 0; p < panels; ++p) {
      const double a = iv.a + p * width;
      const double half = 0.5 * width;
      const double mid = a + half;
      for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
        const double x = mid + half * gl.nodes[k];
        const double wt = half * gl.weights[k] * std::exp(m.value - q.value(x));
        const double d = x - m.at;
        m0 += wt;
        m1 += wt * d;
        m2 += wt * d * d;
      }
    }
  }
  if (!(m0 > 0.0) || !std::isfinite(m0)) {
    throw NumericalError("integral of exp(-W) vanished", m.at);
  }
  ExpIntegral out;
  out.mode = m.at;
  out.log_mass = -m.value + std::log(m0);
  const double shift = m1 / m0;
  out.mean = m.at + shift;
  out.variance = std::max(0.0, m2 / m0 - shift * shift);
  return out;
}

TabulatedCdf::TabulatedCdf(const PiecewiseQuadratic& w, int cells_per_panel) {
  const auto m = global_minimum(w);
  auto ivs = region_sublevels(w, m.value + 50.0);
  std::sort(ivs.begin(), ivs.end(),
            [](const Interval& l, const Interval& r) { return l.a < r.a; });
  const auto& gl = gauss_legendre(8);
  double total = 0.0;
  std::vector<double> raw_cum;
  for (const auto& iv : ivs) {
    const auto& q = w.pieces()[iv.region];
    const int cells = panel_count(q, iv.a, iv.b) * cells_per_panel;
    const double width = (iv.b - iv.a) / cells;
    for (int c = 0; c <= cells; ++c) {
      const double x = c == cells ? iv.b : iv.a + c * width;
      if (c == 0) {
        if (!edges_.empty() && x <= edges_.back()) {
          continue;  // touching the previous interval
        }
        if (!edges_.empty()) {
          // gap of negligible mass between sublevel intervals
          cell_mass_.push_back(0.0);
          raw_cum.push_back(total);
        }
        edges_.push_back(x);
        w_edge_.push_back(q.value(x) - m.value);
        if (raw_cum.empty()) raw_cum.push_back(0.0);
        continue;
      }
      const double a = edges_.back();
      const double half = 0.5 * (x - a);
      double mass = 0.0;
      for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
        const double y = a + half + half * gl.nodes[k];
        mass += half * gl.weights[k] * std::exp(m.value - q.value(y));
      }
      total += mass;
      edges_.push_back(x);
      w_edge_.push_back(q.value(x) - m.value);
      cell_mass_.push_back(mass);
      raw_cum.push_back(total);
    }
  }
  if (!(total > 0.0)) throw NumericalError("CDF table has no mass");
  cum_.resize(raw_cum.size());
  for (std::size_t i = 0; i < raw_cum.size(); ++i) cum_[i] = raw_cum[i] / total;
  for (auto& c : cell_mass_) c /= total;
}

namespace {

// Fraction of the mass of an exp-linear density on [0, h] lying left of s,
// where the log-density drops by `drop` across the cell.
double exp_linear_fraction(double drop, double frac) {
  if (std::abs(drop) < 1e-12) return frac;
  return std::expm1(-drop * frac) / std::expm1(-drop);
}

double exp_linear_inverse(double drop, double p) {
  if (std::abs(drop) < 1e-12) return p;
  return -std::log1p(p * std::expm1(-drop)) / drop;
}

}  // namespace

double TabulatedCdf::cdf(double x) const {
  if (x <= edges_.front()) return 0.0;
  if (x >= edges_.back()) return 1.0;
  const auto i = static_cast<std::size_t>(
      std::upper_bound(edges_.begin(), edges_.end(), x) - edges_.begin() - 1);
  const double h = edges_[i + 1] - edges_[i];
  const double drop = w_edge_[i + 1] - w_edge_[i];
  return cum_[i] + cell_mass_[i] * exp_linear_fraction(drop, (x - edges_[i]) / h);
}

double TabulatedCdf::quantile(double u) const {
  if (u <= 0.0) return edges_.front();
  if (u >= 1.0) return edges_.back();
  auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
  std::size_t i = static_cast<std::size_t>(it - cum_.begin());
  i = std::clamp<std::size_t>(i, 1, cum_.size() - 1) - 1;
  while (cell_mass_[i] <= 0.0 && i + 1 < cell_mass_.size()) ++i;
  const double h = edges_[i + 1] - edges_[i];
  const double drop = w_edge_[i + 1] - w_edge_[i];
  const double p = std::clamp((u - cum_[i]) / cell_mass_[i], 0.0, 1.0);
  return edges_[i] + h * exp_linear_inverse(drop, p);
}

}  // namespace logheat::numerics
