#include "logheat/heatflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "logheat/errors.hpp"
#include "logheat/numerics.hpp"

namespace logheat {

namespace {

using numerics::kLogSqrt2Pi;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("t must be > 0");
}

[[noreturn]] void underflow(const Point& z) {
  throw NumericalError(
      "all tilted weights underflowed; recenter the measure closer to z",
      z.norm());
}

// Reweights point masses (or component posteriors) by log weights `lw` and
// returns the weighted mean and scatter of `centers` plus `spread` * I.
TiltedMoments combine(const std::vector<double>& lw, const std::vector<Point>& centers,
                      const std::vector<double>& spread, const Point& z) {
  const double lz = numerics::log_sum_exp(lw);
  if (!std::isfinite(lz)) underflow(z);
  const int d = static_cast<int>(z.size());
  TiltedMoments out;
  out.mass_log = lz;
  out.mean = Point::Zero(d);
  std::vector<double> r(lw.size());
  for (std::size_t i = 0; i < lw.size(); ++i) {
    r[i] = std::exp(lw[i] - lz);
    out.mean += r[i] * centers[i];
  }
  out.covariance = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < lw.size(); ++i) {
    if (r[i] == 0.0) continue;
    const Point dx = centers[i] - out.mean;
    out.covariance += r[i] * (dx * dx.transpose());
    out.covariance.diagonal().array() += r[i] * spread[i];
  }
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

TiltedMoments tilt_atoms(const std::vector<double>& log_weights,
                         const std::vector<Point>& locations, const Point& z,
                         double t) {
  const int d = static_cast<int>(z.size());
  std::vector<double> lw(locations.size());
  for (std::size_t i = 0; i < locations.size(); ++i) {
    lw[i] = log_weights[i] - (z - locations[i]).squaredNorm() / (2.0 * t) -
            d * (kLogSqrt2Pi + 0.5 * std::log(t));
  }
  return combine(lw, locations, std::vector<double>(locations.size(), 0.0), z);
}

TiltedMoments scalar_moments(double log_mass, double mean, double variance) {
  TiltedMoments out;
  out.mass_log = log_mass;
  out.mean = Point::Constant(1, mean);
  out.covariance = Matrix::Constant(1, 1, std::max(variance, 0.0));
  return out;
}

double scalar(const Point& z) {
  if (z.size() != 1) throw ValidationError("one-dimensional measure expects a scalar");
  return z(0);
}

}  // namespace

TiltedMoments tilted_moments(const Measure& m, const Point& z, double t) {
  check_time(t);
  if (z.size() != dimension(m)) throw ValidationError("z has the wrong dimension");
  if (!z.allFinite()) throw ValidationError("z must be finite");
  return std::visit(
      Overloaded{
          [&](const GaussianMixture& g) {
            const int d = g.dim();
            const auto& comps = g.components();
            std::vector<double> lw(comps.size());
            std::vector<Point> centers(comps.size());
            std::vector<double> spread(comps.size());
            for (std::size_t i = 0; i < comps.size(); ++i) {
              const double v = comps[i].variance;
              const double s = v + t;
              lw[i] = g.log_weights()[i] - (z - comps[i].mean).squaredNorm() / (2.0 * s) -
                      d * (kLogSqrt2Pi + 0.5 * std::log(s));
              centers[i] = (t * comps[i].mean + v * z) / s;
              spread[i] = v * t / s;
            }
            return combine(lw, centers, spread, z);
          },
          [&](const AtomicMeasure& a) {
            std::vector<Point> locs;
            for (const auto& atom : a.atoms()) locs.push_back(atom.location);
            return tilt_atoms(a.log_weights(), locs, z, t);
          },
          [&](const CounterexampleMeasure& c) {
            std::vector<Point> locs;
            for (double x : c.positions()) locs.push_back(Point::Constant(1, x));
            return tilt_atoms(c.log_weights(), locs, z, t);
          },
          [&](const PerturbedLogConcave1D& p) {
            const auto r = p.tilted(scalar(z), t);
            return scalar_moments(r.log_mass, r.mean, r.variance);
          },
          [&](const HeatSmoothed1D& h) {
            // x | y is Gaussian with mean (t y + s z)/(s + t) and variance
            // s t/(s + t); y is mu tilted at (z, s + t).
            const double s = h.t;
            const double zz = scalar(z);
            const auto r = h.base.tilted(zz, s + t);
            const double k = t / (s + t);
            return scalar_moments(r.log_mass, k * r.mean + (1.0 - k) * zz,
                                  k * k * r.variance + s * k);
          },
      },
      m);
}

Matrix log_hessian_heat(const Measure& m, const Point& z, double t) {
  const auto tm = tilted_moments(m, z, t);
  const int d = static_cast<int>(z.size());
  Matrix out = (Matrix::Identity(d, d) - tm.covariance / t) / t;
  if (const auto* g = std::get_if<GaussianMixture>(&m)) {
    const Matrix direct = -log_hessian(convolve_gaussian(*g, t), z);
    const double scale = std::max(1.0, out.cwiseAbs().maxCoeff());
    const double diff = (direct - out).cwiseAbs().maxCoeff();
    if (!(diff <= 1e-8 * scale)) {
      throw NumericalError("covariance and analytic Hessians disagree", diff);
    }
  }
  return out;
}

namespace {

// OU marginal of a mixture: means scaled by e^{-t}, variances mapped to
// v e^{-2t} + 1 - e^{-2t}.
GaussianMixture ou_marginal_mixture(const std::vector<MixtureComponent>& comps,
                                    const std::vector<double>& log_weights, int dim,
                                    double t) {
  const double shrink = std::exp(-t);
  const double noise = -std::expm1(-2.0 * t);
  std::vector<MixtureComponent> out;
  out.reserve(comps.size());
  for (const auto& c : comps) {
    out.push_back({1.0, c.mean * shrink, c.variance * shrink * shrink + noise});
  }
  return GaussianMixture::from_log_weights(dim, std::move(out), log_weights);
}

}  // namespace

OuDerivatives ou_log_derivatives(const Measure& m, double t, const Point& x) {
  check_time(t);
  const int d = dimension(m);
  if (x.size() != d) throw ValidationError("x has the wrong dimension");
  const double gauss_terms = 0.5 * x.squaredNorm() + d * kLogSqrt2Pi;

  const GaussianMixture* mix = std::get_if<GaussianMixture>(&m);
  std::optional<GaussianMixture> converted;
  if (!mix) {
    std::optional<AtomicMeasure> atoms;
    if (const auto* a = std::get_if<AtomicMeasure>(&m)) atoms = *a;
    if (const auto* c = std::get_if<CounterexampleMeasure>(&m)) atoms = c->as_atomic();
    if (atoms) {
      std::vector<MixtureComponent> comps;
      for (const auto& atom : atoms->atoms()) {
        comps.push_back({1.0, atom.location, 0.0});
      }
      const double shrink = std::exp(-t);
      const double noise = -std::expm1(-2.0 * t);
      for (auto& c : comps) {
        c.mean *= shrink;
        c.variance = noise;
      }
      converted = GaussianMixture::from_log_weights(d, std::move(comps),
                                                    atoms->log_weights());
      mix = &*converted;
    }
  } else {
    converted = ou_marginal_mixture(mix->components(), mix->log_weights(), d, t);
    mix = &*converted;
  }

  OuDerivatives out;
  if (mix) {
    const Measure marginal = *mix;
    out.value = log_density(marginal, x) + gauss_terms;
    out.gradient = score(marginal, x) + x;
    out.hessian = log_hessian(marginal, x);
    out.hessian.diagonal().array() += 1.0;
    return out;
  }

  // Densities without a closed-form marginal: e^t X_t = X_0 + sqrt(tau) G.
  const double tau = std::expm1(2.0 * t);
  const Point z = x * std::exp(t);
  const auto tm = tilted_moments(m, z, tau);
  out.value = d * t + tm.mass_log + gauss_terms;
  out.gradient = (std::exp(t) / tau) * (tm.mean - z / (tau + 1.0));
  out.hessian = ((tau + 1.0) / (tau * tau)) * tm.covariance;
  out.hessian.diagonal().array() -= 1.0 / tau;
  return out;
}

namespace {

std::vector<double> mass_breaks(const Measure& m) {
  std::vector<double> lw;
  std::vector<double> xs;
  if (const auto* a = std::get_if<AtomicMeasure>(&m)) {
    lw = a->log_weights();
    for (const auto& atom : a->atoms()) xs.push_back(atom.location(0));
  } else if (const auto* c = std::get_if<CounterexampleMeasure>(&m)) {
    lw = c->log_weights();
    xs = c->positions();
  } else {
    return {};
  }
  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> out;
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    acc += std::exp(lw[order[k]]);
    out.push_back(acc);
  }
  return out;
}

void require_quantiles(const Measure& m) {
  if (dimension(m) != 1) throw CapabilityError("W2 is computed in one dimension only");
  if (std::holds_alternative<HeatSmoothed1D>(m)) {
    throw CapabilityError("smoothed perturbed measures have no tabulated quantile");
  }
}

// Panel edges on [a, b]; ends touching 0 or 1 are graded geometrically
// because the quantile functions of unbounded measures blow up there.
std::vector<double> panel_edges(double a, double b) {
  const bool grade_lo = a == 0.0;
  const bool grade_hi = b == 1.0;
  const double len = b - a;
  std::vector<double> s{0.0};
  auto half = [&](bool graded, bool lower) {
    std::vector<double> pts;
    if (graded) {
      for (int k = 60; k >= 1; --k) {
        const double off = std::ldexp(0.5, -k);
        if (off * len < 1e-17) continue;
        pts.push_back(off);
      }
    } else {
      for (int k = 1; k < 8; ++k) pts.push_back(0.5 * k / 8.0);
    }
    pts.push_back(0.5);
    if (!lower) {
      for (auto& p : pts) p = 1.0 - p;
      std::reverse(pts.begin(), pts.end());
    }
    return pts;
  };
  for (double p : half(grade_lo, true)) s.push_back(p);
  for (double p : half(grade_hi, false)) {
    if (p > s.back()) s.push_back(p);
  }
  if (s.back() < 1.0) s.push_back(1.0);
  for (auto& v : s) v = a + len * v;
  s.front() = a;
  s.back() = b;
  return s;
}

}  // namespace

double wasserstein2_1d(const Measure& mu, const Measure& nu) {
  require_quantiles(mu);
  require_quantiles(nu);
  std::vector<double> breaks{0.0, 1.0};
  for (double u : mass_breaks(mu)) breaks.push_back(u);
  for (double u : mass_breaks(nu)) breaks.push_back(u);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(),
                              [](double u) { return u < 0.0 || u > 1.0; }),
               breaks.end());

  const auto& gl = numerics::gauss_legendre(8);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    if (!(breaks[k + 1] > breaks[k])) continue;
    const auto edges = panel_edges(breaks[k], breaks[k + 1]);
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
      const double lo = edges[p];
      const double hi = edges[p + 1];
      if (!(hi > lo)) continue;
      const double half = 0.5 * (hi - lo);
      const double mid = 0.5 * (hi + lo);
      for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
        const double u = mid + half * gl.nodes[q];
        const double diff = quantile_1d(mu, u) - quantile_1d(nu, u);
        total += half * gl.weights[q] * diff * diff;
      }
    }
  }
  return std::sqrt(std::max(total, 0.0));
}

Lemma1Result lemma1_check(const Measure& mu, const Measure& nu) {
  Lemma1Result r;
  r.w2 = wasserstein2_1d(mu, nu);
  r.lhs = moments_1d(mu).variance;
  const double sd_nu = std::sqrt(std::max(moments_1d(nu).variance, 0.0));
  r.rhs = (r.w2 + sd_nu) * (r.w2 + sd_nu);
  r.slack = r.rhs - r.lhs;
  return r;
}

}  // namespace logheat
