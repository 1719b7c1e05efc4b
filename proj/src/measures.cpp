#include "logheat/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "logheat/errors.hpp"
#include "logheat/numerics.hpp"
#include "logheat/random.hpp"

namespace logheat {

namespace {

using numerics::kLogSqrt2Pi;
using numerics::kPi;
using numerics::log_sum_exp;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_point(const Point& p, int dim, const char* what) {
  if (p.size() != dim) {
    throw ValidationError(std::string(what) + " has the wrong dimension");
  }
  if (!p.allFinite()) throw ValidationError(std::string(what) + " is not finite");
}

void normalise(std::vector<double>& log_weights) {
  const double lz = log_sum_exp(log_weights);
  if (!std::isfinite(lz)) throw ValidationError("weights do not normalise");
  for (auto& lw : log_weights) lw -= lz;
}

Point as_point(double x) { return Point::Constant(1, x); }

}  // namespace

// ---------------------------------------------------------------------------
// GaussianMixture

GaussianMixture::GaussianMixture(int dim, std::vector<MixtureComponent> components)
    : dim_(dim) {
  std::vector<double> log_weights;
  log_weights.reserve(components.size());
  for (const auto& c : components) {
    if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
      throw ValidationError("mixture weights must be positive and finite");
    }
    log_weights.push_back(std::log(c.weight));
  }
  finish(std::move(components), std::move(log_weights));
}

GaussianMixture GaussianMixture::from_log_weights(
    int dim, std::vector<MixtureComponent> components,
    std::vector<double> log_weights) {
  GaussianMixture g;
  g.dim_ = dim;
  if (log_weights.size() != components.size()) {
    throw ValidationError("one log weight per component required");
  }
  for (double lw : log_weights) {
    if (std::isnan(lw) || lw == std::numeric_limits<double>::infinity()) {
      throw ValidationError("log weights must be finite or -inf");
    }
  }
  g.finish(std::move(components), std::move(log_weights));
  return g;
}

void GaussianMixture::finish(std::vector<MixtureComponent> components,
                             std::vector<double> log_weights) {
  if (dim_ < 1) throw ValidationError("dimension must be >= 1");
  if (components.empty()) throw ValidationError("mixture needs a component");
  std::vector<MixtureComponent> merged;
  std::vector<double> merged_lw;
  for (std::size_t i = 0; i < components.size(); ++i) {
    auto& c = components[i];
    check_point(c.mean, dim_, "component mean");
    if (!(c.variance > 0.0) || !std::isfinite(c.variance)) {
      throw ValidationError("component variances must be positive");
    }
    auto same = std::find_if(merged.begin(), merged.end(), [&](const auto& m) {
      return m.variance == c.variance && m.mean == c.mean;
    });
    if (same != merged.end()) {
      double& lw = merged_lw[static_cast<std::size_t>(same - merged.begin())];
      const double hi = std::max(lw, log_weights[i]);
      lw = hi == -std::numeric_limits<double>::infinity()
               ? hi
               : hi + std::log(std::exp(lw - hi) + std::exp(log_weights[i] - hi));
    } else {
      merged.push_back(std::move(c));
      merged_lw.push_back(log_weights[i]);
    }
  }
  normalise(merged_lw);
  for (std::size_t i = 0; i < merged.size(); ++i) {
    merged[i].weight = std::exp(merged_lw[i]);
  }
  components_ = std::move(merged);
  log_weights_ = std::move(merged_lw);
}

GaussianMixture make_gaussian_mixture(int dim,
                                      std::vector<MixtureComponent> components) {
  return GaussianMixture(dim, std::move(components));
}

// ---------------------------------------------------------------------------
// AtomicMeasure

AtomicMeasure::AtomicMeasure(int dim, std::vector<Atom> atoms) : dim_(dim) {
  std::vector<Point> locations;
  std::vector<double> log_weights;
  for (auto& a : atoms) {
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) {
      throw ValidationError("atom weights must be positive and finite");
    }
    log_weights.push_back(std::log(a.weight));
    locations.push_back(std::move(a.location));
  }
  finish(std::move(locations), std::move(log_weights));
}

AtomicMeasure AtomicMeasure::from_log_weights(int dim, std::vector<Point> locations,
                                              std::vector<double> log_weights) {
  AtomicMeasure m;
  m.dim_ = dim;
  if (locations.size() != log_weights.size()) {
    throw ValidationError("one log weight per atom required");
  }
  m.finish(std::move(locations), std::move(log_weights));
  return m;
}

void AtomicMeasure::finish(std::vector<Point> locations,
                           std::vector<double> log_weights) {
  if (dim_ < 1) throw ValidationError("dimension must be >= 1");
  if (locations.empty()) throw ValidationError("atomic measure needs an atom");
  std::vector<Point> kept;
  std::vector<double> kept_lw;
  for (std::size_t i = 0; i < locations.size(); ++i) {
    check_point(locations[i], dim_, "atom location");
    auto same = std::find(kept.begin(), kept.end(), locations[i]);
    if (same != kept.end()) {
      double& lw = kept_lw[static_cast<std::size_t>(same - kept.begin())];
      const double parts[] = {lw, log_weights[i]};
      lw = log_sum_exp(parts);
    } else {
      kept.push_back(locations[i]);
      kept_lw.push_back(log_weights[i]);
    }
  }
  normalise(kept_lw);
  atoms_.clear();
  for (std::size_t i = 0; i < kept.size(); ++i) {
    atoms_.push_back({std::exp(kept_lw[i]), kept[i]});
  }
  log_weights_ = std::move(kept_lw);
}

// ---------------------------------------------------------------------------
// PerturbedLogConcave1D

PerturbedLogConcave1D::PerturbedLogConcave1D(PerturbedSpec spec)
    : spec_(std::move(spec)) {
  if (!std::isfinite(spec_.alpha)) throw ValidationError("alpha must be finite");
  if (!(spec_.lip >= 0.0) || !std::isfinite(spec_.lip)) {
    throw ValidationError("lip must be a nonnegative real");
  }
  const auto& knots = spec_.h_knots;
  const auto& slopes = spec_.h_slopes;
  if (slopes.size() != knots.size() + 1) {
    throw ValidationError("h_slopes needs exactly one more entry than h_knots");
  }
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i] > knots[i - 1])) {
      throw ValidationError("h_knots must be strictly increasing");
    }
  }
  for (double s : slopes) {
    if (!std::isfinite(s) || std::abs(s) > spec_.lip * (1.0 + 1e-12) + 1e-15) {
      throw ValidationError("every slope of H must be bounded by lip");
    }
  }
  for (const auto& term : spec_.v_extra) {
    if (!std::isfinite(term.knot)) throw ValidationError("knot must be finite");
    for (double c : {term.left, term.right, term.kink}) {
      if (!(c >= 0.0) || !std::isfinite(c)) {
        throw ValidationError("V_extra coefficients must be nonnegative");
      }
    }
  }

  // H(x) = slope_r x + offset_r on region r, pinned by H(0) = 0.
  h_offsets_.assign(slopes.size(), 0.0);
  const auto r0 = static_cast<std::size_t>(
      std::upper_bound(knots.begin(), knots.end(), 0.0) - knots.begin());
  for (std::size_t r = r0; r + 1 < slopes.size(); ++r) {
    h_offsets_[r + 1] = h_offsets_[r] + (slopes[r] - slopes[r + 1]) * knots[r];
  }
  for (std::size_t r = r0; r > 0; --r) {
    h_offsets_[r - 1] = h_offsets_[r] + (slopes[r] - slopes[r - 1]) * knots[r - 1];
  }

  std::vector<double> breaks = knots;
  for (const auto& term : spec_.v_extra) breaks.push_back(term.knot);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  std::vector<numerics::QuadPiece> pieces(breaks.size() + 1);
  for (std::size_t r = 0; r < pieces.size(); ++r) {
    double probe;
    if (breaks.empty()) {
      probe = 0.0;
    } else if (r == 0) {
      probe = breaks.front() - 1.0;
    } else if (r == breaks.size()) {
      probe = breaks.back() + 1.0;
    } else {
      probe = 0.5 * (breaks[r - 1] + breaks[r]);
    }
    auto& q = pieces[r];
    q.c2 += 0.5 * spec_.alpha;
    for (const auto& term : spec_.v_extra) {
      const double a = term.knot;
      if (probe > a) {
        q.c2 += 0.5 * term.right;
        q.c1 += -term.right * a + term.kink;
        q.c0 += 0.5 * term.right * a * a - term.kink * a;
      } else {
        q.c2 += 0.5 * term.left;
        q.c1 += -term.left * a - term.kink;
        q.c0 += 0.5 * term.left * a * a + term.kink * a;
      }
    }
    const auto hr = static_cast<std::size_t>(
        std::upper_bound(knots.begin(), knots.end(), probe) - knots.begin());
    q.c1 += slopes[hr];
    q.c0 += h_offsets_[hr];
  }
  potential_ = numerics::PiecewiseQuadratic(std::move(breaks), std::move(pieces));

  try {
    const auto integral = numerics::integrate_exp_neg(potential_);
    log_normalizer_ = integral.log_mass;
    mean_ = integral.mean;
    variance_ = integral.variance;
    cdf_ = std::make_shared<numerics::TabulatedCdf>(potential_);
  } catch (const NumericalError& e) {
    throw ValidationError(std::string("density is not normalisable: ") + e.what());
  }
}

double PerturbedLogConcave1D::convex_part(double x) const {
  double v = 0.5 * spec_.alpha * x * x;
  for (const auto& term : spec_.v_extra) {
    const double d = x - term.knot;
    v += d > 0.0 ? 0.5 * term.right * d * d : 0.5 * term.left * d * d;
    v += term.kink * std::abs(d);
  }
  return v;
}

double PerturbedLogConcave1D::lipschitz_part(double x) const {
  const auto& knots = spec_.h_knots;
  const auto r = static_cast<std::size_t>(
      std::upper_bound(knots.begin(), knots.end(), x) - knots.begin());
  return spec_.h_slopes[r] * x + h_offsets_[r];
}

numerics::ExpIntegral PerturbedLogConcave1D::tilted(double z, double t) const {
  if (!(t > 0.0)) throw ValidationError("t must be > 0");
  if (!std::isfinite(z)) throw ValidationError("tilt point must be finite");
  const auto w = potential_.shifted(z).plus(
      0.5 / t, 0.0, log_normalizer_ + 0.5 * std::log(2.0 * kPi * t));
  auto r = numerics::integrate_exp_neg(w);
  r.mean += z;
  r.mode += z;
  return r;
}

// ---------------------------------------------------------------------------
// CounterexampleMeasure

std::string psi_name(PsiKind kind) {
  switch (kind) {
    case PsiKind::Zero:
      return "zero";
    case PsiKind::Linear:
      return "linear";
    case PsiKind::Quadratic:
      return "quadratic";
  }
  return "zero";
}

PsiKind parse_psi(const std::string& name) {
  if (name == "zero") return PsiKind::Zero;
  if (name == "linear") return PsiKind::Linear;
  if (name == "quadratic") return PsiKind::Quadratic;
  throw ValidationError("psi must be one of zero, linear, quadratic");
}

CounterexampleMeasure::CounterexampleMeasure(Psi psi, int truncation)
    : psi_(psi), truncation_(truncation) {
  if (truncation < 1) throw ValidationError("truncation must be >= 1");
  if (psi.kind != PsiKind::Zero && (!(psi.coef >= 0.0) || !std::isfinite(psi.coef))) {
    throw ValidationError("psi must be nondecreasing and nonnegative on the atoms");
  }
  const int n = truncation + 1;
  positions_.resize(n);
  std::vector<double> raw(n);
  for (int i = 0; i < n; ++i) {
    positions_[i] = 0.5 * i * (i + 1.0);
    raw[i] = log_raw_weight(i);
  }
  for (int i = 1; i < n; ++i) {
    if (psi_(positions_[i]) < psi_(positions_[i - 1])) {
      throw ValidationError("psi decreases on the atom set");
    }
  }
  log_normalizer_ = log_sum_exp(raw);
  log_weights_ = raw;
  for (auto& lw : log_weights_) lw -= log_normalizer_;

  const double next_x = 0.5 * n * (n + 1.0);
  tail_bound_ = std::exp(-psi_(next_x) - std::log(static_cast<double>(n)) -
                         log_normalizer_);

  double inv_sq = 0.0;
  for (int i = n; i >= 1; --i) inv_sq += 1.0 / (static_cast<double>(i) * i);
  exp_psi_moment_ = inv_sq * std::exp(-log_normalizer_);

  // Full-series normaliser: keep adding atoms until they stop mattering.
  double log_full = log_normalizer_;
  if (psi_.kind == PsiKind::Zero || psi_.coef == 0.0) {
    log_full = std::log(kPi * kPi / 6.0);
  } else {
    for (int i = n; i < 1000000; ++i) {
      const double term = log_raw_weight(i);
      if (term < log_full - 40.0) break;
      const double parts[] = {log_full, term};
      log_full = log_sum_exp(parts);
    }
  }
  exp_psi_moment_series_ = (kPi * kPi / 6.0) * std::exp(-log_full);
}

double CounterexampleMeasure::log_raw_weight(int i) const {
  const double x = 0.5 * i * (i + 1.0);
  return -2.0 * std::log(i + 1.0) - psi_(x);
}

AtomicMeasure CounterexampleMeasure::as_atomic() const {
  std::vector<Point> locs;
  locs.reserve(positions_.size());
  for (double x : positions_) locs.push_back(as_point(x));
  return AtomicMeasure::from_log_weights(1, std::move(locs), log_weights_);
}

// ---------------------------------------------------------------------------
// Capability dispatch

int dimension(const Measure& m) {
  return std::visit(Overloaded{
                        [](const GaussianMixture& g) { return g.dim(); },
                        [](const AtomicMeasure& a) { return a.dim(); },
                        [](const auto&) { return 1; },
                    },
                    m);
}

std::string kind_name(const Measure& m) {
  return std::visit(
      Overloaded{
          [](const GaussianMixture&) { return std::string("gaussian_mixture"); },
          [](const AtomicMeasure&) { return std::string("atomic"); },
          [](const PerturbedLogConcave1D&) { return std::string("perturbed_1d"); },
          [](const CounterexampleMeasure&) { return std::string("counterexample"); },
          [](const HeatSmoothed1D&) { return std::string("heat_smoothed_1d"); },
      },
      m);
}

bool has_density(const Measure& m) {
  return !std::holds_alternative<AtomicMeasure>(m) &&
         !std::holds_alternative<CounterexampleMeasure>(m);
}

namespace {

struct MixtureDerivatives {
  double log_density;
  Point score;
  Matrix hessian;
};

MixtureDerivatives mixture_derivatives(const GaussianMixture& g, const Point& x,
                                       bool want_hessian) {
  const int d = g.dim();
  check_point(x, d, "evaluation point");
  const auto& comps = g.components();
  const std::size_t n = comps.size();
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = comps[i].variance;
    terms[i] = g.log_weights()[i] - (x - comps[i].mean).squaredNorm() / (2.0 * v) -
               d * (kLogSqrt2Pi + 0.5 * std::log(v));
  }
  MixtureDerivatives out;
  out.log_density = log_sum_exp(terms);
  out.score = Point::Zero(d);
  std::vector<double> resp(n);
  for (std::size_t i = 0; i < n; ++i) {
    resp[i] = std::exp(terms[i] - out.log_density);
    out.score -= resp[i] * (x - comps[i].mean) / comps[i].variance;
  }
  if (want_hessian) {
    out.hessian = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < n; ++i) {
      const Point g_i = -(x - comps[i].mean) / comps[i].variance - out.score;
      out.hessian += resp[i] * (g_i * g_i.transpose());
      out.hessian.diagonal().array() -= resp[i] / comps[i].variance;
    }
  }
  return out;
}

[[noreturn]] void no_density(const std::string& kind) {
  throw CapabilityError(kind + " has no Lebesgue density");
}

double scalar(const Point& x) {
  if (x.size() != 1) throw ValidationError("one-dimensional measure expects a scalar");
  return x(0);
}

}  // namespace

double log_density(const Measure& m, const Point& x) {
  return std::visit(
      Overloaded{
          [&](const GaussianMixture& g) {
            return mixture_derivatives(g, x, false).log_density;
          },
          [&](const PerturbedLogConcave1D& p) { return p.log_density(scalar(x)); },
          [&](const HeatSmoothed1D& h) {
            return h.base.tilted(scalar(x), h.t).log_mass;
          },
          [&](const auto&) -> double { no_density(kind_name(m)); },
      },
      m);
}

Point score(const Measure& m, const Point& x) {
  return std::visit(
      Overloaded{
          [&](const GaussianMixture& g) -> Point { return mixture_derivatives(g, x, false).score; },
          [&](const PerturbedLogConcave1D& p) -> Point {
            return as_point(-p.potential().slope(scalar(x)));
          },
          [&](const HeatSmoothed1D& h) -> Point {
            const double z = scalar(x);
            return as_point((h.base.tilted(z, h.t).mean - z) / h.t);
          },
          [&](const auto&) -> Point { no_density(kind_name(m)); },
      },
      m);
}

Matrix log_hessian(const Measure& m, const Point& x) {
  return std::visit(
      Overloaded{
          [&](const GaussianMixture& g) -> Matrix {
            return mixture_derivatives(g, x, true).hessian;
          },
          [&](const PerturbedLogConcave1D& p) -> Matrix {
            return Matrix::Constant(1, 1, -p.potential().curvature(scalar(x)));
          },
          [&](const HeatSmoothed1D& h) -> Matrix {
            const auto r = h.base.tilted(scalar(x), h.t);
            return Matrix::Constant(1, 1, (r.variance / h.t - 1.0) / h.t);
          },
          [&](const auto&) -> Matrix { no_density(kind_name(m)); },
      },
      m);
}

Measure convolve_gaussian(const Measure& m, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw ValidationError("convolution time must be > 0");
  }
  auto from_atoms = [t](const AtomicMeasure& a) -> Measure {
    std::vector<MixtureComponent> comps;
    for (const auto& atom : a.atoms()) comps.push_back({1.0, atom.location, t});
    return GaussianMixture::from_log_weights(a.dim(), std::move(comps),
                                             a.log_weights());
  };
  return std::visit(
      Overloaded{
          [&](const GaussianMixture& g) -> Measure {
            auto comps = g.components();
            for (auto& c : comps) c.variance += t;
            return GaussianMixture::from_log_weights(g.dim(), std::move(comps),
                                                     g.log_weights());
          },
          [&](const AtomicMeasure& a) { return from_atoms(a); },
          [&](const CounterexampleMeasure& c) { return from_atoms(c.as_atomic()); },
          [&](const PerturbedLogConcave1D& p) -> Measure {
            return HeatSmoothed1D{p, t};
          },
          [&](const HeatSmoothed1D& h) -> Measure {
            return HeatSmoothed1D{h.base, h.t + t};
          },
      },
      m);
}

namespace {

std::size_t pick(const std::vector<double>& log_weights, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    acc += std::exp(log_weights[i]);
    if (u < acc) return i;
  }
  // u landed in the rounding gap above the last cumulative weight
  for (std::size_t i = log_weights.size(); i-- > 0;) {
    if (std::isfinite(log_weights[i])) return i;
  }
  return 0;
}

}  // namespace

std::vector<Point> sample(const Measure& m, std::size_t n, std::uint64_t seed) {
  const CounterRng rng(seed);
  const int d = dimension(m);
  std::vector<Point> out(n);
  std::visit(
      Overloaded{
          [&](const GaussianMixture& g) {
            for (std::size_t i = 0; i < n; ++i) {
              const auto& c = g.components()[pick(g.log_weights(), rng.uniform(i, 0))];
              Point p(d);
              const double sd = std::sqrt(c.variance);
              for (int k = 0; k < d; ++k) p(k) = c.mean(k) + sd * rng.normal(i, 1 + k);
              out[i] = std::move(p);
            }
          },
          [&](const AtomicMeasure& a) {
            for (std::size_t i = 0; i < n; ++i) {
              out[i] = a.atoms()[pick(a.log_weights(), rng.uniform(i, 0))].location;
            }
          },
          [&](const CounterexampleMeasure& c) {
            for (std::size_t i = 0; i < n; ++i) {
              out[i] = as_point(c.positions()[pick(c.log_weights(), rng.uniform(i, 0))]);
            }
          },
          [&](const PerturbedLogConcave1D& p) {
            for (std::size_t i = 0; i < n; ++i) {
              out[i] = as_point(p.cdf_table().quantile(rng.uniform(i, 0)));
            }
          },
          [&](const HeatSmoothed1D& h) {
            const double sd = std::sqrt(h.t);
            for (std::size_t i = 0; i < n; ++i) {
              out[i] = as_point(h.base.cdf_table().quantile(rng.uniform(i, 0)) +
                                sd * rng.normal(i, 1));
            }
          },
      },
      m);
  return out;
}

std::vector<double> sample_1d(const Measure& m, std::size_t n, std::uint64_t seed) {
  if (dimension(m) != 1) throw CapabilityError("sample_1d needs a 1D measure");
  auto pts = sample(m, n, seed);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = pts[i](0);
  return out;
}

namespace {

Moments1D atom_moments(const std::vector<double>& log_weights,
                       const std::vector<double>& xs) {
  Moments1D mo;
  for (std::size_t i = 0; i < xs.size(); ++i) mo.mean += std::exp(log_weights[i]) * xs[i];
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mo.mean;
    mo.variance += std::exp(log_weights[i]) * dx * dx;
  }
  return mo;
}

std::vector<double> atom_positions(const AtomicMeasure& a) {
  std::vector<double> xs;
  for (const auto& atom : a.atoms()) xs.push_back(atom.location(0));
  return xs;
}

void require_1d(const Measure& m) {
  if (dimension(m) != 1) throw CapabilityError("operation needs a 1D measure");
}

}  // namespace

Moments1D moments_1d(const Measure& m) {
  require_1d(m);
  return std::visit(
      Overloaded{
          [](const GaussianMixture& g) {
            Moments1D mo;
            for (const auto& c : g.components()) mo.mean += c.weight * c.mean(0);
            for (const auto& c : g.components()) {
              const double dx = c.mean(0) - mo.mean;
              mo.variance += c.weight * (c.variance + dx * dx);
            }
            return mo;
          },
          [](const AtomicMeasure& a) {
            return atom_moments(a.log_weights(), atom_positions(a));
          },
          [](const CounterexampleMeasure& c) {
            return atom_moments(c.log_weights(), c.positions());
          },
          [](const PerturbedLogConcave1D& p) {
            return Moments1D{p.mean(), p.variance()};
          },
          [](const HeatSmoothed1D& h) {
            return Moments1D{h.base.mean(), h.base.variance() + h.t};
          },
      },
      m);
}

namespace {

double mixture_cdf(const GaussianMixture& g, double x) {
  double acc = 0.0;
  for (const auto& c : g.components()) {
    acc += c.weight * numerics::normal_cdf((x - c.mean(0)) / std::sqrt(c.variance));
  }
  return acc;
}

double atoms_cdf(const std::vector<double>& log_weights,
                 const std::vector<double>& xs, double x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] <= x) acc += std::exp(log_weights[i]);
  }
  return std::min(acc, 1.0);
}

double atoms_quantile(const std::vector<double>& log_weights,
                      const std::vector<double>& xs, double u) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  double acc = 0.0;
  for (std::size_t k : order) {
    acc += std::exp(log_weights[k]);
    if (u <= acc) return xs[k];
  }
  return xs[order.back()];
}

double mixture_quantile(const GaussianMixture& g, double u) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& c : g.components()) {
    const double sd = std::sqrt(c.variance);
    lo = std::min(lo, c.mean(0) - 40.0 * sd);
    hi = std::max(hi, c.mean(0) + 40.0 * sd);
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (mixture_cdf(g, mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double cdf_1d(const Measure& m, double x) {
  require_1d(m);
  return std::visit(
      Overloaded{
          [&](const GaussianMixture& g) { return mixture_cdf(g, x); },
          [&](const AtomicMeasure& a) {
            return atoms_cdf(a.log_weights(), atom_positions(a), x);
          },
          [&](const CounterexampleMeasure& c) {
            return atoms_cdf(c.log_weights(), c.positions(), x);
          },
          [&](const PerturbedLogConcave1D& p) { return p.cdf_table().cdf(x); },
          [&](const HeatSmoothed1D&) -> double {
            throw CapabilityError("CDF of a smoothed perturbed measure is not tabulated");
          },
      },
      m);
}

double quantile_1d(const Measure& m, double u) {
  require_1d(m);
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("quantile level must be in [0, 1]");
  return std::visit(
      Overloaded{
          [&](const GaussianMixture& g) { return mixture_quantile(g, u); },
          [&](const AtomicMeasure& a) {
            return atoms_quantile(a.log_weights(), atom_positions(a), u);
          },
          [&](const CounterexampleMeasure& c) {
            return atoms_quantile(c.log_weights(), c.positions(), u);
          },
          [&](const PerturbedLogConcave1D& p) { return p.cdf_table().quantile(u); },
          [&](const HeatSmoothed1D&) -> double {
            throw CapabilityError("quantile of a smoothed perturbed measure is not tabulated");
          },
      },
      m);
}

}  // namespace logheat
