#pragma once

// Probability measures handled by the library, with log-density, score,
// exact Gaussian convolution and sampling where the kind supports them.

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "logheat/piecewise.hpp"

namespace logheat {

using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Isotropic component weight * N(mean, variance * I).
struct MixtureComponent {
  double weight = 1.0;
  Point mean;
  double variance = 1.0;
};

class GaussianMixture {
 public:
  /// Validates, merges identical components and normalises the weights.
  GaussianMixture(int dim, std::vector<MixtureComponent> components);

  /// Same, with weights supplied as (possibly unnormalised) logarithms.
  static GaussianMixture from_log_weights(int dim,
                                          std::vector<MixtureComponent> components,
                                          std::vector<double> log_weights);

  int dim() const noexcept { return dim_; }
  const std::vector<MixtureComponent>& components() const noexcept {
    return components_;
  }
  /// Normalised log weights; finite even where `weight` underflows to 0.
  const std::vector<double>& log_weights() const noexcept { return log_weights_; }

 private:
  GaussianMixture() = default;
  void finish(std::vector<MixtureComponent> components,
              std::vector<double> log_weights);

  int dim_ = 1;
  std::vector<MixtureComponent> components_;
  std::vector<double> log_weights_;
};

GaussianMixture make_gaussian_mixture(int dim,
                                      std::vector<MixtureComponent> components);

struct Atom {
  double weight = 1.0;
  Point location;
};

class AtomicMeasure {
 public:
  AtomicMeasure(int dim, std::vector<Atom> atoms);
  static AtomicMeasure from_log_weights(int dim, std::vector<Point> locations,
                                        std::vector<double> log_weights);

  int dim() const noexcept { return dim_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::vector<double>& log_weights() const noexcept { return log_weights_; }

 private:
  AtomicMeasure() = default;
  void finish(std::vector<Point> locations, std::vector<double> log_weights);

  int dim_ = 1;
  std::vector<Atom> atoms_;
  std::vector<double> log_weights_;
};

/// left * (knot - x)_+^2 / 2 + right * (x - knot)_+^2 / 2 + kink * |x - knot|,
/// all coefficients nonnegative, so every term is convex.
struct ConvexTerm {
  double knot = 0.0;
  double left = 0.0;
  double right = 0.0;
  double kink = 0.0;
};

struct PerturbedSpec {
  double alpha = 1.0;
  double lip = 0.0;
  std::vector<ConvexTerm> v_extra;
  /// H is continuous piecewise linear with H(0) = 0; h_slopes has one more
  /// entry than h_knots.
  std::vector<double> h_knots;
  std::vector<double> h_slopes{0.0};
};

/// Density exp(-(V + H)) / Z on R with V = alpha x^2 / 2 + V_extra convex
/// piecewise quadratic and H piecewise linear with |H'| <= lip.
class PerturbedLogConcave1D {
 public:
  explicit PerturbedLogConcave1D(PerturbedSpec spec);

  const PerturbedSpec& spec() const noexcept { return spec_; }
  double alpha() const noexcept { return spec_.alpha; }
  double lip() const noexcept { return spec_.lip; }
  double log_normalizer() const noexcept { return log_normalizer_; }

  /// V + H, without the normaliser.
  const numerics::PiecewiseQuadratic& potential() const noexcept {
    return potential_;
  }
  double convex_part(double x) const;
  double lipschitz_part(double x) const;
  double log_density(double x) const {
    return -potential_.value(x) - log_normalizer_;
  }

  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return variance_; }
  const numerics::TabulatedCdf& cdf_table() const { return *cdf_; }

  /// Integral of the density against gamma_t(z - x) as a function of x:
  /// log_mass = log (mu * gamma_t)(z), and mean/variance of the tilted
  /// measure proportional to gamma_{z,t} mu.
  numerics::ExpIntegral tilted(double z, double t) const;

 private:
  PerturbedSpec spec_;
  std::vector<double> h_offsets_;
  numerics::PiecewiseQuadratic potential_;
  double log_normalizer_ = 0.0;
  double mean_ = 0.0;
  double variance_ = 0.0;
  std::shared_ptr<const numerics::TabulatedCdf> cdf_;
};

enum class PsiKind { Zero, Linear, Quadratic };

struct Psi {
  PsiKind kind = PsiKind::Zero;
  double coef = 1.0;
  double operator()(double x) const {
    switch (kind) {
      case PsiKind::Zero:
        return 0.0;
      case PsiKind::Linear:
        return coef * x;
      case PsiKind::Quadratic:
        return coef * x * x;
    }
    return 0.0;
  }
};

std::string psi_name(PsiKind kind);
PsiKind parse_psi(const std::string& name);

/// Atoms at x_i = i(i+1)/2, i = 0..N, with weight proportional to
/// (i+1)^{-2} exp(-psi(x_i)).
class CounterexampleMeasure {
 public:
  CounterexampleMeasure(Psi psi, int truncation);

  const Psi& psi() const noexcept { return psi_; }
  int truncation() const noexcept { return truncation_; }
  const std::vector<double>& positions() const noexcept { return positions_; }
  /// (i+1)^{-2} e^{-psi(x_i)} in log form, unnormalised.
  double log_raw_weight(int i) const;
  const std::vector<double>& log_weights() const noexcept { return log_weights_; }
  double log_normalizer() const noexcept { return log_normalizer_; }
  /// Bound on the mass of the dropped atoms i > N relative to the kept mass.
  double tail_bound() const noexcept { return tail_bound_; }
  /// Integral of e^psi against the truncated (renormalised) measure.
  double exp_psi_moment() const noexcept { return exp_psi_moment_; }
  /// Same for the full series: (pi^2/6) / sum_i (i+1)^{-2} e^{-psi(x_i)}.
  double exp_psi_moment_series() const noexcept { return exp_psi_moment_series_; }

  AtomicMeasure as_atomic() const;

 private:
  Psi psi_;
  int truncation_;
  std::vector<double> positions_;
  std::vector<double> log_weights_;
  double log_normalizer_ = 0.0;
  double tail_bound_ = 0.0;
  double exp_psi_moment_ = 0.0;
  double exp_psi_moment_series_ = 0.0;
};

/// mu * gamma_t for a perturbed measure; evaluated by quadrature.
struct HeatSmoothed1D {
  PerturbedLogConcave1D base;
  double t;
};

using Measure = std::variant<GaussianMixture, AtomicMeasure, PerturbedLogConcave1D,
                             CounterexampleMeasure, HeatSmoothed1D>;

int dimension(const Measure& m);
std::string kind_name(const Measure& m);
bool has_density(const Measure& m);

/// Log-density, score and Hessian of the log-density. Exact closed forms for
/// mixtures. Throws CapabilityError for atomic kinds.
double log_density(const Measure& m, const Point& x);
Point score(const Measure& m, const Point& x);
Matrix log_hessian(const Measure& m, const Point& x);

Measure convolve_gaussian(const Measure& m, double t);

/// n points, deterministic given the seed; sample i depends only on
/// (seed, i).
std::vector<Point> sample(const Measure& m, std::size_t n, std::uint64_t seed);
std::vector<double> sample_1d(const Measure& m, std::size_t n, std::uint64_t seed);

struct Moments1D {
  double mean = 0.0;
  double variance = 0.0;
};
Moments1D moments_1d(const Measure& m);

double cdf_1d(const Measure& m, double x);
double quantile_1d(const Measure& m, double u);

}  // namespace logheat
