#include "logheat/bounds.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "logheat/errors.hpp"
#include "logheat/heatflow.hpp"
#include "logheat/numerics.hpp"

namespace logheat {

namespace {

void require_finite(std::initializer_list<double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw ValidationError("arguments must be finite");
  }
}

void require_lip(double lip) {
  if (!(lip >= 0.0)) throw ValidationError("lip must be >= 0");
}

}  // namespace

Envelope thm2_envelope(double alpha, double lip, double t) {
  require_finite({alpha, lip, t});
  require_lip(lip);
  if (!(t > 0.0)) throw DomainError("t must be > 0");
  if (!(alpha * t + 1.0 > 0.0)) throw DomainError("needs alpha t + 1 > 0");
  const double a = alpha + 1.0 / t;
  const double inner = lip / a + std::sqrt(1.0 / a);
  return {(1.0 - inner * inner / t) / t, 1.0 / t};
}

double log_concavity_time(double alpha, double lip) {
  require_finite({alpha, lip});
  require_lip(lip);
  if (!(alpha > 0.0)) throw DomainError("alpha must be > 0");
  const double r = lip / alpha + 1.0 / std::sqrt(alpha);
  return r * r;
}

double compact_support_lower(double radius, double t) {
  require_finite({radius, t});
  if (!(radius >= 0.0)) throw ValidationError("radius must be >= 0");
  if (!(t > 0.0)) throw DomainError("t must be > 0");
  return (1.0 - radius * radius / t) / t;
}

Example3Check example3_limit_check(double radius, double t, double s) {
  require_finite({radius, t, s});
  if (!(s > 0.0) || !(t > 0.0)) throw DomainError("s and t must be > 0");
  Example3Check out;
  out.thm2_value_at_shift = thm2_envelope(1.0 / s, radius / s, t).lower;
  out.classical_value = compact_support_lower(radius, t);
  out.gap = out.classical_value - out.thm2_value_at_shift;
  return out;
}

Envelope cor7_envelope(double alpha, double lip, double t) {
  require_finite({alpha, lip, t});
  require_lip(lip);
  if (!(t > 0.0)) throw DomainError("t must be > 0");
  const double tau = std::expm1(2.0 * t);
  const double q = alpha * tau + 1.0;
  if (!(q > 0.0)) throw DomainError("needs alpha (e^{2t} - 1) + 1 > 0");
  const double e2t = tau + 1.0;
  const double upper = (1.0 - alpha) / q + e2t * lip * lip / (q * q) +
                       2.0 * lip * e2t / (std::sqrt(tau) * std::pow(q, 1.5));
  return {-1.0 / tau, upper};
}

namespace {

// Integral over u in [ua, ub] of the upper envelope written in tau = u^2,
// dt = dtau / (2 (tau + 1)); the substitution removes the 1/sqrt(tau)
// singularity at the origin.
double upper_u_integral(double alpha, double lip, double ua, double ub) {
  auto integrand_u = [&](double u) {
    const double tau = u * u;
    const double q = alpha * tau + 1.0;
    const double smooth = (1.0 - alpha) / (q * (tau + 1.0)) + lip * lip / (q * q);
    return smooth * u + 2.0 * lip / std::pow(q, 1.5);
  };
  const auto& gl = numerics::gauss_legendre(16);
  std::vector<double> edges{ua};
  double e = std::max(ua, 1e-3);
  while (e < ub) {
    if (e > edges.back()) edges.push_back(e);
    e *= 1.25;
  }
  if (ub > edges.back()) edges.push_back(ub);
  double sum = 0.0;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double half = 0.5 * (edges[p + 1] - edges[p]);
    const double mid = 0.5 * (edges[p + 1] + edges[p]);
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
      sum += half * gl.weights[k] * integrand_u(mid + half * gl.nodes[k]);
    }
  }
  return sum;
}

// Exact integral of the envelope over tau > T.
double upper_tau_tail(double alpha, double lip, double T) {
  const double q = alpha * T + 1.0;
  return 0.5 * (std::log(q / (T + 1.0)) - std::log(alpha)) +
         lip * lip / (2.0 * alpha * q) +
         2.0 * lip * (1.0 / std::sqrt(alpha) - std::sqrt(T / q));
}

}  // namespace

double cor7_upper_integral(double alpha, double lip, double t_a, double t_b) {
  require_lip(lip);
  if (!std::isfinite(alpha) || !std::isfinite(lip) || !std::isfinite(t_a)) {
    throw ValidationError("arguments must be finite");
  }
  if (!(t_a >= 0.0) || !(t_b >= t_a)) throw DomainError("need 0 <= t_a <= t_b");
  if (t_a > 0.0) cor7_envelope(alpha, lip, t_a);  // domain check
  const double tau_a = std::expm1(2.0 * t_a);
  if (std::isinf(t_b)) {
    if (!(alpha > 0.0)) throw DomainError("the integral to infinity needs alpha > 0");
    const double T = std::max(1e4, 10.0 * tau_a);
    return upper_u_integral(alpha, lip, std::sqrt(tau_a), std::sqrt(T)) +
           upper_tau_tail(alpha, lip, T);
  }
  cor7_envelope(alpha, lip, t_b);
  return upper_u_integral(alpha, lip, std::sqrt(tau_a), std::sqrt(std::expm1(2.0 * t_b)));
}

IntegratedOuUpper integrated_ou_upper(double alpha, double lip, double horizon_tau) {
  require_finite({alpha, lip, horizon_tau});
  require_lip(lip);
  if (!(alpha > 0.0)) throw DomainError("alpha must be > 0");
  if (!(horizon_tau > 0.0)) throw ValidationError("horizon must be > 0");
  IntegratedOuUpper out;
  out.horizon_tau = horizon_tau;
  out.closed_form = -0.5 * std::log(alpha) + lip * lip / (2.0 * alpha) +
                    2.0 * lip / std::sqrt(alpha);
  out.tail = upper_tau_tail(alpha, lip, horizon_tau);
  out.numeric = upper_u_integral(alpha, lip, 0.0, std::sqrt(horizon_tau)) + out.tail;
  return out;
}

TransportConstants transport_constants(const PerturbationParams& p) {
  require_finite({p.alpha, p.lip, p.third_deriv});
  require_lip(p.lip);
  if (!(p.third_deriv >= 0.0)) throw ValidationError("third_deriv must be >= 0");
  if (!(p.alpha > 0.0)) throw DomainError("alpha must be > 0");
  const double sa = std::sqrt(p.alpha);
  TransportConstants c;
  c.caffarelli = 1.0 / sa;
  c.thm3 = std::exp(p.lip * p.lip / (2.0 * p.alpha) + 2.0 * p.lip / sa) / sa;
  c.fms = std::exp(5.0 * p.lip * p.lip / p.alpha +
                   5.0 * std::sqrt(numerics::kPi) * p.lip / sa +
                   p.lip * p.third_deriv / (2.0 * p.alpha * p.alpha)) /
          sa;
  return c;
}

double lsi_transfer(double c, double lip_map) {
  require_finite({c, lip_map});
  if (!(c > 0.0) || !(lip_map > 0.0)) {
    throw ValidationError("LSI constant and Lipschitz constant must be > 0");
  }
  return lip_map * lip_map * c;
}

MixtureHessianLower mixture_hessian_lower(const GaussianMixture& mix, const Point& x) {
  const int d = mix.dim();
  if (x.size() != d || !x.allFinite()) throw ValidationError("bad evaluation point");
  const auto& comps = mix.components();
  const std::size_t n = comps.size();
  double vmax = 0.0;
  std::vector<double> log_mu(n);
  std::vector<Point> grad(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = comps[i].variance;
    vmax = std::max(vmax, v);
    const Point dx = x - comps[i].mean;
    log_mu[i] = mix.log_weights()[i] - d * (numerics::kLogSqrt2Pi + 0.5 * std::log(v)) -
                dx.squaredNorm() / (2.0 * v);
    grad[i] = dx / v;
  }
  const double log_total = numerics::log_sum_exp(log_mu);
  MixtureHessianLower out;
  out.k = 1.0 / vmax;
  out.refined = out.k * Matrix::Identity(d, d);
  out.crude = out.refined;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const Point g = grad[i] - grad[j];
      const Matrix outer = g * g.transpose();
      out.refined -= std::exp(log_mu[i] + log_mu[j] - 2.0 * log_total) * outer;
      const double a = log_mu[i] - log_mu[j];
      const double c = std::cosh(0.5 * a);
      out.crude -= (std::isfinite(c) ? 1.0 / (4.0 * c * c) : 0.0) * outer;
    }
  }
  return out;
}

HessianBoundReport hessian_bound_report(const Measure& m, const Point& z, double t,
                                        double alpha, double lip) {
  HessianBoundReport r;
  r.z = z;
  r.t = t;
  r.computed = log_hessian_heat(m, z, t);
  const auto env = thm2_envelope(alpha, lip, t);
  r.lower_envelope = env.lower;
  r.upper_envelope = env.upper;
  Eigen::SelfAdjointEigenSolver<Matrix> es(r.computed, Eigen::EigenvaluesOnly);
  r.slack_lower = es.eigenvalues().minCoeff() - env.lower;
  r.slack_upper = env.upper - es.eigenvalues().maxCoeff();
  return r;
}

}  // namespace logheat
