#pragma once

// Heat and Ornstein–Uhlenbeck semigroup quantities built on tilted measures.

#include "logheat/measures.hpp"

namespace logheat {

/// Moments of mu_{z,t}, the measure proportional to gamma_t(z - x) mu(dx).
struct TiltedMoments {
  Point mean;
  Matrix covariance;
  double mass_log = 0.0;  // log (mu * gamma_t)(z)
};

TiltedMoments tilted_moments(const Measure& m, const Point& z, double t);

/// -Hess log(mu * gamma_t)(z) = (I - Cov(mu_{z,t}) / t) / t. For mixtures the
/// closed-form Hessian is evaluated as well and must agree to 1e-8.
Matrix log_hessian_heat(const Measure& m, const Point& z, double t);

struct OuDerivatives {
  double value = 0.0;
  Point gradient;
  Matrix hessian;
};

/// log Q_t(dmu/dgamma) and its first two derivatives at x, where
/// Q_t f(x) = E f(e^{-t} x + sqrt(1 - e^{-2t}) G).
OuDerivatives ou_log_derivatives(const Measure& m, double t, const Point& x);

double wasserstein2_1d(const Measure& mu, const Measure& nu);

struct Lemma1Result {
  double lhs = 0.0;   // Var(mu)
  double rhs = 0.0;   // (W2(mu, nu) + sqrt(Var(nu)))^2
  double slack = 0.0;
  double w2 = 0.0;
};

Lemma1Result lemma1_check(const Measure& mu, const Measure& nu);

}  // namespace logheat
