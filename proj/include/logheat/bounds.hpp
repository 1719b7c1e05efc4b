#pragma once

// Closed-form curvature envelopes and transport constants.

#include "logheat/measures.hpp"

namespace logheat {

struct PerturbationParams {
  double alpha = 1.0;
  double lip = 0.0;
  double radius = 0.0;
  double third_deriv = 0.0;
  double beta = 0.0;
};

struct Envelope {
  double lower = 0.0;
  double upper = 0.0;
};

/// Sandwich for -Hess log(mu * gamma_t) when mu = e^{-(V+H)}, V alpha-convex,
/// H lip-Lipschitz. Needs alpha t + 1 > 0.
Envelope thm2_envelope(double alpha, double lip, double t);

/// (lip/alpha + 1/sqrt(alpha))^2, the time after which mu * gamma_t is
/// log-concave.
double log_concavity_time(double alpha, double lip);

/// (1/t)(1 - R^2/t) for measures supported in the ball of radius R.
double compact_support_lower(double radius, double t);

struct Example3Check {
  double thm2_value_at_shift = 0.0;
  double classical_value = 0.0;
  double gap = 0.0;  // classical_value - thm2_value_at_shift
};

/// Envelope for mu * gamma_s seen as a (1/s)-convex, (R/s)-Lipschitz
/// perturbation, at horizon t, against the compact-support bound.
Example3Check example3_limit_check(double radius, double t, double s);

/// Bounds on Hess log Q_t(dmu/dgamma). Needs alpha (e^{2t} - 1) + 1 > 0.
Envelope cor7_envelope(double alpha, double lip, double t);

/// Integral of the upper envelope of cor7_envelope over t in [t_a, t_b];
/// t_b may be +inf when alpha > 0.
double cor7_upper_integral(double alpha, double lip, double t_a, double t_b);

struct IntegratedOuUpper {
  double closed_form = 0.0;
  double numeric = 0.0;     // quadrature on tau in (0, horizon] plus tail
  double tail = 0.0;        // exact integral over tau > horizon
  double horizon_tau = 0.0;
};

/// Integral over t in (0, inf) of the upper envelope of cor7_envelope.
IntegratedOuUpper integrated_ou_upper(double alpha, double lip,
                                      double horizon_tau = 1e4);

struct TransportConstants {
  double caffarelli = 0.0;
  double thm3 = 0.0;
  double fms = 0.0;
};

TransportConstants transport_constants(const PerturbationParams& p);

/// LSI constant of the pushforward of an LSI(C) measure by an
/// lip_map-Lipschitz map.
double lsi_transfer(double c, double lip_map);

/// Lower bounds on -Hess log mu for a mixture, reading component i as
/// alpha_i e^{-U_i} with U_i = |x - m_i|^2 / (2 v_i).
struct MixtureHessianLower {
  Matrix refined;
  Matrix crude;
  double k = 0.0;  // 1 / max_i v_i
};

MixtureHessianLower mixture_hessian_lower(const GaussianMixture& mix, const Point& x);

struct HessianBoundReport {
  Point z;
  double t = 0.0;
  Matrix computed;  // -Hess log(mu * gamma_t)(z)
  double lower_envelope = 0.0;
  double upper_envelope = 0.0;
  double slack_lower = 0.0;
  double slack_upper = 0.0;
};

HessianBoundReport hessian_bound_report(const Measure& m, const Point& z, double t,
                                        double alpha, double lip);

}  // namespace logheat
