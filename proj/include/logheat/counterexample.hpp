#pragma once

// Atomic measures whose heat flow is never log-concave, with certificates.

#include "logheat/measures.hpp"

namespace logheat {

CounterexampleMeasure build_counterexample(Psi psi, int truncation = 60);

/// tanh of half the log-ratio between the tilted masses of the atoms below
/// and at or above index j: the sign of sum_{i<j} w_i(z) - sum_{i>=j} w_i(z)
/// with w_i(z) = (i+1)^{-2} exp(-psi(x_i) + z x_i / t - x_i^2 / 2t), scaled
/// into [-1, 1].
double split_function_F(const CounterexampleMeasure& m, double t, int j, double z);

struct Certificate {
  double t = 0.0;
  double target_m = 0.0;
  int j = 0;
  double z_star = 0.0;
  double variance = 0.0;
  double curvature = 0.0;  // (1/t)(1 - variance/t)
  int truncation = 0;
  double tail_bound = 0.0;
  double lower_mass = 0.0;   // tilted mass of atoms below index j
  double tilted_tail = 0.0;  // dropped-atom tilted mass relative to the kept
};

/// Gap index j = ceil(2M) + 1; z* solves the half-mass split on [0, z_cap] with
/// z_cap = x_j + t (psi(x_j) + 4 log(j + 1)) / j.
Certificate variance_certificate(const CounterexampleMeasure& m, double t, double target_m);

struct TwoAtomReport {
  double z_bar = 0.0;
  double curvature_at_z_bar = 0.0;
  double analytic_value = 0.0;  // (1/t)(1 - x0^2 / 4t)
  double grid_min_curvature = 0.0;
  double grid_argmin = 0.0;
};

/// mu = w0 delta_0 + w1 delta_{x0} (weights normalised).
TwoAtomReport two_atom_analysis(double x0, double w0, double w1, double t);

}  // namespace logheat
