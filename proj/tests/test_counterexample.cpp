#include <doctest.h>

#include <cmath>

#include "logheat/counterexample.hpp"
#include "logheat/errors.hpp"
#include "logheat/heatflow.hpp"
#include "logheat/numerics.hpp"
#include "oracles.hpp"

using namespace logheat;

namespace {

struct Enumerated {
  long double lower = 0;  // tilted mass below index j
  long double var = 0;
};

// Direct enumeration of the tilted atoms in long double.
Enumerated enumerate(const CounterexampleMeasure& m, double z, double t, int j) {
  std::vector<double> lw;
  for (int i = 0; i <= m.truncation(); ++i) lw.push_back(m.log_raw_weight(i));
  const auto p = oracle::tilted_atom_probs(m.positions(), lw, z, t);
  Enumerated e;
  long double mean = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    mean += p[i] * m.positions()[i];
    if (static_cast<int>(i) < j) e.lower += p[i];
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    const long double d = m.positions()[i] - mean;
    e.var += p[i] * d * d;
  }
  return e;
}

}  // namespace

TEST_CASE("split function F") {
  const auto m = build_counterexample({PsiKind::Zero, 1.0}, 60);
  for (int j : {1, 5, 15, 30}) {
    CHECK(split_function_F(m, 1.0, j, 0.0) >= 0.0);
    CHECK(split_function_F(m, 1.0, j, 5000.0) < 0.0);
  }

  // coarse sign scan locates the root the bisection should find
  const int j = 15;
  double prev_z = 0.0, bracket_lo = -1.0;
  for (double z = 1.0; z <= 400.0; z += 1.0) {
    if (split_function_F(m, 1.0, j, prev_z) >= 0.0 && split_function_F(m, 1.0, j, z) < 0.0) {
      bracket_lo = prev_z;
      break;
    }
    prev_z = z;
  }
  REQUIRE(bracket_lo >= 0.0);
  const auto root = numerics::find_root_bisect(
      [&](double z) { return split_function_F(m, 1.0, j, z); }, bracket_lo, bracket_lo + 1.0,
      1e-10);
  const auto e = enumerate(m, root, 1.0, j);
  CHECK(std::fabs(static_cast<double>(e.lower) - 0.5) < 1e-8);

  // two atoms, j = 1: equal tilted weights where
  // z x1 / t - x1^2 / 2t = log 4  (weights 1 and 1/4, x1 = 1)
  const auto two = build_counterexample({PsiKind::Zero, 1.0}, 1);
  const double t = 0.7, z_eq = t * std::log(4.0) + 0.5;
  CHECK(std::fabs(split_function_F(two, t, 1, z_eq)) < 1e-14);
  CHECK(split_function_F(two, t, 1, z_eq - 0.1) > 0.0);
  CHECK(split_function_F(two, t, 1, z_eq + 0.1) < 0.0);
}

TEST_CASE("certificates") {
  const auto zero = build_counterexample({PsiKind::Zero, 1.0}, 60);
  const auto c = variance_certificate(zero, 1.0, 10.0);
  CHECK(c.j == 21);
  CHECK(zero.positions()[c.j] - zero.positions()[c.j - 1] == c.j);
  CHECK(c.curvature <= -99.0);
  CHECK(c.variance >= 100.0);
  CHECK(c.variance >= 0.25 * c.j * c.j * (1 - 1e-9));
  const auto e = enumerate(zero, c.z_star, 1.0, c.j);
  CHECK(std::fabs(static_cast<double>(e.lower) - 0.5) < 1e-9);
  CHECK(c.variance == doctest::Approx(static_cast<double>(e.var)).epsilon(1e-10));
  CHECK(c.tilted_tail < 1e-12);

  const auto lin = build_counterexample({PsiKind::Linear, 1.0}, 60);
  const auto l = variance_certificate(lin, 2.0, 5.0);
  CHECK(l.curvature <= 0.5 * (1 - 25.0 / 2) + 1e-6);
  CHECK(l.curvature <= -5.75 + 1e-6);

  const auto small = variance_certificate(zero, 0.5, 1.0);
  CHECK(small.j <= 3);
  CHECK(small.variance >= 1.0);
}

TEST_CASE("certificate invariants") {
  for (auto kind : {PsiKind::Zero, PsiKind::Linear, PsiKind::Quadratic}) {
    const auto m = build_counterexample({kind, 1.0}, 60);
    for (double t : {0.5, 1.0, 2.0}) {
      double prev = INFINITY;
      for (double M : {5.0, 10.0, 20.0}) {
        const auto c = variance_certificate(m, t, M);
        CHECK(c.curvature == doctest::Approx((1 / t) * (1 - c.variance / t)).epsilon(1e-10));
        CHECK(c.variance >= M * M * (1 - 1e-6));
        CHECK(c.curvature <= (1 / t) * (1 - M * M / t) + 1e-6);
        CHECK(std::fabs(c.lower_mass - 0.5) < 1e-9);
        CHECK(c.curvature < prev);
        prev = c.curvature;
        // agrees with the generic tilted-moment path
        const Measure atoms = m.as_atomic();
        CHECK(c.variance == doctest::Approx(tilted_moments(atoms, Point::Constant(1, c.z_star), t)
                                                .covariance(0, 0))
                                .epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("certificate errors") {
  const auto short_m = build_counterexample({PsiKind::Zero, 1.0}, 10);
  CHECK_THROWS_AS(variance_certificate(short_m, 1.0, 10.0), ValidationError);
  CHECK_THROWS_AS(build_counterexample({PsiKind::Linear, -2.0}, 10), ValidationError);
}

TEST_CASE("two atoms") {
  auto r = two_atom_analysis(2, 0.5, 0.5, 1.0);
  CHECK(r.z_bar == doctest::Approx(1.0));
  CHECK(std::fabs(r.curvature_at_z_bar) < 1e-10);
  r = two_atom_analysis(2, 0.5, 0.5, 0.9);
  CHECK(r.curvature_at_z_bar == doctest::Approx((1 / 0.9) * (1 - 4 / 3.6)).epsilon(1e-10));
  CHECK(r.curvature_at_z_bar == doctest::Approx(-0.12346).epsilon(1e-5));
  r = two_atom_analysis(2, 0.9, 0.1, 1.0);
  CHECK(std::fabs(r.curvature_at_z_bar) < 1e-10);

  for (double x0 : {1.0, 2.0, 5.0}) {
    for (auto [w0, w1] : {std::pair{0.5, 0.5}, {0.9, 0.1}}) {
      const double th = 0.25 * x0 * x0;
      const auto at = two_atom_analysis(x0, w0, w1, th);
      CHECK(at.grid_min_curvature >= -1e-9);
      CHECK(at.curvature_at_z_bar == doctest::Approx(at.analytic_value).epsilon(1e-10));
      const auto above = two_atom_analysis(x0, w0, w1, 1.5 * th);
      CHECK(above.grid_min_curvature >= -1e-9);
      const auto below = two_atom_analysis(x0, w0, w1, 0.9 * th);
      CHECK(below.grid_min_curvature < 0.0);
      // direct two-point variance at z_bar
      const double t = 0.9 * th;
      const double l = std::log(w1 / w0) + (below.z_bar * x0 - 0.5 * x0 * x0) / t;
      const double p = 1 / (1 + std::exp(-l));
      CHECK(below.curvature_at_z_bar ==
            doctest::Approx((1 / t) * (1 - p * (1 - p) * x0 * x0 / t)).epsilon(1e-10));
    }
  }
}
