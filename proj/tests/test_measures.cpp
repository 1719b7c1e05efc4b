#include <doctest.h>

#include <array>
#include <cmath>

#include "logheat/errors.hpp"
#include "logheat/measure_io.hpp"
#include "logheat/measures.hpp"
#include "logheat/numerics.hpp"
#include "oracles.hpp"

using namespace logheat;

namespace {

Point p1(double x) { return Point::Constant(1, x); }

GaussianMixture mix1(std::vector<std::array<double, 3>> c) {
  std::vector<MixtureComponent> comps;
  for (const auto& [w, m, v] : c) comps.push_back({w, p1(m), v});
  return make_gaussian_mixture(1, comps);
}

PerturbedSpec abs_spec() {
  PerturbedSpec s;
  s.alpha = 1.0;
  s.lip = 1.0;
  s.h_knots = {0.0};
  s.h_slopes = {-1.0, 1.0};
  return s;
}

}  // namespace

TEST_CASE("mixture construction") {
  const auto g = mix1({{1, 0, 1}});
  CHECK(g.components().size() == 1);
  CHECK(g.components()[0].weight == doctest::Approx(1.0));

  const auto h = mix1({{2, 0, 1}, {2, 3, 1}});
  CHECK(h.components()[0].weight == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(h.components()[1].weight == doctest::Approx(0.5).epsilon(1e-15));

  // duplicates merge without changing the density
  const auto dup = mix1({{1, 0, 1}, {1, 0, 1}, {2, 2, 0.5}});
  CHECK(dup.components().size() == 2);
  const auto ref = mix1({{2, 0, 1}, {2, 2, 0.5}});
  for (double x = -3; x <= 5; x += 0.5) {
    CHECK(log_density(dup, p1(x)) == doctest::Approx(log_density(ref, p1(x))).epsilon(1e-14));
    CHECK(std::exp(log_density(dup, p1(x))) ==
          doctest::Approx(static_cast<double>(oracle::mixture_density_1d(ref, x))).epsilon(1e-13));
  }

  CHECK_THROWS_AS(mix1({{1, 0, 0}}), ValidationError);
  CHECK_THROWS_AS(mix1({{-1, 0, 1}}), ValidationError);
  CHECK_THROWS_AS(make_gaussian_mixture(1, {}), ValidationError);
}

TEST_CASE("closed-form derivatives of mixtures") {
  const Measure g = mix1({{1, 0, 1}});
  CHECK(log_density(g, p1(0)) == doctest::Approx(-0.5 * std::log(2 * oracle::kPi)));
  CHECK(std::fabs(score(g, p1(0))(0)) < 1e-15);
  CHECK(log_hessian(g, p1(0))(0, 0) == doctest::Approx(-1.0));

  const auto pair = mix1({{0.5, 0, 1}, {0.5, 2, 1}});
  const Measure m = pair;
  CHECK(std::fabs(score(m, p1(1))(0)) < 1e-14);
  // at the midpoint the tilt between the two components is even, so
  // -(log f)'' = 1 - (x0/2)^2 with x0 = 2
  CHECK(std::fabs(log_hessian(m, p1(1))(0, 0) - 0.0) < 1e-12);
  auto f = [&](long double x) { return oracle::mixture_density_1d(pair, x); };
  for (double x = -3; x <= 5; x += 0.4) {
    CHECK(-log_hessian(m, p1(x))(0, 0) == doctest::Approx(oracle::neg_log_second(f, x)).epsilon(1e-5));
  }

  // log-Hessian does not see the overall weight scale
  const auto scaled = mix1({{3.0, 0, 1}, {3.0, 2, 1}});
  for (double x = -2; x <= 4; x += 0.5) {
    CHECK(log_hessian(Measure(scaled), p1(x))(0, 0) ==
          doctest::Approx(log_hessian(m, p1(x))(0, 0)).epsilon(1e-14));
  }
}

TEST_CASE("atoms have no density") {
  const Measure a = AtomicMeasure(1, {{0.5, p1(0)}, {0.5, p1(2)}});
  CHECK_FALSE(has_density(a));
  CHECK_THROWS_AS(log_density(a, p1(0)), CapabilityError);
  CHECK_THROWS_AS(score(a, p1(0)), CapabilityError);
  CHECK_THROWS_AS(log_hessian(a, p1(0)), CapabilityError);
  // repeated locations merge into one atom
  const AtomicMeasure merged(1, {{0.5, p1(1)}, {0.25, p1(1)}, {0.25, p1(3)}});
  REQUIRE(merged.atoms().size() == 2);
  CHECK(merged.atoms()[0].weight == doctest::Approx(0.75));
  CHECK_THROWS_AS(AtomicMeasure(1, {{0.0, p1(1)}}), ValidationError);
}

TEST_CASE("finite differences agree with log_hessian for density kinds") {
  const Measure pert = PerturbedLogConcave1D([] {
    PerturbedSpec s;
    s.alpha = 0.8;
    s.lip = 1.5;
    s.h_knots = {-1.0, 0.5};
    s.h_slopes = {1.5, -0.5, 1.0};
    s.v_extra = {{2.0, 0.0, 1.0, 0.0}};
    return s;
  }());
  const Measure smooth = convolve_gaussian(pert, 0.7);
  const Measure mix = mix1({{0.3, -1, 0.5}, {0.7, 1.5, 2}});
  for (const Measure* m : {&mix, &smooth}) {
    for (int i = 0; i < 21; ++i) {
      const double x = -3.0 + 0.3 * i;
      const double fd = numerics::finite_diff_second(
          [&](double y) { return -log_density(*m, p1(y)); }, x, 1e-3);
      CHECK(std::fabs(fd + log_hessian(*m, p1(x))(0, 0)) < 1e-5);
    }
  }
  // away from the kinks of the perturbed density itself
  for (double x : {-2.5, -0.3, 1.0, 2.7}) {
    const double fd =
        numerics::finite_diff_second([&](double y) { return -log_density(pert, p1(y)); }, x, 1e-3);
    CHECK(std::fabs(fd + log_hessian(pert, p1(x))(0, 0)) < 1e-5);
  }
}

TEST_CASE("perturbed density normalisation and convolution") {
  const auto spec = abs_spec();
  const PerturbedLogConcave1D p(spec);
  const double mass = oracle::simpson(
      [&](long double x) { return std::exp(-oracle::perturbed_potential(spec, x)); }, -40, 40,
      400000);
  CHECK(p.log_normalizer() == doctest::Approx(std::log(mass)).epsilon(1e-10));
  CHECK(std::exp(-p.log_normalizer()) * mass == doctest::Approx(1.0).epsilon(1e-8));

  // density of mu * gamma_1 at 0 against a dense trapezoid
  const Measure conv = convolve_gaussian(Measure(p), 1.0);
  const double dens = oracle::simpson(
                          [&](long double x) {
                            return std::exp(-oracle::perturbed_potential(spec, x)) *
                                   oracle::phi(static_cast<double>(x));
                          },
                          -40, 40, 400000) /
                      mass;
  CHECK(std::exp(log_density(conv, p1(0))) == doctest::Approx(dens).epsilon(1e-8));
}

TEST_CASE("convolution of mixtures and atoms") {
  const Measure g = mix1({{1, 0, 1}});
  const auto c = std::get<GaussianMixture>(convolve_gaussian(g, 2.0));
  CHECK(c.components()[0].variance == doctest::Approx(3.0));

  const Measure a = AtomicMeasure(1, {{0.5, p1(0)}, {0.5, p1(2)}});
  const auto ca = std::get<GaussianMixture>(convolve_gaussian(a, 1.0));
  const auto ref = mix1({{0.5, 0, 1}, {0.5, 2, 1}});
  for (double x = -2; x <= 4; x += 0.5) {
    CHECK(log_density(Measure(ca), p1(x)) == doctest::Approx(log_density(Measure(ref), p1(x))));
  }
  CHECK_THROWS_AS(convolve_gaussian(g, 0.0), ValidationError);
  CHECK_THROWS_AS(convolve_gaussian(g, -1.0), ValidationError);
}

TEST_CASE("semigroup property") {
  const Measure mix = mix1({{0.2, -3, 0.3}, {0.8, 1, 1.2}});
  const Measure pert = PerturbedLogConcave1D(abs_spec());
  for (const Measure* m : {&mix, &pert}) {
    const Measure two = convolve_gaussian(convolve_gaussian(*m, 0.4), 0.9);
    const Measure one = convolve_gaussian(*m, 1.3);
    for (double x = -4; x <= 4; x += 0.5) {
      CHECK(std::fabs(std::exp(log_density(two, p1(x))) - std::exp(log_density(one, p1(x)))) <
            1e-9);
    }
  }
}

TEST_CASE("sampling") {
  const Measure g = mix1({{1, 0, 1}});
  const auto xs = sample_1d(g, 100000, 3);
  double mean = 0.0;
  for (double x : xs) mean += x;
  CHECK(std::fabs(mean / xs.size()) < 0.02);
  CHECK(sample_1d(g, 10, 3) == std::vector<double>(xs.begin(), xs.begin() + 10));

  const Measure d = AtomicMeasure(1, {{1.0, p1(0)}});
  for (double x : sample_1d(d, 100, 1)) CHECK(x == 0.0);

  const auto spec = abs_spec();
  const Measure p = PerturbedLogConcave1D(spec);
  const double mass = oracle::simpson(
      [&](long double x) { return std::exp(-oracle::perturbed_potential(spec, x)); }, -40, 40,
      200000);
  auto cdf = [&](double x) {
    return oracle::simpson(
               [&](long double y) { return std::exp(-oracle::perturbed_potential(spec, y)); },
               -40, x, 20000) /
           mass;
  };
  // oracle CDF on a table, then linear interpolation
  std::vector<double> grid, vals;
  for (double x = -8; x <= 8.0001; x += 0.01) {
    grid.push_back(x);
    vals.push_back(cdf(x));
  }
  auto table = [&](double x) {
    if (x <= grid.front()) return 0.0;
    if (x >= grid.back()) return 1.0;
    const auto k = static_cast<std::size_t>((x - grid.front()) / 0.01);
    const double w = (x - grid[k]) / 0.01;
    return vals[k] * (1 - w) + vals[std::min(k + 1, vals.size() - 1)] * w;
  };
  CHECK(oracle::ks(sample_1d(p, 100000, 11), table) < 0.01);
}

TEST_CASE("moments and quantiles") {
  const Measure pair = mix1({{0.25, -1, 0.5}, {0.75, 2, 1.5}});
  const auto mo = moments_1d(pair);
  CHECK(mo.mean == doctest::Approx(0.25 * -1 + 0.75 * 2));
  CHECK(mo.variance == doctest::Approx(0.25 * (0.5 + 1) + 0.75 * (1.5 + 4) - 1.25 * 1.25));
  for (double u : {0.01, 0.3, 0.5, 0.77, 0.999}) {
    CHECK(cdf_1d(pair, quantile_1d(pair, u)) == doctest::Approx(u).epsilon(1e-10));
  }
}

TEST_CASE("counterexample atoms") {
  const auto c = CounterexampleMeasure(Psi{PsiKind::Zero, 1.0}, 60);
  const double xs[] = {0, 1, 3, 6, 10};
  const double w[] = {1, 1.0 / 4, 1.0 / 9, 1.0 / 16, 1.0 / 25};
  for (int i = 0; i < 5; ++i) {
    CHECK(c.positions()[i] == xs[i]);
    CHECK(std::exp(c.log_weights()[i] - c.log_weights()[0]) == doctest::Approx(w[i]));
  }
  for (int i = 1; i <= 60; ++i) CHECK(c.positions()[i] - c.positions()[i - 1] == i);

  const auto lin = CounterexampleMeasure(Psi{PsiKind::Linear, 1.0}, 60);
  long double z = 0;
  for (int i = 0; i <= 200; ++i) {
    z += std::exp(-0.5L * i * (i + 1)) / ((i + 1.0L) * (i + 1.0L));
  }
  CHECK(static_cast<double>(z) == doctest::Approx(1.09766).epsilon(1e-5));
  CHECK(lin.exp_psi_moment_series() == doctest::Approx(oracle::kPi * oracle::kPi / 6 / z).epsilon(1e-12));
  CHECK(lin.exp_psi_moment_series() == doctest::Approx(1.4986).epsilon(1e-4));

  CHECK_THROWS_AS(CounterexampleMeasure(Psi{PsiKind::Linear, -1.0}, 10), ValidationError);
}

TEST_CASE("measure JSON round trip") {
  const auto j = nlohmann::json::parse(R"({"type":"gaussian_mixture","dim":1,
      "components":[[2,0,1],[2,3,0.5]]})");
  const Measure m = measure_from_json(j);
  const Measure back = measure_from_json(measure_to_json(m));
  CHECK(log_density(back, p1(0.3)) == doctest::Approx(log_density(m, p1(0.3))));

  const Measure pert = measure_from_json(nlohmann::json::parse(
      R"({"type":"perturbed_1d","alpha":1,"lip":1,"h_knots":[0],"h_slopes":[-1,1]})"));
  CHECK(std::get<PerturbedLogConcave1D>(pert).log_normalizer() ==
        doctest::Approx(PerturbedLogConcave1D(abs_spec()).log_normalizer()));

  CHECK_THROWS_AS(measure_from_json(nlohmann::json::parse(R"({"type":"nope"})")), ValidationError);
  CHECK_THROWS_AS(measure_from_json(nlohmann::json::parse(R"({"type":"atomic"})")), ValidationError);
  CHECK_THROWS_AS(measure_from_json(nlohmann::json::parse(
                      R"({"type":"perturbed_1d","alpha":1,"lip":0.5,"h_knots":[0],"h_slopes":[-1,1]})")),
                  ValidationError);
}
