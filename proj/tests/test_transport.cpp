#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "logheat/bounds.hpp"
#include "logheat/errors.hpp"
#include "logheat/heatflow.hpp"
#include "logheat/numerics.hpp"
#include "logheat/transport.hpp"
#include "oracles.hpp"

using namespace logheat;

namespace {

Point p1(double x) { return Point::Constant(1, x); }

Measure gauss(double m, double v) { return make_gaussian_mixture(1, {{1.0, p1(m), v}}); }

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("velocity field closed forms") {
  for (double t : {0.05, 0.7, 2.0}) {
    for (double x : {-2.0, 0.0, 1.3}) {
      CHECK(std::fabs(velocity_field(gauss(0, 1), t, p1(x))(0)) < 1e-13);
      CHECK(velocity_field(gauss(0.8, 1), t, p1(x))(0) ==
            doctest::Approx(-0.8 * std::exp(-t)).epsilon(1e-12));
      const double v = 3.0, e = (v - 1) * std::exp(-2 * t);
      CHECK(velocity_field(gauss(0, v), t, p1(x))(0) ==
            doctest::Approx(-x * e / (1 + e)).epsilon(1e-12));
    }
  }
}

TEST_CASE("flow maps of Gaussian targets") {
  FlowOptions o;
  o.n_points = 101;
  const auto id = build_flow_map(gauss(0, 1), o);
  CHECK(sup_diff(id.inputs, id.images) < 1e-12);
  CHECK(empirical_lipschitz(id).value == doctest::Approx(1.0).epsilon(1e-9));

  const double m = 1.4;
  const auto tr = build_flow_map(gauss(m, 1), o);
  for (std::size_t i = 0; i < tr.inputs.size(); ++i) {
    CHECK(std::fabs(tr.images[i] - tr.inputs[i] - m) < 1e-4);
  }

  const auto dil = build_flow_map(gauss(0, 4), o);
  for (std::size_t i = 0; i < dil.inputs.size(); ++i) {
    CHECK(std::fabs(dil.images[i] - 2 * dil.inputs[i]) < 1e-3);
  }
  CHECK(std::fabs(empirical_lipschitz(dil).value - 2.0) < 1e-3);
  CHECK(dil(0.25) == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(dil.monotone);
}

TEST_CASE("step halving barely moves the images") {
  PerturbedSpec s;
  s.alpha = 1;
  s.lip = 1;
  s.h_knots = {0};
  s.h_slopes = {-1, 1};
  const Measure pert = PerturbedLogConcave1D(s);
  const Measure mix = make_gaussian_mixture(1, {{0.5, p1(-2), 1}, {0.5, p1(2), 1}});
  for (const Measure* m : {&mix, &pert}) {
    FlowOptions a;
    a.n_points = 21;
    FlowOptions b = a;
    b.steps_per_unit = 2 * a.steps_per_unit;
    const auto fa = build_flow_map(*m, a);
    const auto fb = build_flow_map(*m, b);
    CHECK(sup_diff(fa.images, fb.images) < 1e-4);
    for (std::size_t i = 1; i < fa.images.size(); ++i) CHECK(fa.images[i] >= fa.images[i - 1]);
  }
}

TEST_CASE("flow map CSV export") {
  FlowOptions o;
  o.n_points = 5;
  o.record = true;
  const auto f = build_flow_map(gauss(0.5, 1), o);
  REQUIRE(f.trajectories.size() == 5);
  const auto dir = std::filesystem::temp_directory_path() / "logheat_flow_csv";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  write_flow_csv(f, (dir / "flow.csv").string());
  write_trajectory_csvs(f, (dir / "traj").string());
  std::ifstream in(dir / "flow.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "input,image");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 5);
  std::ifstream tj(dir / "traj" / "traj_00000.csv");
  std::getline(tj, header);
  CHECK(header == "t,y");
  std::filesystem::remove_all(dir);
}

TEST_CASE("empirical Lipschitz of hand-made maps") {
  FlowMap f;
  f.inputs = {-1, 0, 0.5, 2};
  f.images = {-1, 0, 0.5, 2};
  CHECK(empirical_lipschitz(f).value == doctest::Approx(1.0));
  f.images = {-2, 0, 1, 4};
  const auto l = empirical_lipschitz(f);
  CHECK(l.value == doctest::Approx(2.0));
}

TEST_CASE("pushforward validation") {
  FlowOptions o;
  const auto id = build_flow_map(gauss(0, 1), o);
  CHECK(pushforward_validate(id, gauss(0, 1), 20000, 1).ks_stat < 0.01);
  const auto tr = build_flow_map(gauss(-0.9, 1), o);
  const auto r = pushforward_validate(tr, gauss(-0.9, 1), 20000, 2);
  CHECK(r.ks_stat < 0.01);
  CHECK(r.mean_error < 0.03);
  // same seed, same report
  CHECK(pushforward_validate(tr, gauss(-0.9, 1), 20000, 2).ks_stat == r.ks_stat);
}

TEST_CASE("theta envelope") {
  const auto grid_t = default_time_grid();
  const auto grid_x = default_space_grid();
  const auto g = theta_envelope(gauss(0, 1), grid_t, grid_x);
  CHECK(std::fabs(g.integral_theta_max) < 1e-12);
  CHECK(g.certified_lipschitz == doctest::Approx(1.0));

  const auto d = theta_envelope(gauss(0, 4), grid_t, grid_x);
  CHECK(d.integral_theta_max == doctest::Approx(std::log(2.0)).epsilon(1e-4));
  for (std::size_t i = 0; i < d.times.size(); ++i) CHECK(d.theta_min[i] <= d.theta_max[i]);

  PerturbedSpec s;
  s.alpha = 1;
  s.lip = 1;
  s.h_knots = {0};
  s.h_slopes = {-1, 1};
  const auto p = theta_envelope(PerturbedLogConcave1D(s), grid_t, grid_x);
  CHECK(p.integral_theta_max <= 2.5 + 1e-2);
  CHECK(std::isfinite(p.integral_theta_max));
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    CHECK(p.theta_max[i] <= cor7_envelope(1, 1, p.times[i]).upper + 1e-6);
    CHECK(p.theta_min[i] >= cor7_envelope(1, 1, p.times[i]).lower - 1e-6);
  }
}

TEST_CASE("reverse SDE sampler") {
  ReverseSdeOptions o;
  o.n = 10000;
  const auto g = reverse_sde_sample(gauss(0, 1), o);
  std::vector<double> xs;
  for (const auto& p : g) xs.push_back(p(0));
  CHECK(oracle::ks(xs, oracle::Phi) < 0.02);

  o.t1 = 2.0;
  const double m = 1.1;
  double mean = 0.0;
  for (const auto& p : reverse_sde_sample(gauss(m, 1), o)) mean += p(0);
  CHECK(std::fabs(mean / o.n - m) < 0.05);

  // deterministic given the seed
  o.n = 50;
  const auto a = reverse_sde_sample(gauss(m, 1), o);
  const auto b = reverse_sde_sample(gauss(m, 1), o);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i](0) == b[i](0));
}
