#include "logheat/transport.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>

#include "logheat/bounds.hpp"
#include "logheat/errors.hpp"
#include "logheat/heatflow.hpp"
#include "logheat/numerics.hpp"
#include "logheat/parallel.hpp"
#include "logheat/random.hpp"

namespace logheat {

namespace {

// Time variable s = log(e^{2t} - 1) and its inverse.
double to_s(double t) { return std::log(std::expm1(2.0 * t)); }
double to_t(double s) { return 0.5 * std::log1p(std::exp(s)); }
// dt/ds
double dt_ds(double s) {
  const double tau = std::exp(s);
  return 0.5 * tau / (1.0 + tau);
}

void require_1d(const Measure& m) {
  if (dimension(m) != 1) throw CapabilityError("flow maps are one-dimensional");
}

// Velocity for 1D Gaussian mixtures without building a measure per call.
class MixtureVelocity1D {
 public:
  explicit MixtureVelocity1D(const GaussianMixture& g) {
    for (std::size_t i = 0; i < g.components().size(); ++i) {
      means_.push_back(g.components()[i].mean(0));
      vars_.push_back(g.components()[i].variance);
      lw_.push_back(g.log_weights()[i]);
    }
  }

  // grad log Q_t(dmu/dgamma)(x) = score of the OU marginal + x.
  double grad(double t, double x) const {
    const double shrink = std::exp(-t);
    const double noise = -std::expm1(-2.0 * t);
    double top = -std::numeric_limits<double>::infinity();
    const std::size_t n = means_.size();
    thread_local std::vector<double> tp;
    thread_local std::vector<double> sp;
    tp.resize(n);
    sp.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = vars_[i] * shrink * shrink + noise;
      const double d = x - means_[i] * shrink;
      tp[i] = lw_[i] - 0.5 * d * d / v - 0.5 * std::log(v);
      sp[i] = -d / v;
      top = std::max(top, tp[i]);
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = std::exp(tp[i] - top);
      num += w * sp[i];
      den += w;
    }
    return num / den + x;
  }

 private:
  std::vector<double> means_;
  std::vector<double> vars_;
  std::vector<double> lw_;
};

// grad log Q_t(dmu/dgamma) for 1D measures, with the mixture fast path.
class Gradient1D {
 public:
  explicit Gradient1D(const Measure& m) : m_(m) {
    if (const auto* g = std::get_if<GaussianMixture>(&m)) mix_.emplace(*g);
  }

  double operator()(double t, double x) const {
    if (mix_) return mix_->grad(t, x);
    return ou_log_derivatives(m_, t, Point::Constant(1, x)).gradient(0);
  }

 private:
  const Measure& m_;
  std::optional<MixtureVelocity1D> mix_;
};

}  // namespace

Point velocity_field(const Measure& m, double t, const Point& x) {
  return -ou_log_derivatives(m, t, x).gradient;
}

double FlowMap::operator()(double x) const {
  const std::size_t n = inputs.size();
  if (n == 0) throw ValidationError("empty flow map");
  if (n == 1) return images[0] + (x - inputs[0]);
  std::size_t k;
  if (x <= inputs.front()) {
    k = 0;
  } else if (x >= inputs.back()) {
    k = n - 2;
  } else {
    k = static_cast<std::size_t>(std::upper_bound(inputs.begin(), inputs.end(), x) -
                                 inputs.begin()) -
        1;
  }
  const double slope = (images[k + 1] - images[k]) / (inputs[k + 1] - inputs[k]);
  return images[k] + slope * (x - inputs[k]);
}

FlowMap build_flow_map(const Measure& m, const FlowOptions& opts) {
  require_1d(m);
  if (!(opts.t_min > 0.0)) throw ValidationError("t_min must be > 0");
  if (!(opts.steps_per_unit > 0.0)) throw ValidationError("steps_per_unit must be > 0");

  FlowMap flow;
  flow.t_min = opts.t_min;
  flow.steps_per_unit = opts.steps_per_unit;
  flow.richardson = opts.richardson;
  if (!opts.inputs.empty()) {
    flow.inputs = opts.inputs;
    std::sort(flow.inputs.begin(), flow.inputs.end());
  } else {
    if (opts.n_points < 2) throw ValidationError("need at least two flow points");
    for (int i = 0; i < opts.n_points; ++i) {
      flow.inputs.push_back(numerics::normal_quantile((i + 0.5) / opts.n_points));
    }
  }

  const auto mo = moments_1d(m);
  if (opts.t_max) {
    flow.t_max = *opts.t_max;
  } else {
    const Measure gauss = GaussianMixture(1, {{1.0, Point::Zero(1), 1.0}});
    const double w2 = wasserstein2_1d(m, gauss);
    flow.t_max = std::max(3.0, std::log(std::max(w2, 1e-300) / 1e-4));
  }
  if (!(flow.t_max > 2.0 * flow.t_min)) throw ValidationError("t_max too small");

  const double shrink = std::exp(-flow.t_max);
  const double start_mean = mo.mean * shrink;
  const double start_sd =
      std::sqrt(mo.variance * shrink * shrink - std::expm1(-2.0 * flow.t_max));

  const Gradient1D grad(m);
  auto field = [&](double s, double y) { return -grad(to_t(s), y) * dt_ds(s); };

  const double s_hi = to_s(flow.t_max);
  const double s_mid = to_s(2.0 * flow.t_min);
  const double s_lo = to_s(flow.t_min);
  const int steps_a = std::max(1, static_cast<int>(std::ceil(opts.steps_per_unit * (s_hi - s_mid))));
  const int steps_b = std::max(1, static_cast<int>(std::ceil(opts.steps_per_unit * (s_mid - s_lo))));
  flow.steps = steps_a + steps_b;

  const std::size_t n = flow.inputs.size();
  flow.images.assign(n, 0.0);
  if (opts.record) flow.trajectories.resize(n);
  parallel_for(n, [&](std::size_t i) {
    const double x = flow.inputs[i];
    try {
      numerics::OdeConfig a{s_hi, s_mid, steps_a, std::nullopt, opts.record};
      const auto ta = numerics::integrate_ode<double>(field, start_mean + start_sd * x, a);
      numerics::OdeConfig b{s_mid, s_lo, steps_b, std::nullopt, opts.record};
      const auto tb = numerics::integrate_ode<double>(field, ta.final_state(), b);
      const double y2 = ta.final_state();
      const double y1 = tb.final_state();
      flow.images[i] = opts.richardson ? 2.0 * y1 - y2 : y1;
      if (opts.record) {
        auto& tr = flow.trajectories[i];
        for (std::size_t k = 0; k < ta.times.size(); ++k) {
          tr.t.push_back(to_t(ta.times[k]));
          tr.y.push_back(ta.states[k]);
        }
        for (std::size_t k = 1; k < tb.times.size(); ++k) {
          tr.t.push_back(to_t(tb.times[k]));
          tr.y.push_back(tb.states[k]);
        }
      }
    } catch (const NumericalError& e) {
      throw NumericalError(std::string("flow ODE failed for input point: ") + e.what(),
                           x);
    }
  });
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!(flow.images[i + 1] >= flow.images[i])) flow.monotone = false;
  }
  return flow;
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_flow_csv(const FlowMap& flow, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "input,image\n";
  for (std::size_t i = 0; i < flow.inputs.size(); ++i) {
    out << fmt17(flow.inputs[i]) << ',' << fmt17(flow.images[i]) << '\n';
  }
}

void write_trajectory_csvs(const FlowMap& flow, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < flow.trajectories.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "traj_%05zu.csv", i);
    std::ofstream out(std::filesystem::path(dir) / name);
    out << "t,y\n";
    const auto& tr = flow.trajectories[i];
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
      out << fmt17(tr.t[k]) << ',' << fmt17(tr.y[k]) << '\n';
    }
  }
}

LipschitzEstimate empirical_lipschitz(const FlowMap& flow) {
  if (flow.inputs.size() < 2) throw ValidationError("need at least two points");
  LipschitzEstimate best;
  best.value = -1.0;
  for (std::size_t i = 0; i + 1 < flow.inputs.size(); ++i) {
    const double dx = flow.inputs[i + 1] - flow.inputs[i];
    if (!(dx > 0.0)) continue;
    const double r = std::abs(flow.images[i + 1] - flow.images[i]) / dx;
    if (r > best.value) {
      best.value = r;
      best.index = i;
      best.argmax = 0.5 * (flow.inputs[i] + flow.inputs[i + 1]);
    }
  }
  return best;
}

PushforwardReport pushforward_validate(const FlowMap& flow, const Measure& target,
                                       std::size_t n_samples, std::uint64_t seed) {
  require_1d(target);
  if (n_samples < 2) throw ValidationError("need at least two samples");
  const CounterRng rng(seed);
  std::vector<double> pushed(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) pushed[i] = flow(rng.normal(i, 0));
  double mean = 0.0;
  for (double v : pushed) mean += v;
  mean /= static_cast<double>(n_samples);
  double var = 0.0;
  for (double v : pushed) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n_samples - 1);

  PushforwardReport r;
  const auto mo = moments_1d(target);
  r.mean_error = std::abs(mean - mo.mean);
  r.variance_error = std::abs(var - mo.variance);
  r.ks_stat = numerics::ks_statistic(std::move(pushed),
                                     [&](double x) { return cdf_1d(target, x); });
  return r;
}

std::vector<double> default_time_grid(std::size_t n, double t0, double t1) {
  if (n < 2 || !(t0 > 0.0) || !(t1 > t0)) throw ValidationError("bad time grid");
  const double s0 = to_s(t0);
  const double s1 = to_s(t1);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = to_t(s0 + (s1 - s0) * static_cast<double>(k) / static_cast<double>(n - 1));
  }
  out.front() = t0;
  out.back() = t1;
  return out;
}

std::vector<double> default_space_grid(std::size_t n, double half_width) {
  if (n < 2 || !(half_width > 0.0)) throw ValidationError("bad space grid");
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = -half_width + 2.0 * half_width * static_cast<double>(k) /
                               static_cast<double>(n - 1);
  }
  return out;
}

ThetaEnvelope theta_envelope(const Measure& m, const std::vector<double>& times,
                             const std::vector<double>& space) {
  if (times.empty() || space.empty()) throw ValidationError("grids must be nonempty");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] > 0.0) || (k > 0 && !(times[k] > times[k - 1]))) {
      throw ValidationError("times must be positive and increasing");
    }
  }
  const int d = dimension(m);
  ThetaEnvelope env;
  env.times = times;
  env.theta_min.assign(times.size(), 0.0);
  env.theta_max.assign(times.size(), 0.0);
  parallel_for(times.size(), [&](std::size_t k) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double x : space) {
      const Point p = Point::Constant(d, x);
      const Matrix h = ou_log_derivatives(m, times[k], p).hessian;
      if (d == 1) {
        lo = std::min(lo, h(0, 0));
        hi = std::max(hi, h(0, 0));
      } else {
        Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
        lo = std::min(lo, es.eigenvalues().minCoeff());
        hi = std::max(hi, es.eigenvalues().maxCoeff());
      }
    }
    env.theta_min[k] = lo;
    env.theta_max[k] = hi;
  });

  double body = 0.0;
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const double sa = to_s(times[k]);
    const double sb = to_s(times[k + 1]);
    body += 0.5 * (sb - sa) *
            (env.theta_max[k] * dt_ds(sa) + env.theta_max[k + 1] * dt_ds(sb));
  }
  const auto* pert = std::get_if<PerturbedLogConcave1D>(&m);
  if (pert && pert->alpha() > 0.0) {
    env.head = cor7_upper_integral(pert->alpha(), pert->lip(), 0.0, times.front());
    env.tail = cor7_upper_integral(pert->alpha(), pert->lip(), times.back(),
                                   std::numeric_limits<double>::infinity());
  } else {
    env.head = env.theta_max.front() * times.front();
    env.tail = 0.5 * env.theta_max.back();
  }
  env.integral_theta_max = env.head + body + env.tail;
  env.certified_lipschitz = std::exp(env.integral_theta_max);
  return env;
}

std::vector<Point> reverse_sde_sample(const Measure& m, const ReverseSdeOptions& opts) {
  if (!(opts.t1 > 0.0)) throw ValidationError("t1 must be > 0");
  if (opts.steps < 1) throw ValidationError("steps must be >= 1");
  const int d = dimension(m);
  const std::size_t n = opts.n;
  auto start = sample(m, n, opts.seed);
  const CounterRng noise(opts.seed ^ 0x5bd1e9955bd1e995ULL);
  const double shrink = std::exp(-opts.t1);
  const double spread = std::sqrt(-std::expm1(-2.0 * opts.t1));
  const double h = opts.t1 / opts.steps;
  const double sqrt2h = std::sqrt(2.0 * h);

  std::optional<Gradient1D> grad1;
  if (d == 1) grad1.emplace(m);

  parallel_for(n, [&](std::size_t i) {
    Point y = start[i] * shrink;
    for (int k = 0; k < d; ++k) y(k) += spread * noise.normal(i, k);
    for (int step = 0; step < opts.steps; ++step) {
      const double t = opts.t1 - step * h;
      Point drift;
      if (grad1) {
        drift = Point::Constant(1, -y(0) + 2.0 * (*grad1)(t, y(0)));
      } else {
        drift = -y + 2.0 * ou_log_derivatives(m, t, y).gradient;
      }
      y += h * drift;
      for (int k = 0; k < d; ++k) {
        y(k) += sqrt2h * noise.normal(i, static_cast<std::uint64_t>(d) * (step + 1) + k);
      }
      if (!y.allFinite()) {
        throw NumericalError("reverse SDE path blew up", opts.t1 - (step + 1) * h);
      }
    }
    start[i] = std::move(y);
  });
  return start;
}

}  // namespace logheat
