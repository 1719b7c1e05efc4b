#include "logheat/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <limits>
#include <map>
#include <memory>
#include <mutex>

namespace logheat::numerics {

namespace {

struct StandardHermite {
  std::vector<double> nodes;
  std::vector<double> log_weights;
};

// Orthonormal Hermite polynomials under N(0,1):
//   p_{k+1} = (x p_k - sqrt(k) p_{k-1}) / sqrt(k+1).
// Returns p_n(x)/p_{n-1}(x) and log sum_{k<n} p_k(x)^2, rescaling on the fly
// so extreme nodes of large rules do not overflow.
struct HermiteEval {
  double ratio;
  double log_christoffel_sum;
};

HermiteEval hermite_eval(int n, double x) {
  double prev = 0.0;
  double cur = 1.0;
  double sum = 1.0;
  double log_scale = 0.0;
  for (int k = 0; k < n - 1; ++k) {
    const double next =
        (x * cur - std::sqrt(static_cast<double>(k)) * prev) /
        std::sqrt(static_cast<double>(k + 1));
    prev = cur;
    cur = next;
    sum += cur * cur;
    if (std::abs(cur) > 1e100) {
      prev *= 1e-100;
      cur *= 1e-100;
      sum *= 1e-200;
      log_scale += 100.0 * std::log(10.0);
    }
  }
  // cur = p_{n-1}, prev = p_{n-2}
  const double pn = (x * cur - std::sqrt(static_cast<double>(n - 1)) * prev) /
                    std::sqrt(static_cast<double>(n));
  return {pn / cur, std::log(sum) + 2.0 * log_scale};
}

StandardHermite build_hermite(int n) {
  StandardHermite rule;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n > 1 ? n - 1 : 0);
  for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  rule.nodes.resize(n);
  rule.log_weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = solver.eigenvalues()(i);
    // Newton polish: p_n'(x) = sqrt(n) p_{n-1}(x).
    for (int it = 0; it < 3 && n > 1; ++it) {
      const auto e = hermite_eval(n, x);
      x -= e.ratio / std::sqrt(static_cast<double>(n));
    }
    rule.nodes[i] = x;
    rule.log_weights[i] = n > 1 ? -hermite_eval(n, x).log_christoffel_sum : 0.0;
  }
  return rule;
}

const StandardHermite& standard_hermite(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<StandardHermite>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<StandardHermite>(build_hermite(n));
  return *slot;
}

LegendreRule build_legendre(int n) {
  LegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

}  // namespace

QuadratureRule::QuadratureRule(int node_count, double center, double scale)
    : center_(center), scale_(scale) {
  if (node_count < 1) throw ValidationError("node_count must be >= 1");
  if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(center)) {
    throw ValidationError("quadrature scale must be positive and finite");
  }
  const auto& base = standard_hermite(node_count);
  nodes_.resize(node_count);
  weights_.resize(node_count);
  raw_weights_.resize(node_count);
  for (int i = 0; i < node_count; ++i) {
    const double y = base.nodes[i];
    nodes_[i] = center + scale * y;
    weights_[i] = std::exp(base.log_weights[i]);
    const double log_ref = -0.5 * y * y - kLogSqrt2Pi - std::log(scale);
    raw_weights_[i] = std::exp(base.log_weights[i] - log_ref);
  }
}

double quadrature_integrate(const RealFn& f, const QuadratureRule& rule) {
  double acc = 0.0;
  for (int i = 0; i < rule.node_count(); ++i) {
    const double v = f(rule.nodes()[i]);
    if (!std::isfinite(v)) {
      throw NumericalError("integrand is not finite at a node",
                           rule.nodes()[i]);
    }
    acc += rule.raw_weights()[i] * v;
  }
  return acc;
}

double quadrature_expect(const RealFn& g, const QuadratureRule& rule) {
  double acc = 0.0;
  for (int i = 0; i < rule.node_count(); ++i) {
    const double v = g(rule.nodes()[i]);
    if (!std::isfinite(v)) {
      throw NumericalError("integrand is not finite at a node",
                           rule.nodes()[i]);
    }
    acc += rule.weights()[i] * v;
  }
  return acc;
}

const LegendreRule& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<LegendreRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<LegendreRule>(build_legendre(n));
  return *slot;
}

namespace {

AdaptiveMoments hermite_moments(const RealFn& log_f, int n, double c,
                                double s) {
  const QuadratureRule rule(n, c, s);
  std::vector<double> terms(n);
  for (int i = 0; i < n; ++i) {
    const double lf = log_f(rule.nodes()[i]);
    if (std::isnan(lf) || lf == std::numeric_limits<double>::infinity()) {
      throw NumericalError("log-integrand is not finite", rule.nodes()[i]);
    }
    terms[i] = std::log(rule.raw_weights()[i]) + lf;
  }
  AdaptiveMoments out;
  out.log_mass = log_sum_exp(terms);
  if (!std::isfinite(out.log_mass)) {
    throw NumericalError("all quadrature weights underflowed; recentre", c);
  }
  double m1 = 0.0;
  double m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double p = std::exp(terms[i] - out.log_mass);
    const double d = rule.nodes()[i] - c;
    m1 += p * d;
    m2 += p * d * d;
  }
  out.mean = c + m1;
  out.variance = std::max(0.0, m2 - m1 * m1);
  out.node_count = n;
  return out;
}

}  // namespace

AdaptiveMoments integrate_adaptive(const RealFn& log_f, double center_guess,
                                   double scale_guess,
                                   const AdaptiveOptions& options) {
  double c = center_guess;
  double s = scale_guess;
  bool settled = false;
  for (int pass = 0; pass < options.max_passes; ++pass) {
    const auto m = hermite_moments(log_f, options.base_nodes, c, s);
    const double new_s = std::sqrt(m.variance);
    if (!(new_s > 0.0)) throw NumericalError("degenerate spread", c);
    const bool small = std::abs(m.mean - c) < 1e-3 * new_s &&
                       std::abs(new_s - s) < 1e-3 * new_s;
    c = m.mean;
    s = new_s;
    if (pass + 1 >= options.recenter_passes && small) {
      settled = true;
      break;
    }
  }
  if (!settled) {
    throw NumericalError("recentring fixed point did not settle", c);
  }
  const int mid_nodes = options.base_nodes + options.base_nodes / 2;
  const auto a = hermite_moments(log_f, options.base_nodes, c, s);
  auto b = hermite_moments(log_f, mid_nodes, c, s);
  if (std::abs(std::expm1(a.log_mass - b.log_mass)) <= options.agreement) {
    b.converged = true;
    return b;
  }
  auto e = hermite_moments(log_f, options.escalated_nodes, c, s);
  e.converged =
      std::abs(std::expm1(e.log_mass - b.log_mass)) <= options.agreement;
  return e;
}

double find_root_bisect(const RealFn& f, double lo, double hi, double tol) {
  if (!(tol > 0.0)) throw ValidationError("tolerance must be > 0");
  if (lo > hi) std::swap(lo, hi);
  double flo = f(lo);
  const double fhi = f(hi);
  if (!std::isfinite(flo) || !std::isfinite(fhi)) {
    throw NumericalError("non-finite value at bracket end");
  }
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw BracketError("no sign change in bracket");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (!std::isfinite(fm)) throw NumericalError("non-finite value", mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double finite_diff_second(const RealFn& f, double x, double h) {
  if (!(h > 0.0)) throw ValidationError("step must be > 0");
  const double fm2 = f(x - 2 * h);
  const double fm1 = f(x - h);
  const double f0 = f(x);
  const double fp1 = f(x + h);
  const double fp2 = f(x + 2 * h);
  for (double v : {fm2, fm1, f0, fp1, fp2}) {
    if (!std::isfinite(v)) throw NumericalError("non-finite sample", x);
  }
  return (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
}

double log_sum_exp(std::span<const double> values) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : values) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - mx);
  return mx + std::log(acc);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double log_normal_cdf(double x) {
  if (x > -35.0) return std::log(normal_cdf(x));
  const double z2 = 1.0 / (x * x);
  const double series = 1.0 - z2 + 3.0 * z2 * z2 - 15.0 * z2 * z2 * z2;
  return -0.5 * x * x - std::log(-x) - kLogSqrt2Pi + std::log(series);
}

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    if (u == 0.0) return -std::numeric_limits<double>::infinity();
    if (u == 1.0) return std::numeric_limits<double>::infinity();
    throw DomainError("normal_quantile requires u in [0, 1]");
  }
  // Acklam's rational approximation followed by one Halley step.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (u < plow) {
    const double q = std::sqrt(-2.0 * std::log(u));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (u <= 1.0 - plow) {
    const double q = u - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-u));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
          c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int it = 0; it < 2; ++it) {
    const double e = (x < 0.0 ? normal_cdf(x) - u
                              : -(0.5 * std::erfc(x / std::sqrt(2.0)) - (1.0 - u)));
    const double pdf = std::exp(-0.5 * x * x - kLogSqrt2Pi);
    if (pdf <= 0.0) break;
    const double r = e / pdf;
    x -= r / (1.0 + 0.5 * x * r);
  }
  return x;
}

double ks_statistic(std::vector<double> samples, const RealFn& cdf) {
  if (samples.empty()) throw ValidationError("KS needs at least one sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, f - i / n, (i + 1) / n - f});
  }
  return d;
}

}  // namespace logheat::numerics
