#include "cli.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "logheat/bounds.hpp"
#include "logheat/counterexample.hpp"
#include "logheat/errors.hpp"
#include "logheat/heatflow.hpp"
#include "logheat/measure_io.hpp"
#include "logheat/measures.hpp"
#include "logheat/numerics.hpp"
#include "logheat/structure.hpp"
#include "logheat/transport.hpp"

namespace logheat::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

struct Options {
  std::string measure;
  std::string out;
  std::uint64_t seed = 0;

  double alpha = 1.0;
  double lip = 0.0;
  double t = 1.0;
  double radius = 0.0;
  double third_deriv = 0.0;
  double lsi_c = 1.0;

  std::optional<double> scan_alpha;
  std::optional<double> scan_lip;
  double z_min = -6.0;
  double z_max = 6.0;
  int n = 41;

  int n_points = 201;
  std::optional<double> t_max;
  double steps_per_unit = 100.0;
  std::size_t samples = 20000;
  bool trajectories = false;

  std::string psi = "linear";
  double coef = 1.0;
  int truncation = 60;
  double target_m = 10.0;

  double x0 = 2.0;
  double w0 = 0.5;
  double w1 = 0.5;

  std::string poly = "1,0,-2,0,0";
  double beta = 4.0;
  double half_width = 0.0;
  double step = 1e-3;

  std::size_t n_paths = 10000;
  int steps = 400;
  double t1 = 3.0;
};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Output {
 public:
  Output(const Options& o, std::ostream& out) : dir_(o.out), out_(out) {
    if (!dir_.empty()) fs::create_directories(dir_);
  }

  bool has_dir() const { return !dir_.empty(); }
  std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

  void file(const std::string& name, const std::string& content) const {
    if (dir_.empty()) return;
    std::ofstream f(path(name), std::ios::binary);
    if (!f) throw ValidationError("cannot write " + path(name));
    f << content;
  }

  void primary_json(const std::string& name, const json& j) const {
    const std::string text = j.dump(2) + "\n";
    out_ << text;
    file(name, text);
  }

 private:
  std::string dir_;
  std::ostream& out_;
};

json versions() {
  return {{"logheat", kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"compiler", __VERSION__}};
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
    rows.push_back(r);
  }
  return rows;
}

Measure require_measure(const Options& o) {
  if (o.measure.empty()) throw ValidationError("--measure is required");
  return load_measure(o.measure);
}

json cmd_bounds(const Options& o) {
  json out;
  out["thm2"] = nullptr;
  try {
    const auto e = thm2_envelope(o.alpha, o.lip, o.t);
    out["thm2"] = {{"lower", e.lower}, {"upper", e.upper}};
  } catch (const DomainError& e) {
    out["thm2"] = {{"error", e.what()}};
  }
  try {
    const auto e = cor7_envelope(o.alpha, o.lip, o.t);
    out["cor7"] = {{"lower", e.lower}, {"upper", e.upper}};
  } catch (const DomainError& e) {
    out["cor7"] = {{"error", e.what()}};
  }
  out["lower"] = out["thm2"].value("lower", json(nullptr));
  out["upper"] = out["thm2"].value("upper", json(nullptr));
  out["compact_support_lower"] = compact_support_lower(o.radius, o.t);
  if (o.alpha > 0.0) {
    out["t_star"] = log_concavity_time(o.alpha, o.lip);
    const auto c = transport_constants({o.alpha, o.lip, o.radius, o.third_deriv, 0.0});
    out["caffarelli"] = c.caffarelli;
    out["thm3"] = c.thm3;
    out["fms"] = c.fms;
    out["lsi_transfer"] = {{"C", o.lsi_c}, {"via_thm3", lsi_transfer(o.lsi_c, c.thm3)}};
    const auto iou = integrated_ou_upper(o.alpha, o.lip);
    out["integrated_ou_upper"] = {{"closed_form", iou.closed_form},
                                  {"numeric", iou.numeric},
                                  {"slack", iou.numeric - iou.closed_form}};
  } else {
    out["t_star"] = nullptr;
  }
  return out;
}

json cmd_hessian_scan(const Options& o, const Output& io) {
  const Measure m = require_measure(o);
  double alpha = o.scan_alpha.value_or(1.0);
  double lip = o.scan_lip.value_or(0.0);
  if (const auto* p = std::get_if<PerturbedLogConcave1D>(&m)) {
    alpha = o.scan_alpha.value_or(p->alpha());
    lip = o.scan_lip.value_or(p->lip());
  }
  if (o.n < 1) throw ValidationError("--n must be >= 1");
  const int d = dimension(m);
  std::ostringstream csv;
  csv << "z,lambda_min,lambda_max,lower_envelope,upper_envelope,slack_lower,slack_upper\n";
  double worst_lower = std::numeric_limits<double>::infinity();
  double worst_upper = worst_lower;
  for (int k = 0; k < o.n; ++k) {
    const double z = o.n == 1 ? o.z_min : o.z_min + (o.z_max - o.z_min) * k / (o.n - 1);
    Point zp = Point::Zero(d);
    zp(0) = z;
    const auto r = hessian_bound_report(m, zp, o.t, alpha, lip);
    Eigen::SelfAdjointEigenSolver<Matrix> es(r.computed, Eigen::EigenvaluesOnly);
    csv << fmt17(z) << ',' << fmt17(es.eigenvalues().minCoeff()) << ','
        << fmt17(es.eigenvalues().maxCoeff()) << ',' << fmt17(r.lower_envelope) << ','
        << fmt17(r.upper_envelope) << ',' << fmt17(r.slack_lower) << ','
        << fmt17(r.slack_upper) << '\n';
    worst_lower = std::min(worst_lower, r.slack_lower);
    worst_upper = std::min(worst_upper, r.slack_upper);
  }
  io.file("hessian_scan.csv", csv.str());
  json out{{"alpha", alpha},       {"lip", lip},
           {"t", o.t},             {"points", o.n},
           {"min_slack_lower", worst_lower}, {"min_slack_upper", worst_upper}};
  if (!io.has_dir()) out["csv"] = csv.str();
  return out;
}

json cmd_transport(const Options& o, const Output& io) {
  const Measure m = require_measure(o);
  FlowOptions fo;
  fo.n_points = o.n_points;
  fo.t_max = o.t_max;
  fo.steps_per_unit = o.steps_per_unit;
  fo.record = o.trajectories;
  const auto flow = build_flow_map(m, fo);
  if (io.has_dir()) {
    write_flow_csv(flow, io.path("flow_map.csv"));
    if (o.trajectories) write_trajectory_csvs(flow, io.path("trajectories"));
  }
  const auto lip = empirical_lipschitz(flow);
  const auto env = theta_envelope(m, default_time_grid(), default_space_grid());
  json out{{"t_max", flow.t_max},
           {"t_min", flow.t_min},
           {"points", flow.inputs.size()},
           {"steps", flow.steps},
           {"monotone", flow.monotone},
           {"empirical_lipschitz", lip.value},
           {"lipschitz_argmax", lip.argmax},
           {"integral_theta_max", env.integral_theta_max},
           {"exp_integral_theta_max", env.certified_lipschitz}};
  if (const auto* p = std::get_if<PerturbedLogConcave1D>(&m); p && p->alpha() > 0.0) {
    out["thm3"] = transport_constants({p->alpha(), p->lip(), 0, 0, 0}).thm3;
    out["integrated_ou_upper"] = integrated_ou_upper(p->alpha(), p->lip()).closed_form;
  }
  if (!std::holds_alternative<HeatSmoothed1D>(m)) {
    const auto pf = pushforward_validate(flow, m, o.samples, o.seed);
    out["ks_stat"] = pf.ks_stat;
    out["mean_error"] = pf.mean_error;
    out["variance_error"] = pf.variance_error;
    out["samples"] = o.samples;
  }
  return out;
}

json cmd_counterexample(const Options& o) {
  Psi psi{parse_psi(o.psi), o.coef};
  const auto m = build_counterexample(psi, o.truncation);
  const auto c = variance_certificate(m, o.t, o.target_m);
  return {{"t", c.t},
          {"M", c.target_m},
          {"j", c.j},
          {"z_star", c.z_star},
          {"variance", c.variance},
          {"curvature", c.curvature},
          {"curvature_bound", (1.0 - c.target_m * c.target_m / c.t) / c.t},
          {"truncation", c.truncation},
          {"tail_bound", c.tail_bound},
          {"lower_mass", c.lower_mass},
          {"tilted_tail", c.tilted_tail},
          {"psi", o.psi},
          {"coef", o.coef},
          {"exp_psi_moment", m.exp_psi_moment()},
          {"exp_psi_moment_series", m.exp_psi_moment_series()}};
}

json cmd_two_atom(const Options& o) {
  const auto r = two_atom_analysis(o.x0, o.w0, o.w1, o.t);
  return {{"x0", o.x0},
          {"w0", o.w0},
          {"w1", o.w1},
          {"t", o.t},
          {"z_bar", r.z_bar},
          {"curvature", r.curvature_at_z_bar},
          {"analytic_value", r.analytic_value},
          {"grid_min_curvature", r.grid_min_curvature},
          {"grid_argmin", r.grid_argmin},
          {"threshold_t", 0.25 * o.x0 * o.x0}};
}

std::vector<double> parse_poly(const std::string& text) {
  std::vector<double> c;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      c.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("--poly expects comma-separated numbers");
    }
  }
  if (c.empty()) throw ValidationError("--poly is empty");
  return c;
}

json cmd_decompose(const Options& o) {
  const auto coef = parse_poly(o.poly);  // highest degree first
  auto U = [coef](double x) {
    double v = 0.0;
    for (double c : coef) v = v * x + c;
    return v;
  };
  auto U2 = [coef](double x) {
    const int deg = static_cast<int>(coef.size()) - 1;
    double v = 0.0;
    for (int k = 0; k <= deg - 2; ++k) {
      const int p = deg - k;
      v = v * x + coef[k] * p * (p - 1);
    }
    return v;
  };
  const auto d = lemma4_decompose(U, o.alpha, o.beta, o.radius, {o.half_width, o.step}, U2);
  return {{"poly", coef},
          {"alpha", d.alpha},
          {"beta", d.beta},
          {"radius", d.radius},
          {"lip_cert", d.lip_cert},
          {"max_reconstruction_error", d.max_reconstruction_error},
          {"min_v_second", d.min_v_second},
          {"max_h_slope", d.max_h_slope},
          {"grid_points", d.grid_points}};
}

json cmd_mixture(const Options& o, const Output& io, int& code) {
  const Measure m = require_measure(o);
  const auto* g = std::get_if<GaussianMixture>(&m);
  if (!g) throw ValidationError("mixture expects a gaussian_mixture measure");
  json out;
  const auto res = analyze_mixture_1d(*g);
  if (const auto* p = std::get_if<MixtureParams>(&res)) {
    out = {{"feasible", true},  {"alpha", p->alpha}, {"lip", p->lip},
           {"radius", p->radius}, {"beta", p->beta},  {"K", p->k}};
    out["t_star"] = log_concavity_time(p->alpha, p->lip);
  } else {
    const auto& inf = std::get<Infeasible>(res);
    out = {{"feasible", false}, {"reason", inf.reason}, {"radius_reached", inf.radius_reached}};
    code = 2;
  }
  std::ostringstream csv;
  csv << "x,actual,refined,crude\n";
  const int n = std::max(o.n, 2);
  for (int k = 0; k < n; ++k) {
    const double x = o.z_min + (o.z_max - o.z_min) * k / (n - 1);
    const Point xp = Point::Constant(1, x);
    const auto b = mixture_hessian_lower(*g, xp);
    csv << fmt17(x) << ',' << fmt17(-log_hessian(m, xp)(0, 0)) << ','
        << fmt17(b.refined(0, 0)) << ',' << fmt17(b.crude(0, 0)) << '\n';
  }
  io.file("mixture_scan.csv", csv.str());
  if (!io.has_dir()) out["csv"] = csv.str();
  return out;
}

json cmd_reverse_sde(const Options& o, const Output& io) {
  const Measure m = require_measure(o);
  ReverseSdeOptions ro;
  ro.n = o.n_paths;
  ro.steps = o.steps;
  ro.t1 = o.t1;
  ro.seed = o.seed;
  const auto pts = reverse_sde_sample(m, ro);
  std::ostringstream csv;
  const int d = dimension(m);
  for (int k = 0; k < d; ++k) csv << (k ? "," : "") << "x" << k;
  csv << '\n';
  for (const auto& p : pts) {
    for (int k = 0; k < d; ++k) csv << (k ? "," : "") << fmt17(p(k));
    csv << '\n';
  }
  io.file("samples.csv", csv.str());
  json out{{"n", ro.n}, {"steps", ro.steps}, {"t1", ro.t1}, {"seed", ro.seed}};
  if (d == 1 && !std::holds_alternative<HeatSmoothed1D>(m)) {
    std::vector<double> xs;
    for (const auto& p : pts) xs.push_back(p(0));
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    out["sample_mean"] = mean;
    out["target_mean"] = moments_1d(m).mean;
    out["ks_stat"] =
        numerics::ks_statistic(std::move(xs), [&](double x) { return cdf_1d(m, x); });
  }
  return out;
}

void add_common(CLI::App* sub, Options& o, bool measure) {
  if (measure) sub->add_option("--measure", o.measure, "measure JSON file");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--seed", o.seed, "random seed");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Heat-flow log-concavity toolkit"};
  app.require_subcommand(1);

  auto* bounds = app.add_subcommand("bounds", "closed-form envelopes and constants");
  add_common(bounds, o, false);
  bounds->add_option("--alpha", o.alpha);
  bounds->add_option("--lip", o.lip);
  bounds->add_option("--t", o.t);
  bounds->add_option("--radius", o.radius);
  bounds->add_option("--third-deriv", o.third_deriv);
  bounds->add_option("--lsi-c", o.lsi_c);

  auto* scan = app.add_subcommand("hessian-scan", "curvature of mu * gamma_t on a z-grid");
  add_common(scan, o, true);
  scan->add_option("--t", o.t);
  scan->add_option("--alpha", o.scan_alpha);
  scan->add_option("--lip", o.scan_lip);
  scan->add_option("--z-min", o.z_min);
  scan->add_option("--z-max", o.z_max);
  scan->add_option("--n", o.n);

  auto* transport = app.add_subcommand("transport", "heat-flow map and certification");
  add_common(transport, o, true);
  transport->add_option("--n-points", o.n_points);
  transport->add_option("--t-max", o.t_max);
  transport->add_option("--steps-per-unit", o.steps_per_unit);
  transport->add_option("--samples", o.samples);
  transport->add_flag("--trajectories", o.trajectories);

  auto* counter = app.add_subcommand("counterexample", "variance certificate");
  add_common(counter, o, false);
  counter->add_option("--psi", o.psi)->check(CLI::IsMember({"zero", "linear", "quadratic"}));
  counter->add_option("--coef", o.coef);
  counter->add_option("--truncation", o.truncation);
  counter->add_option("--t", o.t);
  counter->add_option("--M", o.target_m);

  auto* two = app.add_subcommand("two-atom", "two-point measure analysis");
  add_common(two, o, false);
  two->add_option("--x0", o.x0);
  two->add_option("--w0", o.w0);
  two->add_option("--w1", o.w1);
  two->add_option("--t", o.t);

  auto* decomp = app.add_subcommand("decompose", "convex plus Lipschitz split of a polynomial");
  add_common(decomp, o, false);
  decomp->add_option("--poly", o.poly, "coefficients, highest degree first");
  decomp->add_option("--alpha", o.alpha);
  decomp->add_option("--beta", o.beta);
  decomp->add_option("--radius", o.radius);
  decomp->add_option("--half-width", o.half_width);
  decomp->add_option("--step", o.step);

  auto* mixture = app.add_subcommand("mixture", "perturbation parameters of a 1D mixture");
  add_common(mixture, o, true);
  mixture->add_option("--x-min", o.z_min);
  mixture->add_option("--x-max", o.z_max);
  mixture->add_option("--n", o.n);

  auto* rsde = app.add_subcommand("reverse-sde", "reverse SDE sampler");
  add_common(rsde, o, true);
  rsde->add_option("--n", o.n_paths);
  rsde->add_option("--steps", o.steps);
  rsde->add_option("--t1", o.t1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n" << app.help();
    return 64;
  }

  const auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  json inputs;
  for (const auto* opt : sub->get_options()) {
    if (opt->get_name() == "--help" || opt->get_name() == "--out" || opt->count() == 0) continue;
    const auto res = opt->results();
    inputs[opt->get_name().substr(2)] = res.size() == 1 ? json(res.front()) : json(res);
  }

  const auto start = std::chrono::steady_clock::now();
  int code = 0;
  try {
    const Output io(o, out);
    json outputs;
    if (name == "bounds") {
      outputs = cmd_bounds(o);
    } else if (name == "hessian-scan") {
      outputs = cmd_hessian_scan(o, io);
    } else if (name == "transport") {
      outputs = cmd_transport(o, io);
    } else if (name == "counterexample") {
      outputs = cmd_counterexample(o);
    } else if (name == "two-atom") {
      outputs = cmd_two_atom(o);
    } else if (name == "decompose") {
      outputs = cmd_decompose(o);
    } else if (name == "mixture") {
      outputs = cmd_mixture(o, io, code);
    } else {
      outputs = cmd_reverse_sde(o, io);
    }
    json report{{"command", name}, {"inputs", inputs}, {"outputs", outputs},
                {"versions", versions()}};
    io.primary_json(name + ".json", report);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report["wall_time"] = wall;
    io.file("run_report.json", report.dump(2) + "\n");
    return code;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const BracketError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const SearchError& e) {
    err << "search error: " << e.what() << "\n";
    return 3;
  } catch (const PreconditionError& e) {
    err << "precondition failed: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace logheat::cli
