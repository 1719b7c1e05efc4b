#include "logheat/measure_io.hpp"

#include <fstream>

#include "logheat/errors.hpp"

namespace logheat {

using nlohmann::json;

namespace {

const json& field(const json& j, const char* name) {
  if (!j.contains(name)) throw ValidationError(std::string("missing field '") + name + "'");
  return j.at(name);
}

double number(const json& j, const char* what) {
  if (!j.is_number()) throw ValidationError(std::string(what) + " must be a number");
  return j.get<double>();
}

Point point(const json& j, int dim) {
  if (j.is_number()) {
    if (dim != 1) throw ValidationError("point must be an array when dim > 1");
    return Point::Constant(1, j.get<double>());
  }
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw ValidationError("point must have dim entries");
  }
  Point p(dim);
  for (int k = 0; k < dim; ++k) p(k) = number(j[k], "coordinate");
  return p;
}

std::vector<double> numbers(const json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(std::string(what) + " must be an array");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(number(v, what));
  return out;
}

json point_json(const Point& p) {
  if (p.size() == 1) return p(0);
  json a = json::array();
  for (Eigen::Index k = 0; k < p.size(); ++k) a.push_back(p(k));
  return a;
}

Measure from_json_impl(const json& j) {
  if (!j.is_object()) throw ValidationError("measure must be a JSON object");
  const auto type = field(j, "type").get<std::string>();
  if (type == "gaussian_mixture") {
    const int dim = j.value("dim", 1);
    std::vector<MixtureComponent> comps;
    for (const auto& c : field(j, "components")) {
      if (!c.is_array() || c.size() != 3) {
        throw ValidationError("components are [weight, mean, variance] triples");
      }
      comps.push_back({number(c[0], "weight"), point(c[1], dim), number(c[2], "variance")});
    }
    return GaussianMixture(dim, std::move(comps));
  }
  if (type == "atomic") {
    const int dim = j.value("dim", 1);
    std::vector<Atom> atoms;
    for (const auto& a : field(j, "atoms")) {
      if (!a.is_array() || a.size() != 2) {
        throw ValidationError("atoms are [weight, location] pairs");
      }
      atoms.push_back({number(a[0], "weight"), point(a[1], dim)});
    }
    return AtomicMeasure(dim, std::move(atoms));
  }
  if (type == "perturbed_1d") {
    PerturbedSpec spec;
    spec.alpha = number(field(j, "alpha"), "alpha");
    spec.lip = number(field(j, "lip"), "lip");
    if (j.contains("h_knots")) spec.h_knots = numbers(j.at("h_knots"), "h_knots");
    if (j.contains("h_slopes")) spec.h_slopes = numbers(j.at("h_slopes"), "h_slopes");
    if (j.contains("v_extra")) {
      for (const auto& t : j.at("v_extra")) {
        const auto v = numbers(t, "v_extra term");
        if (v.size() != 4) throw ValidationError("v_extra terms are [knot, left, right, kink]");
        spec.v_extra.push_back({v[0], v[1], v[2], v[3]});
      }
    }
    return PerturbedLogConcave1D(std::move(spec));
  }
  if (type == "counterexample") {
    Psi psi;
    psi.kind = parse_psi(j.value("psi", std::string("zero")));
    psi.coef = j.contains("coef") ? number(j.at("coef"), "coef") : 1.0;
    const int n = j.value("truncation", 60);
    return CounterexampleMeasure(psi, n);
  }
  throw ValidationError("unknown measure type '" + type + "'");
}

}  // namespace

Measure measure_from_json(const json& j) {
  try {
    return from_json_impl(j);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed measure: ") + e.what());
  }
}

json measure_to_json(const Measure& m) {
  json j;
  if (const auto* g = std::get_if<GaussianMixture>(&m)) {
    j["type"] = "gaussian_mixture";
    j["dim"] = g->dim();
    j["components"] = json::array();
    for (const auto& c : g->components()) {
      j["components"].push_back({c.weight, point_json(c.mean), c.variance});
    }
  } else if (const auto* a = std::get_if<AtomicMeasure>(&m)) {
    j["type"] = "atomic";
    j["dim"] = a->dim();
    j["atoms"] = json::array();
    for (const auto& at : a->atoms()) j["atoms"].push_back({at.weight, point_json(at.location)});
  } else if (const auto* p = std::get_if<PerturbedLogConcave1D>(&m)) {
    const auto& s = p->spec();
    j["type"] = "perturbed_1d";
    j["alpha"] = s.alpha;
    j["lip"] = s.lip;
    j["h_knots"] = s.h_knots;
    j["h_slopes"] = s.h_slopes;
    j["v_extra"] = json::array();
    for (const auto& t : s.v_extra) j["v_extra"].push_back({t.knot, t.left, t.right, t.kink});
  } else if (const auto* c = std::get_if<CounterexampleMeasure>(&m)) {
    j["type"] = "counterexample";
    j["psi"] = psi_name(c->psi().kind);
    j["coef"] = c->psi().coef;
    j["truncation"] = c->truncation();
  } else {
    throw CapabilityError("smoothed measures have no JSON form");
  }
  return j;
}

Measure load_measure(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open measure file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("measure file is not valid JSON: ") + e.what());
  }
  return measure_from_json(j);
}

}  // namespace logheat
