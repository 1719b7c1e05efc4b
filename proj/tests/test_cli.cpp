#include <doctest.h>

#include <cli.hpp>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "logheat");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = logheat::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("logheat_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("bounds report") {
  auto r = run({"bounds", "--alpha", "1", "--lip", "1", "--t", "4"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["command"] == "bounds");
  const auto& o = j["outputs"];
  CHECK(o["lower"].get<double>() == doctest::Approx(0.0705573).epsilon(1e-7));
  CHECK(o["upper"].get<double>() == doctest::Approx(0.25));
  CHECK(o["t_star"].get<double>() == doctest::Approx(4.0));
  CHECK(o["thm3"].get<double>() == doctest::Approx(12.18249).epsilon(1e-6));

  r = run({"bounds", "--alpha", "1", "--lip", "0", "--t", "1"});
  const auto g = json::parse(r.out)["outputs"];
  CHECK(g["lower"].get<double>() == doctest::Approx(0.5));
  CHECK(g["upper"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("two-atom report") {
  const auto r = run({"two-atom", "--x0", "2", "--t", "1"});
  REQUIRE(r.code == 0);
  const auto o = json::parse(r.out)["outputs"];
  CHECK(o["z_bar"].get<double>() == doctest::Approx(1.0));
  CHECK(std::fabs(o["curvature"].get<double>()) < 1e-10);
}

TEST_CASE("usage errors and help") {
  CHECK(run({"bounds", "--no-such-flag", "1"}).code == 64);
  CHECK(run({}).code == 64);
  CHECK(run({"bounds", "--alpha", "abc"}).code == 64);
  const auto h = run({"--help"});
  CHECK(h.code == 0);
  CHECK(h.out.find("hessian-scan") != std::string::npos);
}

TEST_CASE("validation and numerical exit codes") {
  CHECK(run({"hessian-scan", "--measure", "/nonexistent.json"}).code == 2);
  CHECK(run({"decompose", "--poly", "1,0,-2,0,0", "--alpha", "1", "--beta", "4", "--radius",
             "0.5"})
            .code == 2);
  CHECK(run({"counterexample", "--psi", "zero", "--truncation", "10", "--M", "10"}).code == 2);
  CHECK(run({"bounds", "--alpha", "0", "--lip", "1"}).code == 0);
}

TEST_CASE("decompose report") {
  const auto r = run({"decompose", "--alpha", "1", "--beta", "4", "--radius", "0.65"});
  REQUIRE(r.code == 0);
  const auto o = json::parse(r.out)["outputs"];
  CHECK(o["lip_cert"].get<double>() == doctest::Approx(6.5));
  CHECK(o["max_reconstruction_error"].get<double>() < 1e-10);
}

TEST_CASE("counterexample certificate JSON") {
  const auto r = run({"counterexample", "--psi", "zero", "--t", "1", "--M", "10"});
  REQUIRE(r.code == 0);
  const auto o = json::parse(r.out)["outputs"];
  for (const char* k : {"t", "M", "j", "z_star", "variance", "curvature", "truncation",
                        "tail_bound"}) {
    CHECK(o.contains(k));
  }
  CHECK(o["curvature"].get<double>() <= -99.0);
}

TEST_CASE("files are written and reproducible") {
  const auto dir = scratch("files");
  const auto m = dir / "mix.json";
  std::ofstream(m) << R"({"type":"gaussian_mixture","components":[[1,-2,1],[1,2,1]]})";

  const auto a = dir / "a", b = dir / "b";
  for (const auto& d : {a, b}) {
    REQUIRE(run({"hessian-scan", "--measure", m.string(), "--t", "1", "--n", "11", "--out",
                 d.string()})
                .code == 0);
    REQUIRE(run({"mixture", "--measure", m.string(), "--n", "21", "--out", d.string()}).code == 0);
    REQUIRE(run({"reverse-sde", "--measure", m.string(), "--n", "500", "--steps", "50", "--seed",
                 "3", "--out", d.string()})
                .code == 0);
    REQUIRE(run({"transport", "--measure", m.string(), "--n-points", "21", "--samples", "2000",
                 "--out", d.string()})
                .code == 0);
  }
  for (const char* f : {"hessian_scan.csv", "hessian-scan.json", "mixture_scan.csv",
                        "mixture.json", "samples.csv", "reverse-sde.json", "flow_map.csv",
                        "transport.json"}) {
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(slurp(a / "hessian_scan.csv").rfind("z,lambda_min,lambda_max,", 0) == 0);
  CHECK(slurp(a / "mixture_scan.csv").rfind("x,actual,refined,crude", 0) == 0);
  CHECK(slurp(a / "flow_map.csv").rfind("input,image", 0) == 0);
  const auto rep = json::parse(slurp(a / "run_report.json"));
  for (const char* k : {"command", "inputs", "outputs", "versions", "wall_time"}) {
    CHECK(rep.contains(k));
  }
  fs::remove_all(dir);
}
