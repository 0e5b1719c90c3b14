#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "dlab/cli.hpp"
#include "dlab/serialize.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "dlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = dlab::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

// First line that is not a '#' comment.
std::string column_header(const std::string& csv) {
  for (const auto& l : lines(csv))
    if (!l.empty() && l[0] != '#') return l;
  return {};
}

bool has_line(const std::string& s, const std::string& line) {
  for (const auto& l : lines(s))
    if (l == line) return true;
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "dlab_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string precise(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Sweep small enough for a unit test.
std::vector<std::string> cheap_sweep() {
  return {"sweep", "--alpha", "2", "--p", "6", "--lambdas", "16,32,64,128", "--uniform-count", "8", "--window-count", "8"};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("exponents table") {
  const auto r = run({"exponents", "--alpha", "2", "--p", "6"});
  REQUIRE(r.code == 0);
  CHECK(column_header(r.out) == "quantity,value");
  CHECK(has_line(r.out, "# dlab exponents"));
  CHECK(has_line(r.out, "# alpha = 2.0"));
  CHECK(has_line(r.out, "# p = 6.0"));
  CHECK(r.out.find("smoothing_exponent,0.33333") != std::string::npos);
  CHECK(r.out.find("admissibility_threshold,4") != std::string::npos);

  const auto j = run({"exponents", "--alpha", "3", "--p", "6", "--format", "json"});
  REQUIRE(j.code == 0);
  const auto doc = json::parse(j.out);
  CHECK(doc["command"] == "exponents");
  CHECK(doc["exponents"]["maximal_exponent"].get<double>() == doctest::Approx(1.0));
  CHECK(doc["config"]["d"] == 1);
}

TEST_CASE("usage errors exit with code 2") {
  const auto missing = run({"sweep", "--p", "6"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("--alpha") != std::string::npos);
  CHECK(missing.err.find("Usage") != std::string::npos);

  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"exponents", "--alpha", "2", "--p", "six"}).code == 2);
  CHECK(run({"exponents", "--alpha", "2", "--p", "1"}).code == 2);
  CHECK(run({"exponents", "--alpha", "-1", "--p", "6"}).code == 2);
  CHECK(run({"exponents", "--alpha", "2", "--p", "6", "--format", "xml"}).code == 2);

  const auto unknown = run({"diagnostics", "nope"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("nope") != std::string::npos);

  CHECK(run({"sweep", "--alpha", "2", "--p", "6", "--lambdas", "16,24"}).code == 2);
  CHECK(run({"evolve", "--datum", "plane-wave", "--xi0", "0.3"}).code == 2);
  CHECK(run({"evolve", "--datum", "gaussian", "--evolution", "airy", "--d", "2"}).code == 2);

  const auto help = run({"sweep", "--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("--uniform-count") != std::string::npos);
}

TEST_CASE("memory cap violations exit with code 2") {
  auto args = cheap_sweep();
  for (const char* a : {"--engine", "grid", "--memory-cap-mb", "4", "--check", "none"}) args.push_back(a);
  const auto r = run(args);
  CHECK(r.code == 2);
  CHECK(r.err.find("lambda=128") != std::string::npos);
}

TEST_CASE("sweep CSV layout and verdict exit codes") {
  auto args = cheap_sweep();
  args.push_back("--check");
  args.push_back("none");
  const auto r = run(args);
  REQUIRE(r.code == 0);
  CHECK(column_header(r.out) == "lambda,N,L,t_samples,numerator,denominator,ratio,log_lambda,log_ratio");
  CHECK(has_line(r.out, "# dlab sweep"));
  CHECK(has_line(r.out, "# uniform_count = 8"));
  CHECK(has_line(r.out, "# norm = \"mixed_spacetime\""));
  CHECK(has_line(r.out, "# verdict = PASS"));
  int rows = 0;
  for (const auto& l : lines(r.out))
    if (!l.empty() && l[0] != '#' && l != column_header(r.out)) ++rows;
  CHECK(rows == 4);

  auto fail = cheap_sweep();
  for (const char* a : {"--expect", "slope=100"}) fail.push_back(a);
  const auto f = run(fail);
  CHECK(f.code == 1);
  CHECK(has_line(f.out, "# verdict = FAIL"));
  CHECK(has_line(f.out, "# check = expect"));

  auto bad = cheap_sweep();
  for (const char* a : {"--expect", "100"}) bad.push_back(a);
  CHECK(run(bad).code == 2);
}

TEST_CASE("sweep JSON output") {
  auto args = cheap_sweep();
  for (const char* a : {"--format", "json", "--expect", "slope=0", "--tolerance", "5"}) args.push_back(a);
  const auto r = run(args);
  REQUIRE(r.code == 0);
  const auto doc = json::parse(r.out);
  CHECK(doc["command"] == "sweep");
  REQUIRE(doc["records"].size() == 4);
  const auto& first = doc["records"][0];
  for (const char* k : {"lambda", "N", "L", "t_samples", "numerator", "denominator", "ratio", "log_lambda", "log_ratio"})
    CHECK(first.contains(k));
  CHECK(first["lambda"].get<double>() == 16);
  const auto& v = doc["verdict"];
  CHECK(v["pass"] == true);
  CHECK(v["check"] == "expect");
  CHECK(v["expected"].get<double>() == 0);
  CHECK(v["tolerance"].get<double>() == 5);
  for (const char* k : {"slope", "intercept", "max_residual", "checks"}) CHECK(v.contains(k));
  // The resolved beta is the critical smoothing index for alpha = 2, p = 6.
  CHECK(doc["config"]["beta"].get<double>() == doctest::Approx(1.0 / 3));
}

TEST_CASE("config file precedence") {
  const fs::path cfg = scratch("sweep.json");
  {
    std::ofstream o(cfg);
    o << R"({"alpha": 2, "p": 6, "lambdas": [16, 32], "uniform_count": 8, "window_count": 4,
             "check": "none", "beta": 0.5, "format": "json"})";
  }
  const auto from_file = run({"sweep", "--config", cfg.string()});
  REQUIRE(from_file.code == 0);
  const auto a = json::parse(from_file.out);
  CHECK(a["config"]["beta"].get<double>() == 0.5);
  CHECK(a["config"]["window_count"] == 4);
  CHECK(a["config"]["tolerance"].get<double>() == 0.1);  // default survives
  CHECK(a["records"].size() == 2);

  const auto overridden = run({"sweep", "--config", cfg.string(), "--beta", "0", "--lambdas", "16,32,64"});
  REQUIRE(overridden.code == 0);
  const auto b = json::parse(overridden.out);
  CHECK(b["config"]["beta"].get<double>() == 0);
  CHECK(b["records"].size() == 3);
  CHECK(b["config"]["window_count"] == 4);

  const fs::path bad = scratch("bad.json");
  {
    std::ofstream o(bad);
    o << R"({"alpha": 2, "p": 6, "colour": "blue"})";
  }
  const auto unknown = run({"sweep", "--config", bad.string()});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("colour") != std::string::npos);

  {
    std::ofstream o(bad);
    o << R"({"alpha": "two", "p": 6})";
  }
  CHECK(run({"sweep", "--config", bad.string()}).code == 2);
  {
    std::ofstream o(bad);
    o << "{not json";
  }
  CHECK(run({"sweep", "--config", bad.string()}).code == 2);
  CHECK(run({"sweep", "--config", scratch("absent.json").string()}).code == 2);
}

TEST_CASE("output file, plot script and echo") {
  const fs::path csv = scratch("sweep.csv");
  fs::remove(csv.string() + ".gp");
  auto args = cheap_sweep();
  for (const char* a : {"--check", "none", "--plot", "--output"}) args.push_back(a);
  args.push_back(csv.string());
  const auto r = run(args);
  REQUIRE(r.code == 0);
  CHECK(has_line(r.out, "# wrote " + csv.string()));
  CHECK(has_line(r.out, "# alpha = 2.0"));
  CHECK(r.out.find("# verdict = PASS slope = ") != std::string::npos);
  const std::string body = slurp(csv);
  CHECK(column_header(body) == "lambda,N,L,t_samples,numerator,denominator,ratio,log_lambda,log_ratio");
  const std::string gp = slurp(csv.string() + ".gp");
  CHECK(gp.find("# dlab sweep") != std::string::npos);
  CHECK(gp.find("set datafile separator ','") != std::string::npos);
  CHECK(gp.find("set logscale xy") != std::string::npos);
  CHECK(gp.find(csv.string()) != std::string::npos);

  auto to_stdout = cheap_sweep();
  for (const char* a : {"--check", "none", "--plot"}) to_stdout.push_back(a);
  CHECK(run(to_stdout).code == 2);
}

TEST_CASE("evolve") {
  const auto r = run({"evolve", "--datum", "gaussian", "--t", "0,0.5", "--points", "256", "--half-width", "20"});
  REQUIRE(r.code == 0);
  CHECK(column_header(r.out) == "t,l2_norm,linf_norm,re_origin,im_origin,datum_deviation,frame_file");

  const auto j = run({"evolve", "--datum", "gaussian", "--t", "0,0.5", "--points", "256", "--half-width", "20",
                      "--format", "json"});
  REQUIRE(j.code == 0);
  const auto doc = json::parse(j.out);
  REQUIRE(doc["frames"].size() == 2);
  const auto& f0 = doc["frames"][0];
  const auto& f1 = doc["frames"][1];
  CHECK(f0["datum_deviation"].get<double>() <= 1e-14);
  CHECK(f0["re_origin"].get<double>() == doctest::Approx(1.0));
  CHECK(f1["l2_norm"].get<double>() == doctest::Approx(f0["l2_norm"].get<double>()).epsilon(1e-12));
  // |u(0, t)| = (1 + 4t^2)^{-1/4} for the unit gaussian
  const double mod = std::hypot(f1["re_origin"].get<double>(), f1["im_origin"].get<double>());
  CHECK(mod == doctest::Approx(std::pow(2.0, -0.25)).epsilon(1e-10));

  const fs::path dir = scratch("frames");
  fs::remove_all(dir);
  const auto w = run({"evolve", "--datum", "plane-wave", "--xi0", "2", "--points", "64", "--half-width",
                      precise(std::numbers::pi * 8), "--t", "0.25", "--frames-dir", dir.string()});
  REQUIRE(w.code == 0);
  CHECK(fs::exists(dir / "datum.dlf"));
  const auto frame = dlab::load_field((dir / "frame_0000.dlf").string());
  CHECK(frame.grid().N == 64);
  CHECK(frame.size() == 64);

  const auto aliased = run({"evolve", "--datum", "gaussian", "--width", "0.05", "--points", "64", "--half-width", "20",
                            "--t", "0.1"});
  CHECK(aliased.code == 2);
}

TEST_CASE("diagnostics table") {
  const auto r = run({"diagnostics", "focusing", "--lambda", "32"});
  CHECK(r.code == 0);
  CHECK(column_header(r.out) == "name,value,relation,threshold,pass,detail");
  CHECK(has_line(r.out, "# verdict = PASS"));

  const auto j = run({"diagnostics", "--names", "focusing,ridge", "--lambda", "32", "--alpha", "3", "--format", "json"});
  CHECK(j.code == 0);
  const auto doc = json::parse(j.out);
  REQUIRE(doc["rows"].size() == 2);
  for (const auto& row : doc["rows"])
    for (const char* k : {"name", "value", "relation", "threshold", "pass", "detail"}) CHECK(row.contains(k));
  CHECK(doc["rows"][0]["name"] == "focusing");
  CHECK(doc["pass"] == true);
}

}  // TEST_SUITE
