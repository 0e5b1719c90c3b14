#include "dlab/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "dlab/diagnostics.hpp"
#include "dlab/harness.hpp"
#include "dlab/norms.hpp"
#include "dlab/serialize.hpp"
#include "dlab/transform.hpp"

namespace dlab::cli {

namespace {

using json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A config error that should be followed by the command's usage text.
struct UsageError : ConfigError {
  using ConfigError::ConfigError;
};

enum class Kind { number, integer, text, flag, numbers, texts };

struct Param {
  std::string key;
  Kind kind;
  json def;  // null: required, or derived from other keys
  std::string help;
  bool required = false;
  std::vector<std::string> choices = {};
};

std::string kebab(std::string s) {
  std::replace(s.begin(), s.end(), '_', '-');
  return s;
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& key, std::string_view s) {
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("--" + kebab(key) + ": '" + std::string(s) + "' is not a number");
  return v;
}

long long parse_integer(const std::string& key, std::string_view s) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("--" + kebab(key) + ": '" + std::string(s) + "' is not an integer");
  return v;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void check_choice(const Param& p, const std::string& v) {
  if (p.choices.empty()) return;
  if (std::find(p.choices.begin(), p.choices.end(), v) != p.choices.end()) return;
  std::string all;
  for (const auto& c : p.choices) all += (all.empty() ? "" : "|") + c;
  throw ConfigError("--" + kebab(p.key) + ": '" + v + "' is not one of " + all);
}

// Value given on the command line.
json from_text(const Param& p, const std::string& s) {
  switch (p.kind) {
    case Kind::number: return parse_number(p.key, s);
    case Kind::integer: return parse_integer(p.key, s);
    case Kind::text: check_choice(p, s); return s;
    case Kind::flag: return s == "true";
    case Kind::numbers: {
      json arr = json::array();
      for (const auto& item : split_commas(s)) arr.push_back(parse_number(p.key, item));
      return arr;
    }
    case Kind::texts: {
      json arr = json::array();
      for (const auto& item : split_commas(s)) check_choice(p, item), arr.push_back(item);
      return arr;
    }
  }
  return nullptr;
}

// Value read from the config file.
json from_config(const Param& p, const json& v) {
  const std::string where = "config key '" + p.key + "'";
  if (v.is_null()) return v;
  switch (p.kind) {
    case Kind::number:
      if (!v.is_number()) throw ConfigError(where + " must be a number");
      return v.get<double>();
    case Kind::integer:
      if (!v.is_number_integer()) throw ConfigError(where + " must be an integer");
      return v;
    case Kind::text:
      if (!v.is_string()) throw ConfigError(where + " must be a string");
      check_choice(p, v.get<std::string>());
      return v;
    case Kind::flag:
      if (!v.is_boolean()) throw ConfigError(where + " must be true or false");
      return v;
    case Kind::numbers:
      if (v.is_string()) return from_text(p, v.get<std::string>());
      if (!v.is_array()) throw ConfigError(where + " must be an array of numbers");
      for (const auto& x : v)
        if (!x.is_number()) throw ConfigError(where + " must be an array of numbers");
      return v;
    case Kind::texts:
      if (v.is_string()) return from_text(p, v.get<std::string>());
      if (!v.is_array()) throw ConfigError(where + " must be an array of strings");
      for (const auto& x : v) {
        if (!x.is_string()) throw ConfigError(where + " must be an array of strings");
        check_choice(p, x.get<std::string>());
      }
      return v;
  }
  return nullptr;
}

std::vector<Param> with_common(std::vector<Param> ps, bool plot) {
  ps.push_back({"output", Kind::text, "-", "output path, '-' for stdout"});
  ps.push_back({"format", Kind::text, "csv", "output format", false, {"csv", "json"}});
  if (plot) ps.push_back({"plot", Kind::flag, false, "also write a gnuplot script next to the CSV"});
  return ps;
}

std::vector<Param> evolve_params() {
  return with_common(
      {
          {"alpha", Kind::number, 2.0, "dispersion exponent"},
          {"d", Kind::integer, 1, "dimension (1-3)"},
          {"datum", Kind::text, nullptr, "initial datum", true, {"gaussian", "plane-wave", "f_lambda", "g_lambda"}},
          {"evolution", Kind::text, "fractional", "evolution law", false, {"fractional", "airy"}},
          {"t", Kind::numbers, json::array({0.0}), "comma-separated times"},
          {"points", Kind::integer, nullptr, "points per axis (default by datum)"},
          {"half_width", Kind::number, nullptr, "box half-width L (default by datum)"},
          {"xi0", Kind::number, 1.0, "plane-wave frequency along the first axis"},
          {"width", Kind::number, 1.0, "gaussian width"},
          {"lambda", Kind::number, 16.0, "extremizer frequency scale"},
          {"epsilon", Kind::number, kDefaultEpsilon, "g_lambda bump radius"},
          {"frames_dir", Kind::text, "", "directory for binary frame dumps; empty skips them"},
      },
      true);
}

std::vector<Param> sweep_params() {
  return with_common(
      {
          {"family", Kind::text, "f_lambda", "extremizer family", false, {"f_lambda", "g_lambda"}},
          {"alpha", Kind::number, nullptr, "dispersion exponent", true},
          {"d", Kind::integer, 1, "dimension"},
          {"p", Kind::number, nullptr, "Lebesgue exponent", true},
          {"beta", Kind::number, nullptr, "Sobolev index of the denominator (default: the check's critical value)"},
          {"lambdas", Kind::numbers, nullptr, "comma-separated dyadic lambdas"},
          {"norm", Kind::text, nullptr, "numerator norm (default by family)", false, {"mixed_spacetime", "maximal"}},
          {"evolution", Kind::text, "fractional", "evolution law", false, {"fractional", "airy"}},
          {"check", Kind::text, "auto", "verdict to render", false, {"auto", "sharpness", "maximal", "airy", "none"}},
          {"tolerance", Kind::number, 0.1, "slope tolerance"},
          {"expect", Kind::text, nullptr, "expected slope, e.g. slope=0.2; overrides the check's target"},
          {"uniform_count", Kind::integer, 64, "uniform time samples on [0,1)"},
          {"focusing_window", Kind::flag, true, "add the refined window below t = 1"},
          {"window_count", Kind::integer, 64, "time samples in the focusing window"},
          {"window_scale", Kind::number, 4.0, "window half-length in units of lambda^-alpha"},
          {"epsilon", Kind::number, kDefaultEpsilon, "g_lambda bump radius"},
          {"sobolev_denominator", Kind::flag, false, "use the Sobolev norm of the datum as denominator"},
          {"engine", Kind::text, "auto", "frame route", false, {"auto", "grid", "stream"}},
          {"max_grid_points", Kind::integer, 1 << 20, "largest frame kept on the grid route"},
          {"memory_cap_mb", Kind::number, nullptr, "memory cap (default DLAB_MEMORY_CAP_MB or 2048)"},
          {"workers", Kind::integer, nullptr, "parallel lambda jobs (default DLAB_MAX_WORKERS)"},
      },
      true);
}

const std::vector<std::string> kDiagnostics{"kernel", "bilinear", "restriction", "envelope", "focusing", "ridge"};

std::vector<Param> diagnostics_params() {
  return with_common(
      {
          {"names", Kind::texts, json(kDiagnostics), "diagnostics to run", false, kDiagnostics},
          {"alpha", Kind::number, 2.0, "dispersion exponent"},
          {"k", Kind::integer, 6, "kernel band"},
          {"t", Kind::number, 1.0, "kernel time"},
          {"lambda", Kind::number, 64.0, "extremizer frequency scale"},
          {"bilinear_lambda", Kind::number, 256.0, "lambda of the bilinear decomposition"},
          {"seed", Kind::integer, 1, "seed of the random bilinear instance"},
          {"p", Kind::number, 6.0, "exponent of the restriction ratio"},
          {"lambdas", Kind::numbers, json::array({16.0, 32.0, 64.0, 128.0}), "restriction lambdas"},
          {"epsilon", Kind::number, kDefaultEpsilon, "g_lambda bump radius"},
      },
      false);
}

std::vector<Param> exponents_params() {
  return with_common(
      {
          {"alpha", Kind::number, nullptr, "dispersion exponent", true},
          {"d", Kind::integer, 1, "dimension"},
          {"p", Kind::number, nullptr, "Lebesgue exponent", true},
      },
      false);
}

// CLI11 binding of one command's parameters; values stay as text until the
// config file is merged.
struct Binding {
  CLI::App* app = nullptr;
  std::vector<Param> params;
  std::map<std::string, std::string> text;
  std::map<std::string, bool> flags;
  std::vector<std::string> positional;
  std::string config;
};

void bind(Binding& b) {
  b.app->add_option("--config", b.config, "JSON config file; flags override its values");
  for (const auto& p : b.params) {
    const std::string name = "--" + kebab(p.key);
    if (p.kind == Kind::flag) {
      b.app->add_flag(name + ",!--no-" + kebab(p.key), b.flags[p.key], p.help);
    } else if (p.key == "names") {
      b.app->add_option("names,--names", b.positional, p.help);
    } else {
      b.app->add_option(name, b.text[p.key], p.help);
    }
  }
}

json resolve(const Binding& b) {
  json r = json::object();
  for (const auto& p : b.params) r[p.key] = p.def;
  if (!b.config.empty()) {
    std::ifstream in(b.config);
    if (!in) throw ConfigError("cannot read config file " + b.config);
    json cfg;
    try {
      cfg = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config file " + b.config + ": " + e.what());
    }
    if (!cfg.is_object()) throw ConfigError("config file must hold a JSON object");
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
      auto p = std::find_if(b.params.begin(), b.params.end(), [&](const Param& q) { return q.key == it.key(); });
      if (p == b.params.end()) throw ConfigError("unknown config key '" + it.key() + "'");
      r[p->key] = from_config(*p, it.value());
    }
  }
  for (const auto& p : b.params) {
    const std::string name = p.key == "names" ? "names" : "--" + kebab(p.key);
    if (b.app->count(name) == 0) continue;
    if (p.kind == Kind::flag) {
      r[p.key] = b.flags.at(p.key);
    } else if (p.key == "names") {
      json arr = json::array();
      for (const auto& s : b.positional)
        for (const auto& item : split_commas(s)) check_choice(p, item), arr.push_back(item);
      r[p.key] = arr;
    } else {
      r[p.key] = from_text(p, b.text.at(p.key));
    }
  }
  for (const auto& p : b.params)
    if (p.required && r[p.key].is_null()) throw UsageError("missing required option --" + kebab(p.key));
  return r;
}

// Output plumbing --------------------------------------------------------

struct Sink {
  std::ofstream file;
  std::ostream* os = nullptr;
  std::string path;
};

void open_sink(Sink& s, const std::string& path, std::ostream& out) {
  s.path = path;
  if (path == "-") {
    s.os = &out;
    return;
  }
  s.file.open(path, std::ios::binary);
  if (!s.file) throw ConfigError("cannot open output file " + path);
  s.os = &s.file;
}

void write_header(std::ostream& os, const std::string& command, const json& c) {
  os << "# dlab " << command << "\n";
  for (auto it = c.begin(); it != c.end(); ++it) os << "# " << it.key() << " = " << it.value().dump() << "\n";
}

// Echo of the resolved config when the results go to a file.
void echo(std::ostream& out, const std::string& command, const json& c, const Sink& s) {
  if (s.path == "-") return;
  write_header(out, command, c);
  out << "# wrote " << s.path << "\n";
}

void write_plot(const std::string& data_path, const std::string& script, const std::string& command,
                const json& c) {
  const std::string path = data_path + ".gp";
  std::ofstream gp(path, std::ios::binary);
  if (!gp) throw ConfigError("cannot open plot script " + path);
  write_header(gp, command, c);
  gp << "set datafile separator ','\n" << "set key autotitle columnhead\n" << script;
}

double num(const json& c, const char* key) { return c.at(key).get<double>(); }
long long integer(const json& c, const char* key) { return c.at(key).get<long long>(); }
std::string text(const json& c, const char* key) { return c.at(key).get<std::string>(); }
std::vector<double> numbers(const json& c, const char* key) { return c.at(key).get<std::vector<double>>(); }

int checked_int(const json& c, const char* key, long long lo, long long hi) {
  const long long v = integer(c, key);
  if (v < lo || v > hi)
    throw ConfigError("--" + kebab(key) + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

// evolve ------------------------------------------------------------------

Field build_datum(json& c, const DispersionParams& params) {
  const std::string datum = text(c, "datum");
  const int d = params.d;
  if (datum == "f_lambda" || datum == "g_lambda") {
    const Family fam = datum == "f_lambda" ? Family::smoothing_f_lambda : Family::maximal_g_lambda;
    const double lambda = num(c, "lambda"), eps = num(c, "epsilon");
    GridSpec g = extremizer_grid(fam, lambda, params, eps);
    if (!c["points"].is_null()) g.N = integer(c, "points");
    if (!c["half_width"].is_null()) g.L = num(c, "half_width");
    g.validate();
    const ExtremizerSpec spec{fam, lambda, params, g, eps};
    spec.validate();
    c["points"] = g.N;
    c["half_width"] = g.L;
    return to_physical(fam == Family::smoothing_f_lambda ? make_smoothing_extremizer(spec)
                                                         : make_maximal_extremizer(spec, eps));
  }
  if (c["points"].is_null()) c["points"] = d == 1 ? 1024 : (d == 2 ? 128 : 32);
  if (c["half_width"].is_null()) c["half_width"] = 16 * std::numbers::pi;
  const GridSpec g(d, integer(c, "points"), num(c, "half_width"));
  if (datum == "gaussian") {
    const double w = num(c, "width");
    if (!(w > 0)) throw ConfigError("--width must be positive");
    return Field::sample(g, Representation::physical,
                         [&](const Coord& x) { return cplx(std::exp(-x.squaredNorm() / (2 * w * w))); });
  }
  const double xi0 = num(c, "xi0");
  const double m = xi0 / g.dxi();
  if (std::abs(m - std::round(m)) > 1e-9 || std::abs(m) >= double(g.N / 2))
    throw ConfigError("--xi0 must be a lattice frequency pi m / L with |m| < N/2; got m = " + fmt(m));
  return Field::sample(g, Representation::physical, [&](const Coord& x) { return std::polar(1.0, xi0 * x[0]); });
}

Index origin_index(const GridSpec& g) {
  Index idx = 0;
  for (int a = 0; a < g.d; ++a) idx = idx * g.N + g.N / 2;
  return idx;
}

int cmd_evolve(json c, std::ostream& out) {
  const DispersionParams params{num(c, "alpha"), checked_int(c, "d", 1, 3)};
  params.validate();
  const bool airy = text(c, "evolution") == "airy";
  if (airy && params.d != 1) throw ConfigError("airy evolution is one-dimensional");
  const auto ts = numbers(c, "t");
  if (ts.empty()) throw ConfigError("--t needs at least one time");
  const Field datum = build_datum(c, params);

  std::vector<Field> frames;
  if (airy) {
    for (double t : ts) frames.push_back(airy_evolve(datum, t));
  } else {
    frames = evolve_trajectory(datum, ts, params).frames;
  }

  const std::string dir = text(c, "frames_dir");
  if (!dir.empty()) {
    std::filesystem::create_directories(dir);
    save_field(dir + "/datum.dlf", datum);
  }
  const Index o = origin_index(datum.grid());
  json rows = json::array();
  for (size_t j = 0; j < frames.size(); ++j) {
    const Field& u = frames[j];
    double dev = 0;
    for (Index i = 0; i < u.size(); ++i) {
      if (!std::isfinite(u[i].real()) || !std::isfinite(u[i].imag()))
        throw NumericalError("frame at t=" + fmt(ts[j]) + " has non-finite samples");
      dev = std::max(dev, std::abs(u[i] - datum[i]));
    }
    std::string file;
    if (!dir.empty()) {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%04zu.dlf", j);
      file = dir + "/" + name;
      save_field(file, u);
    }
    rows.push_back({{"t", ts[j]},
                    {"l2_norm", lp_norm(u, 2)},
                    {"linf_norm", lp_norm(u, kInf)},
                    {"re_origin", u[o].real()},
                    {"im_origin", u[o].imag()},
                    {"datum_deviation", dev},
                    {"frame_file", file}});
  }

  Sink s;
  open_sink(s, text(c, "output"), out);
  auto& os = *s.os;
  if (text(c, "format") == "json") {
    os << json{{"command", "evolve"}, {"config", c}, {"frames", rows}}.dump(2) << "\n";
  } else {
    write_header(os, "evolve", c);
    os << "t,l2_norm,linf_norm,re_origin,im_origin,datum_deviation,frame_file\n";
    for (const auto& r : rows)
      os << fmt(r["t"]) << "," << fmt(r["l2_norm"]) << "," << fmt(r["linf_norm"]) << "," << fmt(r["re_origin"])
         << "," << fmt(r["im_origin"]) << "," << fmt(r["datum_deviation"]) << ","
         << r["frame_file"].get<std::string>() << "\n";
  }
  echo(out, "evolve", c, s);
  if (c["plot"].get<bool>()) {
    if (s.path == "-" || text(c, "format") != "csv") throw ConfigError("--plot needs a CSV output file");
    write_plot(s.path, "plot '" + s.path + "' using 1:2 with linespoints\n", "evolve", c);
  }
  return kOk;
}

// sweep -------------------------------------------------------------------

std::optional<double> parse_expect(const json& c) {
  if (c["expect"].is_null()) return std::nullopt;
  const std::string e = text(c, "expect");
  const std::string prefix = "slope=";
  if (e.rfind(prefix, 0) != 0) throw ConfigError("--expect must look like slope=<number>");
  return parse_number("expect", std::string_view(e).substr(prefix.size()));
}

SweepConfig sweep_config(json& c) {
  SweepConfig cfg;
  cfg.family = text(c, "family") == "g_lambda" ? Family::maximal_g_lambda : Family::smoothing_f_lambda;
  cfg.alpha = num(c, "alpha");
  cfg.d = checked_int(c, "d", 1, 3);
  cfg.p = num(c, "p");
  cfg.evolution = text(c, "evolution") == "airy" ? Evolution::airy : Evolution::fractional;
  if (c["norm"].is_null())
    c["norm"] = cfg.family == Family::maximal_g_lambda ? "maximal" : "mixed_spacetime";
  cfg.norm = text(c, "norm") == "maximal" ? SweepNorm::maximal : SweepNorm::mixed_spacetime;
  if (c["lambdas"].is_null())
    c["lambdas"] = cfg.family == Family::maximal_g_lambda ? json::array({16.0, 32.0, 64.0, 128.0})
                                                          : json::array({16.0, 32.0, 64.0, 128.0, 256.0});
  cfg.lambdas = numbers(c, "lambdas");

  if (text(c, "check") == "auto")
    c["check"] = cfg.family == Family::maximal_g_lambda ? "maximal"
                 : cfg.evolution == Evolution::airy     ? "airy"
                                                        : "sharpness";
  const std::string check = text(c, "check");
  if (c["beta"].is_null()) {
    const ExponentQuery q{cfg.alpha, cfg.d, cfg.p};
    double b = 0;
    if (check == "sharpness") b = smoothing_exponent(q);
    if (check == "maximal") b = maximal_necessary_exponent(q);
    if (check == "airy") b = airy_exponent(cfg.p);
    c["beta"] = b;
  }
  cfg.beta = num(c, "beta");
  cfg.t_policy.uniform_count = checked_int(c, "uniform_count", 1, 1 << 20);
  cfg.t_policy.window_count = checked_int(c, "window_count", 1, 1 << 20);
  cfg.t_policy.window_scale = num(c, "window_scale");
  cfg.t_policy.focusing_window = c["focusing_window"].get<bool>();
  cfg.epsilon = num(c, "epsilon");
  cfg.sobolev_denominator = c["sobolev_denominator"].get<bool>();
  const std::string engine = text(c, "engine");
  cfg.engine = engine == "grid" ? Engine::grid : engine == "stream" ? Engine::stream : Engine::automatic;
  cfg.max_grid_points = integer(c, "max_grid_points");
  if (!c["memory_cap_mb"].is_null()) cfg.memory_cap_mb = num(c, "memory_cap_mb");
  if (!c["workers"].is_null()) cfg.workers = static_cast<unsigned>(checked_int(c, "workers", 1, 4096));
  if (!(num(c, "tolerance") > 0)) throw ConfigError("--tolerance must be positive");
  cfg.validate();
  return cfg;
}

json verdict_json(const std::string& check, const Verdict& v) {
  json checks = json::array();
  for (const auto& k : v.checks)
    checks.push_back({{"label", k.label}, {"beta", k.beta}, {"slope", k.slope}, {"target", k.target}, {"pass", k.pass}});
  return {{"check", check},       {"pass", v.pass},
          {"slope", v.slope},     {"expected", v.expected},
          {"tolerance", v.tolerance}, {"intercept", v.fit.intercept},
          {"max_residual", v.fit.max_residual}, {"checks", checks}};
}

int cmd_sweep(json c, std::ostream& out) {
  const SweepConfig cfg = sweep_config(c);
  const double tol = num(c, "tolerance");
  const auto expect = parse_expect(c);
  const std::string check = text(c, "check");

  Verdict v;
  if (expect || check == "none") {
    v.records = run_sweep(cfg);
    v.fit = fit_loglog(v.records);
    v.slope = v.fit.slope;
    v.tolerance = tol;
    if (expect) {
      v.expected = *expect;
      v.pass = std::abs(v.slope - *expect) <= tol;
      v.checks.push_back({"slope = expected", cfg.beta, v.slope, *expect, v.pass});
    } else {
      v.expected = v.slope;
      v.pass = true;
    }
  } else if (check == "sharpness") {
    v = verify_sharpness(cfg, tol);
  } else if (check == "airy") {
    v = verify_airy(cfg, tol);
  } else {
    v = verify_maximal_necessary(cfg, tol);
  }
  const std::string label = expect ? "expect" : check;

  Sink s;
  open_sink(s, text(c, "output"), out);
  auto& os = *s.os;
  if (text(c, "format") == "json") {
    json recs = json::array();
    for (const auto& r : v.records)
      recs.push_back({{"lambda", r.lambda},
                      {"N", r.N},
                      {"L", r.L},
                      {"t_samples", r.t_samples},
                      {"numerator", r.numerator},
                      {"denominator", r.denominator},
                      {"ratio", r.ratio},
                      {"log_lambda", std::log(r.lambda)},
                      {"log_ratio", std::log(r.ratio)}});
    os << json{{"command", "sweep"}, {"config", c}, {"records", recs}, {"verdict", verdict_json(label, v)}}.dump(2)
       << "\n";
  } else {
    write_header(os, "sweep", c);
    os << "lambda,N,L,t_samples,numerator,denominator,ratio,log_lambda,log_ratio\n";
    for (const auto& r : v.records)
      os << fmt(r.lambda) << "," << r.N << "," << fmt(r.L) << "," << r.t_samples << "," << fmt(r.numerator) << ","
         << fmt(r.denominator) << "," << fmt(r.ratio) << "," << fmt(std::log(r.lambda)) << ","
         << fmt(std::log(r.ratio)) << "\n";
    os << "# verdict = " << (v.pass ? "PASS" : "FAIL") << "\n"
       << "# check = " << label << "\n"
       << "# slope = " << fmt(v.slope) << "\n"
       << "# expected = " << fmt(v.expected) << "\n"
       << "# tolerance = " << fmt(v.tolerance) << "\n"
       << "# intercept = " << fmt(v.fit.intercept) << "\n"
       << "# max_residual = " << fmt(v.fit.max_residual) << "\n";
    for (size_t i = 0; i < v.checks.size(); ++i) {
      const auto& k = v.checks[i];
      os << "# check." << i << " = " << k.label << " | beta=" << fmt(k.beta) << " slope=" << fmt(k.slope)
         << " target=" << fmt(k.target) << " pass=" << (k.pass ? "true" : "false") << "\n";
    }
  }
  echo(out, "sweep", c, s);
  if (s.path != "-") out << "# verdict = " << (v.pass ? "PASS" : "FAIL") << " slope = " << fmt(v.slope) << "\n";
  if (c["plot"].get<bool>()) {
    if (s.path == "-" || text(c, "format") != "csv") throw ConfigError("--plot needs a CSV output file");
    std::ostringstream gp;
    gp << "set logscale xy\nset xlabel 'lambda'\nset ylabel 'ratio'\n"
       << "fit_line(x) = exp(" << fmt(v.fit.intercept) << ") * x**(" << fmt(v.slope) << ")\n"
       << "plot '" << s.path << "' using 1:7 with linespoints, fit_line(x) title 'fit'\n";
    write_plot(s.path, gp.str(), "sweep", c);
  }
  return v.pass ? kOk : kVerdictFail;
}

// diagnostics -------------------------------------------------------------

int cmd_diagnostics(json c, std::ostream& out) {
  const auto names = c.at("names").get<std::vector<std::string>>();
  if (names.empty()) throw ConfigError("no diagnostics selected");
  const double alpha = num(c, "alpha");
  std::vector<DiagnosticRow> rows;
  for (const auto& n : names) {
    if (n == "kernel") rows.push_back(diagnose_kernel(alpha, checked_int(c, "k", 0, 30), num(c, "t")));
    if (n == "bilinear")
      rows.push_back(diagnose_bilinear(static_cast<std::uint64_t>(integer(c, "seed")), num(c, "bilinear_lambda")));
    if (n == "restriction") {
      const auto ls = numbers(c, "lambdas");
      if (ls.size() < 2) throw ConfigError("--lambdas needs at least two values");
      rows.push_back(diagnose_restriction(ls, num(c, "p")));
    }
    if (n == "envelope") rows.push_back(diagnose_envelope(alpha, num(c, "lambda")));
    if (n == "focusing") rows.push_back(diagnose_focusing(alpha, num(c, "lambda")));
    if (n == "ridge") rows.push_back(diagnose_ridge(alpha, num(c, "lambda"), num(c, "epsilon")));
  }
  bool all = true;
  for (const auto& r : rows) all = all && r.pass;

  Sink s;
  open_sink(s, text(c, "output"), out);
  auto& os = *s.os;
  if (text(c, "format") == "json") {
    json arr = json::array();
    for (const auto& r : rows)
      arr.push_back({{"name", r.name},
                     {"value", r.value},
                     {"relation", to_string(r.relation)},
                     {"threshold", r.threshold},
                     {"pass", r.pass},
                     {"detail", r.detail}});
    os << json{{"command", "diagnostics"}, {"config", c}, {"rows", arr}, {"pass", all}}.dump(2) << "\n";
  } else {
    write_header(os, "diagnostics", c);
    os << "name,value,relation,threshold,pass,detail\n";
    for (const auto& r : rows)
      os << r.name << "," << fmt(r.value) << "," << to_string(r.relation) << "," << fmt(r.threshold) << ","
         << (r.pass ? "true" : "false") << "," << r.detail << "\n";
    os << "# verdict = " << (all ? "PASS" : "FAIL") << "\n";
  }
  echo(out, "diagnostics", c, s);
  return all ? kOk : kVerdictFail;
}

// exponents ---------------------------------------------------------------

int cmd_exponents(json c, std::ostream& out) {
  const ExponentQuery q{num(c, "alpha"), checked_int(c, "d", 1, 3), num(c, "p")};
  DispersionParams{q.alpha, q.d}.validate();
  if (!(q.p >= 2) || !std::isfinite(q.p)) throw ConfigError("--p must be finite and >= 2");
  const std::vector<std::pair<std::string, double>> rows{
      {"smoothing_exponent", smoothing_exponent(q)},
      {"maximal_exponent", maximal_exponent(q)},
      {"maximal_necessary_exponent", maximal_necessary_exponent(q)},
      {"admissibility_threshold", admissibility_threshold(q.d)},
      {"admissible", is_admissible(q) ? 1.0 : 0.0},
      {"airy_exponent", airy_exponent(q.p)},
  };
  Sink s;
  open_sink(s, text(c, "output"), out);
  auto& os = *s.os;
  if (text(c, "format") == "json") {
    json obj = json::object();
    for (const auto& [k, v] : rows) obj[k] = v;
    os << json{{"command", "exponents"}, {"config", c}, {"exponents", obj}}.dump(2) << "\n";
  } else {
    write_header(os, "exponents", c);
    os << "quantity,value\n";
    for (const auto& [k, v] : rows) os << k << "," << fmt(v) << "\n";
  }
  echo(out, "exponents", c, s);
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"dlab: pseudospectral lab for the fractional Schroedinger propagator", "dlab"};
  app.require_subcommand(1);
  std::vector<Binding> bindings;
  bindings.reserve(4);
  auto add = [&](const char* name, const char* help, std::vector<Param> ps) {
    Binding b;
    b.app = app.add_subcommand(name, help);
    b.params = std::move(ps);
    bindings.push_back(std::move(b));
    bind(bindings.back());
  };
  add("evolve", "evolve a builtin datum and write per-frame norms", evolve_params());
  add("sweep", "run a lambda sweep and fit the log-log slope", sweep_params());
  add("diagnostics", "run named diagnostics with pass/fail thresholds", diagnostics_params());
  add("exponents", "print the exponent formulas for alpha, d, p", exponents_params());

  Binding* active = nullptr;
  try {
    app.parse(argc, argv);
    for (auto& b : bindings)
      if (b.app->parsed()) active = &b;
    const json c = resolve(*active);
    const std::string name = active->app->get_name();
    if (name == "evolve") return cmd_evolve(c, out);
    if (name == "sweep") return cmd_sweep(c, out);
    if (name == "diagnostics") return cmd_diagnostics(c, out);
    return cmd_exponents(c, out);
  } catch (const CLI::CallForHelp&) {
    for (auto& b : bindings)
      if (b.app->parsed()) active = &b;
    out << (active ? active->app->help() : app.help());
    return kOk;
  } catch (const CLI::ParseError& e) {
    for (auto& b : bindings)
      if (b.app->parsed()) active = &b;
    err << "error: " << e.what() << "\n" << (active ? active->app->help() : app.help());
    return kConfigError;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << (active ? active->app->help() : app.help());
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const AliasingError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const MemoryCapError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  }
}

}  // namespace dlab::cli
