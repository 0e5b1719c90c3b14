#include "dlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>
#include <sstream>

#include "dlab/cutoffs.hpp"
#include "dlab/parallel.hpp"
#include "dlab/transform.hpp"

namespace dlab {

const char* to_string(SweepNorm n) { return n == SweepNorm::maximal ? "maximal" : "mixed_spacetime"; }
const char* to_string(Evolution e) { return e == Evolution::airy ? "airy" : "fractional"; }

namespace {

constexpr double kStreamBytes = 64.0 * double(Index(1) << 22);

Index pow2_at_least(double n) {
  Index N = 8;
  while (double(N) < n) N <<= 1;
  return N;
}

bool is_power_of_two(double x) {
  int e = 0;
  return x > 0 && std::frexp(x, &e) == 0.5;
}

void assert_exponent_identity(const SweepConfig& cfg) {
  const ExponentQuery q{cfg.alpha, cfg.d, cfg.p};
  const double gap = smoothing_exponent(q) + cfg.alpha / cfg.p - maximal_exponent(q);
  if (std::abs(gap) > 1e-12) {
    std::ostringstream os;
    os << "smoothing_exponent + alpha/p differs from maximal_exponent by " << gap;
    throw NumericalError(os.str());
  }
}

enum class Route { grid, stream };

struct FramePlan {
  double t = 0;
  Route route = Route::grid;
  GridSpec grid;  // grid route only
};

struct LambdaPlan {
  double lambda = 0;
  std::vector<double> times;
  std::vector<FramePlan> frames;  // mixed norm
  Route route = Route::grid;      // maximal norm
  GridSpec grid;                  // maximal norm, grid route
};

double eff_alpha(const SweepConfig& cfg) { return cfg.evolution == Evolution::airy ? 3.0 : cfg.alpha; }

double g_width(const SweepConfig& cfg, double lambda) {
  return cfg.epsilon * std::pow(lambda, (2 - cfg.alpha) / 2);
}

// Picks the route for a grid of the given size, or returns false when
// nothing fits.
bool choose_route(const SweepConfig& cfg, Index points, Route& route) {
  const double cap = cfg.resolved_memory_cap_mb() * 1024 * 1024;
  const bool grid_ok = 64.0 * double(points) <= cap;
  const bool stream_ok = cfg.d == 1 && kStreamBytes <= cap;
  switch (cfg.engine) {
    case Engine::grid:
      route = Route::grid;
      return grid_ok;
    case Engine::stream:
      route = Route::stream;
      return stream_ok;
    case Engine::automatic:
      break;
  }
  if (grid_ok && points <= cfg.max_grid_points) {
    route = Route::grid;
    return true;
  }
  route = Route::stream;
  return stream_ok;
}

GridSpec smoothing_frame_grid(const SweepConfig& cfg, double lambda, double t) {
  const double a = eff_alpha(cfg);
  const double L = 1.25 * std::abs(1 - t) * kernel_constant(a) * std::pow(lambda, a - 1) + 4096 / lambda;
  return GridSpec(cfg.d, pow2_at_least(2 * L * 4 * lambda / std::numbers::pi), L);
}

GridSpec maximal_box(const SweepConfig& cfg, double lambda) {
  const double w = g_width(cfg, lambda);
  const double L = cfg.alpha * std::pow(lambda, cfg.alpha - 1) + 240 / w;
  return GridSpec(cfg.d, pow2_at_least(2 * L * 2 * (lambda + 2 * w) / std::numbers::pi), L);
}

Index total_points(const GridSpec& g) {
  Index s = 1;
  for (int a = 0; a < g.d; ++a) s *= g.N;
  return s;
}

[[noreturn]] void cap_error(const SweepConfig& cfg, double lambda, Index points) {
  std::ostringstream os;
  os << "lambda=" << lambda << " needs a frame of " << points << " points (~"
     << 64.0 * double(points) / (1024 * 1024) << " MB) which exceeds the memory cap of "
     << cfg.resolved_memory_cap_mb() << " MB"
     << (cfg.d == 1 ? "" : "; the streaming route is one-dimensional");
  throw MemoryCapError(os.str(), lambda);
}

LambdaPlan plan_lambda(const SweepConfig& cfg, double lambda) {
  LambdaPlan lp;
  lp.lambda = lambda;
  lp.times = sweep_times(cfg, lambda);
  if (cfg.norm == SweepNorm::mixed_spacetime) {
    for (double t : lp.times) {
      FramePlan fp{t, Route::grid, smoothing_frame_grid(cfg, lambda, t)};
      if (!choose_route(cfg, total_points(fp.grid), fp.route)) cap_error(cfg, lambda, total_points(fp.grid));
      lp.frames.push_back(fp);
    }
  } else {
    lp.grid = maximal_box(cfg, lambda);
    if (!choose_route(cfg, total_points(lp.grid), lp.route)) cap_error(cfg, lambda, total_points(lp.grid));
  }
  return lp;
}

std::vector<double> rectangle_weights(const std::vector<double>& ts, double t_end) {
  std::vector<double> w(ts.size());
  for (size_t j = 0; j < ts.size(); ++j) w[j] = (j + 1 < ts.size() ? ts[j + 1] : t_end) - ts[j];
  return w;
}

const CutoffSpec& cutoffs() {
  static const CutoffSpec c;
  return c;
}

Field smoothing_datum(const SweepConfig& cfg, double lambda, const GridSpec& g) {
  const double a = eff_alpha(cfg);
  const bool one_sided = cfg.evolution == Evolution::airy;
  return Field::sample(g, Representation::frequency, [&](const Coord& xi) {
    if (one_sided && xi[0] <= 0) return cplx(0);
    const double r = xi.norm();
    const double th = cutoffs().theta(r / lambda);
    return th == 0 ? cplx(0) : th * std::polar(1.0, -radial_power(r, a));
  });
}

Field evolve_frame(const SweepConfig& cfg, const Field& datum, double t) {
  if (cfg.evolution == Evolution::airy) return to_physical(airy_evolve(datum, t));
  return to_physical(evolve(datum, t, DispersionParams{cfg.alpha, cfg.d}));
}

SweepRecord sweep_smoothing(const SweepConfig& cfg, const LambdaPlan& lp) {
  const double lambda = lp.lambda;
  const double a = eff_alpha(cfg);
  const bool one_sided = cfg.evolution == Evolution::airy;
  SweepRecord rec;
  rec.lambda = lambda;
  rec.t_samples = static_cast<Index>(lp.times.size());

  // On xi >= lambda/2 the Airy projection P+ is exactly 1, so the streamed
  // one-sided profile is the Airy solution.
  std::vector<double> sums(lp.frames.size());
  double datum_lp = -1;
  for (size_t j = 0; j < lp.frames.size(); ++j) {
    const auto& fp = lp.frames[j];
    if (fp.route == Route::grid) {
      const Field u = evolve_frame(cfg, smoothing_datum(cfg, lambda, fp.grid), fp.t);
      sums[j] = std::pow(lp_norm(u, cfg.p), cfg.p);
      if (fp.grid.L > rec.L) rec.N = total_points(fp.grid), rec.L = fp.grid.L;
    } else {
      SummarySink sink(cfg.p);
      const auto st = synthesize(smoothing_profile(lambda, a, fp.t, 0, one_sided), sink);
      sums[j] = sink.lp_sum;
      const double half = 0.5 * double(st.samples) * st.plan.dx;
      if (half > rec.L) rec.N = st.samples, rec.L = half;
    }
    if (fp.t == 0) datum_lp = std::pow(sums[j], 1 / cfg.p);
  }
  const auto w = rectangle_weights(lp.times, 1.0);
  double acc = 0;
  for (size_t j = 0; j < sums.size(); ++j) acc += w[j] * sums[j];
  rec.numerator = std::pow(acc, 1 / cfg.p);

  if (cfg.sobolev_denominator) {
    const auto& f0 = lp.frames.front();
    if (f0.route == Route::grid) {
      rec.datum_norm = sobolev_norm(to_physical(smoothing_datum(cfg, lambda, f0.grid)), cfg.p, cfg.beta);
    } else {
      SummarySink sink(cfg.p);
      synthesize(smoothing_profile(lambda, a, 0.0, cfg.beta, one_sided), sink);
      rec.datum_norm = std::pow(sink.lp_sum, 1 / cfg.p);
    }
    rec.denominator = rec.datum_norm;
  } else {
    if (datum_lp < 0) throw ContractError("the time grid must contain t = 0");
    rec.datum_norm = datum_lp;
    rec.denominator = std::pow(lambda, cfg.beta) * datum_lp;
  }
  return rec;
}

SpectralProfile weighted(SpectralProfile prof, double beta) {
  if (beta == 0) return prof;
  auto base = prof.amplitude;
  prof.amplitude = [base, beta](double xi) { return base(xi) * std::pow(1 + xi * xi, beta / 2); };
  return prof;
}

SweepRecord sweep_maximal(const SweepConfig& cfg, const LambdaPlan& lp) {
  const double lambda = lp.lambda;
  SweepRecord rec;
  rec.lambda = lambda;
  rec.t_samples = static_cast<Index>(lp.times.size());

  if (lp.route == Route::grid) {
    const auto& g = lp.grid;
    const double scale = std::pow(lambda, (cfg.alpha - 2) / 2);
    const Field datum = Field::sample(g, Representation::frequency, [&](const Coord& xi) {
      Coord h = xi;
      h[0] += lambda;
      return cplx(chi_epsilon(scale * h.norm(), cfg.epsilon));
    });
    std::vector<double> mx(static_cast<size_t>(total_points(g)), 0.0);
    for (double t : lp.times) {
      const Field u = evolve_frame(cfg, datum, t);
      for (Index i = 0; i < u.size(); ++i) mx[size_t(i)] = std::max(mx[size_t(i)], std::abs(u[i]));
    }
    double s = 0;
    for (double v : mx) s += std::pow(v, cfg.p);
    rec.numerator = std::pow(s * g.cell_volume(), 1 / cfg.p);
    const Field f = to_physical(datum);
    rec.datum_norm = cfg.sobolev_denominator ? sobolev_norm(f, cfg.p, cfg.beta) : lp_norm(f, cfg.p);
    rec.N = total_points(g);
    rec.L = g.L;
  } else {
    SynthesisOptions opt;
    opt.dx = std::numbers::pi / (16 * g_width(cfg, lambda));
    RunningMaxSink mx;
    for (double t : lp.times) synthesize(maximal_profile(lambda, cfg.alpha, t, cfg.epsilon), mx, opt);
    rec.numerator = std::pow(mx.lp_sum(cfg.p), 1 / cfg.p);
    SummarySink sink(cfg.p);
    const double b = cfg.sobolev_denominator ? cfg.beta : 0.0;
    synthesize(weighted(maximal_profile(lambda, cfg.alpha, 0.0, cfg.epsilon), b), sink, opt);
    rec.datum_norm = std::pow(sink.lp_sum, 1 / cfg.p);
    rec.N = mx.span();
    rec.L = 0.5 * double(mx.span()) * opt.dx;
  }
  rec.denominator = cfg.sobolev_denominator ? rec.datum_norm : std::pow(lambda, cfg.beta) * rec.datum_norm;
  return rec;
}

}  // namespace

double SweepConfig::resolved_memory_cap_mb() const {
  if (memory_cap_mb > 0) return memory_cap_mb;
  if (const char* env = std::getenv("DLAB_MEMORY_CAP_MB")) {
    const double v = std::strtod(env, nullptr);
    if (v > 0) return v;
  }
  return 2048;
}

void SweepConfig::validate() const {
  DispersionParams{eff_alpha(*this), d}.validate();
  if (lambdas.empty()) throw ContractError("lambdas must be nonempty");
  for (size_t i = 0; i < lambdas.size(); ++i) {
    if (!is_power_of_two(lambdas[i]) || lambdas[i] < 8)
      throw ContractError("lambdas must be powers of two >= 8");
    if (i > 0 && !(lambdas[i] > lambdas[i - 1])) throw ContractError("lambdas must be increasing");
  }
  if (!(p >= 1) || !std::isfinite(p)) throw ContractError("p must be finite and >= 1");
  if (!std::isfinite(beta)) throw ContractError("beta must be finite");
  if (family == Family::smoothing_f_lambda && norm != SweepNorm::mixed_spacetime)
    throw ContractError("f_lambda sweeps use the mixed space-time norm");
  if (family == Family::maximal_g_lambda && norm != SweepNorm::maximal)
    throw ContractError("g_lambda sweeps use the maximal norm");
  if (evolution == Evolution::airy && (family != Family::smoothing_f_lambda || d != 1 || alpha != 3))
    throw ContractError("airy sweeps need f_lambda, d = 1 and alpha = 3");
  if (family == Family::maximal_g_lambda && !(epsilon > 0 && epsilon < 1))
    throw ContractError("epsilon must lie in (0, 1)");
  if (t_policy.uniform_count < 1 || t_policy.window_count < 1 || !(t_policy.window_scale > 0))
    throw ContractError("time policy counts and window scale must be positive");
  if (max_grid_points < 8) throw ContractError("max_grid_points must be at least 8");
}

std::vector<double> sweep_times(const SweepConfig& cfg, double lambda) {
  std::vector<double> ts;
  if (cfg.norm == SweepNorm::maximal) {
    // Uniform, fine enough that the packet moves at most 1/16 of its width
    // between frames.
    const double travel = cfg.alpha * std::pow(lambda, cfg.alpha - 1);
    const double width = std::numbers::pi / g_width(cfg, lambda);
    const auto K = std::max<long long>(cfg.t_policy.uniform_count,
                                       static_cast<long long>(std::ceil(16 * travel / width)));
    for (long long k = 0; k <= K; ++k) ts.push_back(double(k) / double(K));
    return ts;
  }
  const int U = cfg.t_policy.uniform_count;
  for (int j = 0; j < U; ++j) ts.push_back(double(j) / U);
  if (cfg.t_policy.focusing_window) {
    const int W = cfg.t_policy.window_count;
    const double h = std::min(1.0, cfg.t_policy.window_scale * std::pow(lambda, -eff_alpha(cfg)));
    for (int i = 0; i < W; ++i) ts.push_back(1 - h * (1 - double(i) / W));
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end(), [](double a, double b) { return std::abs(a - b) < 1e-15; }),
           ts.end());
  return ts;
}

std::vector<SweepRecord> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  if (cfg.norm == SweepNorm::mixed_spacetime && cfg.family == Family::smoothing_f_lambda)
    assert_exponent_identity(cfg);
  std::vector<LambdaPlan> plans;
  for (double lambda : cfg.lambdas) plans.push_back(plan_lambda(cfg, lambda));

  std::vector<SweepRecord> out(plans.size());
  parallel_for(
      plans.size(),
      [&](size_t i) {
        out[i] = cfg.norm == SweepNorm::maximal ? sweep_maximal(cfg, plans[i]) : sweep_smoothing(cfg, plans[i]);
        out[i].ratio = out[i].numerator / out[i].denominator;
        const auto& r = out[i];
        if (!(r.numerator > 0 && r.denominator > 0 && std::isfinite(r.ratio) && r.ratio > 0)) {
          std::ostringstream os;
          os << "sweep at lambda=" << r.lambda << " produced numerator=" << r.numerator
             << " denominator=" << r.denominator;
          throw NumericalError(os.str());
        }
      },
      cfg.workers > 0 ? cfg.workers : max_workers());
  return out;
}

std::vector<SweepRecord> reweight(const std::vector<SweepRecord>& records, double beta_from,
                                  double beta_to) {
  std::vector<SweepRecord> out = records;
  for (auto& r : out) {
    r.denominator *= std::pow(r.lambda, beta_to - beta_from);
    r.ratio = r.numerator / r.denominator;
  }
  return out;
}

FitResult fit_loglog(const std::vector<SweepRecord>& records) {
  if (records.size() < 2) throw ContractError("fit_loglog needs at least 2 records");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(records.size());
  for (const auto& r : records) {
    if (!(r.ratio > 0) || !(r.lambda > 0)) throw ContractError("fit_loglog needs positive ratios and lambdas");
    const double x = std::log(r.lambda), y = std::log(r.ratio);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double det = n * sxx - sx * sx;
  if (!(det > 0)) throw ContractError("fit_loglog needs at least 2 distinct lambdas");
  FitResult f;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / n;
  for (const auto& r : records)
    f.max_residual =
        std::max(f.max_residual, std::abs(std::log(r.ratio) - f.slope * std::log(r.lambda) - f.intercept));
  return f;
}

namespace {

void require_sweep_size(const SweepConfig& cfg) {
  if (cfg.lambdas.size() < 4) throw ContractError("a verdict needs at least 4 lambda values");
}

// Records at each beta: reweighted when the denominator is lambda^beta
// ||f||_p, recomputed for the Sobolev denominator.
std::vector<SweepRecord> records_at(const SweepConfig& cfg, const std::vector<SweepRecord>& base,
                                    double beta) {
  if (beta == cfg.beta) return base;
  if (!cfg.sobolev_denominator) return reweight(base, cfg.beta, beta);
  SweepConfig c = cfg;
  c.beta = beta;
  return run_sweep(c);
}

Verdict exponent_verdict(const SweepConfig& cfg, double exponent, double tolerance, const char* label) {
  auto records = run_sweep(cfg);
  Verdict v;
  v.fit = fit_loglog(records);
  v.slope = v.fit.slope;
  v.expected = exponent - cfg.beta;
  v.tolerance = tolerance;
  v.pass = std::abs(v.slope - v.expected) <= tolerance;
  v.checks.push_back({label, cfg.beta, v.slope, v.expected, v.pass});
  v.records = std::move(records);
  return v;
}

}  // namespace

Verdict verify_sharpness(const SweepConfig& cfg, double tolerance) {
  require_sweep_size(cfg);
  if (cfg.family != Family::smoothing_f_lambda || cfg.norm != SweepNorm::mixed_spacetime ||
      cfg.evolution != Evolution::fractional)
    throw ContractError("verify_sharpness needs an f_lambda mixed space-time sweep");
  if (!cfg.t_policy.focusing_window) throw ContractError("verify_sharpness needs the focusing window");
  const ExponentQuery q{cfg.alpha, cfg.d, cfg.p};
  if (!is_admissible(q)) throw ContractError("p must exceed admissibility_threshold(d)");
  assert_exponent_identity(cfg);
  return exponent_verdict(cfg, smoothing_exponent(q), tolerance, "slope = smoothing_exponent - beta");
}

Verdict verify_airy(const SweepConfig& cfg, double tolerance) {
  require_sweep_size(cfg);
  if (cfg.p < 4) throw ContractError("verify_airy needs p >= 4");
  SweepConfig c = cfg;
  c.evolution = Evolution::airy;
  c.validate();
  return exponent_verdict(c, airy_exponent(c.p), tolerance, "slope = airy_exponent - beta");
}

Verdict verify_maximal_necessary(const SweepConfig& cfg, double tolerance) {
  require_sweep_size(cfg);
  if (cfg.family != Family::maximal_g_lambda || cfg.norm != SweepNorm::maximal)
    throw ContractError("verify_maximal_necessary needs a g_lambda maximal sweep");
  assert_exponent_identity(cfg);
  const double boundary = maximal_necessary_exponent({cfg.alpha, cfg.d, cfg.p});
  auto base = run_sweep(cfg);

  Verdict v;
  v.tolerance = tolerance;
  v.fit = fit_loglog(base);
  v.slope = v.fit.slope;
  v.expected = boundary - cfg.beta;
  const double s0 = fit_loglog(records_at(cfg, base, boundary)).slope;
  const double s1 = fit_loglog(records_at(cfg, base, boundary - 0.2)).slope;
  v.checks.push_back({"slope >= -tol at beta = alpha/(2p)", boundary, s0, -tolerance, s0 >= -tolerance});
  v.checks.push_back({"slope > tol at beta = alpha/(2p) - 0.2", boundary - 0.2, s1, tolerance, s1 > tolerance});
  v.pass = v.checks[0].pass && v.checks[1].pass;
  v.records = std::move(base);
  return v;
}

SpotCheck upper_bound_spot_check(double alpha, double p, double beta, int trials, std::uint64_t seed) {
  if (trials < 1) throw ContractError("trials must be positive");
  const DispersionParams params{alpha, 1};
  params.validate();
  // Periodic box: dispersed mass wraps around, so this probes the torus
  // analogue of the estimate.
  const GridSpec g(1, 512, 32);
  const double band = g.nyquist() / 4;
  std::vector<double> ts;
  for (int j = 0; j < 64; ++j) ts.push_back(j / 64.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  SpotCheck out;
  out.trials = trials;
  for (int k = 0; k < trials; ++k) {
    Samples s(g.size());
    for (Index i = 0; i < g.size(); ++i) {
      const double xi = std::abs(g.xi(i));
      const double taper = cutoffs().chi0(2 * xi / band);
      const double re = normal(rng), im = normal(rng);
      s[i] = taper * cplx(re, im);
    }
    const Field f = to_physical(Field(g, Representation::frequency, std::move(s)));
    const double num = mixed_spacetime_norm(evolve_trajectory(f, ts, params, std::make_pair(0.0, 1.0)), p);
    const double r = num / sobolev_norm(f, p, beta);
    out.max_ratio = std::max(out.max_ratio, r);
    out.mean_ratio += r / trials;
  }
  return out;
}

}  // namespace dlab
