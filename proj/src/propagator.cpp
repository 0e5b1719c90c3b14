#include "dlab/propagator.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "dlab/cutoffs.hpp"
#include "dlab/parallel.hpp"
#include "dlab/transform.hpp"

namespace dlab {

void DispersionParams::validate() const {
  if (!(alpha > 0) || !std::isfinite(alpha)) throw ContractError("alpha must be positive");
  if (alpha == 1) throw ContractError("alpha = 1 (wave propagation) is not supported");
  if (d < 1 || d > 3) throw ContractError("dimension must be 1, 2 or 3");
}

double radial_power(double r, double alpha) { return r == 0 ? 0.0 : std::pow(r, alpha); }

namespace {

void check_dimension(const Field& f, const DispersionParams& p) {
  if (f.grid().d != p.d)
    throw ContractError("field dimension " + std::to_string(f.grid().d) +
                        " does not match params.d = " + std::to_string(p.d));
}

// Energy above Nyquist/2 on some axis, relative to the total, from frequency samples.
void check_resolved(const Field& F) {
  const auto& g = F.grid();
  const double cut = 0.5 * g.nyquist();
  double total = 0, tail = 0;
  for (Index i = 0; i < F.size(); ++i) {
    const double e = std::norm(F[i]);
    total += e;
    if (e > 0 && g.frequency(i).cwiseAbs().maxCoeff() > cut) tail += e;
  }
  if (total > 0 && tail > 1e-20 * total) {
    std::ostringstream os;
    os << "field on grid " << g.describe() << " has energy fraction " << tail / total
       << " above Nyquist/2 = " << cut << "; refine N";
    throw AliasingError(os.str());
  }
}

}  // namespace

Field evolve(const Field& f, double t, const DispersionParams& params) {
  params.validate();
  check_dimension(f, params);
  const Field F = to_frequency(f);
  check_resolved(F);
  const auto& g = F.grid();
  Samples s = F.samples();
  for (Index i = 0; i < s.size(); ++i) {
    if (s[i] == cplx(0)) continue;
    s[i] *= std::polar(1.0, t * radial_power(g.frequency(i).norm(), params.alpha));
  }
  return as_representation(Field(g, Representation::frequency, std::move(s)), f.representation());
}

std::vector<double> Trajectory::weights() const {
  std::vector<double> w(t_samples.size());
  for (size_t j = 0; j < t_samples.size(); ++j)
    w[j] = (j + 1 < t_samples.size() ? t_samples[j + 1] : t_end) - t_samples[j];
  return w;
}

std::pair<double, double> default_interval(const std::vector<double>& ts) {
  if (ts.empty()) throw ContractError("t_samples must be nonempty");
  if (ts.size() == 1) return {ts[0], ts[0] + 1};
  const double last = ts.back(), prev = ts[ts.size() - 2];
  return {ts.front(), last + (last - prev)};
}

Trajectory evolve_trajectory(const Field& f, const std::vector<double>& t_samples,
                             const DispersionParams& params,
                             std::optional<std::pair<double, double>> interval) {
  if (t_samples.empty()) throw ContractError("t_samples must be nonempty");
  for (size_t j = 1; j < t_samples.size(); ++j)
    if (!(t_samples[j] > t_samples[j - 1])) throw ContractError("t_samples must be increasing");
  const auto [a, b] = interval ? *interval : default_interval(t_samples);
  if (a > t_samples.front() || b <= t_samples.back())
    throw ContractError("interval must contain t_samples and extend past the last one");

  params.validate();
  check_dimension(f, params);
  const Field F = to_frequency(f);
  check_resolved(F);

  Trajectory tr;
  tr.grid = f.grid();
  tr.t_samples = t_samples;
  tr.t_begin = a;
  tr.t_end = b;
  std::vector<std::optional<Field>> frames(t_samples.size());
  parallel_for(t_samples.size(), [&](size_t j) { frames[j] = to_physical(evolve(F, t_samples[j], params)); });
  tr.frames.reserve(frames.size());
  for (auto& fr : frames) tr.frames.push_back(std::move(*fr));
  return tr;
}

EllipticPhase make_elliptic_phase(std::function<double(const Coord&)> phase, SymbolFn amplitude,
                                  Coord lo, Coord hi, int probes, std::uint64_t seed) {
  if (lo.size() != hi.size() || lo.size() < 1 || lo.size() > 3)
    throw ContractError("support box corners must share a dimension in 1..3");
  if ((hi - lo).minCoeff() <= 0) throw ContractError("support box must have positive extent");
  const int d = static_cast<int>(lo.size());
  EllipticPhase ep{std::move(phase), std::move(amplitude), lo, hi, 0};

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0, 1);
  const double h = 1e-4 * (hi - lo).maxCoeff();
  double min_eig = std::numeric_limits<double>::infinity();
  int found = 0;
  for (int attempt = 0; attempt < 100 * probes && found < probes; ++attempt) {
    Coord p(d);
    for (int a = 0; a < d; ++a) p[a] = lo[a] + unif(rng) * (hi[a] - lo[a]);
    if (ep.amplitude(p) == cplx(0)) continue;
    ++found;
    Eigen::MatrixXd H(d, d);
    const double f0 = ep.phase(p);
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) {
        double v;
        if (a == b) {
          Coord up = p, dn = p;
          up[a] += h;
          dn[a] -= h;
          v = (ep.phase(up) - 2 * f0 + ep.phase(dn)) / (h * h);
        } else {
          Coord pp = p, pm = p, mp = p, mm = p;
          pp[a] += h; pp[b] += h;
          pm[a] += h; pm[b] -= h;
          mp[a] -= h; mp[b] += h;
          mm[a] -= h; mm[b] -= h;
          v = (ep.phase(pp) - ep.phase(pm) - ep.phase(mp) + ep.phase(mm)) / (4 * h * h);
        }
        H(a, b) = H(b, a) = v;
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
  }
  if (found == 0) throw ContractError("amplitude vanishes at every probe point of the support box");
  ep.hessian_probe = min_eig;
  return ep;
}

Field elliptic_evolve(const Field& f, double t, const EllipticPhase& ep) {
  if (!(ep.hessian_probe > 0))
    throw ContractError("phase is not elliptic on the amplitude support (probed Hessian eigenvalue " +
                        std::to_string(ep.hessian_probe) + ")");
  const auto& g = f.grid();
  if (ep.support_lo.size() != g.d) throw ContractError("phase dimension does not match the grid");
  const double nyq = g.nyquist();
  if (ep.support_lo.cwiseAbs().maxCoeff() > nyq || ep.support_hi.cwiseAbs().maxCoeff() > nyq)
    throw AliasingError("amplitude support extends past the grid's Nyquist frequency " + std::to_string(nyq));
  return apply_symbol(f, [&](const Coord& xi) {
    const cplx a = ep.amplitude(xi);
    if (a == cplx(0)) return cplx(0);
    return a * std::polar(1.0, t * ep.phase(xi));
  });
}

double half_line_plus(double xi, double cell) {
  static const CutoffSpec cut;
  return cut.step(xi / cell + 0.5);
}

Field airy_evolve(const Field& f, double t) {
  if (f.grid().d != 1) throw ContractError("airy_evolve requires d = 1");
  const double cell = f.grid().dxi();
  const Field F = to_frequency(f);
  check_resolved(F);
  const Field U = apply_symbol(F, [&](const Coord& xi) {
    const double x = xi[0];
    const double pp = half_line_plus(x, cell);
    const double r3 = std::abs(x) * x * x;
    return pp * std::polar(1.0, t * r3) + (1 - pp) * std::polar(1.0, -t * r3);
  });
  return as_representation(U, f.representation());
}

double kernel_constant(double alpha) {
  if (alpha > 1) return alpha * std::pow(2.0, alpha - 1);
  return 1.0;
}

double kernel_ball_radius(int k, double alpha) {
  return 4 * kernel_constant(alpha) * std::pow(2.0, k * (alpha - 1));
}

namespace {

double kernel_scale(int k, double t, double alpha) { return std::pow(2.0, alpha * k) * t; }

// Largest |y| reached by the stationary points of the rescaled kernel.
double kernel_extent(int k, double t, double alpha) {
  const double s = std::abs(kernel_scale(k, t, alpha));
  return s * alpha * std::max(std::pow(0.5, alpha - 1), std::pow(2.0, alpha - 1));
}

}  // namespace

Field band_kernel(int k, double t, const DispersionParams& params, const GridSpec& grid) {
  params.validate();
  if (k < 1) throw ContractError("band index k must be >= 1");
  if (grid.d != params.d) throw ContractError("grid dimension does not match params.d");
  require_adequate(grid, 2.0, 4.0);
  const CutoffSpec cut;
  const double s = kernel_scale(k, t, params.alpha);
  const Field K = Field::sample(grid, Representation::frequency, [&](const Coord& xi) {
    const double r = xi.norm();
    const double a = cut.chi(r);
    return a == 0 ? cplx(0) : a * std::polar(1.0, s * radial_power(r, params.alpha));
  });
  return dft_inverse(K);
}

GridSpec kernel_grid(int k, double t, const DispersionParams& params) {
  params.validate();
  const double ball = std::pow(2.0, k) * kernel_ball_radius(k, params.alpha);
  const double L = std::max(1.25 * ball, kernel_extent(k, t, params.alpha) + 1200.0);
  const double nyq = 8.0;
  Index N = 8;
  while (std::numbers::pi * double(N) / (2 * L) < nyq) N <<= 1;
  return GridSpec(params.d, N, L);
}

SpectralProfile kernel_profile(int k, double t, double alpha) {
  static const CutoffSpec cut;
  SpectralProfile p;
  p.amplitude = [](double xi) { return cut.chi(std::abs(xi)); };
  p.support = {{-2.0, -0.5}, {0.5, 2.0}};
  p.transition_width = 0.5;
  p.tau = kernel_scale(k, t, alpha);
  p.alpha = alpha;
  return p;
}

KernelReport kernel_localization(int k, double t, const DispersionParams& params,
                                 const KernelOptions& options) {
  params.validate();
  if (!(t >= 0 && t <= 1)) throw ContractError("kernel tail mass needs t in [0,1]");
  if (k < 1) throw ContractError("band index k must be >= 1");
  KernelReport rep;
  rep.ball_radius_y = std::pow(2.0, k) * kernel_ball_radius(k, params.alpha);

  GridSpec g = kernel_grid(k, t, params);
  if (options.grid_points > 0) g = GridSpec(params.d, options.grid_points, g.L);
  Engine engine = options.engine;
  if (engine == Engine::automatic)
    engine = (g.size() <= options.max_grid_points || params.d > 1) ? Engine::grid : Engine::stream;
  if (engine == Engine::stream && params.d != 1)
    throw ContractError("the streaming kernel route is one-dimensional");
  rep.engine_used = engine;

  if (engine == Engine::grid) {
    const Field K = band_kernel(k, t, params, g);
    const double vol = g.cell_volume();
    for (Index i = 0; i < K.size(); ++i) {
      const double m = std::abs(K[i]) * vol;
      rep.total_mass += m;
      if (g.position(i).norm() > rep.ball_radius_y) rep.tail_mass += m;
    }
    rep.points = g.size();
  } else {
    SummarySink sink(0, rep.ball_radius_y);
    const auto stats = synthesize(kernel_profile(k, t, params.alpha), sink);
    rep.total_mass = sink.l1;
    rep.tail_mass = sink.tail_l1 + stats.edge_mass;
    rep.points = stats.samples;
  }
  if (!(rep.total_mass > 0) || !std::isfinite(rep.total_mass))
    throw NumericalError("kernel mass is not positive and finite");
  rep.tail_fraction = rep.tail_mass / rep.total_mass;
  return rep;
}

double kernel_tail_mass(int k, double t, const DispersionParams& params, const KernelOptions& options) {
  return kernel_localization(k, t, params, options).tail_fraction;
}

}  // namespace dlab
