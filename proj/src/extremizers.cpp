#include "dlab/extremizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "dlab/cutoffs.hpp"
#include "dlab/parallel.hpp"
#include "dlab/transform.hpp"

namespace dlab {

namespace {

const CutoffSpec& cutoffs() {
  static const CutoffSpec c;
  return c;
}

Index pow2_at_least(double n) {
  if (!(n <= 0x1p62)) throw ContractError("requested grid size is not representable");
  Index N = 8;
  while (double(N) < n) N <<= 1;
  return N;
}

double g_width(double lambda, double alpha, double epsilon) {
  return epsilon * std::pow(lambda, (2 - alpha) / 2);
}

}  // namespace

const char* to_string(Family f) {
  return f == Family::smoothing_f_lambda ? "f_lambda" : "g_lambda";
}

double chi_epsilon(double r, double epsilon) { return cutoffs().chi0(2 * std::abs(r) / epsilon); }

void ExtremizerSpec::validate() const {
  params.validate();
  grid.validate();
  if (grid.d != params.d) throw ContractError("grid dimension does not match params.d");
  if (!(lambda >= 8)) throw ContractError("lambda must be >= 8");
  const GridSpec need = extremizer_grid(family, lambda, params, epsilon);
  std::ostringstream os;
  if (family == Family::smoothing_f_lambda) {
    const double Lmin = 8 * kernel_constant(params.alpha) * std::pow(lambda, params.alpha - 1);
    if (grid.nyquist() < 4 * lambda || grid.L < Lmin) {
      os << "f_lambda at lambda=" << lambda << " needs Nyquist >= " << 4 * lambda << " and L >= " << Lmin
         << "; grid " << grid.describe() << " falls short (e.g. N=" << need.N << ", L=" << need.L << ")";
      throw AliasingError(os.str());
    }
  } else {
    if (!(epsilon > 0)) throw ContractError("epsilon must be positive");
    const double reach = lambda + 2 * g_width(lambda, params.alpha, epsilon);
    if (grid.nyquist() < reach) {
      os << "g_lambda at lambda=" << lambda << " needs Nyquist >= " << reach << "; grid "
         << grid.describe() << " falls short (e.g. N=" << need.N << ", L=" << need.L << ")";
      throw AliasingError(os.str());
    }
  }
}

GridSpec extremizer_grid(Family family, double lambda, const DispersionParams& params, double epsilon) {
  params.validate();
  const double alpha = params.alpha;
  if (family == Family::smoothing_f_lambda) {
    const double L = 1.25 * 8 * kernel_constant(alpha) * std::pow(lambda, alpha - 1) + 4096 / lambda;
    return GridSpec(params.d, pow2_at_least(2 * L * 4 * lambda / std::numbers::pi), L);
  }
  if (!(epsilon > 0)) throw ContractError("epsilon must be positive");
  const double w = g_width(lambda, alpha, epsilon);
  const double L = 120 / (w / 2) + alpha / 100 * std::pow(lambda, alpha - 1);
  return GridSpec(params.d, pow2_at_least(2 * L * 2 * (lambda + 2 * w) / std::numbers::pi), L);
}

ExtremizerSpec make_spec(Family family, double lambda, const DispersionParams& params, double epsilon) {
  ExtremizerSpec s{family, lambda, params, extremizer_grid(family, lambda, params, epsilon), epsilon};
  s.validate();
  return s;
}

Field make_smoothing_extremizer(const ExtremizerSpec& spec) {
  if (spec.family != Family::smoothing_f_lambda) throw ContractError("spec is not an f_lambda spec");
  spec.validate();
  const double lambda = spec.lambda, alpha = spec.params.alpha;
  const auto& c = cutoffs();
  return Field::sample(spec.grid, Representation::frequency, [&](const Coord& xi) {
    const double r = xi.norm();
    const double a = c.theta(r / lambda);
    return a == 0 ? cplx(0) : a * std::polar(1.0, -radial_power(r, alpha));
  });
}

Field make_maximal_extremizer(const ExtremizerSpec& spec, double epsilon) {
  if (spec.family != Family::maximal_g_lambda) throw ContractError("spec is not a g_lambda spec");
  ExtremizerSpec s = spec;
  s.epsilon = epsilon;
  s.validate();
  const double scale = std::pow(spec.lambda, (spec.params.alpha - 2) / 2);
  return Field::sample(spec.grid, Representation::frequency, [&](const Coord& xi) {
    Coord h = xi;
    h[0] += spec.lambda;
    return cplx(chi_epsilon(scale * h.norm(), epsilon));
  });
}

SpectralProfile smoothing_profile(double lambda, double alpha, double t, double beta, bool one_sided) {
  SpectralProfile p;
  const auto& c = cutoffs();
  p.amplitude = [lambda, beta, &c](double xi) {
    const double a = c.theta(std::abs(xi) / lambda);
    return beta == 0 ? a : a * std::pow(1 + xi * xi, beta / 2);
  };
  if (!one_sided) p.support.push_back({-2 * lambda, -lambda / 2});
  p.support.push_back({lambda / 2, 2 * lambda});
  p.transition_width = (1 / std::numbers::sqrt2 - 0.5) * lambda;
  p.tau = t - 1;
  p.alpha = alpha;
  return p;
}

SpectralProfile maximal_profile(double lambda, double alpha, double t, double epsilon) {
  SpectralProfile p;
  const double scale = std::pow(lambda, (alpha - 2) / 2);
  p.amplitude = [lambda, scale, epsilon](double xi) { return chi_epsilon(scale * (xi + lambda), epsilon); };
  const double w = epsilon / scale;
  p.support = {{-lambda - w, -lambda + w}};
  p.transition_width = w / 2;
  p.tau = t;
  p.alpha = alpha;
  return p;
}

namespace {

double envelope_scale(const ExtremizerSpec& spec) {
  const double d = spec.params.d, a = spec.params.alpha;
  return std::pow(spec.lambda, d - d * a / 2);
}

double tail_radius(const ExtremizerSpec& spec) {
  return 8 * kernel_constant(spec.params.alpha) * std::pow(spec.lambda, spec.params.alpha - 1);
}

}  // namespace

EnvelopeReport envelope_check(const Field& f_lambda, const ExtremizerSpec& spec) {
  const Field u = to_physical(f_lambda);
  const auto& g = u.grid();
  const double R = tail_radius(spec);
  double peak = 0, tail = 0;
  for (Index i = 0; i < u.size(); ++i) {
    const double a = std::abs(u[i]);
    peak = std::max(peak, a);
    if (g.position(i).norm() >= R) tail = std::max(tail, a);
  }
  const double s = envelope_scale(spec);
  return {peak / s, tail / s};
}

EnvelopeReport envelope_check(const ExtremizerSpec& spec, Engine engine, Index max_grid_points) {
  if (spec.family != Family::smoothing_f_lambda) throw ContractError("envelope_check needs an f_lambda spec");
  if (engine == Engine::automatic)
    engine = (spec.grid.size() <= max_grid_points || spec.params.d > 1) ? Engine::grid : Engine::stream;
  if (engine == Engine::grid) return envelope_check(make_smoothing_extremizer(spec), spec);
  if (spec.params.d != 1) throw ContractError("the streaming route is one-dimensional");
  spec.params.validate();
  SummarySink sink(0, tail_radius(spec));
  synthesize(smoothing_profile(spec.lambda, spec.params.alpha, 0.0), sink);
  const double s = envelope_scale(spec);
  return {sink.max_abs / s, sink.tail_max / s};
}

namespace {

struct LatticeModes {
  std::vector<Coord> xi;
  std::vector<double> amp;
  std::vector<double> power;  // |xi|^alpha
  double weight = 0;          // (2L)^{-d}
};

template <typename Amp>
LatticeModes lattice_modes(const ExtremizerSpec& spec, Amp&& amp) {
  const auto& g = spec.grid;
  LatticeModes m;
  m.weight = std::pow(1 / (2 * g.L), g.d);
  // Scan only the slots whose frequencies can meet the amplitude support.
  const double reach = spec.family == Family::smoothing_f_lambda
                           ? 2 * spec.lambda
                           : spec.lambda + 2 * g_width(spec.lambda, spec.params.alpha, spec.epsilon);
  const Index kmax = std::min<Index>(g.N / 2 - 1, static_cast<Index>(std::ceil(reach / g.dxi())) + 1);
  std::vector<Index> idx(g.d, -kmax);
  while (true) {
    Coord xi(g.d);
    for (int a = 0; a < g.d; ++a) xi[a] = double(idx[a]) * g.dxi();
    const double v = amp(xi);
    if (v != 0) {
      m.xi.push_back(xi);
      m.amp.push_back(v);
      m.power.push_back(radial_power(xi.norm(), spec.params.alpha));
    }
    int a = g.d - 1;
    while (a >= 0 && idx[a] == kmax) idx[a] = -kmax, --a;
    if (a < 0) break;
    ++idx[a];
  }
  return m;
}

}  // namespace

FocusingReport focusing_check(const ExtremizerSpec& spec, int probes) {
  if (spec.family != Family::smoothing_f_lambda) throw ContractError("focusing_check needs an f_lambda spec");
  if (probes < 2) throw ContractError("focusing_check needs at least 2 probes per axis");
  spec.validate();
  const double lambda = spec.lambda, alpha = spec.params.alpha;
  const auto& c = cutoffs();
  const LatticeModes m = lattice_modes(spec, [&](const Coord& xi) { return c.theta(xi.norm() / lambda); });
  const int d = spec.params.d;
  const double scale = std::pow(lambda, d);

  // U_t f_lambda(x) on the lattice; (t - 1) is passed directly to keep the
  // cancelled chirp phase accurate.
  auto value = [&](const Coord& x, double tm1) {
    cplx acc = 0;
    for (size_t i = 0; i < m.xi.size(); ++i) acc += m.amp[i] * std::polar(1.0, tm1 * m.power[i] + m.xi[i].dot(x));
    return acc * m.weight;
  };

  const double xr = 1 / (10 * lambda), tr = 1 / (10 * std::pow(lambda, alpha));
  std::vector<double> mins(static_cast<size_t>(probes), 0.0);
  parallel_for(mins.size(), [&](size_t it) {
    const double tm1 = -tr + 2 * tr * double(it) / (probes - 1);
    double best = std::numeric_limits<double>::infinity();
    for (int ix = 0; ix < probes; ++ix) {
      Coord x = Coord::Zero(d);
      x[0] = -xr + 2 * xr * double(ix) / (probes - 1);
      best = std::min(best, std::abs(value(x, tm1)));
    }
    mins[it] = best;
  });
  FocusingReport rep;
  rep.min_modulus_ratio = *std::min_element(mins.begin(), mins.end()) / scale;
  rep.value_at_focus = value(Coord::Zero(d), 0.0).real() / scale;
  return rep;
}

RidgeReport ridge_check(const ExtremizerSpec& spec, double epsilon, double c, int probes) {
  if (spec.family != Family::maximal_g_lambda) throw ContractError("ridge_check needs a g_lambda spec");
  if (probes < 2) throw ContractError("ridge_check needs at least 2 probes");
  ExtremizerSpec s = spec;
  s.epsilon = epsilon;
  s.validate();
  const double lambda = spec.lambda, alpha = spec.params.alpha;
  if (!(alpha > 1)) throw ContractError("ridge_check needs alpha > 1");
  if (c <= 0) c = alpha / 100;
  const double scale_xi = std::pow(lambda, (alpha - 2) / 2);
  const LatticeModes m = lattice_modes(s, [&](const Coord& xi) {
    Coord h = xi;
    h[0] += lambda;
    return chi_epsilon(scale_xi * h.norm(), epsilon);
  });
  const int d = spec.params.d;
  auto value = [&](const Coord& x, double t) {
    cplx acc = 0;
    for (size_t i = 0; i < m.xi.size(); ++i) acc += m.amp[i] * std::polar(1.0, t * m.power[i] + m.xi[i].dot(x));
    return acc * m.weight;
  };
  const double X = c * std::pow(lambda, alpha - 1);
  const double floor_scale = std::pow(lambda, -d * (alpha - 2) / 2);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < probes; ++i) {
    Coord x = Coord::Zero(d);
    x[0] = X * double(i) / (probes - 1);
    const double t = x[0] / (alpha * std::pow(lambda, alpha - 1));
    best = std::min(best, std::abs(value(x, t)));
  }
  RidgeReport rep;
  rep.min_ridge_ratio = best / floor_scale;
  rep.value_at_origin = value(Coord::Zero(d), 0.0).real();
  return rep;
}

}  // namespace dlab
