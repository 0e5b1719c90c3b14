#include "dlab/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

#include "dlab/cutoffs.hpp"
#include "dlab/parallel.hpp"
#include "dlab/transform.hpp"

namespace dlab {

namespace {

const CutoffSpec& cutoffs() {
  static const CutoffSpec c;
  return c;
}

}  // namespace

Field band_project(const Field& f, int k) {
  if (k < 0) throw ContractError("band index must be >= 0");
  const auto& g = f.grid();
  if (k >= 1 && std::ldexp(1.0, k - 1) >= g.nyquist() * std::sqrt(double(g.d)))
    throw AliasingError("band " + std::to_string(k) + " lies beyond the grid's Nyquist frequency");
  const auto& c = cutoffs();
  return apply_radial(f, [&](double r) { return c.lp_piece(k, r); });
}

Field evolve_band(const Field& f, int k, double t, const DispersionParams& params) {
  return evolve(band_project(f, k), t, params);
}

double CubeIndex::scale() const { return std::ldexp(1.0, j) / std::sqrt(lambda); }

Field cube_project(const Field& f, const CubeIndex& c) {
  const auto& g = f.grid();
  if (c.n.size() != g.d) throw ContractError("cube index dimension does not match the grid");
  if (!(c.lambda > 0) || c.j < 0) throw ContractError("cube index needs j >= 0 and lambda > 0");
  const double s = c.scale();
  for (int a = 0; a < g.d; ++a)
    if ((std::abs(double(c.n[a])) - 0.6) * s > g.nyquist())
      throw AliasingError("cube lies outside the grid's frequency range");
  const auto& cut = cutoffs();
  return apply_symbol(f, [&](const Coord& xi) {
    double v = 1;
    for (int a = 0; a < g.d; ++a) v *= cut.vartheta1(xi[a] / s - double(c.n[a]));
    return cplx(v);
  });
}

std::vector<CubeIndex> active_cubes(const Field& f, int j, double lambda) {
  const Field F = to_frequency(f);
  const auto& g = F.grid();
  CubeIndex proto{j, IntVec::Zero(g.d), lambda};
  const double s = proto.scale();
  std::set<std::vector<long long>> seen;
  for (Index i = 0; i < F.size(); ++i) {
    if (F[i] == cplx(0)) continue;
    const Coord xi = g.frequency(i);
    std::vector<long long> lo(g.d), hi(g.d);
    for (int a = 0; a < g.d; ++a) {
      lo[a] = static_cast<long long>(std::floor(xi[a] / s - 0.6));
      hi[a] = static_cast<long long>(std::ceil(xi[a] / s + 0.6));
    }
    std::vector<long long> n(lo);
    while (true) {
      bool hit = true;
      for (int a = 0; a < g.d; ++a) hit = hit && cutoffs().vartheta1(xi[a] / s - double(n[a])) > 0;
      if (hit) seen.insert(n);
      int a = g.d - 1;
      while (a >= 0 && n[a] == hi[a]) n[a] = lo[a], --a;
      if (a < 0) break;
      ++n[a];
    }
  }
  std::vector<CubeIndex> out;
  for (const auto& n : seen) {
    CubeIndex c = proto;
    for (int a = 0; a < g.d; ++a) c.n[a] = n[a];
    out.push_back(c);
  }
  return out;
}

double theta_weight(int j, double lambda, const Coord& xi, const Coord& eta) {
  if (j < 0) throw ContractError("theta_weight needs j >= 0");
  const int d = static_cast<int>(xi.size());
  const double r = std::sqrt(lambda) * (xi - eta).norm();
  const auto& c = cutoffs();
  if (j == 0) return c.chi0_radial(r, d);
  const double rj = std::ldexp(r, -j);
  return c.chi0_radial(rj, d) - c.chi0_radial(2 * rj, d);
}

int theta_levels(double lambda, double dist, int d) {
  const double need = std::sqrt(lambda) * dist / (8 * std::sqrt(double(d)));
  if (need <= 1) return 0;
  return static_cast<int>(std::ceil(std::log2(need)));
}

namespace {

struct Modes {
  std::vector<Index> m;  // signed lattice modes
  std::vector<double> xi;
  std::vector<cplx> amp;  // chi(xi) f^(xi)
  std::vector<double> phase;
};

Modes active_modes(const Field& f, const EllipticPhase& ep, Index cap) {
  const Field F = to_frequency(f);
  const auto& g = F.grid();
  Modes out;
  for (Index i = 0; i < F.size(); ++i) {
    if (F[i] == cplx(0)) continue;
    const Coord xi = g.frequency(i);
    const cplx a = ep.amplitude(xi) * F[i];
    if (a == cplx(0)) continue;
    out.m.push_back(g.signed_mode(i));
    out.xi.push_back(xi[0]);
    out.amp.push_back(a);
    out.phase.push_back(ep.phase(xi));
  }
  if (static_cast<Index>(out.m.size()) > cap) {
    std::ostringstream os;
    os << "bilinear double sum over " << out.m.size() << " active modes exceeds the cap of " << cap
       << "; restrict the data to fewer modes or coarsen the lattice";
    throw TractabilityError(os.str());
  }
  return out;
}

void check_bilinear_inputs(const Field& f, const Field& g, const EllipticPhase& ep) {
  if (f.grid().d != 1 || g.grid().d != 1) throw ContractError("bilinear pieces are one-dimensional");
  if (!(f.grid() == g.grid())) throw ContractError("f and g must share a grid");
  if (!(ep.hessian_probe > 0)) throw ContractError("phase is not elliptic on the amplitude support");
}

// Evaluates sum over pairs of W_{ab} A_a(t) B_b(t) e^{i x_n (xi_a + xi_b)} at
// every grid point, for each t.
Eigen::MatrixXcd pair_sum(const GridSpec& grid, const Modes& A, const Modes& B,
                          const Eigen::MatrixXd& W, const std::vector<double>& ts) {
  const Index N = grid.N;
  const double scale = 1.0 / (4 * grid.L * grid.L);
  Eigen::MatrixXcd out(static_cast<Index>(ts.size()), N);
  parallel_for(ts.size(), [&](size_t it) {
    const double t = ts[it];
    std::vector<cplx> a(A.m.size()), b(B.m.size());
    for (size_t i = 0; i < a.size(); ++i) a[i] = A.amp[i] * std::polar(1.0, t * A.phase[i]);
    for (size_t i = 0; i < b.size(); ++i) b[i] = B.amp[i] * std::polar(1.0, t * B.phase[i]);
    // x_n xi_s = -pi s + 2 pi n s / N, so the sum folds onto N slots.
    std::vector<cplx> bins(N, cplx(0)), res(N);
    for (size_t p = 0; p < a.size(); ++p)
      for (size_t q = 0; q < b.size(); ++q) {
        const double w = W(static_cast<Index>(p), static_cast<Index>(q));
        if (w == 0) continue;
        const Index s = A.m[p] + B.m[q];
        const Index slot = ((s % N) + N) % N;
        const double sign = (s & 1) ? -1.0 : 1.0;
        bins[slot] += sign * w * a[p] * b[q];
      }
    detail::thread_fft<double>().inv(res.data(), bins.data(), N);
    for (Index n = 0; n < N; ++n) out(static_cast<Index>(it), n) = res[n] * scale;
  });
  return out;
}

Eigen::MatrixXd theta_matrix(int j, double lambda, const Modes& A, const Modes& B) {
  Eigen::MatrixXd W(static_cast<Index>(A.m.size()), static_cast<Index>(B.m.size()));
  Coord x(1), y(1);
  for (Index p = 0; p < W.rows(); ++p)
    for (Index q = 0; q < W.cols(); ++q) {
      x[0] = A.xi[p];
      y[0] = B.xi[q];
      W(p, q) = theta_weight(j, lambda, x, y);
    }
  return W;
}

}  // namespace

BilinearPiece bilinear_piece(const Field& f, const Field& g, int j, double lambda,
                             const std::vector<double>& t_samples, const EllipticPhase& ep,
                             const BilinearOptions& options) {
  check_bilinear_inputs(f, g, ep);
  if (j < 0 || !(lambda > 0)) throw ContractError("bilinear piece needs j >= 0 and lambda > 0");
  const Modes A = active_modes(f, ep, options.max_active_modes);
  const Modes B = active_modes(g, ep, options.max_active_modes);
  BilinearPiece piece{j, lambda, f.grid(), t_samples, {}};
  piece.values = pair_sum(f.grid(), A, B, theta_matrix(j, lambda, A, B), t_samples);
  return piece;
}

double bilinear_reconstruction_residual(const Field& f, const Field& g, double lambda,
                                        const std::vector<double>& t_samples,
                                        const EllipticPhase& ep, const BilinearOptions& options) {
  check_bilinear_inputs(f, g, ep);
  const Modes A = active_modes(f, ep, options.max_active_modes);
  const Modes B = active_modes(g, ep, options.max_active_modes);
  const auto& grid = f.grid();

  double dist = 0;
  for (double a : A.xi)
    for (double b : B.xi) dist = std::max(dist, std::abs(a - b));
  const int J = theta_levels(lambda, dist, 1);
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(static_cast<Index>(t_samples.size()), grid.N);
  for (int j = 0; j <= J; ++j) sum += pair_sum(grid, A, B, theta_matrix(j, lambda, A, B), t_samples);

  double num = 0, den = 0;
  for (size_t it = 0; it < t_samples.size(); ++it) {
    const Field Sf = to_physical(elliptic_evolve(f, t_samples[it], ep));
    const Field Sg = to_physical(elliptic_evolve(g, t_samples[it], ep));
    for (Index n = 0; n < grid.N; ++n) {
      const cplx prod = Sf[n] * Sg[n];
      den = std::max(den, std::abs(prod));
      num = std::max(num, std::abs(prod - sum(static_cast<Index>(it), n)));
    }
  }
  return den > 0 ? num / den : 0.0;
}

Field extension(const Field& h, double t, const std::function<double(const Coord&)>& phase) {
  if (h.representation() != Representation::frequency)
    throw ContractError("extension expects a frequency-representation field");
  const Field H = apply_symbol(h, [&](const Coord& xi) { return std::polar(1.0, t * phase(xi)); });
  return dft_inverse(H).scaled(std::pow(2 * std::numbers::pi, h.grid().d));
}

GridSpec restriction_grid(double lambda, double slope) {
  const double L = 2 * lambda * slope + 64;
  Index N = 8;
  while (std::numbers::pi * double(N) / (2 * L) < 8.0) N <<= 1;
  return GridSpec(1, N, L);
}

namespace {

struct SupportInfo {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  double slope = 0;
  double l2 = 0;
  std::vector<double> points;
};

SupportInfo support_info(const Field& h, const EllipticPhase& ep) {
  const auto& g = h.grid();
  SupportInfo s;
  const double e = 1e-6;
  for (Index i = 0; i < h.size(); ++i) {
    s.l2 += std::norm(h[i]);
    if (h[i] == cplx(0)) continue;
    const double xi = g.xi(i);
    s.lo = std::min(s.lo, xi);
    s.hi = std::max(s.hi, xi);
    s.points.push_back(xi);
    Coord a(1), b(1);
    a[0] = xi + e;
    b[0] = xi - e;
    s.slope = std::max(s.slope, std::abs(ep.phase(a) - ep.phase(b)) / (2 * e));
  }
  s.l2 = std::sqrt(s.l2 * g.dxi());
  return s;
}

}  // namespace

double bilinear_restriction_ratio(const Field& h1, const Field& h2, double p, double lambda,
                                  const EllipticPhase& ep, const RestrictionOptions& options) {
  if (h1.grid().d != 1 || !(h1.grid() == h2.grid()))
    throw ContractError("restriction ratio needs two 1-D fields on one grid");
  if (h1.representation() != Representation::frequency || h2.representation() != Representation::frequency)
    throw ContractError("restriction ratio expects frequency-representation data");
  if (!(p > 4)) throw ContractError("restriction ratio needs p > 2 + 4/(d+1) = 4");
  if (!(lambda > 0) || !(options.dt > 0)) throw ContractError("lambda and dt must be positive");
  const SupportInfo s1 = support_info(h1, ep), s2 = support_info(h2, ep);
  if (s1.points.empty() || s2.points.empty()) return 0.0;

  const double diameter = std::max(s1.hi, s2.hi) - std::min(s1.lo, s2.lo);
  const double c = options.separation > 0 ? options.separation : diameter / 4;
  double dist = std::numeric_limits<double>::infinity();
  for (double a : s1.points)
    for (double b : s2.points) dist = std::min(dist, std::abs(a - b));
  if (dist < c) {
    std::ostringstream os;
    os << "supports are " << dist << " apart, below the required separation " << c;
    throw ContractError(os.str());
  }
  const auto& g = h1.grid();
  const double spread = lambda * std::max(s1.slope, s2.slope);
  if (g.L < spread + 16)
    throw ContractError("grid half-width " + std::to_string(g.L) + " cannot hold the spread " +
                        std::to_string(spread) + " of the extension over |t| <= lambda");

  const Index nt = static_cast<Index>(std::llround(2 * lambda / options.dt));
  const double dt = 2 * lambda / double(nt);
  std::vector<double> partial(static_cast<size_t>(nt), 0.0);
  const double q = p / 2;
  parallel_for(static_cast<size_t>(nt), [&](size_t it) {
    const double t = -lambda + double(it) * dt;
    const Field E1 = extension(h1, t, ep.phase), E2 = extension(h2, t, ep.phase);
    double acc = 0;
    for (Index n = 0; n < g.N; ++n) acc += std::pow(std::abs(E1[n] * E2[n]), q);
    partial[it] = acc * g.dx() * dt;
  });
  double total = 0;
  for (double v : partial) total += v;
  return std::pow(total, 1 / q) / (s1.l2 * s2.l2);
}

}  // namespace dlab
