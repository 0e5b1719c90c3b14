#pragma once

#include <Eigen/Core>

#include <vector>

#include "dlab/grid.hpp"
#include "dlab/propagator.hpp"

namespace dlab {

// L_k f = F^{-1}[chi0(|xi|) f^] for k = 0, F^{-1}[chi(2^-k |xi|) f^] for k >= 1.
Field band_project(const Field& f, int k);

// T_k f(., t) = evolve(L_k f, t).
Field evolve_band(const Field& f, int k, double t, const DispersionParams& params);

using IntVec = Eigen::Matrix<long long, Eigen::Dynamic, 1, 0, 3, 1>;

// Cube of side ~ 2^j lambda^{-1/2} centred at 2^j lambda^{-1/2} n.
struct CubeIndex {
  int j = 0;
  IntVec n;
  double lambda = 1;

  double scale() const;
};

// P_{j,n} f = F^{-1}[vartheta(lambda^{1/2} 2^{-j} xi - n) f^].
Field cube_project(const Field& f, const CubeIndex& c);

// Every n whose cube bump meets a nonzero frequency sample of f.
std::vector<CubeIndex> active_cubes(const Field& f, int j, double lambda);

// Theta_0 = chi0r(lambda^{1/2}(xi - eta)),
// Theta_j = chi0r(lambda^{1/2} 2^{-j}(xi - eta)) - chi0r(2 lambda^{1/2} 2^{-j}(xi - eta)),
// with chi0r the radial bump equal to 1 up to 8 sqrt(d).
double theta_weight(int j, double lambda, const Coord& xi, const Coord& eta);

// Smallest J with sum_{j<=J} Theta_j = 1 for every pair at distance <= dist.
int theta_levels(double lambda, double dist, int d);

// B_j[f,g](x,t) sampled at every grid point (columns) and time (rows).
struct BilinearPiece {
  int j = 0;
  double lambda = 1;
  GridSpec grid;
  std::vector<double> t_samples;
  Eigen::MatrixXcd values;
};

struct BilinearOptions {
  Index max_active_modes = 512;
};

// Direct double sum over the active lattice modes of f^ and g^ weighted by
// Theta_j, one-dimensional.
BilinearPiece bilinear_piece(const Field& f, const Field& g, int j, double lambda,
                             const std::vector<double>& t_samples, const EllipticPhase& ep,
                             const BilinearOptions& options = {});

// max |Sf Sg - sum_j B_j| / max |Sf Sg| over grid points and t samples; 0
// when Sf Sg vanishes identically.
double bilinear_reconstruction_residual(const Field& f, const Field& g, double lambda,
                                        const std::vector<double>& t_samples,
                                        const EllipticPhase& ep,
                                        const BilinearOptions& options = {});

// E h(x,t) = \int e^{i(x xi + t phi(xi))} h(xi) dxi for a frequency field h.
Field extension(const Field& h, double t, const std::function<double(const Coord&)>& phase);

struct RestrictionOptions {
  double separation = 0;  // 0 uses a quarter of the diameter of the joint support
  double dt = 0.125;
};

// ||E h1 E h2||_{L^{p/2}(box x [-lambda, lambda])} / (||h1||_2 ||h2||_2).
double bilinear_restriction_ratio(const Field& h1, const Field& h2, double p, double lambda,
                                  const EllipticPhase& ep, const RestrictionOptions& options = {});

// Box holding the spread of E h over |t| <= lambda for data in [-1,1] with
// |phi'| <= slope, Nyquist 8.
GridSpec restriction_grid(double lambda, double slope);

}  // namespace dlab
