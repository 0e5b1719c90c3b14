#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "dlab/grid.hpp"
#include "dlab/synthesis.hpp"

namespace dlab {

// Symbol |xi|^alpha; alpha = 1 (the wave case) is rejected.
struct DispersionParams {
  double alpha = 2;
  int d = 1;

  void validate() const;
};

// |xi|^alpha with the value 0 at the origin for every alpha.
double radial_power(double r, double alpha);

// u(t) = F^{-1}[e^{it|xi|^alpha} f^]. The field's energy above half the
// Nyquist frequency must be negligible, otherwise AliasingError.
Field evolve(const Field& f, double t, const DispersionParams& params);

// Frames share the datum's grid. The time interval closes the last sample
// for the rectangle rule: sample j carries weight t_{j+1} - t_j and the last
// sample carries t_end - t_last.
struct Trajectory {
  GridSpec grid;
  std::vector<double> t_samples;
  std::vector<Field> frames;
  double t_begin = 0;
  double t_end = 1;

  std::vector<double> weights() const;
};

// Default interval: [t_0, t_last + (t_last - t_prev)], or [t_0, t_0 + 1] for
// a single sample.
std::pair<double, double> default_interval(const std::vector<double>& t_samples);

Trajectory evolve_trajectory(const Field& f, const std::vector<double>& t_samples,
                             const DispersionParams& params,
                             std::optional<std::pair<double, double>> interval = std::nullopt);

// Phase, amplitude and the box [support_lo, support_hi] holding the
// amplitude's support. hessian_probe is the smallest Hessian eigenvalue seen
// at sampled points of the support.
struct EllipticPhase {
  std::function<double(const Coord&)> phase;
  SymbolFn amplitude;
  Coord support_lo;
  Coord support_hi;
  double hessian_probe = 0;
};

// Probes the Hessian by second differences at `probes` points drawn inside
// the support box where the amplitude is nonzero.
EllipticPhase make_elliptic_phase(std::function<double(const Coord&)> phase, SymbolFn amplitude,
                                  Coord support_lo, Coord support_hi, int probes = 100,
                                  std::uint64_t seed = 12345);

// S f(., t) = F^{-1}[chi e^{it phi} f^].
Field elliptic_evolve(const Field& f, double t, const EllipticPhase& ep);

// Smooth half-line projections with a one-cell transition at xi = 0; the
// projections are 1/2 each at the zero mode.
double half_line_plus(double xi, double cell);

// Solution of u_t + u_xxx = 0: U^3_t P+ f + U^3_{-t} P- f.
Field airy_evolve(const Field& f, double t);

// C(alpha): alpha 2^{alpha-1} for alpha > 1, 1 for alpha < 1.
double kernel_constant(double alpha);

// Radius 4 C(alpha) 2^{k(alpha-1)} of the band-k localization ball in x.
double kernel_ball_radius(int k, double alpha);

// Band-k kernel in the rescaled variable y = 2^k x:
//   Ktilde(y) = (2pi)^{-d} \int chi(|xi|) e^{i(<y,xi> + 2^{alpha k} t |xi|^alpha)} dxi,
// so K^t_k(x) = 2^{kd} Ktilde(2^k x).
Field band_kernel(int k, double t, const DispersionParams& params, const GridSpec& grid);

// Grid in y large enough to hold the kernel and the ball with room for
// the tail, with Nyquist at 4x the kernel's top frequency 2.
GridSpec kernel_grid(int k, double t, const DispersionParams& params);

// 1-D streaming description of the rescaled kernel.
SpectralProfile kernel_profile(int k, double t, double alpha);

enum class Engine { automatic, grid, stream };

struct KernelOptions {
  Engine engine = Engine::automatic;
  Index grid_points = 0;                  // 0 sizes from kernel_grid
  Index max_grid_points = Index(1) << 20;  // automatic switches to streaming above this
};

struct KernelReport {
  double tail_fraction = 0;
  double total_mass = 0;
  double tail_mass = 0;
  double ball_radius_y = 0;
  Engine engine_used = Engine::grid;
  Index points = 0;
};

// Fraction of the kernel's discrete L^1 mass outside the ball; t in [0,1].
KernelReport kernel_localization(int k, double t, const DispersionParams& params,
                                 const KernelOptions& options = {});

double kernel_tail_mass(int k, double t, const DispersionParams& params,
                        const KernelOptions& options = {});

}  // namespace dlab
