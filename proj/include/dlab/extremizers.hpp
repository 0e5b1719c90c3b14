#pragma once

#include "dlab/grid.hpp"
#include "dlab/propagator.hpp"
#include "dlab/synthesis.hpp"

namespace dlab {

enum class Family { smoothing_f_lambda, maximal_g_lambda };

const char* to_string(Family f);

inline constexpr double kDefaultEpsilon = 0.05;

struct ExtremizerSpec {
  Family family = Family::smoothing_f_lambda;
  double lambda = 16;
  DispersionParams params;
  GridSpec grid;
  double epsilon = kDefaultEpsilon;  // g_lambda only

  // Throws AliasingError naming the required N and L when the grid is too
  // small for the family.
  void validate() const;
};

// Smallest power-of-two grid meeting the family's sizing rules.
GridSpec extremizer_grid(Family family, double lambda, const DispersionParams& params,
                         double epsilon = kDefaultEpsilon);

ExtremizerSpec make_spec(Family family, double lambda, const DispersionParams& params,
                         double epsilon = kDefaultEpsilon);

// f^_lambda(xi) = e^{-i|xi|^alpha} theta(|xi|/lambda).
Field make_smoothing_extremizer(const ExtremizerSpec& spec);

// g^_lambda(xi) = chi_eps(lambda^{(alpha-2)/2} |xi + lambda e_1|), chi_eps
// supported in |r| < eps and equal to 1 for |r| <= eps/2.
Field make_maximal_extremizer(const ExtremizerSpec& spec, double epsilon);

double chi_epsilon(double r, double epsilon);

// Streaming profiles of U_t f_lambda and U_t g_lambda (d = 1). beta != 0
// multiplies the amplitude by (1 + xi^2)^{beta/2}; one_sided keeps xi > 0.
SpectralProfile smoothing_profile(double lambda, double alpha, double t, double beta = 0,
                                  bool one_sided = false);
SpectralProfile maximal_profile(double lambda, double alpha, double t, double epsilon);

struct EnvelopeReport {
  double peak_ratio = 0;
  double tail_ratio = 0;
};

// peak_ratio = max |f_lambda| / lambda^{d - d alpha/2}; tail_ratio is the
// same over |x| >= 8 C(alpha) lambda^{alpha-1}.
EnvelopeReport envelope_check(const Field& f_lambda, const ExtremizerSpec& spec);

// Builds f_lambda itself: on spec.grid when it fits under max_grid_points,
// otherwise (d = 1) with the streaming synthesis. The streamed field is zero
// outside the synthesized window, so tail_ratio only sees the window.
EnvelopeReport envelope_check(const ExtremizerSpec& spec, Engine engine = Engine::automatic,
                              Index max_grid_points = Index(1) << 22);

struct FocusingReport {
  double min_modulus_ratio = 0;
  double value_at_focus = 0;  // U_1 f_lambda(0) / lambda^d
};

// min over |x| <= (10 lambda)^{-1}, |t - 1| <= (10 lambda^alpha)^{-1} of
// |U_t f_lambda(x)| / lambda^d, sampled on a probes x probes grid.
FocusingReport focusing_check(const ExtremizerSpec& spec, int probes = 21);

struct RidgeReport {
  double min_ridge_ratio = 0;
  double value_at_origin = 0;  // g_lambda(0)
};

// min over x_1 in [0, c lambda^{alpha-1}] of |U_{t(x)} g_lambda(x)| /
// lambda^{-d(alpha-2)/2} with t(x) = x_1 / (alpha lambda^{alpha-1}).
// c = 0 uses alpha/100.
RidgeReport ridge_check(const ExtremizerSpec& spec, double epsilon, double c = 0, int probes = 64);

}  // namespace dlab
