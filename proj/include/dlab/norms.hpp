#pragma once

#include <limits>

#include "dlab/grid.hpp"
#include "dlab/propagator.hpp"

namespace dlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class NormKind { lp, mixed_spacetime, maximal, sobolev, besov };

struct NormSpec {
  NormKind kind = NormKind::lp;
  double p = 2;
  double beta = 0;  // sobolev and besov
  double q = 2;     // besov

  void validate() const;
};

// (sum |f(x_n)|^p (2L/N)^d)^{1/p}; p = inf gives the maximum.
double lp_norm(const Field& f, double p);

// (sum_j w_j ||u(t_j)||_p^p)^{1/p} with the trajectory's rectangle weights.
double mixed_spacetime_norm(const Trajectory& tr, double p);

// lp_norm of the pointwise maximum over frames.
double maximal_norm(const Trajectory& tr, double p);

// lp_norm of F^{-1}[(1 + |xi|^2)^{beta/2} f^].
double sobolev_norm(const Field& f, double p, double beta);

// (sum_k 2^{k beta q} ||L_k f||_p^q)^{1/q} over every band with lattice points.
double besov_norm(const Field& f, double p, double beta, double q);

double norm(const Field& f, const NormSpec& spec);
double norm(const Trajectory& tr, const NormSpec& spec);

struct ExponentQuery {
  double alpha = 2;
  int d = 1;
  double p = 2;
};

// alpha (d(1/2 - 1/p) - 1/p)
double smoothing_exponent(const ExponentQuery& q);
// alpha d (1/2 - 1/p)
double maximal_exponent(const ExponentQuery& q);
// 3(p - 4)/(2p), for 4 < p < inf
double airy_exponent(double p);
// 2 + 4/(d + 1)
double admissibility_threshold(int d);
// alpha / (2p)
double maximal_necessary_exponent(const ExponentQuery& q);

bool is_admissible(const ExponentQuery& q);

}  // namespace dlab
