#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dlab/decomposition.hpp"
#include "dlab/harness.hpp"

namespace dlab {

// Random 1-D pair with `modes` active lattice modes each, for the bilinear
// reconstruction check. Phase |xi|^2/2, amplitude chi0(|xi|/4).
struct BilinearInstance {
  Field f;
  Field g;
  EllipticPhase ep;
  std::vector<double> t_samples;
};
BilinearInstance bilinear_instance(std::uint64_t seed, int modes = 64);

// Fixed pair of bumps on [-1, -1/2] and [1/2, 1] under the phase |xi|^2.
double restriction_pair_ratio(double lambda, double p);
FitResult restriction_fit(const std::vector<double>& lambdas, double p);

enum class Relation { less, at_most, at_least };

struct DiagnosticRow {
  std::string name;
  std::string detail;
  double value = 0;
  Relation relation = Relation::at_most;
  double threshold = 0;
  bool pass = false;
};

const char* to_string(Relation r);

DiagnosticRow diagnose_kernel(double alpha, int k, double t);
DiagnosticRow diagnose_bilinear(std::uint64_t seed, double lambda);
DiagnosticRow diagnose_restriction(const std::vector<double>& lambdas, double p);
DiagnosticRow diagnose_envelope(double alpha, double lambda);
DiagnosticRow diagnose_focusing(double alpha, double lambda);
DiagnosticRow diagnose_ridge(double alpha, double lambda, double epsilon);

// Floor for the ridge diagnostic. On the ridge |U g_lambda| / lambda^{-(alpha-2)/2}
// cannot exceed (2 pi)^{-1} \int chi_eps, about 0.24 eps.
inline double ridge_floor(double epsilon) { return 0.2 * epsilon; }

}  // namespace dlab
