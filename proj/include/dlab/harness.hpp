#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dlab/extremizers.hpp"
#include "dlab/norms.hpp"

namespace dlab {

enum class SweepNorm { mixed_spacetime, maximal };
enum class Evolution { fractional, airy };

const char* to_string(SweepNorm n);
const char* to_string(Evolution e);

struct TimePolicy {
  int uniform_count = 64;       // j / uniform_count for j < uniform_count
  bool focusing_window = true;  // add the window below t = 1
  int window_count = 64;
  double window_scale = 4;      // window covers 1 - window_scale lambda^{-alpha} <= t < 1
};

struct SweepConfig {
  Family family = Family::smoothing_f_lambda;
  double alpha = 2;
  int d = 1;
  double p = 6;
  double beta = 0;
  std::vector<double> lambdas{16, 32, 64, 128, 256};
  SweepNorm norm = SweepNorm::mixed_spacetime;
  Evolution evolution = Evolution::fractional;
  TimePolicy t_policy;
  double epsilon = kDefaultEpsilon;  // g_lambda only
  // Denominator from sobolev_norm of the datum instead of lambda^beta ||f||_p.
  bool sobolev_denominator = false;
  Engine engine = Engine::automatic;
  // The grid route is used while a frame has at most this many points.
  Index max_grid_points = Index(1) << 20;
  // 0 reads DLAB_MEMORY_CAP_MB, else 2048.
  double memory_cap_mb = 0;
  unsigned workers = 0;  // 0 reads DLAB_MAX_WORKERS

  void validate() const;
  double resolved_memory_cap_mb() const;
};

struct SweepRecord {
  double lambda = 0;
  Index N = 0;  // points of the widest frame (streamed samples on that route)
  double L = 0;  // half-width of the widest frame
  Index t_samples = 0;
  double numerator = 0;
  double denominator = 0;
  double ratio = 0;
  double datum_norm = 0;  // denominator without the lambda^beta weight
};

struct FitResult {
  double slope = 0;
  double intercept = 0;
  double max_residual = 0;
};

// Time samples on [0, 1] for one lambda, sorted and deduplicated.
std::vector<double> sweep_times(const SweepConfig& cfg, double lambda);

// Fails with MemoryCapError naming the smallest lambda whose frames cannot
// be held under the cap.
std::vector<SweepRecord> run_sweep(const SweepConfig& cfg);

// Records re-weighted to another beta; needs the lambda^beta denominator.
std::vector<SweepRecord> reweight(const std::vector<SweepRecord>& records, double beta_from,
                                  double beta_to);

// Least squares of ln ratio on ln lambda.
FitResult fit_loglog(const std::vector<SweepRecord>& records);

struct VerdictCheck {
  std::string label;
  double beta = 0;
  double slope = 0;
  double target = 0;
  bool pass = false;
};

struct Verdict {
  double slope = 0;  // slope at cfg.beta
  double expected = 0;
  double tolerance = 0;
  bool pass = false;
  FitResult fit;
  std::vector<SweepRecord> records;
  std::vector<VerdictCheck> checks;
};

// |slope - (smoothing_exponent - beta)| <= tolerance at cfg.beta.
Verdict verify_sharpness(const SweepConfig& cfg, double tolerance = 0.1);

// One g_lambda sweep judged twice: slope >= -tolerance at beta = alpha/(2p)
// and slope > tolerance at beta = alpha/(2p) - 0.2. cfg.beta is reported too.
Verdict verify_maximal_necessary(const SweepConfig& cfg, double tolerance = 0.1);

// Airy flow with one-sided f_lambda: |slope - (airy_exponent - beta)| <= tolerance.
Verdict verify_airy(const SweepConfig& cfg, double tolerance = 0.1);

// Random band-limited data on a fixed grid: the largest observed
// ||U_t f||_{L^p(R x [0,1])} / ||f||_{L^p_beta}. Bounded output is
// consistent with the smoothing estimate but does not prove it.
struct SpotCheck {
  double max_ratio = 0;
  double mean_ratio = 0;
  int trials = 0;
};
SpotCheck upper_bound_spot_check(double alpha, double p, double beta, int trials = 8,
                                 std::uint64_t seed = 7);

}  // namespace dlab
