#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "dlab/grid.hpp"

namespace dlab {

// One-dimensional oscillatory profile
//   u(x) = (2pi)^{-1} \int A(xi) e^{i tau |xi|^alpha} e^{i x xi} dxi
// with a real amplitude A supported inside the listed intervals.
struct SpectralProfile {
  std::function<double(double)> amplitude;
  std::vector<std::pair<double, double>> support;
  // Narrowest ramp of A; sets how far the amplitude's transform spreads.
  double transition_width = 1;
  double tau = 0;
  double alpha = 2;
};

struct SynthesisOptions {
  // Window margin in units of 1/(transition width). 600 leaves leakage near
  // 1e-15 for the module's smooth steps.
  double margin_constant = 600;
  // Output lattice spacing; 0 picks one from the profile.
  double dx = 0;
  Index max_block_length = Index(1) << 22;
};

struct SynthesisPlan {
  double dx = 0;
  double block_width = 0;
  double margin = 0;
  bool fine_lattice = false;
  double x_min = 0;
  double x_max = 0;
  Index blocks = 0;
};

struct SynthesisStats {
  SynthesisPlan plan;
  Index xi_evaluations = 0;
  Index samples = 0;
  // L^1 mass seen in the outer quarter of each block's margin; bounds what
  // the windows may have cut off.
  double edge_mass = 0;
};

// Receives finalized samples u(m dx) for consecutive m = first, first+1, ...
// Indices arrive in increasing order; unvisited indices are zero.
class SampleSink {
 public:
  virtual ~SampleSink() = default;
  virtual void consume(Index first, const cplx* values, Index count, double dx) = 0;
};

// Plans the block partition and lattice for a profile without evaluating it.
SynthesisPlan plan_synthesis(const SpectralProfile& profile, const SynthesisOptions& options = {});

// Evaluates the profile on the lattice m*dx block by block: the spectrum is
// split by translates of the cube bump, each piece is summed with an FFT on
// a window around its stationary-phase image, and overlapping windows are
// added into a sliding buffer that streams finished samples to the sink.
// Cost follows the length of the phase-space curve, not the box area.
SynthesisStats synthesize(const SpectralProfile& profile, SampleSink& sink,
                          const SynthesisOptions& options = {});

// Accumulates the usual reductions of |u| in a single pass.
class SummarySink : public SampleSink {
 public:
  // p = 0 skips the L^p sum. Mass and max beyond tail_radius are tracked
  // separately when tail_radius > 0.
  explicit SummarySink(double p = 0, double tail_radius = 0) : p_(p), radius_(tail_radius) {}

  void consume(Index first, const cplx* values, Index count, double dx) override;

  double lp_sum = 0;  // sum |u|^p dx
  double l1 = 0;      // sum |u| dx
  double l2sq = 0;    // sum |u|^2 dx
  double max_abs = 0;
  double tail_l1 = 0;
  double tail_max = 0;

 private:
  double p_;
  double radius_;
};

// Keeps the running pointwise maximum of |u| over many syntheses that share
// one lattice spacing.
class RunningMaxSink : public SampleSink {
 public:
  void consume(Index first, const cplx* values, Index count, double dx) override;

  // sum over the lattice of (max |u|)^p dx.
  double lp_sum(double p) const;
  double max_abs() const;
  Index span() const { return static_cast<Index>(values_.size()); }

 private:
  Index base_ = 0;
  double dx_ = 0;
  std::vector<double> values_;
};

}  // namespace dlab
