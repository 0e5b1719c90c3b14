#include "dlab/norms.hpp"

#include <algorithm>
#include <cmath>

#include "dlab/decomposition.hpp"
#include "dlab/transform.hpp"

namespace dlab {

void NormSpec::validate() const {
  if (!(p >= 1)) throw ContractError("norm exponent p must be >= 1");
  if (kind == NormKind::besov && !(q >= 1)) throw ContractError("besov index q must be >= 1");
  if (!std::isfinite(beta)) throw ContractError("beta must be finite");
}

namespace {

void check_p(double p) {
  if (!(p >= 1)) throw ContractError("norm exponent p must be >= 1");
}

double lp_of_abs(const Eigen::ArrayXd& a, double p, double cell) {
  if (p == kInf) return a.size() ? a.maxCoeff() : 0.0;
  return std::pow(a.pow(p).sum() * cell, 1 / p);
}

}  // namespace

double lp_norm(const Field& f, double p) {
  check_p(p);
  const Field u = to_physical(f);
  return lp_of_abs(u.samples().array().abs(), p, u.grid().cell_volume());
}

double mixed_spacetime_norm(const Trajectory& tr, double p) {
  check_p(p);
  if (tr.frames.empty()) throw ContractError("trajectory has no frames");
  if (p == kInf) {
    double m = 0;
    for (const auto& fr : tr.frames) m = std::max(m, lp_norm(fr, kInf));
    return m;
  }
  const auto w = tr.weights();
  double acc = 0;
  for (size_t j = 0; j < tr.frames.size(); ++j) acc += w[j] * std::pow(lp_norm(tr.frames[j], p), p);
  return std::pow(acc, 1 / p);
}

double maximal_norm(const Trajectory& tr, double p) {
  check_p(p);
  if (tr.frames.empty()) throw ContractError("trajectory has no frames");
  Eigen::ArrayXd m = Eigen::ArrayXd::Zero(tr.grid.size());
  for (const auto& fr : tr.frames) m = m.max(to_physical(fr).samples().array().abs());
  return lp_of_abs(m, p, tr.grid.cell_volume());
}

double sobolev_norm(const Field& f, double p, double beta) {
  check_p(p);
  if (beta == 0) return lp_norm(f, p);
  return lp_norm(apply_radial(f, [&](double r) { return std::pow(1 + r * r, beta / 2); }), p);
}

double besov_norm(const Field& f, double p, double beta, double q) {
  check_p(p);
  if (!(q >= 1)) throw ContractError("besov index q must be >= 1");
  const auto& g = f.grid();
  const double top = g.nyquist() * std::sqrt(double(g.d));
  double acc = 0;
  for (int k = 0; k == 0 || std::ldexp(1.0, k - 1) < top; ++k) {
    const double v = std::pow(2.0, k * beta) * lp_norm(band_project(f, k), p);
    acc = q == kInf ? std::max(acc, v) : acc + std::pow(v, q);
  }
  return q == kInf ? acc : std::pow(acc, 1 / q);
}

double norm(const Field& f, const NormSpec& s) {
  s.validate();
  switch (s.kind) {
    case NormKind::lp: return lp_norm(f, s.p);
    case NormKind::sobolev: return sobolev_norm(f, s.p, s.beta);
    case NormKind::besov: return besov_norm(f, s.p, s.beta, s.q);
    default: throw ContractError("space-time norm kinds need a trajectory");
  }
}

double norm(const Trajectory& tr, const NormSpec& s) {
  s.validate();
  switch (s.kind) {
    case NormKind::mixed_spacetime: return mixed_spacetime_norm(tr, s.p);
    case NormKind::maximal: return maximal_norm(tr, s.p);
    default: throw ContractError("field norm kinds need a single field");
  }
}

double smoothing_exponent(const ExponentQuery& q) {
  return q.alpha * (q.d * (0.5 - 1 / q.p) - 1 / q.p);
}

double maximal_exponent(const ExponentQuery& q) { return q.alpha * q.d * (0.5 - 1 / q.p); }

double airy_exponent(double p) { return 3 * (p - 4) / (2 * p); }

// 2 + 4/(d+1) as a single quotient, so the result is correctly rounded.
double admissibility_threshold(int d) { return double(2 * d + 6) / (d + 1); }

double maximal_necessary_exponent(const ExponentQuery& q) { return q.alpha / (2 * q.p); }

bool is_admissible(const ExponentQuery& q) { return q.p > admissibility_threshold(q.d); }

}  // namespace dlab
