#pragma once

#include <cmath>
#include <numbers>

#include "dlab/grid.hpp"

namespace dlab {

// Smooth cutoffs built from the C^infinity step
//   sigma(u) = 1 / (1 + exp(s/u - s/(1-u)))  on (0,1),
// with sigma = 0 for u <= 0 and sigma = 1 for u >= 1. The step satisfies
// sigma(u) + sigma(1-u) = 1, which gives the partition identities exactly.
template <typename Real>
class BasicCutoffSpec {
 public:
  explicit BasicCutoffSpec(Real smoothness_scale = 1) : s_(smoothness_scale) {
    if (!(s_ > 0)) throw ContractError("smoothness_scale must be positive");
  }

  Real smoothness_scale() const { return s_; }

  Real step(Real u) const {
    if (u <= 0) return 0;
    if (u >= 1) return 1;
    const Real e = s_ / u - s_ / (1 - u);
    if (e > 700) return 0;
    return 1 / (1 + std::exp(e));
  }

  // 1 on [0,1], 0 on [2,inf).
  Real chi0(Real r) const { return step(2 - r); }

  // chi0(r) - chi0(2r); support [1/2, 2].
  Real chi(Real r) const { return chi0(r) - chi0(2 * r); }

  // Littlewood-Paley piece k at radius r: chi0 for k = 0, chi(2^-k r) after.
  Real lp_piece(int k, Real r) const {
    if (k == 0) return chi0(r);
    return chi(std::ldexp(r, -k));
  }

  // Annular bump: support (1/2, 2), equal to 1 on [2^-1/2, 2^1/2].
  Real theta(Real r) const {
    const Real sq = std::numbers::sqrt2_v<Real>;
    return step((r - Real(0.5)) / (1 / sq - Real(0.5))) * step((2 - r) / (2 - sq));
  }

  // One-dimensional cube bump: support [-3/5, 3/5], 1 on [-2/5, 2/5],
  // integer translates sum to 1.
  Real vartheta1(Real s) const { return step(5 * (Real(0.6) - std::abs(s))); }

  Real vartheta(const BasicCoord<Real>& s) const {
    Real v = 1;
    for (Index a = 0; a < s.size(); ++a) v *= vartheta1(s[a]);
    return v;
  }

  // Radial bump in dimension d: 1 for |w| <= 8 sqrt(d), 0 for |w| >= 16 sqrt(d).
  Real chi0_radial(Real w_norm, int d) const {
    return chi0(w_norm / (8 * std::sqrt(Real(d))));
  }

 private:
  Real s_;
};

using CutoffSpec = BasicCutoffSpec<double>;

template <typename Real = double>
BasicCutoffSpec<Real> make_cutoffs(Real smoothness_scale = 1) {
  return BasicCutoffSpec<Real>(smoothness_scale);
}

}  // namespace dlab
