#pragma once

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

#include "dlab/grid.hpp"

namespace dlab {

namespace detail {

// One FFT object per thread; kissfft caches twiddles per length inside it.
template <typename Real>
Eigen::FFT<Real>& thread_fft() {
  thread_local Eigen::FFT<Real> fft = [] {
    Eigen::FFT<Real> f;
    f.SetFlag(Eigen::FFT<Real>::Unscaled);
    return f;
  }();
  return fft;
}

// In-place unscaled transform along every axis. inverse=true uses e^{+i}.
template <typename Real>
void fft_all_axes(const BasicGridSpec<Real>& g, BasicSamples<Real>& s, bool inverse) {
  using C = std::complex<Real>;
  auto& fft = thread_fft<Real>();
  const Index N = g.N;
  std::vector<C> in(N), out(N);
  for (int a = 0; a < g.d; ++a) {
    Index stride = 1;
    for (int b = a + 1; b < g.d; ++b) stride *= N;
    const Index lines = g.size() / N;
    for (Index l = 0; l < lines; ++l) {
      const Index base = (l / stride) * stride * N + (l % stride);
      for (Index i = 0; i < N; ++i) in[i] = s[base + i * stride];
      if (inverse)
        fft.inv(out.data(), in.data(), N);
      else
        fft.fwd(out.data(), in.data(), N);
      for (Index i = 0; i < N; ++i) s[base + i * stride] = out[i];
    }
  }
}

// (-1)^(k_0 + ... + k_{d-1}) for storage slot flat; equals (-1)^(sum of signed modes).
template <typename Real>
Real checker_sign(const BasicGridSpec<Real>& g, Index flat) {
  auto idx = g.unflatten(flat);
  Index s = 0;
  for (int a = 0; a < g.d; ++a) s += idx[a];
  return (s & 1) ? Real(-1) : Real(1);
}

}  // namespace detail

// f^(xi_m) = sum_n f(x_n) e^{-i<x_n, xi_m>} (2L/N)^d.
template <typename Real>
BasicField<Real> dft_forward(const BasicField<Real>& f) {
  if (f.representation() != Representation::physical)
    throw ContractError("dft_forward expects a physical-representation field");
  const auto& g = f.grid();
  BasicSamples<Real> s = f.samples();
  detail::fft_all_axes(g, s, false);
  const Real vol = g.cell_volume();
  for (Index i = 0; i < s.size(); ++i) s[i] *= vol * detail::checker_sign(g, i);
  return BasicField<Real>(g, Representation::frequency, std::move(s));
}

// f(x_n) = (2pi)^{-d} sum_m f^(xi_m) e^{i<x_n, xi_m>} (pi/L)^d.
template <typename Real>
BasicField<Real> dft_inverse(const BasicField<Real>& F) {
  if (F.representation() != Representation::frequency)
    throw ContractError("dft_inverse expects a frequency-representation field");
  const auto& g = F.grid();
  BasicSamples<Real> s = F.samples();
  for (Index i = 0; i < s.size(); ++i) s[i] *= detail::checker_sign(g, i);
  detail::fft_all_axes(g, s, true);
  s *= std::pow(Real(1) / (2 * g.L), g.d);
  return BasicField<Real>(g, Representation::physical, std::move(s));
}

template <typename Real>
BasicField<Real> to_frequency(const BasicField<Real>& f) {
  return f.representation() == Representation::frequency ? f : dft_forward(f);
}

template <typename Real>
BasicField<Real> to_physical(const BasicField<Real>& f) {
  return f.representation() == Representation::physical ? f : dft_inverse(f);
}

template <typename Real>
BasicField<Real> as_representation(const BasicField<Real>& f, Representation rep) {
  return rep == Representation::physical ? to_physical(f) : to_frequency(f);
}

// Multiplies f^ by m on the lattice; the output keeps the input's representation.
template <typename Real, typename Symbol>
BasicField<Real> apply_symbol(const BasicField<Real>& f, Symbol&& m) {
  const auto F = to_frequency(f);
  const auto& g = F.grid();
  BasicSamples<Real> s = F.samples();
  for (Index i = 0; i < s.size(); ++i) {
    const auto xi = g.frequency(i);
    const std::complex<Real> v = m(xi);
    if (!std::isfinite(static_cast<double>(v.real())) || !std::isfinite(static_cast<double>(v.imag()))) {
      std::ostringstream os;
      os << "symbol is not finite at xi = (";
      for (int a = 0; a < g.d; ++a) os << (a ? ", " : "") << static_cast<double>(xi[a]);
      os << ")";
      throw NumericalError(os.str());
    }
    s[i] *= v;
  }
  return as_representation(BasicField<Real>(g, Representation::frequency, std::move(s)),
                           f.representation());
}

// Radial symbol m(|xi|), evaluated once per lattice point.
template <typename Real, typename Radial>
BasicField<Real> apply_radial(const BasicField<Real>& f, Radial&& m) {
  return apply_symbol(f, [&](const BasicCoord<Real>& xi) { return std::complex<Real>(m(xi.norm())); });
}

// Spectral L^2 energy in slots whose |xi_a| exceeds fraction * Nyquist on some
// axis, relative to the total.
template <typename Real>
Real spectral_tail_fraction(const BasicField<Real>& f, Real fraction) {
  const auto F = to_frequency(f);
  const auto& g = F.grid();
  const Real cut = fraction * g.nyquist();
  Real total = 0, tail = 0;
  for (Index i = 0; i < F.size(); ++i) {
    const Real e = std::norm(F[i]);
    total += e;
    const auto xi = g.frequency(i);
    if (xi.cwiseAbs().maxCoeff() > cut) tail += e;
  }
  return total > 0 ? tail / total : Real(0);
}

// Errors unless the grid's Nyquist frequency is at least factor * max_freq.
template <typename Real>
void require_adequate(const BasicGridSpec<Real>& g, Real max_freq, Real factor = 4) {
  if (g.nyquist() < factor * max_freq) {
    std::ostringstream os;
    os << "grid " << g.describe() << " has Nyquist " << static_cast<double>(g.nyquist())
       << " < " << static_cast<double>(factor) << " x " << static_cast<double>(max_freq)
       << "; increase N to at least "
       << static_cast<double>(factor * max_freq * 2 * g.L / std::numbers::pi_v<Real>);
    throw AliasingError(os.str());
  }
}

// Errors when more than tol of the field's energy sits beyond Nyquist/factor.
template <typename Real>
void require_resolved(const BasicField<Real>& f, Real factor = 2, Real tol = Real(1e-20)) {
  const Real frac = spectral_tail_fraction(f, Real(1) / factor);
  if (frac > tol) {
    std::ostringstream os;
    os << "field on grid " << f.grid().describe() << " carries energy fraction "
       << static_cast<double>(frac) << " above Nyquist/" << static_cast<double>(factor)
       << "; refine the grid";
    throw AliasingError(os.str());
  }
}

// Direct evaluation of the trigonometric interpolant of a frequency field at
// an arbitrary point: (2pi)^{-d} sum_m F_m e^{i<x, xi_m>} (pi/L)^d.
template <typename Real>
std::complex<Real> evaluate_at(const BasicField<Real>& f, const BasicCoord<Real>& x) {
  const auto F = to_frequency(f);
  const auto& g = F.grid();
  std::complex<Real> acc = 0;
  for (Index i = 0; i < F.size(); ++i) {
    if (F[i] == std::complex<Real>(0)) continue;
    acc += F[i] * std::polar(Real(1), g.frequency(i).dot(x));
  }
  return acc * std::pow(Real(1) / (2 * g.L), g.d);
}

}  // namespace dlab
