#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>

#include "dlab/errors.hpp"

namespace dlab {

using Index = Eigen::Index;

enum class Representation { physical, frequency };

inline const char* to_string(Representation r) {
  return r == Representation::physical ? "physical" : "frequency";
}

// Point in R^d, d <= 3.
template <typename Real>
using BasicCoord = Eigen::Matrix<Real, Eigen::Dynamic, 1, 0, 3, 1>;

template <typename Real>
using BasicSamples = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using BasicSymbolFn = std::function<std::complex<Real>(const BasicCoord<Real>&)>;

// Periodic box [-L, L)^d sampled with N points per axis.
//
// Physical sample n on an axis sits at x_n = -L + n*2L/N. Frequency storage
// is wrapped: slot k holds the signed mode m = k for k < N/2 and m = k - N
// otherwise, at xi_m = m*pi/L. Multi-dimensional data is row-major with axis
// 0 slowest.
template <typename Real>
struct BasicGridSpec {
  int d = 1;
  Index N = 8;
  Real L = 1;

  BasicGridSpec() = default;
  BasicGridSpec(int dim, Index n, Real half_width) : d(dim), N(n), L(half_width) { validate(); }

  void validate() const {
    if (d < 1 || d > 3) throw ContractError("grid dimension must be 1, 2 or 3");
    if (N < 8 || (N & (N - 1)) != 0) throw ContractError("grid N must be a power of two >= 8");
    if (!(L > 0) || !std::isfinite(static_cast<double>(L)))
      throw ContractError("grid half-width L must be positive and finite");
  }

  Index size() const {
    Index s = 1;
    for (int a = 0; a < d; ++a) s *= N;
    return s;
  }
  Real dx() const { return 2 * L / Real(N); }
  Real dxi() const { return std::numbers::pi_v<Real> / L; }
  Real nyquist() const { return std::numbers::pi_v<Real> * Real(N) / (2 * L); }
  Real cell_volume() const { return std::pow(dx(), d); }
  Real frequency_cell_volume() const { return std::pow(dxi(), d); }

  Real x(Index n) const { return -L + Real(n) * dx(); }
  Index signed_mode(Index k) const { return k < N / 2 ? k : k - N; }
  Index slot_of_mode(Index m) const { return m >= 0 ? m : m + N; }
  Real xi(Index k) const { return Real(signed_mode(k)) * dxi(); }

  // Per-axis indices of a flat row-major index.
  std::array<Index, 3> unflatten(Index flat) const {
    std::array<Index, 3> idx{0, 0, 0};
    for (int a = d - 1; a >= 0; --a) {
      idx[a] = flat % N;
      flat /= N;
    }
    return idx;
  }

  BasicCoord<Real> position(Index flat) const {
    auto idx = unflatten(flat);
    BasicCoord<Real> p(d);
    for (int a = 0; a < d; ++a) p[a] = x(idx[a]);
    return p;
  }

  BasicCoord<Real> frequency(Index flat) const {
    auto idx = unflatten(flat);
    BasicCoord<Real> p(d);
    for (int a = 0; a < d; ++a) p[a] = xi(idx[a]);
    return p;
  }

  bool operator==(const BasicGridSpec& o) const { return d == o.d && N == o.N && L == o.L; }

  std::string describe() const {
    std::ostringstream os;
    os << "d=" << d << " N=" << N << " L=" << static_cast<double>(L);
    return os.str();
  }
};

// Immutable sampled complex function on a grid.
template <typename Real>
class BasicField {
 public:
  using Samples = BasicSamples<Real>;
  using Grid = BasicGridSpec<Real>;

  BasicField(Grid grid, Representation rep, Samples samples)
      : grid_(grid), rep_(rep), samples_(std::move(samples)) {
    grid_.validate();
    if (samples_.size() != grid_.size())
      throw ContractError("field sample count " + std::to_string(samples_.size()) +
                          " does not match N^d = " + std::to_string(grid_.size()));
  }

  // Samples a function of position (physical) or frequency (frequency).
  template <typename Fn>
  static BasicField sample(const Grid& grid, Representation rep, Fn&& fn) {
    grid.validate();
    Samples s(grid.size());
    for (Index i = 0; i < s.size(); ++i)
      s[i] = fn(rep == Representation::physical ? grid.position(i) : grid.frequency(i));
    return BasicField(grid, rep, std::move(s));
  }

  const Grid& grid() const { return grid_; }
  Representation representation() const { return rep_; }
  const Samples& samples() const { return samples_; }
  std::complex<Real> operator[](Index i) const { return samples_[i]; }
  Index size() const { return samples_.size(); }

  BasicField scaled(std::complex<Real> c) const { return BasicField(grid_, rep_, samples_ * c); }

 private:
  Grid grid_;
  Representation rep_;
  Samples samples_;
};

using GridSpec = BasicGridSpec<double>;
using Field = BasicField<double>;
using Coord = BasicCoord<double>;
using Samples = BasicSamples<double>;
using SymbolFn = BasicSymbolFn<double>;
using cplx = std::complex<double>;

}  // namespace dlab
