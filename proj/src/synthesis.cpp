#include "dlab/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

#include "dlab/cutoffs.hpp"
#include "dlab/transform.hpp"

namespace dlab {

namespace {

constexpr long double kTwoPiL = 2.0L * std::numbers::pi_v<long double>;

struct Block {
  long long n = 0;
  size_t interval = 0;
  double lo = 0, hi = 0;          // frequency range met by the amplitude
  double core_lo = 0, core_hi = 0;  // stationary-phase image in x
};

double dpsi(const SpectralProfile& p, double xi) {
  if (xi == 0) {
    if (p.alpha > 1 || p.tau == 0) return 0;
    return std::numeric_limits<double>::infinity();
  }
  return p.tau * p.alpha * std::copysign(std::pow(std::abs(xi), p.alpha - 1), xi);
}

double curvature(const SpectralProfile& p, double abs_xi) {
  if (p.tau == 0 || p.alpha == 1) return 0;
  if (p.alpha == 2) return 2 * std::abs(p.tau);
  if (abs_xi == 0) return p.alpha < 2 ? std::numeric_limits<double>::infinity() : 0;
  return std::abs(p.tau) * p.alpha * std::abs(p.alpha - 1) * std::pow(abs_xi, p.alpha - 2);
}

struct Layout {
  SynthesisPlan plan;
  std::vector<Block> blocks;
};

Layout layout(const SpectralProfile& p, const SynthesisOptions& o) {
  if (p.support.empty()) throw ContractError("spectral profile has empty support");
  if (!(p.transition_width > 0)) throw ContractError("transition width must be positive");
  if (!(p.alpha > 0)) throw ContractError("alpha must be positive");
  double lo_all = std::numeric_limits<double>::infinity(), hi_all = -lo_all;
  double c_min = std::numeric_limits<double>::infinity(), c_max = 0;
  for (auto [a, b] : p.support) {
    if (!(a < b)) throw ContractError("support intervals must have lo < hi");
    lo_all = std::min(lo_all, a);
    hi_all = std::max(hi_all, b);
    const double rmin = (a < 0 && b > 0) ? 0.0 : std::min(std::abs(a), std::abs(b));
    const double rmax = std::max(std::abs(a), std::abs(b));
    for (double r : {rmin, rmax}) {
      const double c = curvature(p, r);
      c_min = std::min(c_min, c);
      c_max = std::max(c_max, c);
    }
  }
  if (!std::isfinite(c_max))
    throw ContractError("phase curvature is unbounded on the amplitude support");

  const double span = hi_all - lo_all;
  const double kappa = o.margin_constant;
  double w = 2 * span;
  if (c_max > 0) w = std::min(w, std::sqrt(10 * kappa / (1.2 * c_max)));
  const double delta = std::min(0.2 * w, p.transition_width);
  const double margin = kappa / delta;
  const double widen = 50 / delta;

  Layout out;
  const auto n_lo = static_cast<long long>(std::floor(lo_all / w - 0.6));
  const auto n_hi = static_cast<long long>(std::ceil(hi_all / w + 0.6));
  bool straddles = false;
  for (long long n = n_lo; n <= n_hi; ++n) {
    const double blo = (double(n) - 0.6) * w, bhi = (double(n) + 0.6) * w;
    for (size_t iv = 0; iv < p.support.size(); ++iv) {
    const double rlo = std::max(p.support[iv].first, blo);
    const double rhi = std::min(p.support[iv].second, bhi);
    if (!(rlo < rhi)) continue;
    Block blk{n, iv, rlo, rhi, 0, 0};
    double xa = -dpsi(p, rlo), xb = -dpsi(p, rhi);
    blk.core_lo = std::min(xa, xb);
    blk.core_hi = std::max(xa, xb);
    if (rlo < 0 && rhi > 0) {
      straddles = true;
      const double x0 = -dpsi(p, 0.0);
      if (!std::isfinite(x0)) throw ContractError("phase gradient is unbounded on the amplitude support");
      blk.core_lo = std::min(blk.core_lo, x0);
      blk.core_hi = std::max(blk.core_hi, x0);
    }
    out.blocks.push_back(blk);
    }
  }

  // Coarse lattices are safe only when |u| near any x comes from one region
  // of frequency; otherwise beating between distant pieces needs resolving.
  bool fine = straddles;
  if (!fine) {
    std::vector<const Block*> by_core;
    for (const auto& b : out.blocks) by_core.push_back(&b);
    std::sort(by_core.begin(), by_core.end(),
              [](const Block* a, const Block* b) { return a->core_lo < b->core_lo; });
    for (size_t i = 0; i < by_core.size() && !fine; ++i)
      for (size_t j = i + 1; j < by_core.size(); ++j) {
        if (by_core[j]->core_lo - widen > by_core[i]->core_hi + widen) break;
        if (by_core[j]->interval != by_core[i]->interval ||
            std::llabs(by_core[j]->n - by_core[i]->n) >= 2) {
          fine = true;
          break;
        }
      }
  }
  const double dx_fine = std::numbers::pi / (4 * span);
  const double dx_coarse = c_min * delta / 64;
  if (!fine && !(dx_coarse > dx_fine)) fine = true;

  auto& plan = out.plan;
  plan.dx = o.dx > 0 ? o.dx : (fine ? dx_fine : dx_coarse);
  plan.block_width = w;
  plan.margin = margin;
  plan.fine_lattice = fine;
  plan.blocks = static_cast<Index>(out.blocks.size());
  plan.x_min = std::numeric_limits<double>::infinity();
  plan.x_max = -plan.x_min;
  for (const auto& b : out.blocks) {
    plan.x_min = std::min(plan.x_min, b.core_lo - margin);
    plan.x_max = std::max(plan.x_max, b.core_hi + margin);
  }
  std::sort(out.blocks.begin(), out.blocks.end(),
            [](const Block& a, const Block& b) { return a.core_lo < b.core_lo; });
  return out;
}

Index next_pow2(Index n) {
  Index p = 16;
  while (p < n) p <<= 1;
  return p;
}

Index floor_mod(long long a, Index m) {
  long long r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

SynthesisPlan plan_synthesis(const SpectralProfile& profile, const SynthesisOptions& options) {
  return layout(profile, options).plan;
}

SynthesisStats synthesize(const SpectralProfile& profile, SampleSink& sink,
                          const SynthesisOptions& options) {
  const Layout lay = layout(profile, options);
  const auto& plan = lay.plan;
  const double dx = plan.dx;
  const double w = plan.block_width;
  const double margin = plan.margin;
  const CutoffSpec cut;
  auto& fft = detail::thread_fft<double>();

  SynthesisStats stats;
  stats.plan = plan;

  std::deque<cplx> acc;
  long long acc_first = 0;
  std::vector<cplx> chunk;
  auto flush_below = [&](long long limit) {
    const auto size = static_cast<long long>(acc.size());
    const long long n = limit >= acc_first + size ? size : limit - acc_first;
    if (n <= 0) return;
    chunk.assign(acc.begin(), acc.begin() + n);
    sink.consume(acc_first, chunk.data(), n, dx);
    stats.samples += n;
    acc.erase(acc.begin(), acc.begin() + n);
    acc_first += n;
  };

  std::vector<cplx> buf, out;
  for (const auto& b : lay.blocks) {
    const double xlo = b.core_lo - margin, xhi = b.core_hi + margin;
    const auto m0 = static_cast<long long>(std::floor(xlo / dx));
    const auto m1 = static_cast<long long>(std::ceil(xhi / dx));
    const Index Nb = next_pow2(static_cast<Index>(m1 - m0 + 1));
    if (Nb > options.max_block_length)
      throw TractabilityError("synthesis window needs " + std::to_string(Nb) +
                              " samples; raise max_block_length or coarsen dx");

    const long double h = kTwoPiL / (static_cast<long double>(Nb) * dx);
    const long double c = static_cast<long double>(b.n) * w;
    const auto jlo = static_cast<long long>(std::ceil((b.lo - c) / h));
    const auto jhi = static_cast<long long>(std::floor((b.hi - c) / h));
    const Index m0_mod = floor_mod(m0, Nb);

    buf.assign(Nb, cplx(0));
    for (long long j = jlo; j <= jhi; ++j) {
      const long double xi = c + static_cast<long double>(j) * h;
      const double xid = static_cast<double>(xi);
      const double a = profile.amplitude(xid) * cut.vartheta1(xid / w - double(b.n));
      ++stats.xi_evaluations;
      if (a == 0) continue;
      const Index jm = floor_mod(j, Nb);
      const Index q = static_cast<Index>((static_cast<__int128>(m0_mod) * jm) % Nb);
      long double ph = static_cast<long double>(profile.tau) *
                       std::pow(std::abs(xi), static_cast<long double>(profile.alpha));
      ph = std::fmod(ph, kTwoPiL) + kTwoPiL * static_cast<long double>(q) / static_cast<long double>(Nb);
      buf[jm] += std::polar(a, static_cast<double>(ph));
    }
    out.resize(Nb);
    fft.inv(out.data(), buf.data(), Nb);

    const long double dxc = static_cast<long double>(dx) * c;
    const double pref = static_cast<double>(h / kTwoPiL);
    for (Index i = 0; i < Nb; ++i) {
      const long double ang = std::fmod(static_cast<long double>(m0 + i) * dxc, kTwoPiL);
      out[i] *= std::polar(pref, static_cast<double>(ang));
      const double x = double(m0 + i) * dx;
      if (x < xlo + margin / 4 || x > xhi - margin / 4) stats.edge_mass += std::abs(out[i]) * dx;
    }

    if (acc.empty() || m0 > acc_first + static_cast<long long>(acc.size())) {
      flush_below(std::numeric_limits<long long>::max());
      acc.clear();
      acc_first = m0;
    } else {
      flush_below(m0);
    }
    const long long need = m0 + Nb - acc_first;
    if (need > static_cast<long long>(acc.size())) acc.resize(need, cplx(0));
    for (Index i = 0; i < Nb; ++i) acc[m0 - acc_first + i] += out[i];
  }
  flush_below(std::numeric_limits<long long>::max());
  return stats;
}

void SummarySink::consume(Index first, const cplx* values, Index count, double dx) {
  for (Index i = 0; i < count; ++i) {
    const double a = std::abs(values[i]);
    l1 += a * dx;
    l2sq += a * a * dx;
    if (p_ > 0) lp_sum += std::pow(a, p_) * dx;
    max_abs = std::max(max_abs, a);
    if (radius_ > 0 && std::abs(double(first + i) * dx) > radius_) {
      tail_l1 += a * dx;
      tail_max = std::max(tail_max, a);
    }
  }
}

void RunningMaxSink::consume(Index first, const cplx* values, Index count, double dx) {
  if (count <= 0) return;
  if (dx_ == 0) dx_ = dx;
  if (dx != dx_) throw ContractError("running maximum requires one lattice spacing");
  if (values_.empty()) base_ = first;
  if (first < base_) {
    values_.insert(values_.begin(), static_cast<size_t>(base_ - first), 0.0);
    base_ = first;
  }
  const Index end = first + count;
  if (end - base_ > static_cast<Index>(values_.size())) values_.resize(static_cast<size_t>(end - base_), 0.0);
  for (Index i = 0; i < count; ++i) {
    double& v = values_[static_cast<size_t>(first + i - base_)];
    v = std::max(v, std::abs(values[i]));
  }
}

double RunningMaxSink::lp_sum(double p) const {
  double s = 0;
  for (double v : values_) s += std::pow(v, p);
  return s * dx_;
}

double RunningMaxSink::max_abs() const {
  double m = 0;
  for (double v : values_) m = std::max(m, v);
  return m;
}

}  // namespace dlab
