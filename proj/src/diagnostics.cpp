#include "dlab/diagnostics.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "dlab/cutoffs.hpp"

namespace dlab {

namespace {

const CutoffSpec& cutoffs() {
  static const CutoffSpec c;
  return c;
}

DiagnosticRow judge(std::string name, std::string detail, double value, Relation rel, double threshold) {
  bool pass = false;
  switch (rel) {
    case Relation::less: pass = value < threshold; break;
    case Relation::at_most: pass = value <= threshold; break;
    case Relation::at_least: pass = value >= threshold; break;
  }
  return {std::move(name), std::move(detail), value, rel, threshold, pass};
}

std::string describe(std::initializer_list<std::pair<const char*, double>> kv) {
  std::ostringstream os;
  bool first = true;
  for (auto [k, v] : kv) {
    os << (first ? "" : " ") << k << "=" << v;
    first = false;
  }
  return os.str();
}

}  // namespace

const char* to_string(Relation r) {
  switch (r) {
    case Relation::less: return "<";
    case Relation::at_most: return "<=";
    case Relation::at_least: return ">=";
  }
  return "?";
}

BilinearInstance bilinear_instance(std::uint64_t seed, int modes) {
  if (modes < 1 || modes > 64) throw ContractError("modes must lie in [1, 64]");
  // Lattice spacing 1/8 puts the modes in |xi| <= 4, where the amplitude is 1.
  const GridSpec g(1, 256, 8 * std::numbers::pi);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto draw = [&] {
    Samples s = Samples::Zero(g.size());
    for (Index m = -modes / 2; m < modes - modes / 2; ++m) {
      const double re = normal(rng), im = normal(rng);
      s[g.slot_of_mode(m)] = cplx(re, im);
    }
    return Field(g, Representation::frequency, std::move(s));
  };
  BilinearInstance inst{draw(), draw(), {}, {0.0, 0.25, 0.5, 1.0}};
  inst.ep = make_elliptic_phase([](const Coord& xi) { return 0.5 * xi.squaredNorm(); },
                                [](const Coord& xi) { return cplx(cutoffs().chi0(xi.norm() / 4)); },
                                Coord::Constant(1, -8), Coord::Constant(1, 8));
  return inst;
}

double restriction_pair_ratio(double lambda, double p) {
  const GridSpec g = restriction_grid(lambda, 2);
  auto bump = [&](double centre) {
    return Field::sample(g, Representation::frequency,
                         [=](const Coord& xi) { return cplx(cutoffs().vartheta1((xi[0] - centre) * 2.4)); });
  };
  const EllipticPhase ep = make_elliptic_phase(
      [](const Coord& xi) { return xi.squaredNorm(); },
      [](const Coord& xi) { return cplx(std::abs(xi[0]) <= 1 ? 1.0 : 0.0); }, Coord::Constant(1, -1),
      Coord::Constant(1, 1));
  return bilinear_restriction_ratio(bump(-0.75), bump(0.75), p, lambda, ep);
}

FitResult restriction_fit(const std::vector<double>& lambdas, double p) {
  std::vector<SweepRecord> recs;
  for (double lambda : lambdas) {
    SweepRecord r;
    r.lambda = lambda;
    r.ratio = restriction_pair_ratio(lambda, p);
    recs.push_back(r);
  }
  return fit_loglog(recs);
}

DiagnosticRow diagnose_kernel(double alpha, int k, double t) {
  const double tail = kernel_tail_mass(k, t, DispersionParams{alpha, 1});
  return judge("kernel", describe({{"alpha", alpha}, {"k", k}, {"t", t}}), tail, Relation::less, 0.01);
}

DiagnosticRow diagnose_bilinear(std::uint64_t seed, double lambda) {
  const auto inst = bilinear_instance(seed);
  const double r = bilinear_reconstruction_residual(inst.f, inst.g, lambda, inst.t_samples, inst.ep);
  return judge("bilinear", describe({{"seed", double(seed)}, {"lambda", lambda}, {"modes", 64}}), r,
               Relation::at_most, 1e-10);
}

DiagnosticRow diagnose_restriction(const std::vector<double>& lambdas, double p) {
  const FitResult fit = restriction_fit(lambdas, p);
  return judge("restriction", describe({{"p", p}, {"lambda_min", lambdas.front()}, {"lambda_max", lambdas.back()}}),
               fit.slope, Relation::at_most, 0.05);
}

DiagnosticRow diagnose_envelope(double alpha, double lambda) {
  const auto spec = make_spec(Family::smoothing_f_lambda, lambda, DispersionParams{alpha, 1});
  const auto rep = envelope_check(spec);
  return judge("envelope", describe({{"alpha", alpha}, {"lambda", lambda}, {"peak_ratio", rep.peak_ratio}}),
               rep.tail_ratio, Relation::at_most, 1e-4);
}

DiagnosticRow diagnose_focusing(double alpha, double lambda) {
  const auto spec = make_spec(Family::smoothing_f_lambda, lambda, DispersionParams{alpha, 1});
  const auto rep = focusing_check(spec);
  return judge("focusing",
               describe({{"alpha", alpha}, {"lambda", lambda}, {"value_at_focus", rep.value_at_focus}}),
               rep.min_modulus_ratio, Relation::at_least, 0.1);
}

DiagnosticRow diagnose_ridge(double alpha, double lambda, double epsilon) {
  const auto spec = make_spec(Family::maximal_g_lambda, lambda, DispersionParams{alpha, 1}, epsilon);
  const auto rep = ridge_check(spec, epsilon);
  return judge("ridge", describe({{"alpha", alpha}, {"lambda", lambda}, {"epsilon", epsilon}}),
               rep.min_ridge_ratio, Relation::at_least, ridge_floor(epsilon));
}

}  // namespace dlab
