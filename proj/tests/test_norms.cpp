#include <cmath>
#include <numbers>

#include "doctest.h"
#include "dlab/cutoffs.hpp"
#include "dlab/decomposition.hpp"
#include "dlab/errors.hpp"
#include "dlab/norms.hpp"
#include "dlab/transform.hpp"
#include "oracles.hpp"

using namespace dlab;

namespace {

const double pi = std::numbers::pi;

Field gaussian(const GridSpec& g) {
  return Field::sample(g, Representation::physical, [](const Coord& x) { return cplx(std::exp(-x.squaredNorm() / 2)); });
}

Trajectory constant_trajectory(const Field& f, std::vector<double> ts, double t_end) {
  Trajectory tr;
  tr.grid = f.grid();
  tr.t_samples = ts;
  tr.frames.assign(ts.size(), to_physical(f));
  tr.t_begin = ts.front();
  tr.t_end = t_end;
  return tr;
}

}  // namespace

TEST_SUITE("norms") {

TEST_CASE("lp norm of a constant") {
  for (int d : {1, 2, 3}) {
    const GridSpec g(d, 8, 1.5);
    const cplx c(0.6, -0.8);
    const Field f(g, Representation::physical, Samples::Constant(g.size(), c));
    for (double p : {1.0, 2.0, 3.5}) CHECK(lp_norm(f, p) == doctest::Approx(std::pow(3.0, d / p)).epsilon(1e-13));
    CHECK(lp_norm(f, kInf) == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(lp_norm(gaussian(GridSpec(1, 8, 1)), 0.5), ContractError);
}

TEST_CASE("lp norm agrees with Plancherel and a quadrature oracle") {
  const GridSpec g(1, 512, 20);
  const Field f = gaussian(g);
  const Field F = dft_forward(f);
  double s = 0;
  for (Index i = 0; i < F.size(); ++i) s += std::norm(F[i]);
  const double via_freq = std::sqrt(s * g.dxi() / (2 * pi));
  CHECK(std::abs(lp_norm(f, 2) - via_freq) <= 1e-10 * via_freq);

  for (double p : {2.0, 3.0, 6.0}) {
    const double oracle = std::pow(oracle::integrate([&](double x) { return cplx(std::exp(-p * x * x / 2)); }, -20, 20, 200).real(), 1 / p);
    CHECK(std::abs(lp_norm(f, p) - oracle) <= 1e-8 * oracle);
  }
  CHECK(lp_norm(f, 2) == doctest::Approx(std::pow(pi, 0.25)).epsilon(1e-10));
}

TEST_CASE("lp norm is homogeneous and satisfies Hoelder") {
  const GridSpec g(2, 32, 3);
  const Field f(g, Representation::physical, oracle::random_samples(g.size(), 17));
  const cplx c(-2.5, 1.25);
  for (double p : {1.0, 2.0, 4.0, kInf}) CHECK(std::abs(lp_norm(f.scaled(c), p) - std::abs(c) * lp_norm(f, p)) <= 1e-12 * std::abs(c) * lp_norm(f, p));
  const double vol = std::pow(2 * g.L, g.d);
  for (auto [p, r] : {std::pair{1.0, 2.0}, std::pair{2.0, 6.0}, std::pair{3.0, kInf}}) {
    const double factor = r == kInf ? std::pow(vol, 1 / p) : std::pow(vol, 1 / p - 1 / r);
    CHECK(lp_norm(f, p) <= factor * lp_norm(f, r) * (1 + 1e-10));
  }
}

TEST_CASE("mixed space-time norm") {
  const GridSpec g(1, 64, 4);
  const Field f = gaussian(g);
  const auto single = constant_trajectory(f, {0.0}, 1.0);
  CHECK(mixed_spacetime_norm(single, 4) == doctest::Approx(lp_norm(f, 4)).epsilon(1e-14));
  const auto flat = constant_trajectory(f, {0.0, 0.5, 1.0, 1.5}, 2.5);
  CHECK(mixed_spacetime_norm(flat, 3) == doctest::Approx(lp_norm(f, 3) * std::pow(2.5, 1.0 / 3)).epsilon(1e-13));
  CHECK(mixed_spacetime_norm(flat, kInf) == doctest::Approx(lp_norm(f, kInf)));

  // Doubling the time resolution on a smooth trajectory.
  const GridSpec g2(1, 512, 32);
  const Field h = gaussian(g2);
  auto run = [&](int n) {
    std::vector<double> ts;
    for (int j = 0; j < n; ++j) ts.push_back(double(j) / n);
    return mixed_spacetime_norm(evolve_trajectory(h, ts, DispersionParams{2, 1}, std::pair{0.0, 1.0}), 6);
  };
  const double coarse = run(64), fine = run(128);
  CHECK(std::abs(fine / coarse - 1) < 0.01);
  CHECK_THROWS_AS(mixed_spacetime_norm(Trajectory{}, 2), ContractError);
}

TEST_CASE("maximal norm") {
  const GridSpec g(1, 512, 32);
  const Field h = gaussian(g);
  const auto one = evolve_trajectory(h, {0.3}, DispersionParams{2, 1});
  CHECK(maximal_norm(one, 4) == doctest::Approx(lp_norm(one.frames[0], 4)).epsilon(1e-14));

  std::vector<double> ts;
  for (int j = 0; j < 32; ++j) ts.push_back(j / 32.0);
  const auto tr = evolve_trajectory(h, ts, DispersionParams{2, 1});
  const double m = maximal_norm(tr, 4);
  for (const auto& fr : tr.frames) CHECK(m >= lp_norm(fr, 4) - 1e-12);

  std::vector<double> fine;
  for (int j = 0; j < 64; ++j) fine.push_back(j / 64.0);
  const double mf = maximal_norm(evolve_trajectory(h, fine, DispersionParams{2, 1}), 4);
  CHECK(std::abs(mf / m - 1) < 0.01);
}

TEST_CASE("Sobolev norm") {
  const GridSpec g(1, 1024, 64);
  const Field f = gaussian(g);
  CHECK(sobolev_norm(f, 3, 0) == lp_norm(f, 3));

  const double xi0 = 20 * g.dxi();
  const Field w = Field::sample(g, Representation::physical, [&](const Coord& x) { return std::polar(1.0, xi0 * x[0]); });
  CHECK(sobolev_norm(w, 4, 2) == doctest::Approx((1 + xi0 * xi0) * lp_norm(w, 4)).epsilon(1e-12));

  // Annulus equivalence with lambda^beta.
  const CutoffSpec c;
  const double lambda = 16;
  const GridSpec wide(1, 4096, 64);  // Nyquist about 100
  const Field a = dft_inverse(Field::sample(wide, Representation::frequency, [&](const Coord& xi) { return cplx(c.theta(xi.norm() / lambda)); }));
  for (double beta : {-1.0, 0.5, 2.0}) {
    const double ratio = sobolev_norm(a, 4, beta) / (std::pow(lambda, beta) * lp_norm(a, 4));
    CAPTURE(beta);
    CHECK(ratio >= std::pow(2.0, -std::abs(beta)) * 0.95);
    CHECK(ratio <= std::pow(2.0, std::abs(beta)) * 1.05);
  }
}

TEST_CASE("Besov norm") {
  // The partition is exactly 1 on band k only at |xi| = 2^k, so a plane wave
  // at xi = 8 is the single-band example.
  const GridSpec g(1, 1024, 8 * pi);  // lattice spacing 1/8, Nyquist 64
  const Field single = Field::sample(g, Representation::physical, [](const Coord& x) { return std::polar(1.0, 8 * x[0]); });
  const double b = besov_norm(single, 4, 0.5, 2);
  CHECK(std::abs(b - std::pow(2.0, 1.5) * lp_norm(single, 4)) <= 1e-10 * b);

  const Field r = dft_inverse(Field::sample(g, Representation::frequency, [](const Coord& xi) { return cplx(std::exp(-xi.squaredNorm() / 200)); }));
  const double b2 = besov_norm(r, 2, 0, 2);
  CHECK(b2 >= 0.5 * lp_norm(r, 2));
  CHECK(b2 <= 2.0 * lp_norm(r, 2));
  double prev = 0;
  for (double beta : {-1.0, 0.0, 0.5, 1.0}) {
    const double v = besov_norm(r, 3, beta, 1);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK_THROWS_AS(besov_norm(r, 2, 0, 0.5), ContractError);
}

TEST_CASE("norm dispatch") {
  const GridSpec g(1, 64, 4);
  const Field f = gaussian(g);
  const auto tr = constant_trajectory(f, {0.0, 0.5}, 1.0);
  CHECK(norm(f, NormSpec{NormKind::lp, 3}) == lp_norm(f, 3));
  CHECK(norm(tr, NormSpec{NormKind::maximal, 3}) == maximal_norm(tr, 3));
  CHECK_THROWS_AS(norm(f, NormSpec{NormKind::maximal, 3}), ContractError);
  CHECK_THROWS_AS(norm(tr, NormSpec{NormKind::sobolev, 3}), ContractError);
  CHECK_THROWS_AS((NormSpec{NormKind::besov, 2, 0, 0.5}.validate()), ContractError);
}

TEST_CASE("exponent formulas") {
  CHECK(smoothing_exponent({2, 1, 6}) == doctest::Approx(1.0 / 3));
  CHECK(smoothing_exponent({2, 1, 4}) == doctest::Approx(0.0));
  CHECK(smoothing_exponent({2, 3, 1e12}) == doctest::Approx(3.0));
  CHECK(maximal_exponent({2, 1, 4}) == doctest::Approx(0.5));
  CHECK(maximal_exponent({2, 1, 2}) == doctest::Approx(0.0));
  CHECK(maximal_exponent({3, 1, 6}) == doctest::Approx(1.0));
  CHECK(airy_exponent(4) == doctest::Approx(0.0));
  CHECK(airy_exponent(6) == doctest::Approx(0.5));
  CHECK(airy_exponent(12) == doctest::Approx(1.0));
  CHECK(admissibility_threshold(1) == doctest::Approx(4.0));
  CHECK(admissibility_threshold(2) == 10.0 / 3);
  CHECK(admissibility_threshold(1000) == doctest::Approx(2.0).epsilon(0.01));
  CHECK(maximal_necessary_exponent({2, 1, 4}) == doctest::Approx(0.25));
  CHECK(maximal_necessary_exponent({3, 1, 6}) == doctest::Approx(0.25));
  CHECK(is_admissible({2, 1, 6}));
  CHECK_FALSE(is_admissible({2, 1, 4}));

  for (double a : {1.5, 2.0, 3.0})
    for (int d : {1, 2, 3})
      for (double p : {4.5, 6.0, 10.0}) {
        const ExponentQuery q{a, d, p};
        CHECK(std::abs(smoothing_exponent(q) + a / p - maximal_exponent(q)) <= 1e-14);
        CHECK(maximal_necessary_exponent(q) < maximal_exponent(q));
      }
}

}  // TEST_SUITE
