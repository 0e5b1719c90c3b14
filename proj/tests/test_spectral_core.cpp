#include <atomic>
#include <cmath>
#include <random>
#include <cstring>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "dlab/cutoffs.hpp"
#include "dlab/errors.hpp"
#include "dlab/serialize.hpp"
#include "dlab/transform.hpp"
#include "oracles.hpp"

using namespace dlab;

namespace {

double l2sq(const Field& f) {
  double s = 0;
  for (Index i = 0; i < f.size(); ++i) s += std::norm(f[i]);
  return s;
}

Field random_physical(const GridSpec& g, std::uint64_t seed) {
  return Field(g, Representation::physical, oracle::random_samples(g.size(), seed));
}

}  // namespace

TEST_SUITE("spectral_core") {

TEST_CASE("grid invariants and lattices") {
  CHECK_THROWS_AS(GridSpec(1, 12, 1.0), ContractError);
  CHECK_THROWS_AS(GridSpec(1, 4, 1.0), ContractError);
  CHECK_THROWS_AS(GridSpec(4, 8, 1.0), ContractError);
  CHECK_THROWS_AS(GridSpec(1, 8, 0.0), ContractError);

  const GridSpec g(1, 16, 3.0);
  CHECK(g.x(0) == doctest::Approx(-3.0));
  CHECK(g.x(8) == doctest::Approx(0.0));
  CHECK(g.dx() == doctest::Approx(6.0 / 16));
  CHECK(g.dxi() == doctest::Approx(std::numbers::pi / 3));
  CHECK(g.nyquist() == doctest::Approx(std::numbers::pi * 16 / 6));
  // Wrapped storage exposes signed modes -N/2 .. N/2-1.
  CHECK(g.signed_mode(0) == 0);
  CHECK(g.signed_mode(7) == 7);
  CHECK(g.signed_mode(8) == -8);
  CHECK(g.signed_mode(15) == -1);
  CHECK(g.slot_of_mode(-1) == 15);

  const GridSpec g2(2, 8, 1.0);
  CHECK(g2.size() == 64);
  const auto p = g2.position(8 * 3 + 5);  // row-major: first axis slowest
  CHECK(p[0] == doctest::Approx(g2.x(3)));
  CHECK(p[1] == doctest::Approx(g2.x(5)));

  CHECK_THROWS_AS(Field(g, Representation::physical, Samples::Zero(15)), ContractError);
}

TEST_CASE("delta transforms to the constant cell width") {
  const GridSpec g(1, 32, 5.0);
  Samples s = Samples::Zero(32);
  s[16] = 1;  // x = 0
  const Field F = dft_forward(Field(g, Representation::physical, s));
  for (Index i = 0; i < F.size(); ++i) CHECK(std::abs(F[i] - cplx(g.dx())) < 1e-15);
  const Field back = dft_inverse(F);
  for (Index i = 0; i < back.size(); ++i) CHECK(std::abs(back[i] - s[i]) < 1e-14);
}

TEST_CASE("lattice exponential transforms to 2L at its mode") {
  const GridSpec g(1, 32, 2.0);
  const Index m0 = 5;
  const double xi0 = double(m0) * g.dxi();
  const Field f = Field::sample(g, Representation::physical, [&](const Coord& x) { return std::polar(1.0, xi0 * x[0]); });
  const Field F = dft_forward(f);
  for (Index i = 0; i < F.size(); ++i) {
    const cplx expect = g.signed_mode(i) == m0 ? cplx(2 * g.L) : cplx(0);
    CHECK(std::abs(F[i] - expect) < 1e-13);
  }
}

TEST_CASE("forward transform matches the direct-sum oracle") {
  struct Case {
    int d;
    Index N;
    double L;
  };
  for (auto c : {Case{1, 16, 1.7}, Case{1, 64, 9.0}, Case{2, 8, 2.0}, Case{2, 32, 4.5}}) {
    const GridSpec g(c.d, c.N, c.L);
    const Field f = random_physical(g, 11 + c.N);
    const auto ref = oracle::direct_forward(g, f.samples());
    const double rel = oracle::max_abs_diff(dft_forward(f).samples(), ref) / oracle::max_abs(ref);
    CAPTURE(g.describe());
    CHECK(rel <= 1e-12);
  }
}

TEST_CASE("inverse transform matches the direct-sum oracle and inverts") {
  const GridSpec g(1, 32, 3.0);
  const Field f = random_physical(g, 5);
  const Field F = dft_forward(f);
  std::vector<cplx> Fv(F.samples().data(), F.samples().data() + F.size());
  const auto ref = oracle::direct_inverse(g, Fv);
  CHECK(oracle::max_abs_diff(dft_inverse(F).samples(), ref) / oracle::max_abs(ref) <= 1e-12);

  const Field back = dft_inverse(F);
  double err = 0, mx = 0;
  for (Index i = 0; i < f.size(); ++i) {
    err = std::max(err, std::abs(back[i] - f[i]));
    mx = std::max(mx, std::abs(f[i]));
  }
  CHECK(err <= 1e-12 * mx);

  // Single mode: e^{i xi_m x} / (2L)^d.
  const GridSpec g2(2, 16, 1.5);
  Samples s = Samples::Zero(g2.size());
  const Index slot = 16 * g2.slot_of_mode(3) + g2.slot_of_mode(-2);
  s[slot] = 1;
  const Field wave = dft_inverse(Field(g2, Representation::frequency, s));
  const Coord xi = g2.frequency(slot);
  for (Index i = 0; i < wave.size(); ++i) {
    const cplx expect = std::polar(1.0, xi.dot(g2.position(i))) / std::pow(2 * g2.L, 2);
    CHECK(std::abs(wave[i] - expect) < 1e-15);
  }
}

TEST_CASE("representation tags are enforced") {
  const GridSpec g(1, 8, 1.0);
  const Field f = random_physical(g, 1);
  CHECK_THROWS_AS(dft_inverse(f), ContractError);
  CHECK_THROWS_AS(dft_forward(dft_forward(f)), ContractError);
  CHECK(to_physical(f).samples() == f.samples());
}

TEST_CASE("discrete Plancherel") {
  for (int d : {1, 2, 3}) {
    const GridSpec g(d, d == 3 ? 8 : 32, 2.5);
    const Field f = random_physical(g, 100 + d);
    const Field F = dft_forward(f);
    const double lhs = l2sq(f) * g.cell_volume();
    const double rhs = l2sq(F) * g.frequency_cell_volume() / std::pow(2 * std::numbers::pi, d);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * lhs);
  }
}

TEST_CASE("round trip over random fields in every dimension") {
  for (int d : {1, 2, 3}) {
    const GridSpec g(d, 16, 0.75);
    const Field f = random_physical(g, 7 * d);
    const Field back = dft_inverse(dft_forward(f));
    double err = 0, mx = 0;
    for (Index i = 0; i < f.size(); ++i) {
      err = std::max(err, std::abs(back[i] - f[i]));
      mx = std::max(mx, std::abs(f[i]));
    }
    CHECK(err <= 1e-12 * mx);
  }
}

TEST_CASE("apply_symbol") {
  const GridSpec g(1, 64, 8.0);
  const Field f = random_physical(g, 3);

  SUBCASE("unit symbol is the identity and keeps the representation") {
    const Field u = apply_symbol(f, [](const Coord&) { return cplx(1); });
    CHECK(u.representation() == Representation::physical);
    for (Index i = 0; i < f.size(); ++i) CHECK(std::abs(u[i] - f[i]) < 1e-12);
    const Field U = apply_symbol(dft_forward(f), [](const Coord&) { return cplx(1); });
    CHECK(U.representation() == Representation::frequency);
  }

  SUBCASE("plane wave is an eigenfunction of e^{it xi^2}") {
    const double xi0 = 3 * g.dxi(), t = 0.7;
    const Field w = Field::sample(g, Representation::physical, [&](const Coord& x) { return std::polar(1.0, xi0 * x[0]); });
    const Field u = apply_symbol(w, [&](const Coord& xi) { return std::polar(1.0, t * xi.squaredNorm()); });
    for (Index i = 0; i < u.size(); ++i) CHECK(std::abs(u[i] - std::polar(1.0, t * xi0 * xi0) * w[i]) < 1e-12);
  }

  SUBCASE("smooth bump matches direct frequency masking on an 8-point grid") {
    const GridSpec g8(1, 8, 1.0);
    const Field h = random_physical(g8, 9);
    const CutoffSpec c;
    auto bump = [&](const Coord& xi) { return cplx(c.chi0(xi.norm() / 3)); };
    auto F = oracle::direct_forward(g8, h.samples());
    for (Index i = 0; i < g8.size(); ++i) F[size_t(i)] *= bump(g8.frequency(i));
    const auto ref = oracle::direct_inverse(g8, F);
    CHECK(oracle::max_abs_diff(apply_symbol(h, bump).samples(), ref) / oracle::max_abs(ref) <= 1e-12);
  }

  SUBCASE("non-finite symbol values are reported with their frequency") {
    try {
      apply_symbol(f, [](const Coord& xi) { return xi[0] == 0 ? cplx(INFINITY) : cplx(1); });
      FAIL("expected an error");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("xi = (0)") != std::string::npos);
    }
  }

  SUBCASE("unimodular symbols preserve the discrete L2 norm") {
    const Field u = apply_symbol(f, [](const Coord& xi) { return std::polar(1.0, std::sin(5 * xi[0]) + xi[0] * xi[0]); });
    CHECK(std::abs(l2sq(u) - l2sq(f)) <= 1e-12 * l2sq(f));
  }
}

TEST_CASE("cutoff examples and supports") {
  const auto c = make_cutoffs();
  CHECK(c.theta(0.9) > 0);
  CHECK(c.theta(0.9) <= 1);
  CHECK(c.theta(1.0) == 1);
  CHECK(c.theta(0.4) == 0);
  CHECK(c.theta(2.1) == 0);
  for (double r = 0; r <= 3; r += 1e-3) {
    const double v = c.theta(r);
    CHECK(v >= 0);
    CHECK(v <= 1);
    if (r <= 0.5 || r >= 2) CHECK(v == 0);
    if (r >= std::sqrt(0.5) && r <= std::sqrt(2.0)) CHECK(v == 1);
  }
  for (double s = -1; s <= 1; s += 1e-3) {
    if (std::abs(s) >= 0.601) CHECK(c.vartheta1(s) == 0);
    if (std::abs(s) <= 0.399) CHECK(c.vartheta1(s) == 1);
  }
  for (int d : {1, 2, 3}) {
    const double sd = std::sqrt(double(d));
    CHECK(c.chi0_radial(8 * sd, d) == 1);
    CHECK(c.chi0_radial(16 * sd, d) == 0);
    CHECK(c.chi0_radial(12 * sd, d) > 0);
  }
  CHECK(c.chi0(1.0) == 1);
  CHECK(c.chi0(2.0) == 0);
  CHECK_THROWS_AS(make_cutoffs(0.0), ContractError);
  CHECK_THROWS_AS(make_cutoffs(-1.0), ContractError);
}

TEST_CASE("Littlewood-Paley pieces sum to one at random frequencies") {
  std::mt19937_64 rng(2024);
  for (double scale : {0.5, 1.0, 2.0}) {
    const auto c = make_cutoffs(scale);
    const int K = 12;
    std::uniform_real_distribution<double> u(0, std::ldexp(1.0, K - 1));
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
      const double r = u(rng);
      double s = 0;
      for (int k = 0; k <= K; ++k) s += c.lp_piece(k, r);
      worst = std::max(worst, std::abs(s - 1));
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("vartheta translates sum to one") {
  const CutoffSpec c;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-50, 50);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    Coord s(2);
    s << u(rng), u(rng);
    double sum = 0;
    for (long n0 = std::lround(s[0]) - 2; n0 <= std::lround(s[0]) + 2; ++n0)
      for (long n1 = std::lround(s[1]) - 2; n1 <= std::lround(s[1]) + 2; ++n1) {
        Coord sh(2);
        sh << s[0] - double(n0), s[1] - double(n1);
        sum += c.vartheta(sh);
      }
    worst = std::max(worst, std::abs(sum - 1));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("partition identities hold at every lattice point") {
  const CutoffSpec c;
  const GridSpec g(1, 1024, 3.0);
  double worst = 0;
  for (Index i = 0; i < g.size(); ++i) {
    const double r = std::abs(g.xi(i));
    double s = 0;
    for (int k = 0; k <= 12; ++k) s += c.lp_piece(k, r);
    worst = std::max(worst, std::abs(s - 1));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("adequacy helpers") {
  const GridSpec g(1, 64, 2 * std::numbers::pi);  // Nyquist 16
  CHECK_NOTHROW(require_adequate(g, 4.0));
  CHECK_THROWS_AS(require_adequate(g, 4.5), AliasingError);
  CHECK_NOTHROW(require_adequate(g, 8.0, 2.0));

  const Field smooth = Field::sample(g, Representation::physical, [](const Coord& x) { return cplx(std::exp(-x.squaredNorm())); });
  CHECK_NOTHROW(require_resolved(smooth, 2.0, 1e-12));
  const Field rough = Field::sample(g, Representation::physical, [&](const Coord& x) { return std::polar(1.0, 15 * x[0]); });
  CHECK_THROWS_AS(require_resolved(rough), AliasingError);
  CHECK(spectral_tail_fraction(rough, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("evaluate_at reproduces lattice samples") {
  const GridSpec g(1, 32, 4.0);
  const Field f = Field::sample(g, Representation::physical, [](const Coord& x) { return cplx(std::exp(-x.squaredNorm()), x[0]); });
  const Field F = dft_forward(f);
  for (Index n : {0, 5, 16, 31}) CHECK(std::abs(evaluate_at(F, g.position(n)) - f[n]) < 1e-12);
}

TEST_CASE("field serialization") {
  const GridSpec g(2, 8, 1.25);
  const Field f = dft_forward(random_physical(g, 4));
  std::stringstream ss;
  write_field(ss, f);
  const std::string bytes = ss.str();
  REQUIRE(bytes.size() == 8 + 4 + 8 + 8 + 1 + 64 * 16);
  CHECK(bytes.substr(0, 8) == "DLABFLD1");
  std::uint32_t d = 0;
  std::uint64_t N = 0;
  double L = 0;
  std::memcpy(&d, bytes.data() + 8, 4);
  std::memcpy(&N, bytes.data() + 12, 8);
  std::memcpy(&L, bytes.data() + 20, 8);
  CHECK(d == 2);
  CHECK(N == 8);
  CHECK(L == 1.25);
  CHECK(bytes[28] == 1);
  double re = 0;
  std::memcpy(&re, bytes.data() + 29, 8);
  CHECK(re == f[0].real());

  const Field back = read_field(ss);
  CHECK(back.grid() == g);
  CHECK(back.representation() == Representation::frequency);
  CHECK(back.samples() == f.samples());

  std::stringstream bad("NOTAFIELD");
  CHECK_THROWS_AS(read_field(bad), ContractError);
  std::stringstream truncated(bytes.substr(0, 100));
  CHECK_THROWS(read_field(truncated));
}

TEST_CASE("transforms are safe to call concurrently") {
  const GridSpec g(2, 64, 3.0);
  const Field f = random_physical(g, 8);
  const Field ref = dft_forward(f);
  std::atomic<int> mismatches{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < 4; ++w)
    pool.emplace_back([&] {
      for (int rep = 0; rep < 5; ++rep)
        if (!(dft_forward(f).samples() == ref.samples())) ++mismatches;
    });
  for (auto& t : pool) t.join();
  CHECK(mismatches == 0);
}

}  // TEST_SUITE
