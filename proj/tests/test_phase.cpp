#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <rfiscrub/phase.hpp>

#include "support/oracles.hpp"

using namespace rfiscrub;

namespace {

// Extended-precision reference for the reduced phase itself.
double phase_mod2_ld(double freq, double rate, double t) {
  const long double arg = static_cast<long double>(freq) * t +
                          static_cast<long double>(rate) * t * t;
  long double red = std::fmod(arg, 2.0L);
  if (red < -1.0L) {
    red += 2.0L;
  } else if (red >= 1.0L) {
    red -= 2.0L;
  }
  return static_cast<double>(red);
}

// Distance on the circle of circumference 2 (phases are half cycles mod 2).
double wrap_dist(double a, double b) {
  double d = std::fmod(a - b, 2.0);
  if (d < -1.0) {
    d += 2.0;
  } else if (d >= 1.0) {
    d -= 2.0;
  }
  return std::abs(d);
}

// Exact K*t^2 mod 2 for integer t, via the dyadic decomposition of K:
// K = M * 2^(e-53) with integer mantissa M, so the phase numerator M*t^2 is
// an exact 128-bit integer and the reduction is a bit shift.
double quadratic_phase_exact(double rate, std::uint64_t t) {
  REQUIRE(rate > 0.0);
  int e = 0;
  const double m = std::frexp(rate, &e); // rate = m * 2^e, m in [0.5, 1)
  const auto mant =
      static_cast<unsigned __int128>(std::ldexp(m, 53)); // 53-bit integer
  const int shift = 53 - e + 1; // denominator of the mod-2 residue
  REQUIRE(shift > 0);
  REQUIRE(shift < 127);
  const unsigned __int128 t2 = static_cast<unsigned __int128>(t) * t;
  const unsigned __int128 num = mant * t2; // exact: fits 128 bits here
  const unsigned __int128 red = num & ((static_cast<unsigned __int128>(1)
                                        << shift) -
                                       1);
  double frac = std::ldexp(static_cast<double>(red), -(shift - 1));
  if (frac >= 1.0) {
    frac -= 2.0;
  }
  return frac;
}

} // namespace

TEST_CASE("reduced phase on exact cases") {
  CHECK(quadratic_phase_mod2(0.0, 0.0, 123456.0) == 0.0);
  CHECK(quadratic_phase_mod2(0.5, 0.0, 1.0) == 0.5);
  CHECK(quadratic_phase_mod2(1.0, 0.0, 1.0) == -1.0); // 1 folds to -1
  CHECK(quadratic_phase_mod2(0.0, 0.5, 2.0) == 0.0);  // 0.5*4 = 2 ≡ 0
  CHECK(quadratic_phase_mod2(0.0, 0.25, 3.0) == 0.25); // 2.25 ≡ 0.25
  CHECK(quadratic_phase_mod2(-0.5, 0.0, 1.0) == -0.5);
}

TEST_CASE("reduced phase lies in [-1, 1)") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uf(-1.0, 1.0);
  std::uniform_real_distribution<double> ut(0.0, 65536.0);
  for (int i = 0; i < 2000; ++i) {
    const double r = quadratic_phase_mod2(uf(rng), uf(rng), ut(rng));
    CHECK(r >= -1.0);
    CHECK(r < 1.0);
  }
}

TEST_CASE("reduced phase matches extended-precision reference") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> uf(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 5000; ++i) {
    const double f = uf(rng);
    const double k = uf(rng);
    // indices up to 32k samples: t^2 reaches ~1e9, past where a naive double
    // product keeps the fractional phase but still within what the 80-bit
    // reference resolves below the tolerance
    const double t = std::floor(
        std::uniform_real_distribution<double>(0.0, 32768.0)(rng));
    const double got = quadratic_phase_mod2(f, k, t);
    const double want = phase_mod2_ld(f, k, t);
    worst = std::max(worst, wrap_dist(got, want));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("reduced phase survives huge indices") {
  // t = 10^7: t^2 = 10^14, where one ulp of the raw product K*t^2 is ~0.004
  // half-cycles. The compensated reduction must still resolve the phase to
  // near machine precision, verified against exact integer arithmetic.
  for (const double rate : {1.0 / 3.0, 0.1, 0.0072315, 0.9999}) {
    for (const std::uint64_t t : {9999991ull, 10000000ull, 12345678ull}) {
      const double got =
          quadratic_phase_mod2(0.0, rate, static_cast<double>(t));
      const double want = quadratic_phase_exact(rate, t);
      INFO("rate " << rate << " t " << t);
      CHECK(wrap_dist(got, want) < 1e-12);
    }
  }
}

TEST_CASE("unit phasor special values") {
  CHECK(unit_phasor(0.0) == cplx{1.0, 0.0});
  const cplx half = unit_phasor(0.5);
  CHECK(half.real() == Catch::Approx(0.0).margin(1e-15));
  CHECK(half.imag() == Catch::Approx(1.0).epsilon(1e-15));
  const cplx full = unit_phasor(-1.0);
  CHECK(full.real() == Catch::Approx(-1.0).epsilon(1e-15));
  CHECK(full.imag() == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("unit phasor has unit modulus") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    CHECK(std::abs(unit_phasor(u(rng))) == Catch::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("chirp phasor matches scalar oracle on both signs") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> uf(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double f = uf(rng);
    const double k = uf(rng);
    const double t = std::floor(
        std::uniform_real_distribution<double>(0.0, 4096.0)(rng));
    for (int sign : {-1, +1}) {
      const cplx got = chirp_phasor(f, k, t, sign);
      const cplx want = oracles::chirp_sample_ld(f, k, t, sign);
      worst = std::max(worst, std::abs(got - want));
    }
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("opposite signs give conjugate phasors") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uf(-1.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double f = uf(rng);
    const double k = uf(rng);
    const double t = std::floor(
        std::uniform_real_distribution<double>(0.0, 1024.0)(rng));
    const cplx plus = chirp_phasor(f, k, t, +1);
    const cplx minus = chirp_phasor(f, k, t, -1);
    // cos is even and sin odd, so the two evaluations share their bits.
    CHECK(plus == std::conj(minus));
  }
}
