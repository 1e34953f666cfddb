#pragma once

// Quadratic-phase evaluation with compensated argument reduction.
//
// Chirp phases have the form pi*(f*t + K*t^2). For large images t^2 reaches
// ~1e10, and a plain double product would round away exactly the fractional
// part that decides the phasor. Each product is therefore split into
// high/low halves with fma and reduced mod 2 termwise; fmod is exact in IEEE
// arithmetic, so the reduced argument stays accurate to a few ulp no matter
// how many full turns the raw phase winds through.

#include <cmath>
#include <numbers>

#include "rfiscrub/core.hpp"

namespace rfiscrub {

/// (freq*t + rate*t^2) reduced mod 2, result in [-1, 1). Units are half
/// cycles: multiply by pi to get radians.
inline double quadratic_phase_mod2(double freq, double rate, double t) {
  // Exact split of t^2: t*t = t2 + t2_err.
  const double t2 = t * t;
  const double t2_err = std::fma(t, t, -t2);

  // Exact splits of the two products.
  const double p1 = freq * t;
  const double e1 = std::fma(freq, t, -p1);
  const double p2 = rate * t2;
  const double e2 = std::fma(rate, t2, -p2);

  // Two-sum of the high parts keeps their rounding error too.
  const double hi = p1 + p2;
  const double z = hi - p1;
  const double sum_err = (p1 - (hi - z)) + (p2 - z);

  const double lo = e1 + e2 + rate * t2_err + sum_err;

  double r = std::fmod(hi, 2.0) + std::fmod(lo, 2.0);
  r = std::fmod(r, 2.0);
  if (r < -1.0) {
    r += 2.0;
  } else if (r >= 1.0) {
    r -= 2.0;
  }
  return r;
}

/// e^{+j*pi*half_cycles}.
inline cplx unit_phasor(double half_cycles) {
  const double a = std::numbers::pi * half_cycles;
  return cplx{std::cos(a), std::sin(a)};
}

/// e^{sign * j * pi * (freq*t + rate*t^2)} with sign in {-1, +1}.
inline cplx chirp_phasor(double freq, double rate, double t, int sign) {
  const double th = quadratic_phase_mod2(freq, rate, t);
  return unit_phasor(sign >= 0 ? th : -th);
}

} // namespace rfiscrub
