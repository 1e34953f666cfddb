#pragma once

// Image quality metrics used to judge suppression results.

#include <algorithm>
#include <cmath>

#include "rfiscrub/core.hpp"

namespace rfiscrub {

/// Average gradient of the magnitude image: forward differences
/// gx = |X[m, n+1]| - |X[m, n]|, gy = |X[m+1, n]| - |X[m, n]| over the
/// (M-1) x (N-1) interior, averaged as sqrt((gx^2 + gy^2) / 2). Larger
/// means sharper; interference inflates it, oversmoothing deflates it.
inline double average_gradient(const ComplexImage &X) {
  if (X.rows() < 2 || X.cols() < 2) {
    throw DimensionError("average_gradient needs at least a 2x2 image");
  }
  double acc = 0.0;
  for (std::size_t m = 0; m + 1 < X.rows(); ++m) {
    for (std::size_t n = 0; n + 1 < X.cols(); ++n) {
      const double c = std::abs(X(m, n));
      const double gx = std::abs(X(m, n + 1)) - c;
      const double gy = std::abs(X(m + 1, n)) - c;
      acc += std::sqrt(0.5 * (gx * gx + gy * gy));
    }
  }
  return acc / (static_cast<double>(X.rows() - 1) *
                static_cast<double>(X.cols() - 1));
}

/// Relative recovery error in dB: 10*log10(||est - ref||^2 / ||ref||^2),
/// clamped at -300 dB so an exact recovery stays finite.
inline double relative_recovery_error_db(const ComplexImage &estimate,
                                         const ComplexImage &reference) {
  if (estimate.rows() != reference.rows() ||
      estimate.cols() != reference.cols()) {
    throw DimensionError("relative_recovery_error_db shape mismatch");
  }
  const double eref = energy(reference);
  if (eref <= 0.0) {
    throw ParameterError("reference image must have positive energy");
  }
  const double ediff = energy(subtract(estimate, reference));
  const double ratio = std::max(ediff / eref, 1e-30);
  return 10.0 * std::log10(ratio);
}

/// Signal-to-interference ratio in dB between a scene and an interference
/// image of the same shape.
inline double sir_db(const ComplexImage &scene,
                     const ComplexImage &interference) {
  if (scene.rows() != interference.rows() ||
      scene.cols() != interference.cols()) {
    throw DimensionError("sir_db shape mismatch");
  }
  const double es = energy(scene);
  const double er = energy(interference);
  if (es <= 0.0 || er <= 0.0) {
    throw ParameterError("sir_db needs nonzero scene and interference");
  }
  return 10.0 * std::log10(es / er);
}

} // namespace rfiscrub
