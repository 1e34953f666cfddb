#pragma once

// Synthetic scene and interference generation.
//
// Interference follows the separable 2-D LFM model: each component is a
// rect-windowed azimuth chirp times a rect-windowed range chirp with a
// carrier. Windows are half-open [center - duration/2, center + duration/2)
// in sample coordinates; a component whose window reaches past the image is
// generated truncated and flagged.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rfiscrub/core.hpp"
#include "rfiscrub/phase.hpp"

namespace rfiscrub {

struct GeneratedMixture {
  ComplexImage image;
  bool clipped = false; // some component window extended past the image
};

/// Renders the interference image for a mixture on an MxN sample lattice:
///   R[m,n] = sum_l a_l * rect_a(m) e^{-j*pi*Ka*(m-alpha)^2}
///                * rect_r(n) e^{+j*pi*(Kr*(n-beta)^2 + 2*fc*(n-beta))}
inline GeneratedMixture generate_lfm_mixture(const LfmMixture &mix,
                                             std::size_t rows,
                                             std::size_t cols) {
  mix.validate(rows, cols);
  GeneratedMixture out;
  out.image = ComplexImage(rows, cols);

  std::vector<cplx> az(rows), rg(cols);
  for (const LfmComponent &c : mix.components) {
    const double am_lo = c.azimuth_center - 0.5 * c.azimuth_duration;
    const double am_hi = c.azimuth_center + 0.5 * c.azimuth_duration;
    const double rn_lo = c.range_center - 0.5 * c.range_duration;
    const double rn_hi = c.range_center + 0.5 * c.range_duration;
    if (am_lo < 0.0 || am_hi > static_cast<double>(rows) || rn_lo < 0.0 ||
        rn_hi > static_cast<double>(cols)) {
      out.clipped = true;
    }

    const std::size_t m0 = static_cast<std::size_t>(
        std::max(0.0, std::ceil(am_lo)));
    const std::size_t n0 = static_cast<std::size_t>(
        std::max(0.0, std::ceil(rn_lo)));

    for (std::size_t m = m0; m < rows; ++m) {
      const double tm = static_cast<double>(m) - c.azimuth_center;
      if (!(static_cast<double>(m) < am_hi)) {
        break;
      }
      az[m] = chirp_phasor(0.0, mix.azimuth_fm_rate, tm, -1);
    }
    for (std::size_t n = n0; n < cols; ++n) {
      const double tn = static_cast<double>(n) - c.range_center;
      if (!(static_cast<double>(n) < rn_hi)) {
        break;
      }
      rg[n] = chirp_phasor(2.0 * c.carrier_freq, c.range_fm_rate, tn, +1);
    }
    for (std::size_t m = m0; m < rows && static_cast<double>(m) < am_hi;
         ++m) {
      for (std::size_t n = n0; n < cols && static_cast<double>(n) < rn_hi;
           ++n) {
        out.image(m, n) += c.amplitude * az[m] * rg[n];
      }
    }
  }
  return out;
}

/// Scales the interference so that energy(scene)/energy(scaled) hits the
/// requested signal-to-interference ratio in dB.
inline ComplexImage scale_to_sir(const ComplexImage &scene,
                                 const ComplexImage &interference,
                                 double sir_db) {
  if (scene.rows() != interference.rows() ||
      scene.cols() != interference.cols()) {
    throw DimensionError("scale_to_sir shape mismatch");
  }
  const double es = energy(scene);
  const double er = energy(interference);
  if (es <= 0.0 || er <= 0.0) {
    throw ParameterError(
        "scale_to_sir needs nonzero scene and interference energy");
  }
  const double c = std::sqrt(es / (er * std::pow(10.0, sir_db / 10.0)));
  ComplexImage out(interference.rows(), interference.cols());
  auto is = interference.samples();
  auto os = out.samples();
  for (std::size_t i = 0; i < is.size(); ++i) {
    os[i] = is[i] * c;
  }
  return out;
}

/// Adds circular complex Gaussian noise with per-sample variance set from
/// the image's own energy: var = energy(X) / (M*N*10^(snr_db/10)).
inline ComplexImage add_noise(const ComplexImage &X, double snr_db,
                              std::uint64_t seed) {
  const double e = energy(X);
  if (e <= 0.0) {
    throw ParameterError("add_noise needs an image with positive energy");
  }
  const double var = e / (static_cast<double>(X.size()) *
                          std::pow(10.0, snr_db / 10.0));
  const double sigma = std::sqrt(var / 2.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  ComplexImage out(X.rows(), X.cols());
  auto xs = X.samples();
  auto os = out.samples();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    os[i] = xs[i] + cplx{re, im};
  }
  return out;
}

enum class SceneKind { point_targets, speckle, from_file };

struct SceneSpec {
  SceneKind kind = SceneKind::speckle;
  // point_targets
  std::size_t target_count = 1;
  double amplitude_min = 1.0;
  double amplitude_max = 1.0;
  // speckle
  double mean_power = 1.0;
  // from_file
  std::string path;
};

namespace detail {

// Compact bandlimited blob used for point targets: separable windowed sinc,
// radius 4, peak 1 at the center.
inline double target_kernel_1d(double d) {
  constexpr double radius = 4.0;
  if (std::abs(d) > radius) {
    return 0.0;
  }
  const double x = 0.55 * d;
  const double s = x == 0.0 ? 1.0
                            : std::sin(std::numbers::pi * x) /
                                  (std::numbers::pi * x);
  const double h = std::cos(std::numbers::pi * d / (2.0 * radius));
  return s * h * h;
}

} // namespace detail

// forward declaration; the file-backed scene path needs the CIMG reader
// from image_io.hpp, which callers using from_file scenes must include
inline ComplexImage read_cimg(const std::string &path);

/// Deterministic synthetic scene. point_targets scatters bandlimited blobs
/// with random amplitude and phase; speckle draws every sample from a
/// circular complex Gaussian with the given mean power.
inline ComplexImage make_scene(const SceneSpec &spec, std::size_t rows,
                               std::size_t cols, std::uint64_t seed) {
  if (spec.kind == SceneKind::from_file) {
    ComplexImage img = read_cimg(spec.path);
    if (img.rows() != rows || img.cols() != cols) {
      throw DimensionError("scene file is " + std::to_string(img.rows()) +
                           "x" + std::to_string(img.cols()) + ", expected " +
                           std::to_string(rows) + "x" + std::to_string(cols));
    }
    return img;
  }

  ComplexImage out(rows, cols);
  std::mt19937_64 rng(seed);

  if (spec.kind == SceneKind::speckle) {
    if (!(spec.mean_power > 0.0)) {
      throw ParameterError("speckle mean_power must be positive");
    }
    std::normal_distribution<double> gauss(0.0,
                                           std::sqrt(spec.mean_power / 2.0));
    for (cplx &v : out.samples()) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      v = cplx{re, im};
    }
    return out;
  }

  if (spec.target_count == 0) {
    throw ParameterError("point_targets needs at least one target");
  }
  if (!(spec.amplitude_min > 0.0) ||
      !(spec.amplitude_max >= spec.amplitude_min)) {
    throw ParameterError("point target amplitude range is invalid");
  }
  std::uniform_int_distribution<std::size_t> row_pick(0, rows - 1);
  std::uniform_int_distribution<std::size_t> col_pick(0, cols - 1);
  std::uniform_real_distribution<double> amp(spec.amplitude_min,
                                             spec.amplitude_max);
  std::uniform_real_distribution<double> phase(0.0, 2.0);
  for (std::size_t t = 0; t < spec.target_count; ++t) {
    const std::size_t pm = row_pick(rng);
    const std::size_t pn = col_pick(rng);
    const cplx a = amp(rng) * unit_phasor(phase(rng));
    for (int dm = -4; dm <= 4; ++dm) {
      for (int dn = -4; dn <= 4; ++dn) {
        const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(pm) + dm;
        const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(pn) + dn;
        if (m < 0 || n < 0 || m >= static_cast<std::ptrdiff_t>(rows) ||
            n >= static_cast<std::ptrdiff_t>(cols)) {
          continue;
        }
        const double k = detail::target_kernel_1d(static_cast<double>(dm)) *
                         detail::target_kernel_1d(static_cast<double>(dn));
        out(static_cast<std::size_t>(m), static_cast<std::size_t>(n)) +=
            a * k;
      }
    }
  }
  return out;
}

struct SimulationSpec {
  std::size_t rows = 256;
  std::size_t cols = 256;
  std::uint64_t seed = 1;
  double sir_db = 0.0;
  std::optional<double> snr_db; // absent: no additive noise
  SceneSpec scene;
  LfmMixture mixture;

  void validate() const {
    if (rows < 16 || cols < 16) {
      throw ParameterError("simulation images must be at least 16x16");
    }
    mixture.validate(rows, cols);
  }
};

struct Simulation {
  ComplexImage clean;     // scene S
  ComplexImage rfi;       // scaled interference R
  ComplexImage corrupted; // S + R (+ noise)
  bool clipped = false;
};

/// Runs the full forward model. The seed fully determines the scene, and
/// (when enabled) the noise, through two decorrelated substreams.
inline Simulation simulate(const SimulationSpec &spec) {
  spec.validate();
  Simulation out;
  out.clean = make_scene(spec.scene, spec.rows, spec.cols, spec.seed);
  GeneratedMixture gm = generate_lfm_mixture(spec.mixture, spec.rows,
                                             spec.cols);
  out.clipped = gm.clipped;
  out.rfi = scale_to_sir(out.clean, gm.image, spec.sir_db);
  out.corrupted = add(out.clean, out.rfi);
  if (spec.snr_db) {
    out.corrupted = add_noise(out.corrupted, *spec.snr_db,
                              spec.seed ^ 0x9e3779b97f4a7c15ull);
  }
  return out;
}

} // namespace rfiscrub
