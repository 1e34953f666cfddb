#pragma once

// Chirp atom dictionaries over uniform (frequency, FM-rate) grids.
//
// Azimuth atoms carry e^{-j*pi*(f*m + K*m^2)}, range atoms the conjugate
// sign e^{+j*pi*(f*n + K*n^2)}. A 2-D atom is the outer product of one of
// each. The DictionaryOperator applies the synthesis map (coefficients ->
// signal) and its adjoint without materializing the atom matrix; when the
// frequency grid coincides with FFT bin frequencies it runs one FFT per rate
// instead of one dot product per atom.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "rfiscrub/core.hpp"
#include "rfiscrub/fft.hpp"
#include "rfiscrub/phase.hpp"

namespace rfiscrub {

enum class Axis { azimuth, range };

/// Uniform grid of candidate (frequency, FM rate) pairs for one axis.
/// Flat atom index k = rate_index * freq_count + freq_index.
struct ParameterGrid {
  Axis axis = Axis::azimuth;
  double freq_min = 0.0;
  double freq_max = 0.0;
  std::size_t freq_count = 0;
  double rate_min = 0.0;
  double rate_max = 0.0;
  std::size_t rate_count = 0;

  void validate() const {
    if (freq_count == 0 || rate_count == 0) {
      throw ParameterError("grid counts must be positive");
    }
    if (!(freq_min <= freq_max) || !(rate_min <= rate_max)) {
      throw ParameterError("grid bounds must satisfy min <= max");
    }
    if (freq_min < -1.0 || freq_max > 1.0) {
      throw ParameterError("grid frequencies must lie in [-1, 1]");
    }
    if (rate_min < -1.0 || rate_max > 1.0) {
      throw ParameterError("grid FM rates must lie in [-1, 1]");
    }
  }

  double freq(std::size_t i) const {
    return freq_count == 1 ? freq_min
                           : freq_min + static_cast<double>(i) *
                                            (freq_max - freq_min) /
                                            static_cast<double>(freq_count - 1);
  }

  double rate(std::size_t j) const {
    return rate_count == 1 ? rate_min
                           : rate_min + static_cast<double>(j) *
                                            (rate_max - rate_min) /
                                            static_cast<double>(rate_count - 1);
  }

  std::size_t atom_count() const { return freq_count * rate_count; }

  std::size_t flat_index(std::size_t rate_idx, std::size_t freq_idx) const {
    return rate_idx * freq_count + freq_idx;
  }
  std::size_t rate_index(std::size_t k) const { return k / freq_count; }
  std::size_t freq_index(std::size_t k) const { return k % freq_count; }
};

/// Default search grid for a length-L axis: all L FFT bin frequencies and
/// L+1 FM rates spanning +-1/L (spacing 2/L^2, fine enough to keep residual
/// quadratic phase under a quarter cycle across the aperture).
inline ParameterGrid default_grid(Axis axis, std::size_t length) {
  if (length == 0) {
    throw DimensionError("grid length must be positive");
  }
  const double L = static_cast<double>(length);
  ParameterGrid g;
  g.axis = axis;
  g.freq_min = -1.0;
  g.freq_max = length == 1 ? -1.0 : -1.0 + 2.0 * (L - 1.0) / L;
  g.freq_count = length;
  g.rate_min = -1.0 / L;
  g.rate_max = 1.0 / L;
  g.rate_count = length + 1;
  return g;
}

/// True when the grid's frequencies are exactly the FFT bin layout for the
/// given signal length: count == length, start at -1, spacing 2/length.
inline bool fft_aligned(const ParameterGrid &g, std::size_t length) {
  if (g.freq_count != length) {
    return false;
  }
  if (std::abs(g.freq_min + 1.0) > 1e-12) {
    return false;
  }
  if (length == 1) {
    return true;
  }
  const double spacing =
      (g.freq_max - g.freq_min) / static_cast<double>(length - 1);
  return std::abs(spacing - 2.0 / static_cast<double>(length)) < 1e-12;
}

inline int atom_sign(Axis axis) { return axis == Axis::azimuth ? -1 : +1; }

/// Azimuth atom of the given length: entry m = e^{-j*pi*(freq*m + rate*m^2)}.
inline std::vector<cplx> azimuth_atom(double freq, double rate,
                                      std::size_t length) {
  if (length == 0) {
    throw DimensionError("atom length must be positive");
  }
  std::vector<cplx> a(length);
  for (std::size_t m = 0; m < length; ++m) {
    a[m] = chirp_phasor(freq, rate, static_cast<double>(m), -1);
  }
  return a;
}

/// Range atom of the given length: entry n = e^{+j*pi*(freq*n + rate*n^2)}.
inline std::vector<cplx> range_atom(double freq, double rate,
                                    std::size_t length) {
  if (length == 0) {
    throw DimensionError("atom length must be positive");
  }
  std::vector<cplx> a(length);
  for (std::size_t n = 0; n < length; ++n) {
    a[n] = chirp_phasor(freq, rate, static_cast<double>(n), +1);
  }
  return a;
}

/// Separable 2-D atom: image[m][n] = azimuth[m] * range[n].
inline ComplexImage kron_atom(const std::vector<cplx> &azimuth,
                              const std::vector<cplx> &range) {
  if (azimuth.empty() || range.empty()) {
    throw DimensionError("kron_atom factors must be non-empty");
  }
  ComplexImage out(azimuth.size(), range.size());
  for (std::size_t m = 0; m < azimuth.size(); ++m) {
    for (std::size_t n = 0; n < range.size(); ++n) {
      out(m, n) = azimuth[m] * range[n];
    }
  }
  return out;
}

/// Matrix-free synthesis operator for one axis's chirp dictionary.
///
/// With unit_norm set (the default, what the sparse solver expects) every
/// atom is scaled to unit Euclidean norm; without it atoms keep their raw
/// unit-modulus entries and norm sqrt(length).
class DictionaryOperator {
public:
  enum class Mode { dense, dechirp_fft };

  DictionaryOperator(const ParameterGrid &grid, std::size_t length,
                     Mode requested = Mode::dechirp_fft, bool unit_norm = true)
      : grid_(grid), length_(length), unit_norm_(unit_norm) {
    grid_.validate();
    if (length_ == 0) {
      throw DimensionError("signal length must be positive");
    }
    // The dechirp-FFT factorization only holds when the frequency grid is
    // exactly the FFT bin layout; anything else falls back to dense.
    mode_ = (requested == Mode::dechirp_fft && fft_aligned(grid_, length_))
                ? Mode::dechirp_fft
                : Mode::dense;
    if (mode_ == Mode::dechirp_fft) {
      plan_ = std::make_unique<Fft>(length_);
    }
  }

  const ParameterGrid &grid() const { return grid_; }
  std::size_t length() const { return length_; }
  std::size_t atom_count() const { return grid_.atom_count(); }
  Mode mode() const { return mode_; }
  bool unit_norm() const { return unit_norm_; }

  double norm_factor() const {
    return unit_norm_ ? 1.0 / std::sqrt(static_cast<double>(length_)) : 1.0;
  }

  std::vector<cplx> atom(std::size_t k) const {
    if (k >= atom_count()) {
      throw ParameterError("atom index " + std::to_string(k) +
                           " outside dictionary of " +
                           std::to_string(atom_count()) + " atoms");
    }
    const double f = grid_.freq(grid_.freq_index(k));
    const double r = grid_.rate(grid_.rate_index(k));
    std::vector<cplx> a = grid_.axis == Axis::azimuth
                              ? azimuth_atom(f, r, length_)
                              : range_atom(f, r, length_);
    const double nf = norm_factor();
    if (nf != 1.0) {
      for (cplx &v : a) {
        v *= nf;
      }
    }
    return a;
  }

  /// Synthesis: x = sum_k h[k] * atom_k.
  std::vector<cplx> apply(std::span<const cplx> h) const {
    if (h.size() != atom_count()) {
      throw DimensionError("coefficient vector has " +
                           std::to_string(h.size()) + " entries, expected " +
                           std::to_string(atom_count()));
    }
    return mode_ == Mode::dechirp_fft ? apply_fft(h) : apply_dense(h);
  }

  /// Adjoint: c[k] = <atom_k, y> with the conjugation on the atom.
  std::vector<cplx> adjoint(std::span<const cplx> y) const {
    if (y.size() != length_) {
      throw DimensionError("signal has " + std::to_string(y.size()) +
                           " samples, expected " + std::to_string(length_));
    }
    return mode_ == Mode::dechirp_fft ? adjoint_fft(y) : adjoint_dense(y);
  }

private:
  std::vector<cplx> apply_dense(std::span<const cplx> h) const {
    std::vector<cplx> x(length_, cplx{0.0, 0.0});
    const int sign = atom_sign(grid_.axis);
    for (std::size_t j = 0; j < grid_.rate_count; ++j) {
      const double r = grid_.rate(j);
      for (std::size_t i = 0; i < grid_.freq_count; ++i) {
        const cplx c = h[grid_.flat_index(j, i)];
        if (c == cplx{0.0, 0.0}) {
          continue;
        }
        const double f = grid_.freq(i);
        for (std::size_t t = 0; t < length_; ++t) {
          x[t] += c * chirp_phasor(f, r, static_cast<double>(t), sign);
        }
      }
    }
    const double nf = norm_factor();
    if (nf != 1.0) {
      for (cplx &v : x) {
        v *= nf;
      }
    }
    return x;
  }

  std::vector<cplx> adjoint_dense(std::span<const cplx> y) const {
    std::vector<cplx> c(atom_count());
    const int sign = atom_sign(grid_.axis);
    const double nf = norm_factor();
    for (std::size_t j = 0; j < grid_.rate_count; ++j) {
      const double r = grid_.rate(j);
      for (std::size_t i = 0; i < grid_.freq_count; ++i) {
        const double f = grid_.freq(i);
        cplx acc{0.0, 0.0};
        for (std::size_t t = 0; t < length_; ++t) {
          acc += std::conj(chirp_phasor(f, r, static_cast<double>(t), sign)) *
                 y[t];
        }
        c[grid_.flat_index(j, i)] = acc * nf;
      }
    }
    return c;
  }

  // Fast paths. With FFT-aligned frequencies f_i = -1 + 2i/L the frequency
  // phasor splits as e^{-j*pi*f_i*t} = (-1)^t e^{-j*2*pi*i*t/L}, so each rate
  // row reduces to one dechirp multiply plus one length-L DFT.

  std::vector<cplx> adjoint_fft(std::span<const cplx> y) const {
    std::vector<cplx> c(atom_count());
    std::vector<cplx> z(length_);
    const int sign = atom_sign(grid_.axis);
    const double nf = norm_factor();
    for (std::size_t j = 0; j < grid_.rate_count; ++j) {
      const double r = grid_.rate(j);
      for (std::size_t t = 0; t < length_; ++t) {
        // conj(atom) contributes e^{-sign*j*pi*r*t^2} and the (-1)^t split
        cplx v = y[t] * chirp_phasor(0.0, r, static_cast<double>(t), -sign);
        if (t & 1u) {
          v = -v;
        }
        z[t] = v;
      }
      if (sign < 0) {
        plan_->inverse(z.data()); // sum_t z[t] e^{+j*2*pi*i*t/L}
      } else {
        plan_->forward(z.data()); // sum_t z[t] e^{-j*2*pi*i*t/L}
      }
      for (std::size_t i = 0; i < length_; ++i) {
        c[grid_.flat_index(j, i)] = z[i] * nf;
      }
    }
    return c;
  }

  std::vector<cplx> apply_fft(std::span<const cplx> h) const {
    std::vector<cplx> x(length_, cplx{0.0, 0.0});
    std::vector<cplx> row(length_);
    const int sign = atom_sign(grid_.axis);
    for (std::size_t j = 0; j < grid_.rate_count; ++j) {
      const double r = grid_.rate(j);
      bool any = false;
      for (std::size_t i = 0; i < length_; ++i) {
        row[i] = h[grid_.flat_index(j, i)];
        any = any || row[i] != cplx{0.0, 0.0};
      }
      if (!any) {
        continue;
      }
      if (sign < 0) {
        plan_->forward(row.data()); // sum_i h_i e^{-j*2*pi*i*t/L}
      } else {
        plan_->inverse(row.data());
      }
      for (std::size_t t = 0; t < length_; ++t) {
        cplx v = row[t] * chirp_phasor(0.0, r, static_cast<double>(t), sign);
        if (t & 1u) {
          v = -v;
        }
        x[t] += v;
      }
    }
    const double nf = norm_factor();
    if (nf != 1.0) {
      for (cplx &v : x) {
        v *= nf;
      }
    }
    return x;
  }

  ParameterGrid grid_;
  std::size_t length_ = 0;
  bool unit_norm_ = true;
  Mode mode_ = Mode::dense;
  std::unique_ptr<Fft> plan_;
};

} // namespace rfiscrub
