#pragma once

// Iterative radix-2 FFT with a Bluestein fallback for arbitrary lengths.
//
// Transforms are unnormalized: forward uses e^{-j*2*pi*k*n/N}, inverse uses
// e^{+j*2*pi*k*n/N}, and inverse(forward(x)) = N*x. Callers that need the
// unitary or 1/N convention scale themselves. Bluestein's chirp phases are
// built from k^2 mod 2N computed in exact integer arithmetic, so the phases
// stay accurate for any transform length.

#include <cstdint>
#include <memory>
#include <vector>

#include "rfiscrub/core.hpp"
#include "rfiscrub/phase.hpp"

namespace rfiscrub {

class Fft {
public:
  explicit Fft(std::size_t n) : n_(n) {
    if (n == 0) {
      throw DimensionError("FFT length must be positive");
    }
    if (is_pow2(n)) {
      init_pow2(n);
    } else {
      init_bluestein(n);
    }
  }

  std::size_t size() const { return n_; }

  void forward(cplx *x) const { transform(x, false); }
  void inverse(cplx *x) const { transform(x, true); }

  void forward(std::vector<cplx> &x) const {
    check(x.size());
    transform(x.data(), false);
  }
  void inverse(std::vector<cplx> &x) const {
    check(x.size());
    transform(x.data(), true);
  }

private:
  static bool is_pow2(std::size_t n) { return (n & (n - 1)) == 0; }

  static std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) {
      p <<= 1;
    }
    return p;
  }

  void check(std::size_t got) const {
    if (got != n_) {
      throw DimensionError("FFT plan for length " + std::to_string(n_) +
                           " applied to " + std::to_string(got) + " samples");
    }
  }

  void init_pow2(std::size_t n) {
    bitrev_.resize(n);
    std::size_t log2n = 0;
    while ((std::size_t{1} << log2n) < n) {
      ++log2n;
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < log2n; ++b) {
        r |= ((i >> b) & 1u) << (log2n - 1 - b);
      }
      bitrev_[i] = r;
    }
    twiddle_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      // e^{-j*2*pi*k/n}; the phase argument -2k/n is exact for power-of-two n
      twiddle_[k] =
          unit_phasor(-2.0 * static_cast<double>(k) / static_cast<double>(n));
    }
  }

  void init_bluestein(std::size_t n) {
    conv_n_ = next_pow2(2 * n - 1);
    conv_plan_ = std::make_unique<Fft>(conv_n_);

    chirp_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      // phase k^2/n half cycles, reduced with exact integer arithmetic
      const std::uint64_t k2mod =
          (static_cast<std::uint64_t>(k) * k) % (2 * static_cast<std::uint64_t>(n));
      chirp_[k] = unit_phasor(-static_cast<double>(k2mod) /
                              static_cast<double>(n));
    }

    // FFT of the zero-padded conjugate-chirp filter h[m] = e^{+j*pi*m^2/n},
    // laid out circularly so h[-m] lands at index conv_n_-m.
    chirp_fft_.assign(conv_n_, cplx{0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) {
      const cplx h = std::conj(chirp_[k]);
      chirp_fft_[k] = h;
      if (k != 0) {
        chirp_fft_[conv_n_ - k] = h;
      }
    }
    conv_plan_->forward(chirp_fft_.data());
  }

  void transform(cplx *x, bool inv) const {
    if (conv_n_ == 0) {
      pow2_transform(x, inv);
    } else if (!inv) {
      bluestein_forward(x);
    } else {
      // inverse-DFT(x) = conj(forward-DFT(conj(x)))
      for (std::size_t i = 0; i < n_; ++i) {
        x[i] = std::conj(x[i]);
      }
      bluestein_forward(x);
      for (std::size_t i = 0; i < n_; ++i) {
        x[i] = std::conj(x[i]);
      }
    }
  }

  void pow2_transform(cplx *x, bool inv) const {
    const std::size_t n = n_;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = bitrev_[i];
      if (i < r) {
        std::swap(x[i], x[r]);
      }
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = n / len;
      for (std::size_t start = 0; start < n; start += len) {
        for (std::size_t k = 0; k < half; ++k) {
          cplx w = twiddle_[k * stride];
          if (inv) {
            w = std::conj(w);
          }
          const cplx a = x[start + k];
          const cplx b = x[start + k + half] * w;
          x[start + k] = a + b;
          x[start + k + half] = a - b;
        }
      }
    }
  }

  void bluestein_forward(cplx *x) const {
    std::vector<cplx> a(conv_n_, cplx{0.0, 0.0});
    for (std::size_t k = 0; k < n_; ++k) {
      a[k] = x[k] * chirp_[k];
    }
    conv_plan_->forward(a.data());
    for (std::size_t k = 0; k < conv_n_; ++k) {
      a[k] *= chirp_fft_[k];
    }
    conv_plan_->inverse(a.data());
    const double scale = 1.0 / static_cast<double>(conv_n_);
    for (std::size_t k = 0; k < n_; ++k) {
      x[k] = a[k] * scale * chirp_[k];
    }
  }

  std::size_t n_ = 0;
  std::vector<cplx> twiddle_;
  std::vector<std::size_t> bitrev_;

  // Bluestein state; conv_n_ == 0 means the plain power-of-two path.
  std::size_t conv_n_ = 0;
  std::vector<cplx> chirp_;
  std::vector<cplx> chirp_fft_;
  std::unique_ptr<Fft> conv_plan_;
};

enum class FftDirection { forward, inverse };

/// In-place 2-D transform: length-cols FFT over every row, then length-rows
/// FFT over every column. Unnormalized, like the 1-D plans.
inline void fft_2d(ComplexImage &img, FftDirection dir) {
  const std::size_t rows = img.rows();
  const std::size_t cols = img.cols();
  const bool inv = dir == FftDirection::inverse;

  Fft row_plan(cols);
  for (std::size_t m = 0; m < rows; ++m) {
    cplx *row = &img(m, 0);
    if (inv) {
      row_plan.inverse(row);
    } else {
      row_plan.forward(row);
    }
  }

  Fft col_plan(rows);
  std::vector<cplx> col(rows);
  for (std::size_t n = 0; n < cols; ++n) {
    for (std::size_t m = 0; m < rows; ++m) {
      col[m] = img(m, n);
    }
    if (inv) {
      col_plan.inverse(col);
    } else {
      col_plan.forward(col);
    }
    for (std::size_t m = 0; m < rows; ++m) {
      img(m, n) = col[m];
    }
  }
}

} // namespace rfiscrub
