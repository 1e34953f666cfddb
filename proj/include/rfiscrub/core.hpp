#pragma once

// Core value types shared across the library: complex images in row-major
// layout and the parameter structs describing 2-D linear-FM interference.
//
// Convention used everywhere: frequencies are in cycles/sample and FM rates
// in cycles/sample^2, written exactly as the coefficients that appear inside
// pi*(...) phase exponents. Nothing is rescaled by 2*pi.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rfiscrub {

using cplx = std::complex<double>;

class Error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape mismatch between images, vectors, or grids.
class DimensionError : public Error {
  using Error::Error;
};

// A parameter is outside its documented domain.
class ParameterError : public Error {
  using Error::Error;
};

// Input data is unusable (NaN/Inf samples, empty payloads, ...).
class DataError : public Error {
  using Error::Error;
};

// A byte stream does not follow the file format it claims to.
class FormatError : public Error {
  using Error::Error;
};

// The OS refused a file operation (open, read, write).
class IoError : public Error {
  using Error::Error;
};

// A configuration document is malformed or inconsistent.
class ConfigError : public Error {
  using Error::Error;
};

/// Dense complex image, row-major, sample (m, n) at index m*cols + n.
class ComplexImage {
public:
  ComplexImage() = default;

  ComplexImage(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(check_dims(rows, cols)) {}

  // Takes ownership of row-major sample data. This constructor is the
  // validation boundary for externally produced data: every sample must be
  // finite.
  ComplexImage(std::size_t rows, std::size_t cols, std::vector<cplx> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != check_dims(rows, cols)) {
      throw DimensionError("image data has " + std::to_string(data_.size()) +
                           " samples, expected " +
                           std::to_string(rows * cols));
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
      if (!std::isfinite(data_[i].real()) || !std::isfinite(data_[i].imag())) {
        throw DataError("non-finite sample at flat index " +
                        std::to_string(i));
      }
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  cplx &operator()(std::size_t m, std::size_t n) {
    return data_[m * cols_ + n];
  }
  const cplx &operator()(std::size_t m, std::size_t n) const {
    return data_[m * cols_ + n];
  }

  cplx &at(std::size_t m, std::size_t n) {
    check_index(m, n);
    return data_[m * cols_ + n];
  }
  const cplx &at(std::size_t m, std::size_t n) const {
    check_index(m, n);
    return data_[m * cols_ + n];
  }

  std::span<cplx> samples() { return data_; }
  std::span<const cplx> samples() const { return data_; }

  friend bool operator==(const ComplexImage &a, const ComplexImage &b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

private:
  static std::size_t check_dims(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) {
      throw DimensionError("image dimensions must be positive, got " +
                           std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (cols != 0 && rows > SIZE_MAX / cols) {
      throw DimensionError("image dimensions overflow size_t");
    }
    return rows * cols;
  }

  void check_index(std::size_t m, std::size_t n) const {
    if (m >= rows_ || n >= cols_) {
      throw DimensionError("sample index (" + std::to_string(m) + ", " +
                           std::to_string(n) + ") outside " +
                           std::to_string(rows_) + "x" +
                           std::to_string(cols_) + " image");
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

/// Elementwise product a .* b. Shapes must match.
inline ComplexImage hadamard_multiply(const ComplexImage &a,
                                      const ComplexImage &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("hadamard_multiply shape mismatch: " +
                         std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
  ComplexImage out(a.rows(), a.cols());
  auto as = a.samples();
  auto bs = b.samples();
  auto os = out.samples();
  for (std::size_t i = 0; i < as.size(); ++i) {
    os[i] = as[i] * bs[i];
  }
  return out;
}

/// Elementwise difference a - b. Shapes must match.
inline ComplexImage subtract(const ComplexImage &a, const ComplexImage &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("subtract shape mismatch");
  }
  ComplexImage out(a.rows(), a.cols());
  auto as = a.samples();
  auto bs = b.samples();
  auto os = out.samples();
  for (std::size_t i = 0; i < as.size(); ++i) {
    os[i] = as[i] - bs[i];
  }
  return out;
}

inline ComplexImage add(const ComplexImage &a, const ComplexImage &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("add shape mismatch");
  }
  ComplexImage out(a.rows(), a.cols());
  auto as = a.samples();
  auto bs = b.samples();
  auto os = out.samples();
  for (std::size_t i = 0; i < as.size(); ++i) {
    os[i] = as[i] + bs[i];
  }
  return out;
}

/// Total energy: sum of |x|^2 over all samples.
inline double energy(const ComplexImage &x) {
  double acc = 0.0;
  for (const cplx &v : x.samples()) {
    acc += std::norm(v);
  }
  return acc;
}

inline double energy(std::span<const cplx> x) {
  double acc = 0.0;
  for (const cplx &v : x) {
    acc += std::norm(v);
  }
  return acc;
}

/// One 2-D linear-FM interference component. The azimuth FM rate is held by
/// the enclosing mixture; every other parameter is per component.
struct LfmComponent {
  cplx amplitude{1.0, 0.0};
  double range_fm_rate = 0.0;  // cycles/sample^2 along range
  double carrier_freq = 0.0;   // cycles/sample along range
  double azimuth_center = 0.0; // samples, may be fractional
  double range_center = 0.0;
  double azimuth_duration = 0.0; // samples, > 0
  double range_duration = 0.0;

  void validate(std::size_t rows, std::size_t cols) const {
    if (!(azimuth_duration > 0.0) || !(range_duration > 0.0)) {
      throw ParameterError("component durations must be positive");
    }
    if (std::abs(range_fm_rate) > 1.0) {
      throw ParameterError("range FM rate " + std::to_string(range_fm_rate) +
                           " exceeds the aliasing bound of 1 cycle/sample^2");
    }
    if (!(azimuth_center >= 0.0) ||
        !(azimuth_center < static_cast<double>(rows))) {
      throw ParameterError("azimuth center " + std::to_string(azimuth_center) +
                           " outside [0, " + std::to_string(rows) + ")");
    }
    if (!(range_center >= 0.0) ||
        !(range_center < static_cast<double>(cols))) {
      throw ParameterError("range center " + std::to_string(range_center) +
                           " outside [0, " + std::to_string(cols) + ")");
    }
  }
};

/// A multi-component interference description. All components share one
/// azimuth FM rate; that is a structural property of the signal model, so the
/// type enforces it instead of carrying a redundant per-component copy.
struct LfmMixture {
  double azimuth_fm_rate = 0.0; // cycles/sample^2, shared by all components
  std::vector<LfmComponent> components;

  static constexpr std::size_t kMaxComponents = 64;

  void validate(std::size_t rows, std::size_t cols) const {
    if (components.empty()) {
      throw ParameterError("mixture must contain at least one component");
    }
    if (components.size() > kMaxComponents) {
      throw ParameterError("mixture has " +
                           std::to_string(components.size()) +
                           " components, limit is " +
                           std::to_string(kMaxComponents));
    }
    if (std::abs(azimuth_fm_rate) > 1.0) {
      throw ParameterError("azimuth FM rate " +
                           std::to_string(azimuth_fm_rate) +
                           " exceeds the aliasing bound of 1 cycle/sample^2");
    }
    for (const LfmComponent &c : components) {
      c.validate(rows, cols);
    }
  }
};

} // namespace rfiscrub
