#pragma once

// Interference parameter estimation.
//
// The 2-D search decouples into two 1-D problems: every image column shares
// the azimuth chirp structure and every row shares the range structure, so
// each axis is estimated against its own (frequency, FM-rate) dictionary.
// Two modes:
//   mean - run the l1 solver on the mean column / mean row (the sum of
//          per-column residuals collapses onto the mean, see
//          mean_column_reduction).
//   mmv  - aggregate per-column correlation magnitudes (root mean square
//          across columns) into one weight map; more robust when components
//          sit at different positions, and the default.
// Range components in mmv mode are peeled off sequentially (matching
// pursuit): strongest atom first, projected out of the data before the
// next correlation pass. In mean mode they are read off the solver's
// sparse coefficient map by watershed clustering around its peaks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "rfiscrub/core.hpp"
#include "rfiscrub/dictionary.hpp"
#include "rfiscrub/solver.hpp"

namespace rfiscrub {

enum class EstimatorMode { mean, mmv };

struct Roi {
  std::size_t row0 = 0;
  std::size_t col0 = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  void validate(const ComplexImage &img) const {
    if (rows == 0 || cols == 0) {
      throw ParameterError("ROI dimensions must be positive");
    }
    if (row0 + rows > img.rows() || col0 + cols > img.cols()) {
      throw ParameterError("ROI exceeds image bounds");
    }
  }
};

struct EstimatorConfig {
  EstimatorMode mode = EstimatorMode::mmv;
  std::size_t l_max = 5;
  double rel_weight_floor = 0.1;
  // mmv detection gate: peak-to-median ratio the weight map must exceed
  // before any interference is reported.
  double detect_ratio = 3.0;
  std::optional<Roi> roi;
  std::optional<ParameterGrid> azimuth_grid;
  std::optional<ParameterGrid> range_grid;
  SolverConfig solver;

  void validate() const {
    if (l_max == 0) {
      throw ParameterError("l_max must be positive");
    }
    if (!(rel_weight_floor > 0.0) || !(rel_weight_floor <= 1.0)) {
      throw ParameterError("rel_weight_floor must lie in (0, 1]");
    }
    if (!(detect_ratio >= 1.0)) {
      throw ParameterError("detect_ratio must be at least 1");
    }
    solver.validate();
  }
};

struct RangeComponent {
  double range_fm_rate = 0.0;
  double range_freq = 0.0;
  double weight = 0.0;
};

struct AxisEstimate {
  bool detected = false;
  double fm_rate = 0.0;
  double freq = 0.0;
  std::size_t rate_idx = 0;
  std::size_t freq_idx = 0;
  std::vector<double> weights; // per flat atom index
};

struct RangeEstimate {
  bool detected = false;
  std::vector<RangeComponent> components; // sorted by descending weight
  std::vector<double> weights;            // per flat atom index
};

struct EstimationResult {
  bool detected = false;
  EstimatorMode mode = EstimatorMode::mmv;
  double azimuth_fm_rate = 0.0;
  double azimuth_freq = 0.0;
  std::vector<RangeComponent> range_components;
};

/// Mean signal along one axis plus the bookkeeping that makes per-signal
/// least squares collapse onto it: for any vector v of matching length,
///   sum_i ||s_i - v||^2 = multiplicity * ||mean - v||^2 + constant.
struct MeanReduction {
  std::vector<cplx> mean;
  double multiplicity = 0.0;
  double constant = 0.0;
};

inline MeanReduction mean_column_reduction(const ComplexImage &X, Axis axis) {
  MeanReduction out;
  if (axis == Axis::azimuth) {
    // average of the column vectors: length rows, mean over cols
    out.mean.assign(X.rows(), cplx{0.0, 0.0});
    out.multiplicity = static_cast<double>(X.cols());
    for (std::size_t m = 0; m < X.rows(); ++m) {
      cplx acc{0.0, 0.0};
      for (std::size_t n = 0; n < X.cols(); ++n) {
        acc += X(m, n);
      }
      out.mean[m] = acc / out.multiplicity;
    }
  } else {
    out.mean.assign(X.cols(), cplx{0.0, 0.0});
    out.multiplicity = static_cast<double>(X.rows());
    for (std::size_t n = 0; n < X.cols(); ++n) {
      cplx acc{0.0, 0.0};
      for (std::size_t m = 0; m < X.rows(); ++m) {
        acc += X(m, n);
      }
      out.mean[n] = acc / out.multiplicity;
    }
  }
  out.constant =
      energy(X) - out.multiplicity * energy(std::span<const cplx>{out.mean});
  return out;
}

/// Root-mean-square of per-signal adjoint magnitudes: one weight per atom,
/// aggregated across all columns (azimuth axis) or rows (range axis).
inline std::vector<double> mmv_weight_map(const ComplexImage &X,
                                          const DictionaryOperator &op) {
  const Axis axis = op.grid().axis;
  const std::size_t sig_len = axis == Axis::azimuth ? X.rows() : X.cols();
  const std::size_t sig_count = axis == Axis::azimuth ? X.cols() : X.rows();
  if (sig_len != op.length()) {
    throw DimensionError("image axis length " + std::to_string(sig_len) +
                         " does not match operator length " +
                         std::to_string(op.length()));
  }

  const ParameterGrid &grid = op.grid();
  std::vector<double> acc(op.atom_count(), 0.0);
  // The fast path accumulates raw dechirp-FFT correlations and needs the
  // atom normalization applied afterwards; op.adjoint() already includes it.
  double post = 1.0;

  if (op.mode() == DictionaryOperator::Mode::dechirp_fft) {
    post = op.norm_factor();
    // Same factorization as the operator's adjoint, but with the per-rate
    // dechirp table hoisted out of the per-signal loop.
    const int sign = atom_sign(axis);
    Fft plan(sig_len);
    std::vector<cplx> table(sig_len);
    std::vector<cplx> z(sig_len);
    for (std::size_t j = 0; j < grid.rate_count; ++j) {
      const double r = grid.rate(j);
      for (std::size_t t = 0; t < sig_len; ++t) {
        cplx v = chirp_phasor(0.0, r, static_cast<double>(t), -sign);
        if (t & 1u) {
          v = -v;
        }
        table[t] = v;
      }
      for (std::size_t s = 0; s < sig_count; ++s) {
        if (axis == Axis::azimuth) {
          for (std::size_t t = 0; t < sig_len; ++t) {
            z[t] = X(t, s) * table[t];
          }
        } else {
          for (std::size_t t = 0; t < sig_len; ++t) {
            z[t] = X(s, t) * table[t];
          }
        }
        if (sign < 0) {
          plan.inverse(z.data());
        } else {
          plan.forward(z.data());
        }
        for (std::size_t i = 0; i < sig_len; ++i) {
          acc[grid.flat_index(j, i)] += std::norm(z[i]);
        }
      }
    }
  } else {
    std::vector<cplx> sig(sig_len);
    for (std::size_t s = 0; s < sig_count; ++s) {
      if (axis == Axis::azimuth) {
        for (std::size_t t = 0; t < sig_len; ++t) {
          sig[t] = X(t, s);
        }
      } else {
        for (std::size_t t = 0; t < sig_len; ++t) {
          sig[t] = X(s, t);
        }
      }
      const std::vector<cplx> c = op.adjoint(sig);
      for (std::size_t k = 0; k < c.size(); ++k) {
        acc[k] += std::norm(c[k]);
      }
    }
  }

  std::vector<double> w(acc.size());
  for (std::size_t k = 0; k < acc.size(); ++k) {
    w[k] = post * std::sqrt(acc[k] / static_cast<double>(sig_count));
  }
  return w;
}

struct PeakCluster {
  std::size_t rate_idx = 0;
  std::size_t freq_idx = 0;
  double rate = 0.0;
  double freq = 0.0;
  double weight = 0.0;
};

/// Groups the nonzero entries of an atom weight map into clusters by
/// watershed flooding: cells are visited strongest first and each joins the
/// basin of its strongest already-claimed 8-neighbor, so two correlation
/// fans that touch at a valley stay separate basins. A cluster snaps to its
/// strongest cell (ties to the lowest flat index), which is unbiased even
/// though a chirp's mismatched-rate fan drifts one-sided in frequency. The
/// frequency axis is treated as circular when the grid tiles the full
/// spectral circle, matching the FFT bin layout; the rate axis never wraps.
/// Kept are clusters whose root-sum-square weight reaches floor_rel of the
/// strongest, at most l_max of them. Order is by seed-cell strength, the
/// matched-filter peak statistic: basin root sum square rewards area, and
/// where the fans of two strong components cross they pool enough diffuse
/// energy to outrank a genuine but weak third peak.
inline std::vector<PeakCluster> cluster_peaks(const std::vector<double> &w,
                                              const ParameterGrid &grid,
                                              double floor_rel,
                                              std::size_t l_max) {
  if (w.size() != grid.atom_count()) {
    throw DimensionError("weight map size does not match grid");
  }
  const std::size_t nf = grid.freq_count;
  const std::size_t nr = grid.rate_count;

  bool freq_wraps = false;
  if (nf > 1) {
    const double span = grid.freq_max - grid.freq_min;
    const double step = span / static_cast<double>(nf - 1);
    freq_wraps = std::abs(span + step - 2.0) <= 1e-12;
  }

  std::vector<std::size_t> order;
  order.reserve(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k] > 0.0) {
      order.push_back(k);
    }
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (w[a] != w[b]) {
      return w[a] > w[b];
    }
    return a < b;
  });

  constexpr std::size_t kUnclaimed = static_cast<std::size_t>(-1);
  std::vector<std::size_t> basin(w.size(), kUnclaimed);
  std::vector<PeakCluster> clusters;
  std::vector<double> basin_sq;

  for (const std::size_t k : order) {
    const std::size_t j = k / nf;
    const std::size_t i = k % nf;
    std::size_t target = kUnclaimed;
    double target_w = 0.0;
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        if (dj == 0 && di == 0) {
          continue;
        }
        const std::ptrdiff_t nj = static_cast<std::ptrdiff_t>(j) + dj;
        if (nj < 0 || nj >= static_cast<std::ptrdiff_t>(nr)) {
          continue;
        }
        std::ptrdiff_t ni = static_cast<std::ptrdiff_t>(i) + di;
        if (freq_wraps) {
          ni = (ni + static_cast<std::ptrdiff_t>(nf)) %
               static_cast<std::ptrdiff_t>(nf);
        } else if (ni < 0 || ni >= static_cast<std::ptrdiff_t>(nf)) {
          continue;
        }
        const std::size_t nk =
            static_cast<std::size_t>(nj) * nf + static_cast<std::size_t>(ni);
        if (basin[nk] == kUnclaimed) {
          continue;
        }
        if (target == kUnclaimed || w[nk] > target_w) {
          target = basin[nk];
          target_w = w[nk];
        }
      }
    }
    if (target == kUnclaimed) {
      basin[k] = clusters.size();
      PeakCluster c;
      c.rate_idx = j;
      c.freq_idx = i;
      c.rate = grid.rate(j);
      c.freq = grid.freq(i);
      clusters.push_back(c);
      basin_sq.push_back(w[k] * w[k]);
    } else {
      basin[k] = target;
      basin_sq[target] += w[k] * w[k];
    }
  }
  for (std::size_t b = 0; b < clusters.size(); ++b) {
    clusters[b].weight = std::sqrt(basin_sq[b]);
  }

  if (clusters.empty()) {
    return clusters;
  }
  double wmax = 0.0;
  for (const PeakCluster &c : clusters) {
    wmax = std::max(wmax, c.weight);
  }
  std::erase_if(clusters, [&](const PeakCluster &c) {
    return c.weight < floor_rel * wmax;
  });
  std::stable_sort(clusters.begin(), clusters.end(),
                   [&](const PeakCluster &a, const PeakCluster &b) {
                     const double pa = w[a.rate_idx * nf + a.freq_idx];
                     const double pb = w[b.rate_idx * nf + b.freq_idx];
                     if (pa != pb) {
                       return pa > pb;
                     }
                     return a.rate_idx * nf + a.freq_idx <
                            b.rate_idx * nf + b.freq_idx;
                   });
  if (clusters.size() > l_max) {
    clusters.resize(l_max);
  }
  return clusters;
}

namespace detail {

inline bool ratio_gate(const std::vector<double> &w, double detect_ratio) {
  double wmax = 0.0;
  for (double v : w) {
    wmax = std::max(wmax, v);
  }
  if (wmax <= 0.0) {
    return false;
  }
  std::vector<double> tmp = w;
  const std::size_t mid = tmp.size() / 2;
  std::nth_element(tmp.begin(), tmp.begin() + mid, tmp.end());
  const double med = tmp[mid];
  return med == 0.0 || wmax >= detect_ratio * med;
}

inline std::size_t argmax_low_tie(const std::vector<double> &w) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < w.size(); ++k) {
    if (w[k] > w[best]) {
      best = k;
    }
  }
  return best;
}

} // namespace detail

/// Estimates the shared azimuth FM rate (and the dominant azimuth
/// frequency) from the image columns.
inline AxisEstimate estimate_azimuth_fm(const ComplexImage &X,
                                        const ParameterGrid &grid,
                                        const EstimatorConfig &cfg) {
  cfg.validate();
  if (grid.axis != Axis::azimuth) {
    throw ParameterError("estimate_azimuth_fm needs an azimuth grid");
  }
  AxisEstimate out;
  if (cfg.mode == EstimatorMode::mmv) {
    DictionaryOperator op(grid, X.rows());
    out.weights = mmv_weight_map(X, op);
    out.detected = detail::ratio_gate(out.weights, cfg.detect_ratio);
  } else {
    DictionaryOperator op(grid, X.rows());
    const MeanReduction mr = mean_column_reduction(X, Axis::azimuth);
    const SolveResult sol = solve_l1(mr.mean, op, cfg.solver);
    out.weights.resize(sol.coefficients.size());
    bool any = false;
    for (std::size_t k = 0; k < sol.coefficients.size(); ++k) {
      out.weights[k] = std::abs(sol.coefficients[k]);
      any = any || out.weights[k] > 0.0;
    }
    out.detected = any;
  }
  if (out.detected) {
    const std::size_t k = detail::argmax_low_tie(out.weights);
    out.rate_idx = grid.rate_index(k);
    out.freq_idx = grid.freq_index(k);
    out.fm_rate = grid.rate(out.rate_idx);
    out.freq = grid.freq(out.freq_idx);
  }
  return out;
}

/// Estimates up to l_max range-axis components from the image rows.
inline RangeEstimate estimate_range_fm(const ComplexImage &X,
                                       const ParameterGrid &grid,
                                       const EstimatorConfig &cfg) {
  cfg.validate();
  if (grid.axis != Axis::range) {
    throw ParameterError("estimate_range_fm needs a range grid");
  }
  RangeEstimate out;
  std::vector<double> w;
  if (cfg.mode == EstimatorMode::mmv) {
    DictionaryOperator op(grid, X.cols());
    w = mmv_weight_map(X, op);
    out.weights = w;
    if (!detail::ratio_gate(w, cfg.detect_ratio)) {
      return out;
    }
    // Sequential peeling (matching pursuit): report the strongest atom,
    // project it out of every row, re-correlate, repeat. A strong chirp's
    // rate-mismatch fan carries local maxima near its own rate, and two
    // fans that cross pool enough diffuse energy that ranking peaks of one
    // static map misorders or invents components; peeling removes each
    // component's whole fan along with the component itself.
    ComplexImage R = X;
    const std::size_t L = X.cols();
    double first_height = 0.0;
    std::vector<std::size_t> picked;
    for (std::size_t l = 0; l < cfg.l_max; ++l) {
      if (l > 0) {
        w = mmv_weight_map(R, op);
      }
      const std::size_t k = detail::argmax_low_tie(w);
      const double h = w[k];
      if (h <= 0.0 ||
          std::find(picked.begin(), picked.end(), k) != picked.end()) {
        break;
      }
      if (l == 0) {
        first_height = h;
      } else if (h < cfg.rel_weight_floor * first_height) {
        break;
      }
      picked.push_back(k);
      const std::size_t jr = grid.rate_index(k);
      const std::size_t ifq = grid.freq_index(k);
      out.components.push_back(
          RangeComponent{grid.rate(jr), grid.freq(ifq), h});
      const std::vector<cplx> atom =
          range_atom(grid.freq(ifq), grid.rate(jr), L);
      for (std::size_t m = 0; m < R.rows(); ++m) {
        cplx coef{0.0, 0.0};
        for (std::size_t n = 0; n < L; ++n) {
          coef += std::conj(atom[n]) * R(m, n);
        }
        coef /= static_cast<double>(L);
        for (std::size_t n = 0; n < L; ++n) {
          R(m, n) -= coef * atom[n];
        }
      }
    }
    out.detected = !out.components.empty();
    return out;
  }

  DictionaryOperator op(grid, X.cols());
  const MeanReduction mr = mean_column_reduction(X, Axis::range);
  const SolveResult sol = solve_l1(mr.mean, op, cfg.solver);
  w.resize(sol.coefficients.size());
  for (std::size_t k = 0; k < sol.coefficients.size(); ++k) {
    w[k] = std::abs(sol.coefficients[k]);
  }
  out.weights = w;

  const std::vector<PeakCluster> clusters =
      cluster_peaks(w, grid, cfg.rel_weight_floor, cfg.l_max);
  for (const PeakCluster &c : clusters) {
    out.components.push_back(RangeComponent{c.rate, c.freq, c.weight});
  }
  out.detected = !out.components.empty();
  return out;
}

namespace detail {

inline ComplexImage crop(const ComplexImage &X, const Roi &roi) {
  ComplexImage out(roi.rows, roi.cols);
  for (std::size_t m = 0; m < roi.rows; ++m) {
    for (std::size_t n = 0; n < roi.cols; ++n) {
      out(m, n) = X(roi.row0 + m, roi.col0 + n);
    }
  }
  return out;
}

} // namespace detail

/// Full 2-D estimate: shared azimuth FM rate plus per-component range
/// parameters. Reports detected = false (and no components) unless both
/// axes see interference.
inline EstimationResult estimate_interference(const ComplexImage &X,
                                              const EstimatorConfig &cfg) {
  cfg.validate();
  ComplexImage view;
  const ComplexImage *img = &X;
  if (cfg.roi) {
    cfg.roi->validate(X);
    view = detail::crop(X, *cfg.roi);
    img = &view;
  }

  ParameterGrid az = cfg.azimuth_grid
                         ? *cfg.azimuth_grid
                         : default_grid(Axis::azimuth, img->rows());
  ParameterGrid rg = cfg.range_grid ? *cfg.range_grid
                                    : default_grid(Axis::range, img->cols());
  az.axis = Axis::azimuth;
  rg.axis = Axis::range;

  EstimationResult out;
  out.mode = cfg.mode;
  const AxisEstimate azr = estimate_azimuth_fm(*img, az, cfg);
  if (!azr.detected) {
    return out;
  }
  const RangeEstimate rgr = estimate_range_fm(*img, rg, cfg);
  if (!rgr.detected) {
    return out;
  }
  out.detected = true;
  out.azimuth_fm_rate = azr.fm_rate;
  out.azimuth_freq = azr.freq;
  out.range_components = rgr.components;
  return out;
}

} // namespace rfiscrub
