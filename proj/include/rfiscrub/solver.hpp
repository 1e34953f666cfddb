#pragma once

// Complex-valued l1-regularized least squares (LASSO) via proximal gradient.
//
// Minimizes lambda*||h||_1 + 0.5*||y - A h||_2^2 with complex soft
// thresholding. The default schedule is FISTA with a monotone restart: when
// an accelerated step would raise the objective, that iteration is redone as
// a plain proximal step from the previous iterate, which the majorization
// bound guarantees to be non-increasing. Convergence is certified by the
// KKT residual, not just iterate stagnation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "rfiscrub/core.hpp"
#include "rfiscrub/dictionary.hpp"

namespace rfiscrub {

struct SolverConfig {
  double lambda_rel = 0.1; // lambda as a fraction of ||A^H y||_inf, in (0, 1)
  std::size_t max_iters = 500;
  double tol = 1e-6;
  bool acceleration = true;

  void validate() const {
    if (!(lambda_rel > 0.0) || !(lambda_rel < 1.0)) {
      throw ParameterError("lambda_rel must lie in (0, 1), got " +
                           std::to_string(lambda_rel));
    }
    if (max_iters == 0) {
      throw ParameterError("max_iters must be positive");
    }
    if (!(tol > 0.0)) {
      throw ParameterError("tol must be positive");
    }
  }
};

enum class SolveStatus { converged, iteration_limit };

struct SolveResult {
  std::vector<cplx> coefficients;
  SolveStatus status = SolveStatus::converged;
  std::size_t iterations = 0;
  double lambda = 0.0;
  double objective = 0.0;
  double residual_norm_sq = 0.0;
  double kkt = 0.0;
};

/// Complex soft threshold: shrinks |z| by tau, keeps the phase.
inline cplx soft_threshold(cplx z, double tau) {
  const double mag = std::abs(z);
  if (mag <= tau) {
    return cplx{0.0, 0.0};
  }
  return z * ((mag - tau) / mag);
}

/// Max violation of the l1 optimality conditions at h, with g = A^H(A h - y):
/// on the support |g_k + lambda*h_k/|h_k||, off it max(|g_k| - lambda, 0).
inline double kkt_residual(std::span<const cplx> h, std::span<const cplx> y,
                           const DictionaryOperator &op, double lambda) {
  std::vector<cplx> r = op.apply(h);
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] -= y[i];
  }
  std::vector<cplx> g = op.adjoint(r);
  double worst = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    double v;
    if (h[k] == cplx{0.0, 0.0}) {
      v = std::max(std::abs(g[k]) - lambda, 0.0);
    } else {
      v = std::abs(g[k] + lambda * (h[k] / std::abs(h[k])));
    }
    worst = std::max(worst, v);
  }
  return worst;
}

namespace detail {

inline double linf_norm(std::span<const cplx> v) {
  double m = 0.0;
  for (const cplx &z : v) {
    m = std::max(m, std::abs(z));
  }
  return m;
}

inline double l2_norm(std::span<const cplx> v) {
  return std::sqrt(energy(v));
}

/// Spectral-norm-squared estimate of A by power iteration on A^H A, started
/// from a fixed pseudorandom vector so results are reproducible.
inline double operator_norm_sq(const DictionaryOperator &op,
                               std::size_t iters = 20) {
  std::vector<cplx> v(op.atom_count());
  std::uint64_t s = 0x9e3779b97f4a7c15ull;
  for (cplx &z : v) {
    s = s * 6364136223846793005ull + 1442695040888963407ull;
    const double re = static_cast<double>(s >> 11) * 0x1.0p-53 - 0.5;
    s = s * 6364136223846793005ull + 1442695040888963407ull;
    const double im = static_cast<double>(s >> 11) * 0x1.0p-53 - 0.5;
    z = cplx{re, im};
  }
  double est = 0.0;
  for (std::size_t it = 0; it < iters; ++it) {
    const double n = l2_norm(v);
    if (n == 0.0) {
      return 0.0;
    }
    for (cplx &z : v) {
      z /= n;
    }
    v = op.adjoint(op.apply(v));
    est = l2_norm(v); // Rayleigh quotient of the normalized iterate
  }
  return est;
}

} // namespace detail

/// Solves min_h lambda*||h||_1 + 0.5*||y - A h||^2 for a fixed lambda.
inline SolveResult solve_l1_lagrangian(std::span<const cplx> y,
                                       const DictionaryOperator &op,
                                       double lambda,
                                       const SolverConfig &cfg) {
  cfg.validate();
  if (y.size() != op.length()) {
    throw DimensionError("data has " + std::to_string(y.size()) +
                         " samples, operator expects " +
                         std::to_string(op.length()));
  }
  for (const cplx &z : y) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw DataError("solver input contains a non-finite sample");
    }
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ParameterError("lambda must be finite and non-negative");
  }

  const std::size_t n_atoms = op.atom_count();
  SolveResult out;
  out.lambda = lambda;

  auto objective = [&](std::span<const cplx> h, double &resid_sq) {
    std::vector<cplx> r = op.apply(h);
    for (std::size_t i = 0; i < r.size(); ++i) {
      r[i] -= y[i];
    }
    resid_sq = energy(std::span<const cplx>{r});
    double l1 = 0.0;
    for (const cplx &z : h) {
      l1 += std::abs(z);
    }
    return lambda * l1 + 0.5 * resid_sq;
  };

  const double lip = 1.05 * detail::operator_norm_sq(op);
  const double step = lip > 0.0 ? 1.0 / lip : 1.0;

  std::vector<cplx> h(n_atoms, cplx{0.0, 0.0});      // current iterate
  std::vector<cplx> hv = h;                          // extrapolated point
  double resid_sq = energy(y);
  double obj = 0.5 * resid_sq; // objective at h = 0
  double t = 1.0;

  auto prox_step_from = [&](std::span<const cplx> base) {
    std::vector<cplx> r = op.apply(base);
    for (std::size_t i = 0; i < r.size(); ++i) {
      r[i] -= y[i];
    }
    std::vector<cplx> g = op.adjoint(r);
    std::vector<cplx> next(n_atoms);
    for (std::size_t k = 0; k < n_atoms; ++k) {
      next[k] = soft_threshold(base[k] - step * g[k], step * lambda);
    }
    return next;
  };

  std::size_t iter = 0;
  SolveStatus status = SolveStatus::iteration_limit;
  for (iter = 1; iter <= cfg.max_iters; ++iter) {
    std::vector<cplx> cand = prox_step_from(hv);
    double cand_resid = 0.0;
    double cand_obj = objective(cand, cand_resid);

    if (cfg.acceleration && cand_obj > obj) {
      // Restart: redo this iteration as a plain proximal step from h, which
      // cannot increase the objective.
      cand = prox_step_from(h);
      cand_obj = objective(cand, cand_resid);
      t = 1.0;
    }

    double diff_sq = 0.0;
    for (std::size_t k = 0; k < n_atoms; ++k) {
      diff_sq += std::norm(cand[k] - h[k]);
    }
    const double h_norm = detail::l2_norm(h);
    const double rel_change =
        std::sqrt(diff_sq) / std::max(h_norm, 1e-30);

    if (cfg.acceleration) {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      for (std::size_t k = 0; k < n_atoms; ++k) {
        hv[k] = cand[k] + ((t - 1.0) / t_next) * (cand[k] - h[k]);
      }
      t = t_next;
    } else {
      hv = cand;
    }

    const bool stalled = rel_change <= cfg.tol || diff_sq == 0.0;
    h = std::move(cand);
    obj = cand_obj;
    resid_sq = cand_resid;

    if (stalled) {
      const double kkt = kkt_residual(h, y, op, lambda);
      if (lambda == 0.0 || kkt <= 10.0 * cfg.tol * lambda) {
        out.kkt = kkt;
        status = SolveStatus::converged;
        break;
      }
    }
  }

  out.coefficients = std::move(h);
  out.status = status;
  out.iterations = std::min(iter, cfg.max_iters);
  out.objective = obj;
  out.residual_norm_sq = resid_sq;
  if (status != SolveStatus::converged) {
    out.kkt = kkt_residual(out.coefficients, y, op, lambda);
  }
  return out;
}

/// Solves the LASSO with lambda = lambda_rel * ||A^H y||_inf.
inline SolveResult solve_l1(std::span<const cplx> y,
                            const DictionaryOperator &op,
                            const SolverConfig &cfg) {
  cfg.validate();
  if (y.size() != op.length()) {
    throw DimensionError("data has " + std::to_string(y.size()) +
                         " samples, operator expects " +
                         std::to_string(op.length()));
  }
  for (const cplx &z : y) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw DataError("solver input contains a non-finite sample");
    }
  }
  const std::vector<cplx> corr = op.adjoint(y);
  const double lambda = cfg.lambda_rel * detail::linf_norm(corr);
  return solve_l1_lagrangian(y, op, lambda, cfg);
}

} // namespace rfiscrub
