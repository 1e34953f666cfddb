#pragma once

// Subspace baselines: PCA (truncated SVD) and robust PCA via the inexact
// augmented Lagrange multiplier method.
//
// Both treat the image as a plain complex matrix. PCA assigns the top-k
// subspace to the interference estimate and the residual to the scene.
// RPCA splits the matrix into a low-rank part plus a sparse part; which of
// the two is handed back as the scene is a configuration choice, since it
// depends on whether interference or scene is closer to low-rank.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "rfiscrub/core.hpp"

namespace rfiscrub {

namespace detail {

using EigenMat =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline EigenMat to_eigen(const ComplexImage &X) {
  return Eigen::Map<const EigenMat>(X.samples().data(),
                                    static_cast<Eigen::Index>(X.rows()),
                                    static_cast<Eigen::Index>(X.cols()));
}

inline ComplexImage from_eigen(const EigenMat &M) {
  ComplexImage out(static_cast<std::size_t>(M.rows()),
                   static_cast<std::size_t>(M.cols()));
  Eigen::Map<EigenMat>(out.samples().data(), M.rows(), M.cols()) = M;
  return out;
}

} // namespace detail

struct PcaResult {
  ComplexImage s_hat;
  ComplexImage r_hat;
  std::vector<double> singular_values;
};

/// Rank-k interference removal: r_hat is the best rank-k approximation of
/// X, s_hat the residual X - r_hat.
inline PcaResult pca_removal(const ComplexImage &X, std::size_t rank) {
  const std::size_t kmax = std::min(X.rows(), X.cols());
  if (rank == 0 || rank >= kmax) {
    throw ParameterError("PCA rank must lie in [1, min(rows, cols) - 1], "
                         "got " +
                         std::to_string(rank));
  }
  detail::EigenMat M = detail::to_eigen(X);
  Eigen::BDCSVD<detail::EigenMat> svd(
      M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto &sv = svd.singularValues();

  detail::EigenMat low =
      svd.matrixU().leftCols(static_cast<Eigen::Index>(rank)) *
      sv.head(static_cast<Eigen::Index>(rank))
          .cast<cplx>()
          .asDiagonal() *
      svd.matrixV().leftCols(static_cast<Eigen::Index>(rank)).adjoint();

  PcaResult out;
  out.r_hat = detail::from_eigen(low);
  out.s_hat = subtract(X, out.r_hat);
  out.singular_values.assign(sv.data(), sv.data() + sv.size());
  return out;
}

enum class RpcaScenePart { sparse, low_rank };

struct RpcaConfig {
  double lambda = 0.0; // 0: use the 1/sqrt(max(rows, cols)) default
  double tol = 1e-7;
  std::size_t max_iters = 500;
  RpcaScenePart scene = RpcaScenePart::sparse;

  void validate() const {
    if (lambda < 0.0) {
      throw ParameterError("rpca lambda must be non-negative");
    }
    if (!(tol > 0.0)) {
      throw ParameterError("rpca tol must be positive");
    }
    if (max_iters == 0) {
      throw ParameterError("rpca max_iters must be positive");
    }
  }
};

struct RpcaResult {
  ComplexImage low_rank;
  ComplexImage sparse;
  ComplexImage s_hat; // scene per the configured part assignment
  ComplexImage r_hat;
  std::size_t iterations = 0;
  double residual = 0.0; // ||X - L - S||_F / ||X||_F at exit
  bool converged = false;
};

/// Principal component pursuit by inexact ALM: alternating singular-value
/// thresholding on the low-rank part and soft thresholding on the sparse
/// part, with an increasing penalty.
inline RpcaResult rpca_removal(const ComplexImage &X, const RpcaConfig &cfg) {
  cfg.validate();
  const std::size_t rows = X.rows();
  const std::size_t cols = X.cols();
  const double xnorm = std::sqrt(energy(X));

  RpcaResult out;
  if (xnorm == 0.0) {
    out.low_rank = ComplexImage(rows, cols);
    out.sparse = ComplexImage(rows, cols);
    out.s_hat = out.low_rank;
    out.r_hat = out.low_rank;
    out.converged = true;
    return out;
  }

  const double lambda =
      cfg.lambda > 0.0
          ? cfg.lambda
          : 1.0 / std::sqrt(static_cast<double>(std::max(rows, cols)));

  detail::EigenMat M = detail::to_eigen(X);
  detail::EigenMat L = detail::EigenMat::Zero(M.rows(), M.cols());
  detail::EigenMat S = detail::EigenMat::Zero(M.rows(), M.cols());
  detail::EigenMat Y = detail::EigenMat::Zero(M.rows(), M.cols());

  // spectral norm for the initial penalty, a few power iterations suffice
  double sigma1 = 0.0;
  {
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(M.cols());
    v.normalize();
    for (int it = 0; it < 12; ++it) {
      Eigen::VectorXcd w = M.adjoint() * (M * v);
      const double n = w.norm();
      if (n == 0.0) {
        break;
      }
      v = w / n;
      sigma1 = std::sqrt(n);
    }
  }
  if (sigma1 == 0.0) {
    sigma1 = xnorm;
  }

  double mu = 1.25 / sigma1;
  const double mu_bar = mu * 1e7;
  const double rho = 1.5;

  out.converged = false;
  std::size_t iter = 0;
  for (iter = 1; iter <= cfg.max_iters; ++iter) {
    // low-rank update: singular value thresholding at 1/mu
    detail::EigenMat G = M - S + Y / mu;
    Eigen::BDCSVD<detail::EigenMat> svd(
        G, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd sv = svd.singularValues();
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      sv[i] = std::max(sv[i] - 1.0 / mu, 0.0);
    }
    L = svd.matrixU() * sv.cast<cplx>().asDiagonal() *
        svd.matrixV().adjoint();

    // sparse update: complex soft threshold at lambda/mu
    detail::EigenMat H = M - L + Y / mu;
    const double tau = lambda / mu;
    for (Eigen::Index i = 0; i < H.size(); ++i) {
      const cplx z = H.data()[i];
      const double mag = std::abs(z);
      S.data()[i] = mag <= tau ? cplx{0.0, 0.0} : z * ((mag - tau) / mag);
    }

    detail::EigenMat Z = M - L - S;
    const double resid = Z.norm() / xnorm;
    out.residual = resid;
    if (resid <= cfg.tol) {
      out.converged = true;
      break;
    }
    Y += mu * Z;
    mu = std::min(rho * mu, mu_bar);
  }
  out.iterations = std::min(iter, cfg.max_iters);

  out.low_rank = detail::from_eigen(L);
  out.sparse = detail::from_eigen(S);
  if (cfg.scene == RpcaScenePart::sparse) {
    out.s_hat = out.sparse;
    out.r_hat = subtract(X, out.sparse);
  } else {
    out.s_hat = out.low_rank;
    out.r_hat = subtract(X, out.low_rank);
  }
  return out;
}

} // namespace rfiscrub
