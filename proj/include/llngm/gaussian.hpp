#pragma once

#include <Eigen/Dense>

#include "llngm/model.hpp"
#include "llngm/rng.hpp"

namespace llngm {

// Precision-parameterized Gaussian N(Qbar^{-1} mbar, sigma2 Qbar^{-1}).
// Holds the Cholesky factor; the covariance matrix is never formed for
// sampling (one triangular back-solve per draw).
struct PrecisionGaussian {
  MatrixXd Qbar;
  VectorXd mbar;
  double sigma2 = 1.0;
  Eigen::LLT<MatrixXd> llt;

  VectorXd mean() const { return llt.solve(mbar); }
  MatrixXd covariance() const {
    const auto n = Qbar.rows();
    return sigma2 * llt.solve(MatrixXd::Identity(n, n));
  }
};

PrecisionGaussian make_precision_gaussian(MatrixXd Qbar, VectorXd mbar,
                                          double sigma2);

// Non-centered conditional M | V, Y:
//   Qbar = rho B^T B + D_V^{-1},  mbar = rho B^T (y - X beta + mu B h) + mu 1,
//   mean = Qbar^{-1} mbar, cov = sigma^2 Qbar^{-1}.
PrecisionGaussian conditional_M(const ModelSpec& spec, const VectorXd& V,
                                const VectorXd& y);

// Centered conditional W | V, Y (same struct, Qbar = sigma^2 Q):
//   Qbar = K^T D_V^{-1} K + rho A^T A,
//   mbar = K^T D_V^{-1} mu (V - h) + rho A^T (y - X beta).
PrecisionGaussian conditional_W(const ModelSpec& spec, const VectorXd& V,
                                const VectorXd& y);

// Draw from g. Uses mean + sigma * U^{-1} z with Qbar = U^T U.
VectorXd sample_gaussian(const PrecisionGaussian& g, RngStream& rng);

// V entries below this are clamped before forming D_V^{-1} (the b=0
// boundary regimes visit extremely small V). A clamp count is kept for
// the runner's log line.
inline constexpr double kVClampFloor = 1e-300;
long v_clamp_count() noexcept;
void reset_v_clamp_count() noexcept;

}  // namespace llngm
