#include "llngm/gaussian.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

namespace llngm {

namespace {
std::atomic<long> g_clamp_count{0};

VectorXd clamped_inv(const VectorXd& V) {
  VectorXd inv(V.size());
  for (Eigen::Index i = 0; i < V.size(); ++i) {
    double v = V[i];
    if (!(v > 0.0)) throw std::domain_error("conditional: V entries must be > 0");
    if (v < kVClampFloor) {
      v = kVClampFloor;
      g_clamp_count.fetch_add(1, std::memory_order_relaxed);
    }
    inv[i] = 1.0 / v;
  }
  return inv;
}
}  // namespace

long v_clamp_count() noexcept { return g_clamp_count.load(); }
void reset_v_clamp_count() noexcept { g_clamp_count.store(0); }

PrecisionGaussian make_precision_gaussian(MatrixXd Qbar, VectorXd mbar,
                                          double sigma2) {
  PrecisionGaussian g;
  g.Qbar = std::move(Qbar);
  g.mbar = std::move(mbar);
  g.sigma2 = sigma2;
  g.llt.compute(g.Qbar);
  if (g.llt.info() != Eigen::Success)
    throw std::runtime_error("PrecisionGaussian: Qbar is not positive definite");
  return g;
}

PrecisionGaussian conditional_M(const ModelSpec& spec, const VectorXd& V,
                                const VectorXd& y) {
  if (V.size() != spec.n())
    throw std::invalid_argument("conditional_M: V must have length n");
  MatrixXd Qbar = spec.rho() * spec.BtB();
  Qbar.diagonal() += clamped_inv(V);
  return make_precision_gaussian(std::move(Qbar), spec.mbar(y),
                                 spec.sigma() * spec.sigma());
}

PrecisionGaussian conditional_W(const ModelSpec& spec, const VectorXd& V,
                                const VectorXd& y) {
  if (V.size() != spec.n())
    throw std::invalid_argument("conditional_W: V must have length n");
  const VectorXd dinv = clamped_inv(V);
  // K^T D_V^{-1} K changes with V, so it is rebuilt here each call.
  MatrixXd Qbar = spec.K().transpose() * dinv.asDiagonal() * spec.K();
  Qbar += spec.rho() * spec.AtA();
  VectorXd mbar =
      spec.K().transpose() * (dinv.cwiseProduct(spec.mu() * (V - spec.h())));
  mbar += spec.rho() * (spec.A().transpose() * (y - spec.xbeta()));
  return make_precision_gaussian(std::move(Qbar), std::move(mbar),
                                 spec.sigma() * spec.sigma());
}

VectorXd sample_gaussian(const PrecisionGaussian& g, RngStream& rng) {
  const Eigen::Index n = g.Qbar.rows();
  VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
  // Qbar = L L^T; cov = sigma2 Qbar^{-1} = (sigma L^{-T}) (sigma L^{-T})^T.
  VectorXd x = g.llt.matrixU().solve(z);
  return g.mean() + std::sqrt(g.sigma2) * x;
}

}  // namespace llngm
