#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>

#include "llngm/gig.hpp"
#include "llngm/rng.hpp"

namespace llngm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Parameterization { Centered, NonCentered };

// Mixing-variable family. Gig is the generic three-parameter prior; Nig and
// Gal are the nu-parameterized families used by the estimation machinery:
//   Nig: V_i ~ GIG(-1/2, nu, nu h_i^2)   (inverse Gaussian)
//   Gal: V_i ~ GIG(h_i nu, 2 nu, 0)      (Gamma(h_i nu, nu))
enum class MixingFamily { Gig, Nig, Gal };

// AR(1)-type correlation matrix, entries phi^{|i-j|}. Throws for |phi| >= 1.
MatrixXd build_ar1_operator(int n, double phi);

// Projector A = I - u u^T with u = 1/||1||_2; Null(A) = span{1}.
MatrixXd build_rank_deficient_A(int n);

// d/dphi of build_ar1_operator, entries |i-j| phi^{|i-j|-1}.
MatrixXd ar1_operator_dphi(int n, double phi);

// Full LLnGM parameterization plus the derived quantities every consumer
// needs (rho, a_tilde, p_tilde, B^T B, Bh, ...). Immutable after
// construction and cheap to copy: the K-dependent heavy parts are shared.
class ModelSpec {
 public:
  struct Inputs {
    MixingFamily family = MixingFamily::Gig;
    double p = -0.5, a = 1.0, b = 1.0;  // family == Gig
    double nu = 1.0;                    // family == Nig/Gal
    double mu = 0.0;
    double sigma = 1.0;
    double sigma_eps = 1.0;
    MatrixXd K;              // n x n, invertible
    MatrixXd A;              // m x n
    MatrixXd X;              // m x q (empty => Xbeta = 0)
    VectorXd beta;           // q
    VectorXd h;              // n (empty => ones)
  };

  explicit ModelSpec(Inputs in);

  MixingFamily family() const { return in_.family; }
  double mu() const { return in_.mu; }
  double sigma() const { return in_.sigma; }
  double sigma_eps() const { return in_.sigma_eps; }
  double nu() const { return in_.nu; }
  int n() const { return n_; }
  int m() const { return m_; }
  int q() const { return static_cast<int>(in_.beta.size()); }
  const MatrixXd& K() const { return in_.K; }
  const MatrixXd& A() const { return in_.A; }
  const MatrixXd& X() const { return in_.X; }
  const VectorXd& beta() const { return in_.beta; }
  const VectorXd& h() const { return in_.h; }

  double rho() const { return rho_; }
  double a_tilde() const { return a_tilde_; }

  // GIG prior of V_i; identical across i for the Gig family.
  GigParams mixing_prior(int i) const;
  // Representative triple used by the regime classifier (for Gal with
  // non-constant h the smallest shape, i.e. the most boundary-like one).
  GigParams regime_gig() const;

  // Posterior V-update parameters given latent value m_i (non-centered M_i,
  // or (KW)_i + mu h_i centered): GIG(p_i - 1/2, a_i + mu^2/sigma^2,
  // b_i + m_i^2/sigma^2).
  GigParams v_conditional(int i, double latent_i) const;

  // Solves with K (never forms K^{-1}).
  VectorXd solve_K(const VectorXd& rhs) const;
  VectorXd solve_Kt(const VectorXd& rhs) const;
  MatrixXd solve_K_mat(const MatrixXd& rhs) const;
  MatrixXd solve_Kt_mat(const MatrixXd& rhs) const;
  VectorXd apply_B(const VectorXd& x) const;   // A K^{-1} x
  VectorXd apply_Bt(const VectorXd& y) const;  // K^{-T} A^T y

  const MatrixXd& BtB() const { return ops_->BtB; }
  const MatrixXd& AtA() const { return ops_->AtA; }
  const VectorXd& Bh() const { return ops_->Bh; }
  double log_abs_det_K() const { return ops_->log_abs_det_K; }

  VectorXd xbeta() const;  // X beta (zeros when X empty)

  // mbar(V-independent part of the non-centered conditional):
  //   rho B^T (y - X beta + mu B h) + mu 1
  VectorXd mbar(const VectorXd& y) const;

  // Copies with updated scalar parameters (heavy operator parts shared).
  ModelSpec with_scalars(double mu, double sigma, double sigma_eps) const;
  ModelSpec with_nu(double nu) const;
  ModelSpec with_beta(const VectorXd& beta) const;
  ModelSpec with_K(const MatrixXd& K) const;  // full rebuild

 private:
  struct OperatorData {
    Eigen::PartialPivLU<MatrixXd> lu;  // of K
    MatrixXd BtB;                      // K^{-T} A^T A K^{-1}
    MatrixXd AtA;
    VectorXd Bh;                       // A K^{-1} h
    double log_abs_det_K = 0.0;
  };
  Inputs in_;
  int n_ = 0, m_ = 0;
  double rho_ = 1.0, a_tilde_ = 0.0;
  std::shared_ptr<const OperatorData> ops_;

  void validate_and_finalize();
};

// Parameterization maps: M = K W + mu h and its inverse.
VectorXd to_noncentered(const ModelSpec& spec, const VectorXd& W);
VectorXd to_centered(const ModelSpec& spec, const VectorXd& M);

// Draws (V, W, Y) from the prior model; returns Y and optionally the used
// latent variables. Used to generate synthetic data for estimation runs.
struct PriorDraw {
  VectorXd V, W, M, y;
};
PriorDraw simulate_from_prior(const ModelSpec& spec, RngStream& rng);

}  // namespace llngm
