#pragma once

#include <optional>
#include <string>
#include <vector>

#include "llngm/gibbs.hpp"
#include "llngm/model.hpp"

namespace llngm {

// Complete-data score, split by parameter block. d_zeta is filled only when
// the kernel derivatives dK are supplied; d_nu only for the Nig/Gal mixing
// families. Centered-parameterization entries may legitimately blow up near
// V ~ 0 (they are reported as-is, not clamped).
struct ScoreVector {
  VectorXd d_beta;
  double d_sigma_eps = 0.0;
  double d_sigma = 0.0;
  double d_mu = 0.0;
  VectorXd d_zeta;
  double d_nu = 0.0;
  bool has_nu = false;
};

// log p(Y, latent, V) under the given parameterization (centered latent = W,
// non-centered latent = M). The centered density carries the +log|K|
// Jacobian of the latent transformation.
double complete_data_loglik(const ModelSpec& spec, Parameterization param,
                            const VectorXd& y, const VectorXd& latent,
                            const VectorXd& V);

ScoreVector score_centered(const ModelSpec& spec, const VectorXd& y,
                           const VectorXd& W, const VectorXd& V,
                           const std::vector<MatrixXd>* dK = nullptr);

ScoreVector score_noncentered(const ModelSpec& spec, const VectorXd& y,
                              const VectorXd& M, const VectorXd& V,
                              const std::vector<MatrixXd>* dK = nullptr);

// Rao-Blackwellized score E[score_noncentered | Y, V]: the Gaussian layer is
// integrated out in closed form via the conditional mean and covariance.
ScoreVector rb_score(const ModelSpec& spec, const VectorXd& y,
                     const VectorXd& V, const std::vector<MatrixXd>* dK = nullptr);

// Which parameters the SGD loop updates.
struct ParamMask {
  bool beta = false;
  bool sigma_eps = false;
  bool sigma = false;
  bool mu = false;
  bool zeta = false;  // AR(1) phi
  bool nu = false;

  int count(int q) const;
};

// Packs a masked score into the working coordinates used by the SGD loop:
// [beta..., log sigma_eps, log sigma, mu, atanh(phi), log nu] (chain-rule
// adjusted so positivity/range constraints hold automatically).
VectorXd pack_gradient(const ScoreVector& s, const ParamMask& mask,
                       const ModelSpec& spec, double phi);

struct SgdConfig {
  long iterations = 2000;
  int k_gibbs = 5;
  double step_c = 0.5;    // gamma_t = step_c / (step_t0 + t)
  double step_t0 = 100.0;
  ParamMask mask;
  double phi0 = 0.5;       // current AR(1) parameter when zeta is active
  bool warm_start = true;  // persistent chain across iterations
  long burn_first = 200;   // extra sweeps before the first gradient
  double divergence_norm = 1e6;
};

struct SgdResult {
  std::vector<VectorXd> trajectory;  // packed working coordinates per iter
  std::vector<double> grad_norms;
  ModelSpec final_spec;
  bool diverged = false;
  std::string note;
};

// Averages rb_score over k post-sweep V draws of the non-centered chain,
// advancing `chain` in place (warm start across SGD iterations).
VectorXd grad_estimate(const ModelSpec& spec, const VectorXd& y, int k_gibbs,
                       ChainState& chain, RngStream& rng, const ParamMask& mask,
                       double phi, const std::vector<MatrixXd>* dK = nullptr);

SgdResult sgd_fit(const ModelSpec& spec0, const VectorXd& y,
                  const SgdConfig& cfg, RngStream& rng);

// Running-mean stabilization probe for the centered score functional
// |h_i M_i / V_i| (the term whose posterior mean exists only for shape
// > 1/2) against its polynomial non-centered analogue |M_i - mu V_i|.
// The slope is d log(running mean) / d log(t) fitted over the tail.
struct IntegrabilityReport {
  double slope_centered = 0.0;
  double slope_noncentered = 0.0;
  bool stabilized_centered = false;
  bool stabilized_noncentered = false;
  double slope_threshold = 0.02;
  std::vector<double> checkpoints_t;
  std::vector<double> running_mean_centered;
  std::vector<double> running_mean_noncentered;
};

IntegrabilityReport demo_centered_integrability(const ModelSpec& spec,
                                                const VectorXd& y,
                                                long chain_length,
                                                RngStream& rng);

}  // namespace llngm
