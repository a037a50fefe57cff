#include "llngm/estimation.hpp"

#include <cmath>
#include <stdexcept>

#include "llngm/bessel.hpp"
#include "llngm/gaussian.hpp"

namespace llngm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double log_mixing_prior(const ModelSpec& spec, const VectorXd& V) {
  double acc = 0.0;
  for (int i = 0; i < spec.n(); ++i)
    acc += gig_log_density(spec.mixing_prior(i), V[i]);
  return acc;
}

// d/dnu of log p(V) for the nu-parameterized families.
double d_nu_prior(const ModelSpec& spec, const VectorXd& V) {
  const double nu = spec.nu();
  double acc = 0.0;
  switch (spec.family()) {
    case MixingFamily::Nig:
      for (int i = 0; i < spec.n(); ++i) {
        const double h = spec.h()[i];
        acc += 0.5 / nu + h - 0.5 * V[i] - 0.5 * h * h / V[i];
      }
      return acc;
    case MixingFamily::Gal:
      for (int i = 0; i < spec.n(); ++i) {
        const double h = spec.h()[i];
        acc += h * std::log(nu) + h - h * digamma(h * nu) + h * std::log(V[i]) -
               V[i];
      }
      return acc;
    case MixingFamily::Gig:
      throw std::invalid_argument("d_nu: generic GIG mixing has no nu");
  }
  return acc;
}

}  // namespace

double complete_data_loglik(const ModelSpec& spec, Parameterization param,
                            const VectorXd& y, const VectorXd& latent,
                            const VectorXd& V) {
  const int n = spec.n(), m = spec.m();
  const double s = spec.sigma(), se = spec.sigma_eps();
  double ll = log_mixing_prior(spec, V);
  if (param == Parameterization::Centered) {
    const VectorXd& W = latent;
    const VectorXd r = y - spec.xbeta() - spec.A() * W;
    ll += -0.5 * m * kLog2Pi - m * std::log(se) -
          0.5 * r.squaredNorm() / (se * se);
    const VectorXd u = spec.K() * W - spec.mu() * (V - spec.h());
    double quad = 0.0, logs = 0.0;
    for (int i = 0; i < n; ++i) {
      quad += u[i] * u[i] / V[i];
      logs += std::log(V[i]);
    }
    ll += -0.5 * n * kLog2Pi - n * std::log(s) + spec.log_abs_det_K() -
          0.5 * logs - 0.5 * quad / (s * s);
  } else {
    const VectorXd& M = latent;
    const VectorXd r =
        y - spec.xbeta() - spec.apply_B(M - spec.mu() * spec.h());
    ll += -0.5 * m * kLog2Pi - m * std::log(se) -
          0.5 * r.squaredNorm() / (se * se);
    double quad = 0.0, logs = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = M[i] - spec.mu() * V[i];
      quad += d * d / V[i];
      logs += std::log(V[i]);
    }
    ll += -0.5 * n * kLog2Pi - n * std::log(s) - 0.5 * logs -
          0.5 * quad / (s * s);
  }
  return ll;
}

ScoreVector score_centered(const ModelSpec& spec, const VectorXd& y,
                           const VectorXd& W, const VectorXd& V,
                           const std::vector<MatrixXd>* dK) {
  const int n = spec.n(), m = spec.m();
  const double s = spec.sigma(), se = spec.sigma_eps(), mu = spec.mu();
  ScoreVector out;
  const VectorXd r = y - spec.xbeta() - spec.A() * W;
  if (spec.q() > 0) out.d_beta = spec.X().transpose() * r / (se * se);
  out.d_sigma_eps = -m / se + r.squaredNorm() / (se * se * se);

  const VectorXd u = spec.K() * W - mu * (V - spec.h());
  double quad = 0.0, dmu = 0.0;
  for (int i = 0; i < n; ++i) {
    quad += u[i] * u[i] / V[i];
    dmu += u[i] * (V[i] - spec.h()[i]) / V[i];
  }
  out.d_sigma = -n / s + quad / (s * s * s);
  out.d_mu = dmu / (s * s);

  if (dK) {
    out.d_zeta.resize(dK->size());
    const VectorXd uDinv = u.cwiseQuotient(V);
    for (size_t j = 0; j < dK->size(); ++j) {
      const MatrixXd& D = (*dK)[j];
      out.d_zeta[j] =
          spec.solve_K_mat(D).trace() - uDinv.dot(D * W) / (s * s);
    }
  }
  if (spec.family() != MixingFamily::Gig) {
    out.d_nu = d_nu_prior(spec, V);
    out.has_nu = true;
  }
  return out;
}

ScoreVector score_noncentered(const ModelSpec& spec, const VectorXd& y,
                              const VectorXd& M, const VectorXd& V,
                              const std::vector<MatrixXd>* dK) {
  const int n = spec.n(), m = spec.m();
  const double s = spec.sigma(), se = spec.sigma_eps(), mu = spec.mu();
  ScoreVector out;
  const VectorXd Mc = M - mu * spec.h();
  const VectorXd r = y - spec.xbeta() - spec.apply_B(Mc);
  if (spec.q() > 0) out.d_beta = spec.X().transpose() * r / (se * se);
  out.d_sigma_eps = -m / se + r.squaredNorm() / (se * se * se);

  double quad = 0.0, dmu1 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = M[i] - mu * V[i];
    quad += d * d / V[i];
    dmu1 += d;
  }
  out.d_sigma = -n / s + quad / (s * s * s);
  out.d_mu = dmu1 / (s * s) - spec.Bh().dot(r) / (se * se);

  if (dK) {
    out.d_zeta.resize(dK->size());
    const VectorXd KinvMc = spec.solve_K(Mc);
    for (size_t j = 0; j < dK->size(); ++j) {
      const VectorXd w = spec.apply_B((*dK)[j] * KinvMc);  // A K^{-1} dK K^{-1}(M-mu h)
      out.d_zeta[j] = -r.dot(w) / (se * se);
    }
  }
  if (spec.family() != MixingFamily::Gig) {
    out.d_nu = d_nu_prior(spec, V);
    out.has_nu = true;
  }
  return out;
}

ScoreVector rb_score(const ModelSpec& spec, const VectorXd& y,
                     const VectorXd& V, const std::vector<MatrixXd>* dK) {
  const int n = spec.n(), m = spec.m();
  const double s = spec.sigma(), se = spec.sigma_eps(), mu = spec.mu();
  const PrecisionGaussian g = conditional_M(spec, V, y);
  const VectorXd mM = g.mean();
  const MatrixXd Sigma = g.covariance();

  ScoreVector out;
  const VectorXd McBar = mM - mu * spec.h();
  const VectorXd rbar = y - spec.xbeta() - spec.apply_B(McBar);
  if (spec.q() > 0) out.d_beta = spec.X().transpose() * rbar / (se * se);

  const double trS_BtB = Sigma.cwiseProduct(spec.BtB()).sum();
  out.d_sigma_eps =
      -m / se + (rbar.squaredNorm() + trS_BtB) / (se * se * se);

  double quad = 0.0, dmu1 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = mM[i] - mu * V[i];
    quad += (d * d + Sigma(i, i)) / V[i];
    dmu1 += d;
  }
  out.d_sigma = -n / s + quad / (s * s * s);
  out.d_mu = dmu1 / (s * s) - spec.Bh().dot(rbar) / (se * se);

  if (dK) {
    out.d_zeta.resize(dK->size());
    const VectorXd KinvMcBar = spec.solve_K(McBar);
    for (size_t j = 0; j < dK->size(); ++j) {
      const MatrixXd& D = (*dK)[j];
      // E[R^T C (M - mu h)] = rbar^T C (mM - mu h) - tr(B^T C Sigma),
      // C = A K^{-1} D K^{-1}, so B^T C = BtB (D K^{-1}).
      const double lin = rbar.dot(spec.apply_B(D * KinvMcBar));
      const MatrixXd DKinv = spec.solve_Kt_mat(D.transpose()).transpose();
      const MatrixXd BtC = spec.BtB() * DKinv;
      const double trc = BtC.cwiseProduct(Sigma.transpose()).sum();
      out.d_zeta[j] = -(lin - trc) / (se * se);
    }
  }
  if (spec.family() != MixingFamily::Gig) {
    out.d_nu = d_nu_prior(spec, V);
    out.has_nu = true;
  }
  return out;
}

int ParamMask::count(int q) const {
  int c = 0;
  if (beta) c += q;
  if (sigma_eps) ++c;
  if (sigma) ++c;
  if (mu) ++c;
  if (zeta) ++c;
  if (nu) ++c;
  return c;
}

VectorXd pack_gradient(const ScoreVector& s, const ParamMask& mask,
                       const ModelSpec& spec, double phi) {
  VectorXd g(mask.count(spec.q()));
  int k = 0;
  if (mask.beta)
    for (int j = 0; j < spec.q(); ++j) g[k++] = s.d_beta[j];
  if (mask.sigma_eps) g[k++] = s.d_sigma_eps * spec.sigma_eps();
  if (mask.sigma) g[k++] = s.d_sigma * spec.sigma();
  if (mask.mu) g[k++] = s.d_mu;
  if (mask.zeta) g[k++] = s.d_zeta[0] * (1.0 - phi * phi);
  if (mask.nu) g[k++] = s.d_nu * spec.nu();
  return g;
}

VectorXd grad_estimate(const ModelSpec& spec, const VectorXd& y, int k_gibbs,
                       ChainState& chain, RngStream& rng, const ParamMask& mask,
                       double phi, const std::vector<MatrixXd>* dK) {
  if (k_gibbs < 1) throw std::invalid_argument("grad_estimate: k_gibbs >= 1");
  VectorXd acc = VectorXd::Zero(mask.count(spec.q()));
  for (int j = 0; j < k_gibbs; ++j) {
    chain = gibbs_step(spec, Parameterization::NonCentered, chain, y, rng);
    const ScoreVector s = rb_score(spec, y, chain.V, dK);
    acc += pack_gradient(s, mask, spec, phi);
  }
  return acc / k_gibbs;
}

namespace {

ModelSpec apply_params(const ModelSpec& base, const ParamMask& mask,
                       const VectorXd& theta, double* phi_out) {
  ModelSpec spec = base;
  int k = 0;
  if (mask.beta) {
    VectorXd beta(base.q());
    for (int j = 0; j < base.q(); ++j) beta[j] = theta[k++];
    spec = spec.with_beta(beta);
  }
  double se = spec.sigma_eps(), s = spec.sigma(), mu = spec.mu();
  if (mask.sigma_eps) se = std::exp(theta[k++]);
  if (mask.sigma) s = std::exp(theta[k++]);
  if (mask.mu) mu = theta[k++];
  spec = spec.with_scalars(mu, s, se);
  if (mask.zeta) {
    const double phi = std::tanh(theta[k++]);
    *phi_out = phi;
    spec = spec.with_K(build_ar1_operator(base.n(), phi));
  }
  if (mask.nu) spec = spec.with_nu(std::exp(theta[k++]));
  return spec;
}

VectorXd initial_theta(const ModelSpec& spec, const ParamMask& mask,
                       double phi0) {
  VectorXd theta(mask.count(spec.q()));
  int k = 0;
  if (mask.beta)
    for (int j = 0; j < spec.q(); ++j) theta[k++] = spec.beta()[j];
  if (mask.sigma_eps) theta[k++] = std::log(spec.sigma_eps());
  if (mask.sigma) theta[k++] = std::log(spec.sigma());
  if (mask.mu) theta[k++] = spec.mu();
  if (mask.zeta) theta[k++] = std::atanh(phi0);
  if (mask.nu) theta[k++] = std::log(spec.nu());
  return theta;
}

}  // namespace

SgdResult sgd_fit(const ModelSpec& spec0, const VectorXd& y,
                  const SgdConfig& cfg, RngStream& rng) {
  SgdResult res{.trajectory = {}, .grad_norms = {}, .final_spec = spec0};
  double phi = cfg.phi0;
  VectorXd theta = initial_theta(spec0, cfg.mask, phi);
  ModelSpec spec = apply_params(spec0, cfg.mask, theta, &phi);

  ChainState chain;
  chain.V = VectorXd::Ones(spec.n());
  chain.latent = VectorXd::Zero(spec.n());
  for (long t = 0; t < cfg.burn_first; ++t)
    chain = gibbs_step(spec, Parameterization::NonCentered, chain, y, rng);

  std::vector<MatrixXd> dK;
  for (long t = 0; t < cfg.iterations; ++t) {
    if (cfg.mask.zeta) {
      dK.assign(1, ar1_operator_dphi(spec.n(), phi));
    }
    if (!cfg.warm_start) {
      chain.V = VectorXd::Ones(spec.n());
      for (long j = 0; j < cfg.burn_first; ++j)
        chain = gibbs_step(spec, Parameterization::NonCentered, chain, y, rng);
    }
    const VectorXd g = grad_estimate(spec, y, cfg.k_gibbs, chain, rng,
                                     cfg.mask, phi, cfg.mask.zeta ? &dK : nullptr);
    const double gamma_t = cfg.step_c / (cfg.step_t0 + static_cast<double>(t));
    theta += gamma_t * g;  // ascent on the log-likelihood
    res.trajectory.push_back(theta);
    res.grad_norms.push_back(g.norm());
    if (!theta.allFinite() || theta.norm() > cfg.divergence_norm) {
      res.diverged = true;
      res.note = "parameter iterates diverged at t=" + std::to_string(t);
      return res;
    }
    spec = apply_params(spec0, cfg.mask, theta, &phi);
  }
  res.final_spec = spec;
  return res;
}

IntegrabilityReport demo_centered_integrability(const ModelSpec& spec,
                                                const VectorXd& y,
                                                long chain_length,
                                                RngStream& rng) {
  IntegrabilityReport rep;
  ChainState st;
  st.V = VectorXd::Ones(spec.n());
  st.latent = VectorXd::Zero(spec.n());

  double acc_c = 0.0, acc_nc = 0.0;
  std::vector<double> ts, rc, rnc;
  long next_checkpoint = 64;
  for (long t = 1; t <= chain_length; ++t) {
    st = gibbs_step(spec, Parameterization::NonCentered, st, y, rng);
    double fc = 0.0, fnc = 0.0;
    for (int i = 0; i < spec.n(); ++i) {
      fc += std::fabs(spec.h()[i] * st.latent[i] / st.V[i]);
      fnc += std::fabs(st.latent[i] - spec.mu() * st.V[i]);
    }
    acc_c += fc;
    acc_nc += fnc;
    if (t == next_checkpoint || t == chain_length) {
      ts.push_back(static_cast<double>(t));
      rc.push_back(acc_c / t);
      rnc.push_back(acc_nc / t);
      next_checkpoint *= 2;
    }
  }
  rep.checkpoints_t = ts;
  rep.running_mean_centered = rc;
  rep.running_mean_noncentered = rnc;

  // Least-squares slope of log(running mean) vs log(t) over the tail half.
  auto tail_slope = [&](const std::vector<double>& r) {
    const size_t k0 = ts.size() / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int c = 0;
    for (size_t k = k0; k < ts.size(); ++k) {
      const double x = std::log(ts[k]), yv = std::log(r[k]);
      sx += x;
      sy += yv;
      sxx += x * x;
      sxy += x * yv;
      ++c;
    }
    return (c * sxy - sx * sy) / (c * sxx - sx * sx);
  };
  rep.slope_centered = tail_slope(rc);
  rep.slope_noncentered = tail_slope(rnc);
  rep.stabilized_centered = rep.slope_centered < rep.slope_threshold;
  rep.stabilized_noncentered = rep.slope_noncentered < rep.slope_threshold;
  return rep;
}

}  // namespace llngm
