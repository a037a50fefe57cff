#include "llngm/ergodicity.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "llngm/bessel.hpp"
#include "llngm/rng.hpp"

namespace llngm {

const char* to_string(Regime r) {
  switch (r) {
    case Regime::TC1: return "TC1";
    case Regime::TC2: return "TC2";
    case Regime::DM_III: return "DM_III";
    case Regime::DM_I: return "DM_I";
    case Regime::DM_II: return "DM_II";
    case Regime::Outside: return "Outside";
  }
  return "?";
}

const char* to_string(TraceClassVerdict t) {
  switch (t) {
    case TraceClassVerdict::Yes: return "Yes";
    case TraceClassVerdict::No: return "No";
    case TraceClassVerdict::Unknown: return "Unknown";
  }
  return "?";
}

const char* to_string(GeoVerdict g) {
  switch (g) {
    case GeoVerdict::Yes: return "Yes";
    case GeoVerdict::ConditionalOnNullSmallness:
      return "ConditionalOnNullSmallness";
    case GeoVerdict::Unknown: return "Unknown";
  }
  return "?";
}

NullSpaceReport null_smallness(const ModelSpec& spec) {
  NullSpaceReport rep;
  const int n = spec.n();
  Eigen::BDCSVD<MatrixXd> svd(spec.A(), Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = (sv.size() > 0) ? sv[0] : 0.0;

  int rank = 0;
  if (smax > 0.0) {
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv[i] >= 1e-10 * smax) ++rank;
      if (sv[i] >= 1e-12 * smax && sv[i] <= 1e-8 * smax) rep.rank_flagged = true;
    }
  }
  rep.r = n - rank;

  const GigParams g = spec.regime_gig();
  const double s2a_mu2 =
      spec.sigma() * spec.sigma() * g.a() + spec.mu() * spec.mu();

  if (rep.r == 0) {
    rep.proj_norm = 0.0;
    rep.ns_ratio = 0.0;
    rep.satisfied = true;  // by convention for a trivial null space
    return rep;
  }

  // Right singular vectors of the (numerically) zero singular values.
  rep.U_A = svd.matrixV().rightCols(rep.r);
  rep.G = rep.U_A.transpose() * spec.K().transpose() * spec.K() * rep.U_A;
  rep.z = rep.U_A.transpose() * (spec.K().transpose() * VectorXd::Ones(n));
  const VectorXd Ginv_z = rep.G.llt().solve(rep.z);
  rep.proj_norm = std::sqrt(std::max(0.0, rep.z.dot(Ginv_z)));

  if (spec.mu() == 0.0) {
    rep.ns_ratio = 0.0;  // automatically satisfied
  } else {
    rep.ns_ratio = std::fabs(spec.mu()) / std::sqrt(s2a_mu2) * rep.proj_norm;
  }
  rep.satisfied = rep.ns_ratio < 1.0;
  return rep;
}

namespace {

RegimeReport classify_core(const GigParams* gig_or_null, double p, double a,
                           double b, double mu) {
  RegimeReport rep;
  if (!GigParams::in_psi(p, a, b)) {
    rep.regime = Regime::Outside;
    rep.trace_class = TraceClassVerdict::Unknown;
    rep.geo_ergodic = GeoVerdict::Unknown;
    return rep;
  }
  (void)gig_or_null;
  if (a > 0.0 && b > 0.0) {
    rep.regime = Regime::TC1;
    rep.trace_class = TraceClassVerdict::Yes;
    rep.geo_ergodic = GeoVerdict::Yes;
  } else if (a > 0.0 && b == 0.0) {
    if (p > 0.5) {
      rep.regime = Regime::TC2;
      rep.trace_class = TraceClassVerdict::Yes;
      rep.geo_ergodic = GeoVerdict::Yes;
    } else {
      rep.regime = Regime::DM_III;
      rep.trace_class = TraceClassVerdict::Unknown;
      rep.geo_ergodic = GeoVerdict::ConditionalOnNullSmallness;
    }
  } else {  // a == 0, b > 0, p < 0
    if (mu == 0.0) {
      rep.regime = Regime::DM_I;
      rep.trace_class = TraceClassVerdict::No;
      rep.geo_ergodic = GeoVerdict::Yes;
    } else {
      rep.regime = Regime::DM_II;
      rep.trace_class = TraceClassVerdict::Unknown;
      rep.geo_ergodic = GeoVerdict::ConditionalOnNullSmallness;
    }
  }
  return rep;
}

}  // namespace

RegimeReport classify_regime(const ModelSpec& spec) {
  const GigParams g = spec.regime_gig();
  RegimeReport rep = classify_core(&g, g.p(), g.a(), g.b(), spec.mu());
  if (rep.geo_ergodic == GeoVerdict::ConditionalOnNullSmallness)
    rep.ns = null_smallness(spec);
  return rep;
}

RegimeReport classify_regime_params(double p, double a, double b, double mu) {
  return classify_core(nullptr, p, a, b, mu);
}

VectorXd gamma_ns_scan(const ModelSpec& spec, const VectorXd& y,
                       const VectorXd& mu_grid) {
  const NullSpaceReport ns = null_smallness(spec);
  if (ns.r != 1)
    throw std::runtime_error("gamma_ns_scan: dim Null(B) must be 1, got " +
                             std::to_string(ns.r));
  VectorXd u0 = spec.K() * ns.U_A.col(0);
  u0.normalize();

  VectorXd out(mu_grid.size());
  for (Eigen::Index j = 0; j < mu_grid.size(); ++j) {
    const ModelSpec sj =
        spec.with_scalars(mu_grid[j], spec.sigma(), spec.sigma_eps());
    const double proj = std::fabs(u0.dot(sj.mbar(y)));
    const double denom = sj.sigma() * std::sqrt(sj.a_tilde());
    if (proj == 0.0)
      out[j] = 0.0;
    else if (denom == 0.0)
      out[j] = std::numeric_limits<double>::infinity();
    else
      out[j] = proj / denom;
  }
  return out;
}

double delta_of_p(double p) {
  if (!(p > 0.0)) throw std::domain_error("delta_of_p: p must be > 0");
  if (p <= 0.5) return p;
  return std::min(0.5, 2.0 * p - 1.0);
}

double kappa_of_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::domain_error("kappa_of_delta: delta must lie in (0,1)");
  return std::exp(-0.5 * delta * M_LN2 + std::lgamma(0.5 * (1.0 - delta))) /
         std::sqrt(M_PI);
}

double gamma_baseline(double alpha, double delta) {
  if (!(alpha > 0.0) || !(delta > 0.0 && delta < alpha))
    throw std::domain_error("gamma_baseline: need alpha > 0, delta in (0,alpha)");
  return std::exp(std::lgamma(alpha + 0.5 - delta) - std::lgamma(alpha + 0.5) +
                  std::lgamma(delta + 0.5)) /
         std::sqrt(M_PI);
}

double probe_eta_sup(const ModelSpec& spec, const VectorXd& y, int n_probes,
                     std::uint64_t seed) {
  const int n = spec.n();
  const VectorXd mbar = spec.mbar(y);
  RngStream rng(seed);
  double sup = 0.0;
  auto eval = [&](const VectorXd& V) {
    MatrixXd Q = spec.rho() * spec.BtB();
    Q.diagonal() += V.cwiseInverse();
    const double nrm = Q.llt().solve(mbar).norm();
    if (nrm > sup) sup = nrm;
  };
  // All-equal grids across twelve decades plus log-uniform random probes.
  for (double e = -6.0; e <= 6.0; e += 0.5)
    eval(VectorXd::Constant(n, std::pow(10.0, e)));
  for (int k = 0; k < n_probes; ++k) {
    VectorXd V(n);
    for (int i = 0; i < n; ++i) V[i] = std::pow(10.0, rng.uniform(-6.0, 6.0));
    eval(V);
  }
  return sup;
}

namespace {

// C1(p) of the case-III negative-moment bound.
double case3_C1(double p, double eps_star) {
  if (p >= 0.5) return 1.0 / (2.0 * kappa_of_delta(delta_of_p(p)));
  const double d = delta_of_p(p);  // = p
  return (1.0 + eps_star) *
         std::exp(std::lgamma(0.5 * (1.0 - p)) + 0.5 * d * M_LN2 -
                  std::lgamma(0.5 - p));
}

// Numeric crossover for the small-argument Bessel ratio bound: largest xbar
// (on a halving grid) with K_{nu1}(x)/K_{nu2}(x) <= (1+eps*) G x^{-(nu1-nu2)}
// for all grid x <= xbar.
double bessel_crossover(double nu1, double nu2, double eps_star) {
  const double lead = std::exp(std::lgamma(nu1) - std::lgamma(nu2) +
                               (nu1 - nu2) * M_LN2);
  auto holds_below = [&](double xbar) {
    for (int i = 1; i <= 64; ++i) {
      const double x = xbar * i / 64.0;
      const double lhs = bessel_k_ratio(nu1, nu2, x);
      const double rhs = (1.0 + eps_star) * lead * std::pow(x, -(nu1 - nu2));
      if (lhs > rhs) return false;
    }
    return true;
  };
  double xbar = 1.0;
  for (int it = 0; it < 40 && !holds_below(xbar); ++it) xbar *= 0.5;
  return xbar;
}

// Smallest strictly positive eigenvalue of B^T B.
double lambda_plus(const MatrixXd& BtB) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(BtB);
  const auto& ev = es.eigenvalues();
  const double emax = ev[ev.size() - 1];
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] > 1e-10 * std::max(emax, 1.0)) return ev[i];
  throw std::runtime_error("drift_constants: B^T B has no positive eigenvalue");
}

// sup over x >= x0 of K_{lambda-q}(x)/K_lambda(x), probed on a log grid
// (the ratio tends to 1; the sup is attained at moderate x).
double probe_ratio_sup(double lam, double q, double x0) {
  double sup = 1.0;
  for (int i = 0; i <= 400; ++i) {
    const double x = x0 * std::pow(10.0, 6.0 * i / 400.0);
    sup = std::max(sup, bessel_k_ratio(lam - q, lam, x));
    if (x > 1e3) break;
  }
  return sup;
}

}  // namespace

DriftReport drift_constants(const ModelSpec& spec, DriftCase c,
                            const VectorXd* y_in) {
  const GigParams g = spec.regime_gig();
  const double p = g.p(), a = g.a(), b = g.b();
  const double mu = spec.mu(), sigma = spec.sigma();
  const int n = spec.n();
  const VectorXd y = y_in ? *y_in : VectorXd::Zero(spec.m());

  DriftReport rep;
  rep.drift_case = c;

  switch (c) {
    case DriftCase::I: {
      if (!(a == 0.0 && mu == 0.0 && b > 0.0 && p < 0.0))
        throw std::invalid_argument(
            "drift_constants: case I needs a=0, mu=0 (so b>0, p<0)");
      const double alpha = -p;
      const double delta = std::min(0.5 * alpha, 0.5);
      rep.delta = delta;
      const double C_delta =
          std::exp(std::lgamma(alpha + 0.5 - delta) - std::lgamma(alpha + 0.5));
      const double K_delta = std::exp(std::lgamma(delta + 0.5)) / std::sqrt(M_PI);
      rep.gamma_minus = 0.0;
      rep.gamma_plus = 0.0;
      rep.gamma = C_delta * K_delta;
      const double phi_ig =
          1.0 + n * C_delta * std::pow(0.5 * b, delta) +
          n * std::exp(std::lgamma(alpha + 0.75) - std::lgamma(alpha + 0.5)) *
              std::pow(0.5 * b, -0.25);
      const double c_eta = probe_eta_sup(spec, y);
      const double psi = C_delta / std::pow(2.0 * sigma * sigma, delta) *
                         std::pow(static_cast<double>(n), 1.0 - delta) *
                         std::pow(c_eta, 2.0 * delta);
      rep.L = phi_ig + psi;
      rep.L_rigorous = (c_eta == 0.0);
      rep.L_note = rep.L_rigorous
                       ? "formula-derived (eta vanishes for this Y)"
                       : "includes numerically probed sup||eta||; not certified";
      break;
    }
    case DriftCase::II: {
      if (!(a == 0.0 && mu != 0.0 && b > 0.0 && p < 0.0))
        throw std::invalid_argument(
            "drift_constants: case II needs a=0, b>0, p<0, mu!=0");
      const NullSpaceReport ns = null_smallness(spec);
      if (!ns.satisfied)
        throw std::invalid_argument(
            "drift_constants: null-smallness violated; case II hypotheses fail");
      const double q = 0.25;  // any q in (0, 1/2]; matches the S_- exponent
      rep.delta = q;
      rep.eps = 0.5 * (1.0 - ns.ns_ratio);
      rep.gamma_plus = ns.ns_ratio + rep.eps;
      rep.gamma_minus = 0.0;  // negative moments are uniformly bounded here
      rep.gamma = rep.gamma_plus;

      const double a_tilde = spec.a_tilde();
      const double lam = p - 0.5;
      const double x0 = std::sqrt(a_tilde * b);
      // E[V^{-q}|M] = (chi/psi)^{-q/2} K_{lam-q}(x)/K_lam(x)
      //            <= (b/a_tilde)^{-q/2} sup_{x>=x0} K_{lam-q}/K_lam.
      const double L_minus =
          n * std::pow(b / a_tilde, -0.5 * q) * probe_ratio_sup(lam, q, x0);
      const double C_lin = 2.0 * std::fabs(lam) + 1.0;
      const VectorXd mbar = spec.mbar(y);
      // Null / range split of mbar via the projector K U_A G^{-1} U_A^T K^T.
      VectorXd m0 = VectorXd::Zero(n);
      if (ns.r > 0) {
        const MatrixXd KU = spec.K() * ns.U_A;
        m0 = KU * ns.G.llt().solve(KU.transpose() * mbar);
      }
      const double m_par = (mbar - m0).norm();
      const double lp = lambda_plus(spec.BtB());
      const double c_par =
          m_par / (sigma * std::sqrt(a_tilde) * std::sqrt(spec.rho() * lp));
      const double c0 = std::sqrt(2.0 / M_PI) / std::sqrt(a_tilde);
      const double L_plus = c_par * c_par / (2.0 * rep.eps) +
                            n * c0 * c0 / (2.0 * rep.eps) +
                            n * (std::sqrt(b) / std::sqrt(a_tilde) +
                                 C_lin / a_tilde);
      rep.L = 1.0 + L_minus + L_plus;
      rep.L_rigorous = false;
      rep.L_note =
          "uses probed sup of the Bessel ratio and the Amos-type linear "
          "bound; not certified";
      break;
    }
    case DriftCase::III: {
      if (!(a > 0.0 && b == 0.0 && p > 0.0))
        throw std::invalid_argument(
            "drift_constants: case III needs a>0, b=0, p>0");
      const NullSpaceReport ns = null_smallness(spec);
      if (!ns.satisfied)
        throw std::invalid_argument(
            "drift_constants: null-smallness violated; case III hypotheses fail");
      const double delta = delta_of_p(p);
      rep.delta = delta;
      rep.kappa = kappa_of_delta(delta);
      if (p < 0.5) {
        rep.eps_star = 0.5 * p * p / (2.0 * (1.0 - 2.0 * p));
        rep.eps_crossover =
            bessel_crossover(0.5 + 0.5 * delta - p, 0.5 - p, rep.eps_star);
      }
      rep.C1 = case3_C1(p, rep.eps_star);
      rep.gamma_minus = rep.C1 * rep.kappa;
      rep.eps = 0.5 * (1.0 - ns.ns_ratio);
      rep.gamma_plus = ns.ns_ratio + rep.eps;
      rep.gamma = std::max(rep.gamma_minus, rep.gamma_plus);

      // Offset: the displayed pieces of L_- plus the case-II-style L_+.
      const double a_tilde = spec.a_tilde();
      double L_minus = 0.0;
      const double C2 = (p >= 0.5)
                            ? 0.5 * rep.kappa * std::pow(a_tilde, 0.5 * delta)
                            : std::pow(a_tilde / rep.eps_crossover, 0.5 * delta) *
                                  (std::pow((2.0 - 2.0 * p) / rep.eps_crossover,
                                            0.5 * delta) +
                                   1.0);
      for (int i = 0; i < n; ++i)
        L_minus += rep.gamma_minus *
                       std::pow(spec.rho() * spec.BtB()(i, i), 0.5 * delta) +
                   C2;
      const double C_lin = 2.0 * std::fabs(p - 0.5) + 1.0;
      const VectorXd mbar = spec.mbar(y);
      VectorXd m0 = VectorXd::Zero(n);
      if (ns.r > 0) {
        const MatrixXd KU = spec.K() * ns.U_A;
        m0 = KU * ns.G.llt().solve(KU.transpose() * mbar);
      }
      const double m_par = (mbar - m0).norm();
      const double lp = lambda_plus(spec.BtB());
      const double c_par =
          m_par / (sigma * std::sqrt(a_tilde) * std::sqrt(spec.rho() * lp));
      const double c0 = std::sqrt(2.0 / M_PI) / std::sqrt(a_tilde);
      const double L_plus = c_par * c_par / (2.0 * rep.eps) +
                            n * c0 * c0 / (2.0 * rep.eps) +
                            n * C_lin / a_tilde;
      rep.L = 1.0 + L_minus + L_plus;
      rep.L_rigorous = false;
      rep.L_note =
          "C2 and the linear Bessel-ratio constant enter through displayed "
          "but conservative bounds; not certified";
      break;
    }
  }
  return rep;
}

RosenthalIngredients rosenthal_ingredients(double lambda, double b_const,
                                           double d, double epsilon) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("rosenthal: lambda must lie in (0,1)");
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("rosenthal: epsilon must lie in (0,1]");
  if (!(b_const >= 0.0) || !(d > 2.0 * b_const / (1.0 - lambda)))
    throw std::invalid_argument("rosenthal: need d > 2b/(1-lambda)");
  RosenthalIngredients ing;
  ing.lambda = lambda;
  ing.b_const = b_const;
  ing.d = d;
  ing.epsilon = epsilon;
  ing.alpha_inv = (1.0 + 2.0 * b_const + lambda * d) / (1.0 + d);
  ing.A_const = 1.0 + 2.0 * (lambda * d + b_const);
  return ing;
}

double rosenthal_bound(double lambda, double b_const, double d, double epsilon,
                       double r, long k, double init_expect) {
  if (!(r > 0.0 && r < 1.0))
    throw std::invalid_argument("rosenthal: r must lie in (0,1)");
  if (k < 0) throw std::invalid_argument("rosenthal: k must be >= 0");
  const RosenthalIngredients ing =
      rosenthal_ingredients(lambda, b_const, d, epsilon);
  const double geo = std::pow(1.0 - epsilon, r * static_cast<double>(k));
  const double drift_term =
      std::pow(std::pow(ing.alpha_inv, 1.0 - r) * std::pow(ing.A_const, r),
               static_cast<double>(k)) *
      (1.0 + b_const / (1.0 - lambda) + init_expect);
  return geo + drift_term;
}

}  // namespace llngm
