#include "llngm/gig.hpp"

#include <algorithm>
#include <cmath>

#include "llngm/bessel.hpp"

namespace llngm {

bool GigParams::in_psi(double p, double a, double b) {
  if (!std::isfinite(p) || !std::isfinite(a) || !std::isfinite(b)) return false;
  if (a > 0.0 && b > 0.0) return true;
  if (a == 0.0 && b > 0.0 && p < 0.0) return true;
  if (a > 0.0 && b == 0.0 && p > 0.0) return true;
  return false;
}

GigParams::GigParams(double p, double a, double b) : p_(p), a_(a), b_(b) {
  if (!in_psi(p, a, b))
    throw std::invalid_argument("GigParams: (p,a,b)=(" + std::to_string(p) +
                                "," + std::to_string(a) + "," +
                                std::to_string(b) + ") outside Psi");
  if (a > 0.0 && b > 0.0)
    branch_ = GigBranch::Interior;
  else if (a == 0.0)
    branch_ = GigBranch::InvGamma;
  else
    branch_ = GigBranch::Gamma;
}

double gig_log_density(const GigParams& g, double x) {
  if (!(x > 0.0)) throw std::domain_error("gig_log_density: x must be > 0");
  switch (g.branch()) {
    case GigBranch::Interior: {
      const double omega = std::sqrt(g.a() * g.b());
      return 0.5 * g.p() * (std::log(g.a()) - std::log(g.b())) - M_LN2 -
             log_bessel_k(g.p(), omega) + (g.p() - 1.0) * std::log(x) -
             0.5 * (g.a() * x + g.b() / x);
    }
    case GigBranch::Gamma: {
      // Gamma(shape p, rate a/2)
      const double rate = 0.5 * g.a();
      return g.p() * std::log(rate) - std::lgamma(g.p()) +
             (g.p() - 1.0) * std::log(x) - rate * x;
    }
    case GigBranch::InvGamma: {
      // Inv-Gamma(shape -p, scale b/2)
      const double alpha = -g.p();
      const double beta = 0.5 * g.b();
      return alpha * std::log(beta) - std::lgamma(alpha) -
             (alpha + 1.0) * std::log(x) - beta / x;
    }
  }
  return 0.0;  // unreachable
}

bool gig_moment_exists(const GigParams& g, double r) {
  switch (g.branch()) {
    case GigBranch::Interior:
      return true;
    case GigBranch::Gamma:
      return r > -g.p();
    case GigBranch::InvGamma:
      return r < -g.p();
  }
  return false;
}

double gig_moment(const GigParams& g, double r) {
  if (!gig_moment_exists(g, r))
    throw MomentDivergenceError("gig_moment: E[V^" + std::to_string(r) +
                                "] diverges for this branch");
  switch (g.branch()) {
    case GigBranch::Interior: {
      const double omega = std::sqrt(g.a() * g.b());
      return std::exp(0.5 * r * (std::log(g.b()) - std::log(g.a())) +
                      log_bessel_k(g.p() + r, omega) -
                      log_bessel_k(g.p(), omega));
    }
    case GigBranch::Gamma: {
      const double rate = 0.5 * g.a();
      return std::exp(std::lgamma(g.p() + r) - std::lgamma(g.p()) -
                      r * std::log(rate));
    }
    case GigBranch::InvGamma: {
      const double alpha = -g.p();
      const double beta = 0.5 * g.b();
      return std::exp(std::lgamma(alpha - r) - std::lgamma(alpha) +
                      r * std::log(beta));
    }
  }
  return 0.0;  // unreachable
}

double gig_mean(const GigParams& g) { return gig_moment(g, 1.0); }

namespace {

// Two-parameter standardized form: density proportional to
//   x^{q-1} exp{-(beta/2)(x + 1/x)},  q = |p| >= 0, beta = sqrt(ab) > 0.
// A draw X from it maps back via X -> 1/X for p < 0, then X * sqrt(b/a).
// The three samplers below are the standard region split (ratio-of-uniforms
// with mode shift; a three-piece envelope for small beta; plain
// ratio-of-uniforms) as in Hormann & Leydold's GIG generator.

struct StdGig {
  double q;     // |p|
  double beta;  // sqrt(ab)
  double log_dens_propto(double x) const {
    return (q - 1.0) * std::log(x) - 0.5 * beta * (x + 1.0 / x);
  }
  double dens_propto(double x) const { return std::exp(log_dens_propto(x)); }
  double sqrt_dens_ratio(double x, double m) const {
    // sqrt(f(x)/f(m))
    return std::exp(0.5 * (q - 1.0) * (std::log(x) - std::log(m)) +
                    0.25 * beta * (m + 1.0 / m - x - 1.0 / x));
  }
};

// Mode of the standardized density.
double std_mode(double q, double beta) {
  if (q >= 1.0)
    return (std::sqrt((q - 1.0) * (q - 1.0) + beta * beta) + (q - 1.0)) / beta;
  // rationalized form, stable when beta is small
  return beta / (std::sqrt((1.0 - q) * (1.0 - q) + beta * beta) + (1.0 - q));
}

// Ratio-of-uniforms with mode shift; used when beta > 1 or q > 1.
double sample_rou_shift(const StdGig& f, RngStream& rng) {
  const double m = std_mode(f.q, f.beta);
  const double two_d_beta = 2.0 / f.beta;

  // The endpoints of the u-interval solve a cubic (stationary points of
  // (x-m)^2 f(x)); solved in trigonometric form.
  const double c1 = (-two_d_beta * (f.q + 1.0) - m) / 3.0;
  const double c2 = two_d_beta * (f.q - 1.0) * m - 1.0;
  double c3 = std::min(c2 / 3.0 - c1 * c1, 0.0);
  c3 = std::sqrt(-c3);
  const double c4 = c1 * (2.0 * c1 * c1 - c2) + m;
  double c5 = std::clamp(-c4 / 2.0 * std::pow(c3, -3.0), -1.0, 1.0);
  c5 = std::acos(c5) / 3.0;
  const double c6 = 2.0 * c3;
  const double x_minus = c6 * std::cos(c5 + 4.0 * M_PI / 3.0) - c1;
  double x_plus = c6 * std::cos(c5) - c1;
  x_plus = std::max(x_plus, x_minus);

  const double u_lo = (x_minus - m) * f.sqrt_dens_ratio(x_minus, m);
  const double u_hi = (x_plus - m) * f.sqrt_dens_ratio(x_plus, m);
  const double u_span = u_hi - u_lo;

  for (;;) {
    const double u = rng.uniform();
    const double v = rng.uniform();
    const double x = (u_span * u + u_lo) / v + m;
    if (x <= 0.0) continue;
    if (v <= f.sqrt_dens_ratio(x, m)) return x;
  }
}

// Three-piece envelope for beta <= min(1/2, (2/3) sqrt(1-q)), q < 1:
// constant on (0, x0), c x^{q-1} on (x0, 2/beta), exponential tail beyond.
double sample_small_beta(const StdGig& f, RngStream& rng) {
  const double m = std_mode(f.q, f.beta);
  const double two_d_beta = 2.0 / f.beta;
  const double x0 = f.beta / (1.0 - f.q);
  const double xs = std::max(x0, two_d_beta);

  const double c1 = f.dens_propto(m);
  const double area1 = c1 * x0;
  double c2 = 0.0, area2 = 0.0, x0_pow_q = 1.0;
  if (x0 < two_d_beta) {
    c2 = std::exp(-f.beta);
    if (f.q > 0.0) {
      x0_pow_q = std::pow(x0, f.q);
      area2 = c2 * (std::pow(two_d_beta, f.q) - x0_pow_q) / f.q;
    } else {
      area2 = c2 * std::log(two_d_beta / f.beta);
    }
  }
  const double c3 = std::pow(xs, f.q - 1.0);
  const double area3 = 2.0 * c3 * std::exp(-xs / two_d_beta) / f.beta;
  const double total = area1 + area2 + area3;

  for (;;) {
    const double u = rng.uniform();
    double v = rng.uniform() * total;
    double x, env;
    if (v <= area1) {
      x = x0 * v / area1;
      env = c1;
    } else if (v <= area1 + area2) {
      v -= area1;
      if (f.q > 0.0)
        x = std::pow(x0_pow_q + v * f.q / c2, 1.0 / f.q);
      else
        x = f.beta * std::exp(v * std::exp(f.beta));
      env = c2 * std::pow(x, f.q - 1.0);
    } else {
      v -= area1 + area2;
      x = -two_d_beta * std::log(std::exp(-xs / two_d_beta) -
                                 v / (c3 * two_d_beta));
      env = c3 * std::exp(-x / two_d_beta);
    }
    if (u * env < f.dens_propto(x)) return x;
  }
}

// Plain ratio-of-uniforms for the remaining moderate region.
double sample_rou(const StdGig& f, RngStream& rng) {
  const double m = std_mode(f.q, f.beta);
  const double x_plus =
      (1.0 + f.q + std::sqrt((1.0 + f.q) * (1.0 + f.q) + f.beta * f.beta)) /
      f.beta;
  const double v_sup = std::sqrt(f.dens_propto(m));
  const double u_sup = x_plus * std::sqrt(f.dens_propto(x_plus));

  for (;;) {
    const double u = rng.uniform() * u_sup;
    const double v = rng.uniform() * v_sup;
    const double x = u / v;
    if (v * v <= f.dens_propto(x)) return x;
  }
}

}  // namespace

double gig_sample(const GigParams& g, RngStream& rng) {
  switch (g.branch()) {
    case GigBranch::InvGamma:
      return 0.5 * g.b() / rng.gamma(-g.p());
    case GigBranch::Gamma:
      return 2.0 / g.a() * rng.gamma(g.p());
    case GigBranch::Interior:
      break;
  }
  StdGig f;
  f.q = std::fabs(g.p());
  f.beta = std::sqrt(g.a() * g.b());
  double x;
  if (f.beta > 1.0 || f.q > 1.0)
    x = sample_rou_shift(f, rng);
  else if (f.beta <= std::min(0.5, (2.0 / 3.0) * std::sqrt(1.0 - f.q)))
    x = sample_small_beta(f, rng);
  else
    x = sample_rou(f, rng);
  if (g.p() < 0.0) x = 1.0 / x;
  return x * std::sqrt(g.b() / g.a());
}

}  // namespace llngm
