#include "llngm/bessel.hpp"

#include <cfloat>
#include <cmath>
#include <limits>

namespace llngm {
namespace {

constexpr double kEps = 1.0e-16;
constexpr int kMaxIter = 20000;
constexpr double kPi = 3.14159265358979323846264338328;
constexpr double kEulerGamma = 0.57721566490153286060651209008;

// zeta(2..18), for the small-|u| expansion of 1/Gamma(1 +- u).
constexpr double kZeta[] = {
    0.0,
    0.0,
    1.6449340668482264364724151666,   // zeta(2)
    1.2020569031595942853997381615,   // zeta(3)
    1.0823232337111381915160036965,   // zeta(4)
    1.0369277551433699263313654865,   // zeta(5)
    1.0173430619844491397145179297,   // zeta(6)
    1.0083492773819228268397975498,   // zeta(7)
    1.0040773561979443393786852385,   // zeta(8)
    1.0020083928260822144178527693,   // zeta(9)
    1.0009945751278180853371459589,   // zeta(10)
    1.0004941886041194645587022825,   // zeta(11)
    1.0002460865533080482986379980,   // zeta(12)
    1.0001227133475784891467518365,   // zeta(13)
    1.0000612481350587048292585451,   // zeta(14)
    1.0000305882363070204935517285,   // zeta(15)
    1.0000152822594086518717325715,   // zeta(16)
    1.0000076371976378997622736002,   // zeta(17)
    1.0000038172932649998398564616};  // zeta(18)

// gam1 = [1/Gamma(1-u) - 1/Gamma(1+u)]/(2u), gam2 = [1/Gamma(1-u) + 1/Gamma(1+u)]/2
// for |u| <= 1/2. Uses log(1/Gamma(1+u)) = gamma_E*u - sum_{k>=2} (-1)^k zeta(k) u^k / k
// below |u|=0.2 (no cancellation), direct tgamma otherwise.
void chi_gamma(double u, double* gam1, double* gam2) {
  const double au = std::fabs(u);
  if (au < 0.2) {
    // f(u) = log(1/Gamma(1+u)); even part g, odd part hh; then
    // 1/Gamma(1-u) -+ 1/Gamma(1+u) = e^g (e^{-hh} -+ e^{hh}).
    double g = 0.0, hh = kEulerGamma * u;
    double up = u * u;
    for (int k = 2; k <= 18; ++k) {
      const double term = ((k % 2 == 0) ? -1.0 : 1.0) * kZeta[k] * up / k;
      if (k % 2 == 0)
        g += term;
      else
        hh += term;
      up *= u;
    }
    const double eg = std::exp(g);
    *gam2 = eg * std::cosh(hh);
    if (au < 1e-30) {
      *gam1 = -eg * kEulerGamma;
    } else {
      *gam1 = -eg * std::sinh(hh) / u;
    }
  } else {
    const double rp = 1.0 / std::tgamma(1.0 + u);
    const double rm = 1.0 / std::tgamma(1.0 - u);
    *gam1 = (rm - rp) / (2.0 * u);
    *gam2 = (rm + rp) / 2.0;
  }
}

struct ScaledPair {
  double kmu;   // e^x K_u(x) * 2^{-e2}
  double kmu1;  // e^x K_{u+1}(x) * 2^{-e2}
  long e2;
};

// Temme's series for K_u, K_{u+1}, |u| <= 1/2, 0 < x <= 2.
ScaledPair temme_small_x(double u, double x) {
  const double x2 = 0.5 * x;
  const double pimu = kPi * u;
  const double fact = (std::fabs(pimu) < 1e-290) ? 1.0 : pimu / std::sin(pimu);
  const double d = -std::log(x2);
  const double e = u * d;
  const double fact2 = (std::fabs(e) < 1e-290) ? 1.0 : std::sinh(e) / e;
  double gam1, gam2;
  chi_gamma(u, &gam1, &gam2);
  double ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
  double sum = ff;
  const double ee = std::exp(e);
  double p = 0.5 * ee * std::tgamma(1.0 + u);   // = 0.5 (x/2)^{-u} Gamma(1+u)
  double q = 0.5 / ee * std::tgamma(1.0 - u);   // = 0.5 (x/2)^{+u} Gamma(1-u)
  double c = 1.0;
  const double d2 = x2 * x2;
  double sum1 = p;
  int i = 1;
  for (; i <= kMaxIter; ++i) {
    ff = (i * ff + p + q) / (i * i - u * u);
    c *= d2 / i;
    p /= (i - u);
    q /= (i + u);
    const double del = c * ff;
    sum += del;
    const double del1 = c * (p - i * ff);
    sum1 += del1;
    if (std::fabs(del) < std::fabs(sum) * kEps) break;
  }
  if (i > kMaxIter) throw std::runtime_error("bessel_k: series failed to converge");
  const double scale = std::exp(x);  // x <= 2, harmless
  return {sum * scale, sum1 * (2.0 / x) * scale, 0};
}

// Steed's continued fraction CF2 for K_u, K_{u+1}, |u| <= 1/2, x > 2.
// Returns e^x-scaled values directly.
ScaledPair steed_large_x(double u, double x) {
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d, delh = d;
  double q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25 - u * u;
  double q = a1, c = a1, a = -a1;
  double s = 1.0 + q * delh;
  int i = 2;
  for (; i <= kMaxIter; ++i) {
    a -= 2 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::fabs(dels / s) < kEps) break;
  }
  if (i > kMaxIter) throw std::runtime_error("bessel_k: CF2 failed to converge");
  h = a1 * h;
  const double kmu = std::sqrt(kPi / (2.0 * x)) / s;  // = e^x K_u(x)
  const double kmu1 = kmu * (u + x + 0.5 - h) / x;
  return {kmu, kmu1, 0};
}

// e^x K_nu(x) as mantissa * 2^e2, via upward recurrence from |nu| reduced
// to [-1/2, 1/2]. Upward recurrence in the order is stable for K.
ScaledPair scaled_k(double nu, double x) {
  if (!(x > 0.0)) throw std::domain_error("bessel_k: x must be > 0");
  if (!std::isfinite(nu) || !std::isfinite(x))
    throw std::domain_error("bessel_k: arguments must be finite");
  const double anu = std::fabs(nu);
  const int nl = static_cast<int>(anu + 0.5);
  const double u = anu - nl;  // in [-1/2, 1/2]
  ScaledPair r = (x <= 2.0) ? temme_small_x(u, x) : steed_large_x(u, x);
  double ku = r.kmu, ku1 = r.kmu1;
  long e2 = r.e2;
  double ord = u;
  for (int j = 0; j < nl; ++j) {
    const double knew = ku + (2.0 * (ord + 1.0) / x) * ku1;
    ku = ku1;
    ku1 = knew;
    ord += 1.0;
    if (ku1 > 0x1.0p+512) {
      ku = std::ldexp(ku, -512);
      ku1 = std::ldexp(ku1, -512);
      e2 += 512;
    }
  }
  return {ku, ku1, e2};  // kmu now holds e^x K_{anu}(x) * 2^{-e2}
}

}  // namespace

double bessel_k(double nu, double x) {
  const ScaledPair r = scaled_k(nu, x);
  const double lg = std::log(r.kmu) + r.e2 * M_LN2 - x;
  if (lg > 708.0) throw std::overflow_error("bessel_k: overflow, use log_bessel_k");
  return std::ldexp(r.kmu * std::exp(-x), static_cast<int>(r.e2));
}

double log_bessel_k(double nu, double x) {
  const ScaledPair r = scaled_k(nu, x);
  return std::log(r.kmu) + r.e2 * M_LN2 - x;
}

double bessel_k_scaled(double nu, double x) {
  const ScaledPair r = scaled_k(nu, x);
  const double lg = std::log(r.kmu) + r.e2 * M_LN2;
  if (lg > 708.0)
    throw std::overflow_error("bessel_k_scaled: overflow, use log_bessel_k");
  return std::ldexp(r.kmu, static_cast<int>(r.e2));
}

double bessel_k_ratio(double nu_num, double nu_den, double x) {
  return std::exp(log_bessel_k(nu_num, x) - log_bessel_k(nu_den, x));
}

double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: x must be > 0");
  double result = 0.0;
  while (x < 10.0) {  // recurse up to the asymptotic region
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Asymptotic series with Bernoulli coefficients.
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 -
                    inv2 * (1.0 / 120.0 -
                            inv2 * (1.0 / 252.0 -
                                    inv2 * (1.0 / 240.0 -
                                            inv2 * (1.0 / 132.0 -
                                                    inv2 * 691.0 / 32760.0)))));
  return result;
}

}  // namespace llngm
