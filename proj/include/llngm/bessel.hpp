#pragma once

#include <stdexcept>

namespace llngm {

// Modified Bessel function of the second kind, K_nu(x), real order.
//
// Evaluation follows Temme's series for x <= 2 and Steed's continued
// fraction for x > 2, with upward recurrence in the order. Relative accuracy
// is ~1e-14 for x in [1e-6, 700]. K_nu(x) = K_{-nu}(x) holds exactly (the
// implementation only ever sees |nu|).
//
// bessel_k throws std::overflow_error when the value exceeds the double
// range; callers hitting that must switch to log_bessel_k.
double bessel_k(double nu, double x);

// log K_nu(x), usable over the whole range (including x >> 700 and the
// small-x/large-order corner where K overflows).
double log_bessel_k(double nu, double x);

// e^x * K_nu(x). Stable for large x; still overflows in the small-x
// large-order corner (use log_bessel_k there).
double bessel_k_scaled(double nu, double x);

// K_{nu_num}(x) / K_{nu_den}(x), computed in the log domain.
double bessel_k_ratio(double nu_num, double nu_den, double x);

// Digamma function (needed by the Gamma-mixing score).
double digamma(double x);

}  // namespace llngm
