#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "llngm/model.hpp"

namespace llngm {

// Null-space geometry of the observation operator and the null-smallness
// constant (|mu|/sqrt(sigma^2 a + mu^2)) * sqrt(z^T G^{-1} z).
struct NullSpaceReport {
  int r = 0;            // dim Null(A)
  MatrixXd U_A;         // n x r orthonormal basis of Null(A)
  MatrixXd G;           // U_A^T K^T K U_A
  VectorXd z;           // U_A^T K^T 1
  double proj_norm = 0.0;  // sqrt(z^T G^{-1} z) = ||P_{Null(B)} 1||_2
  double ns_ratio = 0.0;
  bool satisfied = true;
  bool rank_flagged = false;  // singular values inside the ambiguity band
};

// Rank detection: singular values below 1e-10 * sigma_max count as zero;
// values inside [1e-12, 1e-8] * sigma_max set rank_flagged.
NullSpaceReport null_smallness(const ModelSpec& spec);

enum class Regime { TC1, TC2, DM_III, DM_I, DM_II, Outside };
enum class TraceClassVerdict { Yes, No, Unknown };
enum class GeoVerdict { Yes, ConditionalOnNullSmallness, Unknown };

const char* to_string(Regime r);
const char* to_string(TraceClassVerdict t);
const char* to_string(GeoVerdict g);

struct RegimeReport {
  Regime regime = Regime::Outside;
  TraceClassVerdict trace_class = TraceClassVerdict::Unknown;
  GeoVerdict geo_ergodic = GeoVerdict::Unknown;
  std::optional<NullSpaceReport> ns;  // filled for the conditional rows
};

// The regime table:
//   a>0, b>0, p real        -> TC1    (trace-class Yes, geo Yes)
//   a>0, b=0, p>1/2         -> TC2    (trace-class Yes, geo Yes)
//   a>0, b=0, 0<p<=1/2      -> DM_III (Unknown, Yes* under null-smallness)
//   a=0, b>0, p<0, mu=0     -> DM_I   (No, Yes)
//   a=0, b>0, p<0, mu!=0    -> DM_II  (Unknown, Yes* under null-smallness)
//   otherwise               -> Outside
RegimeReport classify_regime(const ModelSpec& spec);

// Parameter-only variant; conditional rows carry no NullSpaceReport.
RegimeReport classify_regime_params(double p, double a, double b, double mu);

// gamma_ns(mu) = ||P_{Null(B)} mbar(mu)||_2 / (sigma sqrt(a_tilde(mu))),
// for a one-dimensional Null(B) spanned by u0 = K u_A / ||K u_A||.
// Throws when dim Null(A) != 1.
VectorXd gamma_ns_scan(const ModelSpec& spec, const VectorXd& y,
                       const VectorXd& mu_grid);

// delta(p) = p on (0, 1/2], min(1/2, 2p-1) for p > 1/2. Domain error p <= 0.
double delta_of_p(double p);

// kappa(delta) = E|N(0,1)|^{-delta} = 2^{-delta/2} Gamma((1-delta)/2)/sqrt(pi).
double kappa_of_delta(double delta);

// Gamma(alpha+1/2-delta)/Gamma(alpha+1/2) * Gamma(delta+1/2)/sqrt(pi);
// strictly below 1 for delta in (0, alpha).
double gamma_baseline(double alpha, double delta);

enum class DriftCase { I, II, III };

struct RosenthalIngredients {
  double lambda = 0.0, b_const = 0.0, d = 0.0, epsilon = 0.0;
  double alpha_inv = 0.0, A_const = 0.0;
};

struct DriftReport {
  DriftCase drift_case = DriftCase::I;
  double delta = 0.0;       // Lyapunov exponent (case II: the chosen q)
  double gamma_minus = 0.0;
  double gamma_plus = 0.0;
  double gamma = 0.0;       // the contraction rate actually claimed
  double C1 = 0.0, kappa = 0.0;   // case III ingredients
  double eps = 0.0;               // slack added to the null-smallness ratio
  double eps_star = 0.0;          // case III, p < 1/2 only
  double eps_crossover = 0.0;     // x-threshold of the small-x Bessel bound
  double L = 0.0;                 // drift offset (see L_note)
  bool L_rigorous = false;
  std::string L_note;
  std::optional<RosenthalIngredients> rosenthal;
};

// Computable constants of the three drift lemmas. Hypotheses are checked
// against the spec (case mismatch throws). `y` enters only the offset L
// (through mbar); nullptr means the Y=0 benchmark.
DriftReport drift_constants(const ModelSpec& spec, DriftCase c,
                            const VectorXd* y = nullptr);

// Rosenthal's total-variation bound
//   (1-eps)^{rk} + (alpha^{-(1-r)} A^r)^k (1 + b/(1-lambda) + E[G(V0)])
// with alpha^{-1} = (1+2b+lambda d)/(1+d), A = 1 + 2(lambda d + b).
double rosenthal_bound(double lambda, double b_const, double d, double epsilon,
                       double r, long k, double init_expect);

RosenthalIngredients rosenthal_ingredients(double lambda, double b_const,
                                           double d, double epsilon);

// Numeric probe of sup_V ||Qbar(V)^{-1} mbar||_2 over coordinate-wise
// log-spaced V in [1e-6, 1e6] (finite by the range-boundedness property
// when mbar lies in Range(B^T); reported, not certified).
double probe_eta_sup(const ModelSpec& spec, const VectorXd& y, int n_probes = 256,
                     std::uint64_t seed = 1234);

}  // namespace llngm
