#pragma once

#include <stdexcept>
#include <string>

#include "llngm/rng.hpp"

namespace llngm {

// Thrown by gig_moment when E[V^r] does not exist on a boundary branch.
// Estimation integrability checks key off this type.
struct MomentDivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Which branch of the parameter space Psi a GIG triple lives on. The
// boundary branches are represented explicitly instead of taking a,b -> 0
// limits numerically: the normalizer (a/b)^{p/2} is 0*inf there.
enum class GigBranch {
  Interior,  // a>0, b>0, p real
  InvGamma,  // a=0, b>0, p<0      (Inv-Gamma(-p, b/2))
  Gamma,     // a>0, b=0, p>0      (Gamma(p, a/2))
};

class GigParams {
 public:
  // Validates membership in Psi = Psi_I u Psi_IG u Psi_Gamma and records
  // the branch. Throws std::invalid_argument outside Psi.
  GigParams(double p, double a, double b);

  double p() const { return p_; }
  double a() const { return a_; }
  double b() const { return b_; }
  GigBranch branch() const { return branch_; }

  static bool in_psi(double p, double a, double b);

 private:
  double p_, a_, b_;
  GigBranch branch_;
};

// Log of the normalized density on (0, inf). Boundary branches use the
// Gamma / Inv-Gamma normalizers.
double gig_log_density(const GigParams& params, double x);

bool gig_moment_exists(const GigParams& params, double r);

// E[V^r]. Interior branch via the Bessel-ratio formula
//   E[V^r] = (b/a)^{r/2} K_{p+r}(sqrt(ab)) / K_p(sqrt(ab)),
// boundary branches via the Gamma / Inv-Gamma closed forms.
// Throws MomentDivergenceError when the moment does not exist.
double gig_moment(const GigParams& params, double r);

double gig_mean(const GigParams& params);

// One draw. Interior branch uses a mode-relocated ratio-of-uniforms
// rejection scheme (with a dedicated decomposition for small sqrt(ab)),
// valid for all of Psi_I; boundaries use direct Gamma / Inv-Gamma draws.
// Deterministic under a fixed RngStream.
double gig_sample(const GigParams& params, RngStream& rng);

inline double gig_sample(double p, double a, double b, RngStream& rng) {
  return gig_sample(GigParams(p, a, b), rng);
}

// Fixed tolerances used by this module's checks.
inline constexpr double kBesselRelTol = 1e-12;
inline constexpr double kQuadratureTol = 1e-8;

}  // namespace llngm
