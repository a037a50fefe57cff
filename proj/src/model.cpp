#include "llngm/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace llngm {

MatrixXd build_ar1_operator(int n, double phi) {
  if (!(std::fabs(phi) < 1.0))
    throw std::invalid_argument("build_ar1_operator: |phi| must be < 1");
  if (n < 1) throw std::invalid_argument("build_ar1_operator: n must be >= 1");
  MatrixXd K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) K(i, j) = std::pow(phi, std::abs(i - j));
  return K;
}

MatrixXd ar1_operator_dphi(int n, double phi) {
  MatrixXd D = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int d = std::abs(i - j);
      if (d >= 1) D(i, j) = d * std::pow(phi, d - 1);
    }
  return D;
}

MatrixXd build_rank_deficient_A(int n) {
  if (n < 2) throw std::invalid_argument("build_rank_deficient_A: n must be >= 2");
  MatrixXd A = MatrixXd::Identity(n, n);
  A.array() -= 1.0 / n;
  return A;
}

ModelSpec::ModelSpec(Inputs in) : in_(std::move(in)) { validate_and_finalize(); }

void ModelSpec::validate_and_finalize() {
  n_ = static_cast<int>(in_.K.rows());
  if (in_.K.cols() != n_ || n_ < 1)
    throw std::invalid_argument("ModelSpec: K must be square and nonempty");
  if (in_.A.size() == 0) in_.A = MatrixXd::Identity(n_, n_);
  if (in_.A.cols() != n_)
    throw std::invalid_argument("ModelSpec: A must have n columns");
  m_ = static_cast<int>(in_.A.rows());
  if (in_.h.size() == 0) in_.h = VectorXd::Ones(n_);
  if (in_.h.size() != n_)
    throw std::invalid_argument("ModelSpec: h must have length n");
  if (in_.X.size() != 0 && (in_.X.rows() != m_ || in_.X.cols() != in_.beta.size()))
    throw std::invalid_argument("ModelSpec: X must be m x q with beta of length q");
  if (!(in_.sigma > 0.0) || !(in_.sigma_eps > 0.0))
    throw std::invalid_argument("ModelSpec: sigma and sigma_eps must be > 0");
  if (!std::isfinite(in_.mu)) throw std::invalid_argument("ModelSpec: mu not finite");

  // Validates the mixing parameters (throws outside Psi).
  (void)mixing_prior(0);

  rho_ = in_.sigma * in_.sigma / (in_.sigma_eps * in_.sigma_eps);
  const double a0 = mixing_prior(0).a();
  a_tilde_ = a0 + in_.mu * in_.mu / (in_.sigma * in_.sigma);

  auto ops = std::make_shared<OperatorData>();
  ops->lu = Eigen::PartialPivLU<MatrixXd>(in_.K);
  // Invertibility check via the LU factors.
  double log_det = 0.0;
  double min_abs = std::numeric_limits<double>::infinity();
  double max_abs = 0.0;
  for (int i = 0; i < n_; ++i) {
    const double d = std::fabs(ops->lu.matrixLU()(i, i));
    min_abs = std::min(min_abs, d);
    max_abs = std::max(max_abs, d);
    log_det += std::log(d);
  }
  if (!(min_abs > 0.0) || min_abs < 1e-13 * max_abs)
    throw std::runtime_error("ModelSpec: K is numerically singular");
  ops->log_abs_det_K = log_det;

  // B = A K^{-1} applied column-wise; BtB = (K^{-1})^T A^T A K^{-1}.
  MatrixXd Kinv_cols = ops->lu.solve(MatrixXd::Identity(n_, n_));
  MatrixXd B = in_.A * Kinv_cols;
  ops->BtB = B.transpose() * B;
  ops->AtA = in_.A.transpose() * in_.A;
  ops->Bh = B * in_.h;
  ops_ = std::move(ops);
}

GigParams ModelSpec::mixing_prior(int i) const {
  switch (in_.family) {
    case MixingFamily::Gig:
      return GigParams(in_.p, in_.a, in_.b);
    case MixingFamily::Nig:
      return GigParams(-0.5, in_.nu, in_.nu * in_.h[i] * in_.h[i]);
    case MixingFamily::Gal:
      return GigParams(in_.h[i] * in_.nu, 2.0 * in_.nu, 0.0);
  }
  throw std::logic_error("unreachable");
}

GigParams ModelSpec::regime_gig() const {
  if (in_.family != MixingFamily::Gal) return mixing_prior(0);
  int imin = 0;
  for (int i = 1; i < n_; ++i)
    if (in_.h[i] < in_.h[imin]) imin = i;
  return mixing_prior(imin);
}

GigParams ModelSpec::v_conditional(int i, double latent_i) const {
  const GigParams prior = mixing_prior(i);
  const double s2 = in_.sigma * in_.sigma;
  const double pt = prior.p() - 0.5;
  double bt = prior.b() + latent_i * latent_i / s2;
  // latent_i^2 can underflow to 0 on the b = 0 branch (an event of measure
  // zero); the conditional needs b > 0 whenever p - 1/2 <= 0.
  if (bt == 0.0 && pt <= 0.0) bt = 1e-300;
  return GigParams(pt, prior.a() + in_.mu * in_.mu / s2, bt);
}

VectorXd ModelSpec::solve_K(const VectorXd& rhs) const { return ops_->lu.solve(rhs); }

VectorXd ModelSpec::solve_Kt(const VectorXd& rhs) const {
  return ops_->lu.transpose().solve(rhs);
}

MatrixXd ModelSpec::solve_K_mat(const MatrixXd& rhs) const {
  return ops_->lu.solve(rhs);
}

MatrixXd ModelSpec::solve_Kt_mat(const MatrixXd& rhs) const {
  return ops_->lu.transpose().solve(rhs);
}

VectorXd ModelSpec::apply_B(const VectorXd& x) const { return in_.A * solve_K(x); }

VectorXd ModelSpec::apply_Bt(const VectorXd& y) const {
  return solve_Kt(in_.A.transpose() * y);
}

VectorXd ModelSpec::xbeta() const {
  if (in_.X.size() == 0) return VectorXd::Zero(m_);
  return in_.X * in_.beta;
}

VectorXd ModelSpec::mbar(const VectorXd& y) const {
  if (y.size() != m_) throw std::invalid_argument("mbar: y must have length m");
  VectorXd r = y - xbeta() + in_.mu * ops_->Bh;
  return rho_ * apply_Bt(r) + in_.mu * VectorXd::Ones(n_);
}

ModelSpec ModelSpec::with_scalars(double mu, double sigma, double sigma_eps) const {
  ModelSpec out = *this;
  out.in_.mu = mu;
  out.in_.sigma = sigma;
  out.in_.sigma_eps = sigma_eps;
  out.rho_ = sigma * sigma / (sigma_eps * sigma_eps);
  out.a_tilde_ = out.mixing_prior(0).a() + mu * mu / (sigma * sigma);
  return out;
}

ModelSpec ModelSpec::with_nu(double nu) const {
  ModelSpec out = *this;
  out.in_.nu = nu;
  out.a_tilde_ = out.mixing_prior(0).a() + in_.mu * in_.mu / (in_.sigma * in_.sigma);
  return out;
}

ModelSpec ModelSpec::with_beta(const VectorXd& beta) const {
  ModelSpec out = *this;
  if (beta.size() != in_.beta.size())
    throw std::invalid_argument("with_beta: size mismatch");
  out.in_.beta = beta;
  return out;
}

ModelSpec ModelSpec::with_K(const MatrixXd& K) const {
  Inputs in = in_;
  in.K = K;
  return ModelSpec(in);
}

VectorXd to_noncentered(const ModelSpec& spec, const VectorXd& W) {
  return spec.K() * W + spec.mu() * spec.h();
}

VectorXd to_centered(const ModelSpec& spec, const VectorXd& M) {
  return spec.solve_K(M - spec.mu() * spec.h());
}

PriorDraw simulate_from_prior(const ModelSpec& spec, RngStream& rng) {
  PriorDraw d;
  const int n = spec.n();
  d.V.resize(n);
  d.M.resize(n);
  for (int i = 0; i < n; ++i) {
    d.V[i] = gig_sample(spec.mixing_prior(i), rng);
    d.M[i] = spec.mu() * d.V[i] + spec.sigma() * std::sqrt(d.V[i]) * rng.normal();
  }
  d.W = to_centered(spec, d.M);
  d.y = spec.xbeta() + spec.A() * d.W;
  for (int j = 0; j < spec.m(); ++j) d.y[j] += spec.sigma_eps() * rng.normal();
  return d;
}

}  // namespace llngm
