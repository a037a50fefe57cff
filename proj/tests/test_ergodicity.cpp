#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>

#include "llngm/ergodicity.hpp"
#include "oracles.hpp"

using namespace llngm;

namespace {

ModelSpec make_spec(double p, double a, double b, double mu, MatrixXd K,
                    MatrixXd A) {
  ModelSpec::Inputs in;
  in.p = p;
  in.a = a;
  in.b = b;
  in.mu = mu;
  in.K = std::move(K);
  in.A = std::move(A);
  return ModelSpec(std::move(in));
}

// Brute-force projector onto Null(B) from the SVD of an explicitly formed B.
MatrixXd null_projector_oracle(const ModelSpec& spec) {
  const int n = spec.n();
  MatrixXd B(spec.m(), n);
  for (int j = 0; j < n; ++j) B.col(j) = spec.apply_B(VectorXd::Unit(n, j));
  Eigen::JacobiSVD<MatrixXd> svd(B, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv[0] : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (smax > 0 && sv[i] > 1e-10 * smax) ++rank;
  const MatrixXd Vnull = svd.matrixV().rightCols(n - rank);
  return Vnull * Vnull.transpose();
}

MatrixXd random_invertible_K(int n, RngStream& rng) {
  MatrixXd K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) K(i, j) = 0.5 * rng.normal();
  K += (2.0 + rng.uniform()) * MatrixXd::Identity(n, n);
  return K;
}

// Random A (m x n) with a null space of dimension exactly r.
MatrixXd random_rank_deficient_A(int m, int n, int r, RngStream& rng) {
  MatrixXd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = rng.normal();
  const Eigen::HouseholderQR<MatrixXd> qr(G);
  const MatrixXd Q = qr.householderQ();
  const MatrixXd row_space = Q.leftCols(n - r);  // A acts on this subspace
  MatrixXd C(m, n - r);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n - r; ++j) C(i, j) = rng.normal();
  return C * row_space.transpose();
}

}  // namespace

TEST_CASE("regime classification covers the table") {
  auto chk = [](double p, double a, double b, double mu, Regime r,
                TraceClassVerdict t, GeoVerdict g) {
    const RegimeReport rep = classify_regime_params(p, a, b, mu);
    CHECK(rep.regime == r);
    CHECK(rep.trace_class == t);
    CHECK(rep.geo_ergodic == g);
  };
  chk(-0.5, 1, 1, 1, Regime::TC1, TraceClassVerdict::Yes, GeoVerdict::Yes);
  chk(1.0, 1, 1, 1, Regime::TC1, TraceClassVerdict::Yes, GeoVerdict::Yes);
  chk(0.6, 1, 0, 1, Regime::TC2, TraceClassVerdict::Yes, GeoVerdict::Yes);
  chk(0.3, 1, 0, 1, Regime::DM_III, TraceClassVerdict::Unknown,
      GeoVerdict::ConditionalOnNullSmallness);
  chk(0.5, 1, 0, 1, Regime::DM_III, TraceClassVerdict::Unknown,
      GeoVerdict::ConditionalOnNullSmallness);
  chk(-1.5, 0, 2, 0, Regime::DM_I, TraceClassVerdict::No, GeoVerdict::Yes);
  chk(-1.5, 0, 2, 1, Regime::DM_II, TraceClassVerdict::Unknown,
      GeoVerdict::ConditionalOnNullSmallness);
  chk(0.5, 0, 1, 1, Regime::Outside, TraceClassVerdict::Unknown,
      GeoVerdict::Unknown);
  chk(-1.0, 1, 0, 1, Regime::Outside, TraceClassVerdict::Unknown,
      GeoVerdict::Unknown);
  chk(1.0, 0, 0, 0, Regime::Outside, TraceClassVerdict::Unknown,
      GeoVerdict::Unknown);
}

TEST_CASE("classify_regime attaches null-smallness for conditional rows") {
  const ModelSpec spec =
      make_spec(0.3, 1, 0, 1, build_ar1_operator(4, 0.5), MatrixXd::Identity(4, 4));
  const RegimeReport rep = classify_regime(spec);
  CHECK(rep.regime == Regime::DM_III);
  REQUIRE(rep.ns.has_value());
  CHECK(rep.ns->r == 0);
  CHECK(rep.ns->satisfied);
}

TEST_CASE("null-smallness: trivial and projector null spaces") {
  // A = I: r = 0
  const ModelSpec full =
      make_spec(-0.5, 1, 1, 1, build_ar1_operator(3, 0.5), MatrixXd::Identity(3, 3));
  const NullSpaceReport t = null_smallness(full);
  CHECK(t.r == 0);
  CHECK(t.ns_ratio == 0.0);
  CHECK(t.satisfied);

  // A = I - uu^T, K = I, n = 4: ||P 1|| = sqrt(n) = 2
  const ModelSpec proj = make_spec(-0.5, 1, 1, 1, MatrixXd::Identity(4, 4),
                                   build_rank_deficient_A(4));
  const NullSpaceReport r4 = null_smallness(proj);
  CHECK(r4.r == 1);
  CHECK(r4.proj_norm == doctest::Approx(2.0).epsilon(1e-10));

  // A = I - uu^T, K = AR1: formula vs brute-force projector
  const ModelSpec ar = make_spec(-0.5, 1, 1, 1, build_ar1_operator(6, 0.5),
                                 build_rank_deficient_A(6));
  const NullSpaceReport rr = null_smallness(ar);
  const MatrixXd P = null_projector_oracle(ar);
  const VectorXd ones = VectorXd::Ones(6);
  CHECK(rr.proj_norm * rr.proj_norm ==
        doctest::Approx(ones.dot(P * ones)).epsilon(1e-8));

  // mu = 0 is always satisfied
  const ModelSpec mu0 = make_spec(-1.5, 0, 2, 0, build_ar1_operator(6, 0.5),
                                  build_rank_deficient_A(6));
  CHECK(null_smallness(mu0).satisfied);
}

TEST_CASE("projector identity for random (K, A) pairs") {
  RngStream rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform() * 6);
    const int r = 1 + static_cast<int>(rng.uniform() * 2);
    const int m = n;  // square observation operator with structural rank loss
    const MatrixXd K = random_invertible_K(n, rng);
    const MatrixXd A = random_rank_deficient_A(m, n, r, rng);
    const ModelSpec spec = make_spec(-0.5, 1, 1, 1, K, A);
    const NullSpaceReport ns = null_smallness(spec);
    CHECK(ns.r == r);
    const MatrixXd P = null_projector_oracle(spec);
    const VectorXd ones = VectorXd::Ones(n);
    CHECK(std::fabs(ns.proj_norm * ns.proj_norm - ones.dot(P * ones)) < 1e-8);
  }
}

TEST_CASE("gamma_ns scan identities and guards") {
  const int n = 6;
  const ModelSpec spec = make_spec(0.5, 1, 0, 0, build_ar1_operator(n, 0.5),
                                   build_rank_deficient_A(n));
  const VectorXd y = VectorXd::Zero(n);
  VectorXd grid(3);
  grid << 0.0, 0.5, 2.0;
  const VectorXd g = gamma_ns_scan(spec, y, grid);
  CHECK(g[0] == 0.0);  // mbar(0) = 0 when Y = X beta = 0
  CHECK(g[1] > 0.0);
  CHECK(g[2] > g[1]);  // increasing in |mu| for this geometry

  // the 1-d projection identity |<u0, mbar>| = ||P mbar||
  const MatrixXd P = null_projector_oracle(spec);
  for (int j = 1; j < 3; ++j) {
    const ModelSpec sj = spec.with_scalars(grid[j], 1.0, 1.0);
    const double ref = (P * sj.mbar(y)).norm() / std::sqrt(sj.a_tilde());
    CHECK(g[j] == doctest::Approx(ref).epsilon(1e-10));
  }

  // r != 1 is a scan error
  const ModelSpec full = make_spec(0.5, 1, 0, 0, build_ar1_operator(3, 0.5),
                                   MatrixXd::Identity(3, 3));
  CHECK_THROWS_AS((void)gamma_ns_scan(full, VectorXd::Zero(3), grid),
                  std::runtime_error);
}

TEST_CASE("delta(p) values and bounds") {
  CHECK(delta_of_p(0.3) == doctest::Approx(0.3));
  CHECK(delta_of_p(0.6) == doctest::Approx(0.2));
  CHECK(delta_of_p(2.0) == doctest::Approx(0.5));
  CHECK(delta_of_p(0.5) == doctest::Approx(0.5));
  CHECK_THROWS_AS((void)delta_of_p(0.0), std::domain_error);
  CHECK_THROWS_AS((void)delta_of_p(-1.0), std::domain_error);
  for (double p = 0.01; p < 4.0; p += 0.01) {
    const double d = delta_of_p(p);
    CHECK(d > 0.0);
    CHECK(d <= 0.5);
  }
}

TEST_CASE("baseline contraction factor is below one on the grid") {
  for (double alpha : {0.2, 1.0, 5.0})
    for (int i = 1; i <= 9; ++i) {
      const double delta = alpha * i / 10.0;
      const double g = gamma_baseline(alpha, delta);
      CHECK(g > 0.0);
      CHECK(g < 1.0);
    }
}

TEST_CASE("drift constants, case I: gamma = 2/pi at p = -1") {
  const ModelSpec spec = make_spec(-1.0, 0, 2, 0, build_ar1_operator(4, 0.5),
                                   MatrixXd::Identity(4, 4));
  const DriftReport rep = drift_constants(spec, DriftCase::I);
  CHECK(rep.delta == doctest::Approx(0.5));
  CHECK(rep.gamma == doctest::Approx(2.0 / M_PI).epsilon(1e-12));
  CHECK(rep.gamma < 1.0);
  // with the Y = 0 benchmark, mbar = 0: the offset is formula-derived
  CHECK(rep.L_rigorous);
  CHECK(std::isfinite(rep.L));
  // case mismatch guards
  CHECK_THROWS_AS((void)drift_constants(spec, DriftCase::III),
                  std::invalid_argument);
}

TEST_CASE("drift constants, case II: gamma_+ from the null-smallness ratio") {
  // geometry with a small projection of K^T 1 onto Null(A)
  const int n = 4;
  VectorXd v(n);
  v << 1.0, -1.0, 0.2, 0.0;
  v.normalize();
  const MatrixXd A = MatrixXd::Identity(n, n) - v * v.transpose();
  const ModelSpec spec = make_spec(-1.5, 0, 2, 1.0, MatrixXd::Identity(n, n), A);
  const NullSpaceReport ns = null_smallness(spec);
  REQUIRE(ns.satisfied);
  const DriftReport rep = drift_constants(spec, DriftCase::II);
  CHECK(rep.gamma == doctest::Approx(ns.ns_ratio + 0.5 * (1 - ns.ns_ratio)));
  CHECK(rep.gamma < 1.0);
  CHECK(std::isfinite(rep.L));
  CHECK(rep.L > 0.0);
}

TEST_CASE("drift constants, case III: C1 kappa = 1/2 exactly for p >= 1/2") {
  for (double p : {0.5, 0.7, 1.2, 3.0}) {
    const ModelSpec spec = make_spec(p, 1, 0, 0.5, build_ar1_operator(3, 0.5),
                                     MatrixXd::Identity(3, 3));
    const DriftReport rep = drift_constants(spec, DriftCase::III);
    CHECK(rep.gamma_minus == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(rep.gamma < 1.0);
  }
  // p < 1/2: strictly below 1 and within the Gurland-type bound
  const ModelSpec s3 = make_spec(0.3, 1, 0, 0.5, build_ar1_operator(3, 0.5),
                                 MatrixXd::Identity(3, 3));
  const DriftReport r3 = drift_constants(s3, DriftCase::III);
  CHECK(r3.gamma_minus < 1.0);
  const double p = 0.3;
  const double gurland =
      (1.0 + r3.eps_star) * (1.0 - 2 * p) / (1.0 - 2 * p + 0.5 * p * p);
  CHECK(r3.gamma_minus <= gurland * (1 + 1e-12));
  CHECK(r3.eps_crossover > 0.0);
}

TEST_CASE("kappa(delta) equals the Gaussian negative moment") {
  // E|N(0,1)|^{-delta} by quadrature
  for (double d : {0.1, 0.3, 0.5}) {
    const double ref = oracles::integral_0inf([&](double x) {
      return 2.0 * std::pow(x, -d) * std::exp(-0.5 * x * x) /
             std::sqrt(2.0 * M_PI);
    });
    CHECK(kappa_of_delta(d) == doctest::Approx(ref).epsilon(1e-9));
  }
}

TEST_CASE("Rosenthal bound arithmetic and shape") {
  const RosenthalIngredients ing = rosenthal_ingredients(0.5, 1.0, 5.0, 0.5);
  CHECK(ing.alpha_inv == doctest::Approx(5.5 / 6.0).epsilon(1e-12));
  CHECK(ing.A_const == doctest::Approx(8.0));

  // k = 0: the bound is at least 1
  CHECK(rosenthal_bound(0.5, 1.0, 5.0, 0.5, 0.5, 0, 1.0) >= 1.0);

  // monotone decay when the drift factor is below one
  double prev = std::numeric_limits<double>::infinity();
  for (long k = 1; k <= 200; k += 10) {
    const double b = rosenthal_bound(0.1, 0.05, 2.0, 0.3, 0.05, k, 2.0);
    CHECK(b < prev);
    prev = b;
  }

  CHECK_THROWS_AS((void)rosenthal_bound(1.2, 1.0, 5.0, 0.5, 0.5, 1, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)rosenthal_bound(0.5, 1.0, 3.0, 0.5, 0.5, 1, 0.0),
                  std::invalid_argument);  // d <= 2b/(1-lambda)
  CHECK_THROWS_AS((void)rosenthal_bound(0.5, 1.0, 5.0, 1.5, 0.5, 1, 0.0),
                  std::invalid_argument);
}

TEST_CASE("scalability probe: projector norm across n (report only)") {
  for (int n : {10, 50, 150}) {
    const ModelSpec spec = make_spec(0.5, 1, 0, 0, build_ar1_operator(n, 0.5),
                                     build_rank_deficient_A(n));
    const NullSpaceReport ns = null_smallness(spec);
    CHECK(ns.r == 1);
    CHECK(std::isfinite(ns.proj_norm));
    CHECK(ns.proj_norm > 0.0);
  }
}
