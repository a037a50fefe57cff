#include <doctest.h>

#include <cmath>
#include <vector>

#include "llngm/diagnostics.hpp"
#include "llngm/rng.hpp"

using namespace llngm;

namespace {
std::vector<double> iid_normal(long n, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal();
  return x;
}

std::vector<double> ar1_series(long n, double phi, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<double> x(n);
  double cur = rng.normal() / std::sqrt(1.0 - phi * phi);
  for (long t = 0; t < n; ++t) {
    cur = phi * cur + rng.normal();
    x[t] = cur;
  }
  return x;
}
}  // namespace

TEST_CASE("IACT: iid series is ~1") {
  const auto x = iid_normal(100000, 1);
  CHECK(iact(x) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("IACT: AR(1) oracle (1+phi)/(1-phi)") {
  const auto x5 = ar1_series(1000000, 0.5, 2);
  CHECK(std::fabs(iact(x5) - 3.0) < 0.1);
  const auto x9 = ar1_series(1000000, 0.9, 3);
  CHECK(std::fabs(iact(x9) - 19.0) < 1.0);
}

TEST_CASE("IACT: affine invariance and degenerate input") {
  auto x = ar1_series(50000, 0.5, 4);
  const double t0 = iact(x);
  std::vector<double> y(x.size());
  for (size_t i = 0; i < x.size(); ++i) y[i] = -3.7 * x[i] + 11.0;
  CHECK(iact(y) == doctest::Approx(t0).epsilon(1e-12));

  std::vector<double> c(500, 2.5);
  CHECK_THROWS_AS((void)iact(c), DegenerateSeriesError);
  std::vector<double> tooshort(50, 0.0);
  CHECK_THROWS_AS((void)iact(tooshort), std::invalid_argument);
}

TEST_CASE("split-Rhat: agreement, disagreement, and preconditions") {
  std::vector<std::vector<double>> chains;
  for (int c = 0; c < 4; ++c) chains.push_back(iid_normal(10000, 10 + c));
  const double r = split_rhat(chains);
  CHECK(r >= 0.99);
  CHECK(r <= 1.01);

  auto shifted = chains;
  for (auto& v : shifted[0]) v += 5.0;
  CHECK(split_rhat(shifted) > 1.5);

  std::vector<std::vector<double>> one = {iid_normal(100, 1)};
  CHECK_THROWS_AS((void)split_rhat(one), std::invalid_argument);
  std::vector<std::vector<double>> uneven = {iid_normal(100, 1),
                                             iid_normal(90, 2)};
  CHECK_THROWS_AS((void)split_rhat(uneven), std::invalid_argument);
}

TEST_CASE("summarize_run: shapes, definitional identities, known IACT") {
  const long n = 200000;
  std::vector<std::vector<std::vector<double>>> tracks;
  for (int c = 0; c < 2; ++c)
    tracks.push_back({ar1_series(n, 0.5, 20 + c), iid_normal(n, 40 + c)});
  const std::vector<double> wall = {2.0, 2.5};
  const auto rows = summarize_run({"ar", "iid"}, tracks, wall);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].stat == "ar");
  // ESS * IACT = N exactly
  CHECK(rows[0].ess * rows[0].iact == doctest::Approx((double)n).epsilon(1e-12));
  CHECK(rows[1].ess * rows[1].iact == doctest::Approx((double)n).epsilon(1e-12));
  CHECK(rows[0].iact == doctest::Approx(3.0).epsilon(0.05));
  CHECK(rows[1].iact == doctest::Approx(1.0).epsilon(0.05));
  CHECK(max_rhat(rows) == doctest::Approx(std::max(rows[0].split_rhat,
                                                   rows[1].split_rhat)));
  CHECK(max_rhat(rows) < 1.01);
  // iid mixes faster, so its effective rate dominates
  CHECK(rows[1].ess_per_sec > rows[0].ess_per_sec);
}

TEST_CASE("spearman rank correlation") {
  std::vector<double> x = {1, 2, 3, 4, 5, 6};
  std::vector<double> inc = {2, 3, 9, 11, 30, 31};
  std::vector<double> dec = {5, 4, 3, 2, 1, 0};
  CHECK(spearman(x, inc) == doctest::Approx(1.0));
  CHECK(spearman(x, dec) == doctest::Approx(-1.0));
}

TEST_CASE("batch-means MCSE shrinks like 1/sqrt(N)") {
  const auto a = iid_normal(10000, 7);
  const auto b = iid_normal(160000, 8);
  CHECK(batch_means_mcse(b) < batch_means_mcse(a));
  CHECK(batch_means_mcse(a) == doctest::Approx(0.01).epsilon(0.5));
}
