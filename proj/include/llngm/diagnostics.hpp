#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace llngm {

struct DegenerateSeriesError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Integrated autocorrelation time 1 + 2 sum rho_k, truncated by Geyer's
// initial-positive-sequence rule on paired autocorrelations. Autocovariances
// are computed by direct summation up to the lag cap (default N/10).
// Constant series throw DegenerateSeriesError. The result is floored at
// `floor` (default 1; negative lag-1 correlation can otherwise push the
// estimator below 1).
double iact(std::span<const double> series, double floor = 1.0,
            long max_lag_cap = -1);

// Split-half potential scale reduction over >= 2 equal-length chains.
double split_rhat(const std::vector<std::vector<double>>& chains);

// Batch-means Monte Carlo standard error of the series mean.
double batch_means_mcse(std::span<const double> series, int n_batches = 30);

double mean_of(std::span<const double> series);
double variance_of(std::span<const double> series);

struct DiagSummary {
  std::string stat;
  double iact = 0.0;
  double ess = 0.0;
  double ess_per_sec = 0.0;
  double split_rhat = 0.0;
};

// One row per statistic: IACT averaged over chains, ESS = N/IACT with
// ESS/sec using per-chain wall time, split-Rhat pooled across chains.
// `tracks[c][s]` is chain c's series for statistic s.
std::vector<DiagSummary> summarize_run(
    const std::vector<std::string>& stat_names,
    const std::vector<std::vector<std::vector<double>>>& tracks,
    const std::vector<double>& wall_seconds, double iact_floor = 1.0);

double max_rhat(const std::vector<DiagSummary>& rows);

// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace llngm
