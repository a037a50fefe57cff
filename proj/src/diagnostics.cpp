#include "llngm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace llngm {

double mean_of(std::span<const double> s) {
  double m = 0.0;
  for (double v : s) m += v;
  return m / static_cast<double>(s.size());
}

double variance_of(std::span<const double> s) {
  const double m = mean_of(s);
  double acc = 0.0;
  for (double v : s) acc += (v - m) * (v - m);
  return acc / static_cast<double>(s.size() - 1);
}

namespace {

double autocov(std::span<const double> s, double mean, long lag) {
  const long n = static_cast<long>(s.size());
  double acc = 0.0;
  for (long t = 0; t + lag < n; ++t)
    acc += (s[t] - mean) * (s[t + lag] - mean);
  return acc / static_cast<double>(n);
}

}  // namespace

double iact(std::span<const double> series, double floor, long max_lag_cap) {
  const long n = static_cast<long>(series.size());
  if (n < 100) throw std::invalid_argument("iact: need series length >= 100");
  if (max_lag_cap < 0) max_lag_cap = n / 10;
  const double mean = mean_of(series);
  const double c0 = autocov(series, mean, 0);
  const double scale = std::max(mean * mean, 1.0);
  if (!(c0 > 0.0) || c0 < 1e-14 * scale)
    throw DegenerateSeriesError("iact: series is (numerically) constant");

  // Geyer: sum Gamma_m = rho_{2m} + rho_{2m+1} while positive.
  double tau = -1.0;
  for (long m = 0;; ++m) {
    const long l0 = 2 * m, l1 = 2 * m + 1;
    if (l1 > max_lag_cap) break;
    const double g =
        (autocov(series, mean, l0) + autocov(series, mean, l1)) / c0;
    if (g <= 0.0) break;
    tau += 2.0 * g;
  }
  return std::max(tau, floor);
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2)
    throw std::invalid_argument("split_rhat: need at least 2 chains");
  const size_t len = chains.front().size();
  for (const auto& c : chains)
    if (c.size() != len)
      throw std::invalid_argument("split_rhat: chains must have equal length");
  if (len < 4) throw std::invalid_argument("split_rhat: chains too short");

  // Split each chain in half.
  std::vector<std::span<const double>> halves;
  const size_t half = len / 2;
  for (const auto& c : chains) {
    halves.emplace_back(c.data(), half);
    halves.emplace_back(c.data() + (len - half), half);
  }
  const size_t m = halves.size();
  const double nn = static_cast<double>(half);

  std::vector<double> means(m), vars(m);
  for (size_t j = 0; j < m; ++j) {
    means[j] = mean_of(halves[j]);
    vars[j] = variance_of(halves[j]);
  }
  const double grand =
      std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(m);
  double B = 0.0;
  for (double mu : means) B += (mu - grand) * (mu - grand);
  B *= nn / static_cast<double>(m - 1);
  const double W =
      std::accumulate(vars.begin(), vars.end(), 0.0) / static_cast<double>(m);
  if (!(W > 0.0)) return 1.0;
  const double var_plus = (nn - 1.0) / nn * W + B / nn;
  return std::sqrt(var_plus / W);
}

double batch_means_mcse(std::span<const double> series, int n_batches) {
  const long n = static_cast<long>(series.size());
  if (n < 2 * n_batches)
    throw std::invalid_argument("batch_means_mcse: series too short");
  const long bsize = n / n_batches;
  std::vector<double> bmeans;
  bmeans.reserve(n_batches);
  for (int b = 0; b < n_batches; ++b)
    bmeans.push_back(mean_of(series.subspan(b * bsize, bsize)));
  const double v = variance_of(bmeans);
  return std::sqrt(v / n_batches);
}

std::vector<DiagSummary> summarize_run(
    const std::vector<std::string>& stat_names,
    const std::vector<std::vector<std::vector<double>>>& tracks,
    const std::vector<double>& wall_seconds, double iact_floor) {
  const size_t n_chains = tracks.size();
  if (n_chains == 0) throw std::invalid_argument("summarize_run: no chains");
  const size_t n_stats = stat_names.size();
  if (wall_seconds.size() != n_chains)
    throw std::invalid_argument("summarize_run: one wall time per chain");

  std::vector<DiagSummary> rows;
  rows.reserve(n_stats);
  for (size_t s = 0; s < n_stats; ++s) {
    DiagSummary row;
    row.stat = stat_names[s];
    double iact_sum = 0.0, eps_sum = 0.0;
    std::vector<std::vector<double>> chains_s;
    for (size_t c = 0; c < n_chains; ++c) {
      const auto& series = tracks[c][s];
      const double tau = iact(series, iact_floor);
      iact_sum += tau;
      const double ess_c = static_cast<double>(series.size()) / tau;
      eps_sum += ess_c / wall_seconds[c];
      chains_s.push_back(series);
    }
    row.iact = iact_sum / static_cast<double>(n_chains);
    const double n_per = static_cast<double>(tracks[0][s].size());
    row.ess = n_per / row.iact;
    row.ess_per_sec = eps_sum / static_cast<double>(n_chains);
    row.split_rhat = (n_chains >= 2) ? split_rhat(chains_s) : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

double max_rhat(const std::vector<DiagSummary>& rows) {
  double r = 0.0;
  for (const auto& row : rows) r = std::max(r, row.split_rhat);
  return r;
}

namespace {
std::vector<double> ranks_of(const std::vector<double>& x) {
  const size_t n = x.size();
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> rk(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * (i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) rk[idx[k]] = avg;
    i = j + 1;
  }
  return rk;
}
}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3)
    throw std::invalid_argument("spearman: need equal lengths >= 3");
  const auto rx = ranks_of(x);
  const auto ry = ranks_of(y);
  const double mx = mean_of(rx), my = mean_of(ry);
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace llngm
