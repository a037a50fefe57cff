#pragma once

#include <string>
#include <vector>

#include "llngm/gaussian.hpp"
#include "llngm/model.hpp"
#include "llngm/rng.hpp"

namespace llngm {

struct ChainState {
  VectorXd V;       // all entries > 0
  VectorXd latent;  // M (non-centered) or W (centered)
  long iter = 0;
};

struct GibbsConfig {
  long T = 50000;
  long burn = 5000;
  int thin = 1;
  int n_chains = 4;
  std::uint64_t seed = 20240901;
  double q_minus = 0.25;  // exponent of the negative-moment summary
  bool record_states = false;

  void validate() const;
};

// One full sweep: latent | V, Y through the Gaussian conditional, then n
// independent GIG draws V_i | latent, Y. Deterministic under the stream.
ChainState gibbs_step(const ModelSpec& spec, Parameterization param,
                      const ChainState& state, const VectorXd& y,
                      RngStream& rng);

// Per-iteration scalar summaries of one chain (recorded for all T
// iterations; burn-in/thinning are applied when reading the retained view).
struct ChainTrace {
  std::vector<double> s_plus, s_minus, s_log, t_null;
  double q_minus = 0.25;
  long T = 0, burn = 0;
  int thin = 1;
  double wall_seconds = 0.0;  // sampling loop only
  std::vector<VectorXd> states;  // full V per iteration, when requested

  std::vector<long> retained_iters() const;
  std::vector<double> retained(const std::vector<double>& full) const;
};

// Runs one chain from init V0. tnull_dir, when non-null, is the direction
// d = K^{-1} u0 of the null statistic T_null(t) = <d, M(t) - mu h>.
ChainTrace run_chain(const ModelSpec& spec, Parameterization param,
                     const GibbsConfig& cfg, const VectorXd& y,
                     const VectorXd& V0, RngStream& rng,
                     const VectorXd* tnull_dir = nullptr);

// The four initial states V = 1, 0.1*1, 10*1 and an iid GIG(1,1,1) vector.
std::vector<VectorXd> overdispersed_inits(int n, RngStream& rng);

// Chain trace CSV, header `iter,S_plus,S_minus,S_log,T_null`, one row per
// retained iteration.
void write_chain_csv(const std::string& path, const ChainTrace& trace);

struct LoadedTrace {
  std::vector<long> iters;
  std::vector<double> s_plus, s_minus, s_log, t_null;
};
LoadedTrace read_chain_csv(const std::string& path);

}  // namespace llngm
