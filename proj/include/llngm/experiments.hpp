#pragma once

#include <json.hpp>
#include <string>

#include "llngm/config.hpp"
#include "llngm/model.hpp"

namespace llngm {

using nlohmann::json;

// Builds a ModelSpec from the [model] section:
//   family = gig|nig|gal, p/a/b or nu, mu, sigma, sigma_eps, n,
//   K = ar1|identity|file:<path> (phi for ar1),
//   A = identity|rank_deficient|file:<path>, h = ones|file:<path>.
ModelSpec model_from_config(const Config& cfg);

// [data] y = zeros|file:<path>|simulate (seed from data.seed).
VectorXd data_from_config(const Config& cfg, const ModelSpec& spec);

// Echo of the configuration plus the library version, embedded in every
// JSON report.
json report_header(const Config& cfg);

// Generic chain runner behind the `sample` subcommand: runs [run].chains
// chains with overdispersed inits, writes chain_XX.csv and run_meta.json
// into out_dir, returns a summary report.
json run_sample(const Config& cfg, const std::string& out_dir);

// Reads chain_*.csv + run_meta.json from a directory, computes the
// IACT / ESS/sec / split-Rhat table, writes diagnostics.csv, returns JSON.
json run_diagnose(const Config& cfg, const std::string& chain_dir);

// Simulation study S1: six regime points, 4 overdispersed chains each.
json run_s1(const Config& cfg, const std::string& out_dir);

// Simulation study S2: null-smallness scan over a mu grid.
json run_s2(const Config& cfg, const std::string& out_dir);

// SGD maximum-likelihood run driven by [model] + [data] + [estimate].
json run_estimate(const Config& cfg, const std::string& out_dir);

// Standalone distribution-level property suite (Bessel symmetry and
// asymptotics, ratio inequality, density normalization, sampler/moment
// agreement). Fails items are listed in the report; "ok" is the AND.
json run_gigcheck(std::uint64_t seed);

}  // namespace llngm
