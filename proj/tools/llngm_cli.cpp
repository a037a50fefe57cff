// Command-line front end. Talks to the library exclusively through the C
// API in llngm.h.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "llngm.h"

namespace {

struct CommonOpts {
  std::string config_file;
  std::vector<std::string> overrides;  // section.key=value
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOpts* opts, bool with_out) {
  cmd->add_option("--config", opts->config_file, "configuration file");
  cmd->add_option("--set", opts->overrides,
                  "override a config entry, section.key=value (repeatable)");
  if (with_out) {
    const char* env = std::getenv("LLNGM_OUT");
    opts->out_dir = env ? env : "out";
    cmd->add_option("--out", opts->out_dir,
                    "output directory (default $LLNGM_OUT or ./out)");
  }
}

// Flat config text assembled from the optional file plus --set overrides
// (later entries win).
std::string build_config_text(const CommonOpts& opts,
                              const std::string& preamble = "") {
  std::ostringstream text;
  text << preamble;
  if (!opts.config_file.empty()) {
    std::ifstream in(opts.config_file);
    if (!in) {
      std::fprintf(stderr, "cannot open config file %s\n",
                   opts.config_file.c_str());
      std::exit(1);
    }
    text << in.rdbuf() << "\n";
  }
  for (const auto& ov : opts.overrides) {
    const auto eq = ov.find('=');
    const auto dot = ov.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      std::fprintf(stderr, "--set expects section.key=value, got '%s'\n",
                   ov.c_str());
      std::exit(1);
    }
    text << "[" << ov.substr(0, dot) << "]\n"
         << ov.substr(dot + 1, eq - dot - 1) << " = " << ov.substr(eq + 1)
         << "\n";
  }
  return text.str();
}

int fail(llngm_status status) {
  std::printf("{\"error\": \"%s\", \"status\": %d}\n", llngm_last_error(),
              static_cast<int>(status));
  return static_cast<int>(status);
}

int print_and_free(char* json) {
  std::printf("%s\n", json);
  llngm_string_free(json);
  return 0;
}

struct ModelFlags {
  double p = -0.5, a = 1.0, b = 1.0, mu = 0.0;
  double sigma = 1.0, sigma_eps = 1.0, phi = 0.5;
  long n = 4;
  std::string A = "identity";
  std::string family = "gig";
  double nu = 1.0;
};

void add_model_flags(CLI::App* cmd, ModelFlags* mf) {
  cmd->add_option("--p", mf->p, "GIG order p");
  cmd->add_option("--a", mf->a, "GIG rate a (>= 0)");
  cmd->add_option("--b", mf->b, "GIG inverse-rate b (>= 0)");
  cmd->add_option("--mu", mf->mu, "drift mu");
  cmd->add_option("--sigma", mf->sigma, "latent scale sigma");
  cmd->add_option("--sigma-eps", mf->sigma_eps, "noise scale sigma_eps");
  cmd->add_option("--n", mf->n, "latent dimension");
  cmd->add_option("--phi", mf->phi, "AR(1) parameter of K");
  cmd->add_option("--A", mf->A, "observation operator: identity|rank_deficient");
  cmd->add_option("--family", mf->family, "mixing family: gig|nig|gal");
  cmd->add_option("--nu", mf->nu, "nu for the nig/gal families");
}

std::string model_preamble(const ModelFlags& mf) {
  std::ostringstream ss;
  ss << "[model]\n"
     << "family = " << mf.family << "\n"
     << "p = " << mf.p << "\na = " << mf.a << "\nb = " << mf.b << "\n"
     << "nu = " << mf.nu << "\n"
     << "mu = " << mf.mu << "\nsigma = " << mf.sigma
     << "\nsigma_eps = " << mf.sigma_eps << "\n"
     << "n = " << mf.n << "\nK = ar1\nphi = " << mf.phi << "\nA = " << mf.A
     << "\n";
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gibbs samplers for linear latent non-Gaussian models with "
               "GIG variance mixtures"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(llngm_version()));

  // regime
  auto* regime = app.add_subcommand(
      "regime", "classify (p,a,b,mu) into the ergodicity regime table");
  CommonOpts regime_opts;
  ModelFlags regime_mf;
  add_common(regime, &regime_opts, false);
  add_model_flags(regime, &regime_mf);

  // nullsmall
  auto* nullsmall = app.add_subcommand(
      "nullsmall", "null-smallness constant of the (K, A) geometry");
  CommonOpts nullsmall_opts;
  ModelFlags nullsmall_mf;
  add_common(nullsmall, &nullsmall_opts, false);
  add_model_flags(nullsmall, &nullsmall_mf);

  // sample
  auto* sample = app.add_subcommand(
      "sample", "run Gibbs chains, write chain CSVs + run_meta.json");
  CommonOpts sample_opts;
  add_common(sample, &sample_opts, true);

  // diagnose
  auto* diagnose = app.add_subcommand(
      "diagnose", "IACT / ESS/sec / split-Rhat table from chain CSVs");
  std::string diag_dir;
  diagnose->add_option("--dir", diag_dir, "directory with chain_*.csv")
      ->required();

  // estimate
  auto* estimate = app.add_subcommand(
      "estimate", "stochastic-gradient maximum likelihood fit");
  CommonOpts estimate_opts;
  add_common(estimate, &estimate_opts, true);

  // s1 / s2
  auto* s1 = app.add_subcommand("s1", "simulation study S1 (regime grid)");
  CommonOpts s1_opts;
  add_common(s1, &s1_opts, true);
  auto* s2 = app.add_subcommand("s2", "simulation study S2 (null-smallness scan)");
  CommonOpts s2_opts;
  add_common(s2, &s2_opts, true);

  // gigcheck
  auto* gigcheck = app.add_subcommand(
      "gigcheck", "standalone GIG/Bessel property suite");
  std::uint64_t gig_seed = 1;
  gigcheck->add_option("--seed", gig_seed, "rng seed");

  CLI11_PARSE(app, argc, argv);

  char* json = nullptr;
  llngm_status st = LLNGM_OK;

  if (regime->parsed() || nullsmall->parsed()) {
    const bool is_regime = regime->parsed();
    const CommonOpts& opts = is_regime ? regime_opts : nullsmall_opts;
    const ModelFlags& mf = is_regime ? regime_mf : nullsmall_mf;
    const std::string text = build_config_text(opts, model_preamble(mf));
    llngm_model* model = nullptr;
    st = llngm_model_create(text.c_str(), &model);
    if (st != LLNGM_OK) return fail(st);
    st = is_regime ? llngm_regime_report(model, &json)
                   : llngm_nullsmall_report(model, &json);
    llngm_model_free(model);
  } else if (sample->parsed()) {
    const std::string text = build_config_text(sample_opts);
    st = llngm_run_sample(text.c_str(), sample_opts.out_dir.c_str(), &json);
  } else if (diagnose->parsed()) {
    st = llngm_diagnose(diag_dir.c_str(), &json);
  } else if (estimate->parsed()) {
    const std::string text = build_config_text(estimate_opts);
    st = llngm_run_estimate(text.c_str(), estimate_opts.out_dir.c_str(), &json);
  } else if (s1->parsed()) {
    const std::string text = build_config_text(s1_opts);
    st = llngm_run_s1(text.c_str(), s1_opts.out_dir.c_str(), &json);
  } else if (s2->parsed()) {
    const std::string text = build_config_text(s2_opts);
    st = llngm_run_s2(text.c_str(), s2_opts.out_dir.c_str(), &json);
  } else if (gigcheck->parsed()) {
    st = llngm_gigcheck(gig_seed, &json);
    if (st == LLNGM_OK && json && std::string(json).find("\"ok\": true") ==
                                      std::string::npos) {
      print_and_free(json);
      return 2;  // property suite failed
    }
  }

  if (st != LLNGM_OK) return fail(st);
  return print_and_free(json);
}
