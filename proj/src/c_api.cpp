#include "llngm.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "llngm/bessel.hpp"
#include "llngm/config.hpp"
#include "llngm/ergodicity.hpp"
#include "llngm/experiments.hpp"
#include "llngm/gig.hpp"
#include "llngm/model.hpp"
#include "llngm/rng.hpp"
#include "llngm/version.hpp"

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <class Fn>
llngm_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const llngm::MomentDivergenceError& e) {
    g_last_error = e.what();
    return LLNGM_ERR_DIVERGENT;
  } catch (const llngm::ConfigError& e) {
    g_last_error = e.what();
    return LLNGM_ERR_INVALID_ARGUMENT;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return LLNGM_ERR_INVALID_ARGUMENT;
  } catch (const std::domain_error& e) {
    g_last_error = e.what();
    return LLNGM_ERR_DOMAIN;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return LLNGM_ERR_RUNTIME;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LLNGM_ERR_RUNTIME;
  } catch (...) {
    g_last_error = "unknown error";
    return LLNGM_ERR_RUNTIME;
  }
}

llngm_status emit_json(const llngm::json& j, char** json_out) {
  if (!json_out) {
    g_last_error = "json_out must not be null";
    return LLNGM_ERR_INVALID_ARGUMENT;
  }
  *json_out = dup_string(j.dump(2));
  if (!*json_out) {
    g_last_error = "out of memory";
    return LLNGM_ERR_RUNTIME;
  }
  return LLNGM_OK;
}

llngm::json ns_to_json(const llngm::NullSpaceReport& ns) {
  llngm::json j;
  j["r"] = ns.r;
  j["proj_norm"] = ns.proj_norm;
  j["ns_ratio"] = ns.ns_ratio;
  j["satisfied"] = ns.satisfied;
  j["rank_flagged"] = ns.rank_flagged;
  return j;
}

template <class Runner>
llngm_status run_with_config(const char* config_text, const char* out_dir,
                             char** json_out, Runner&& runner) {
  return guarded([&] {
    if (!out_dir) throw std::invalid_argument("out_dir must not be null");
    llngm::Config cfg =
        llngm::Config::from_string(config_text ? config_text : "");
    const llngm::json j = runner(cfg, std::string(out_dir));
    return emit_json(j, json_out);
  });
}

}  // namespace

struct llngm_rng {
  llngm::RngStream stream;
};

struct llngm_model {
  llngm::Config cfg;
  llngm::ModelSpec spec;
};

extern "C" {

const char* llngm_version(void) { return llngm::kVersion; }

const char* llngm_last_error(void) { return g_last_error.c_str(); }

void llngm_string_free(char* s) { std::free(s); }

llngm_status llngm_bessel_k(double nu, double x, double* out) {
  return guarded([&] {
    if (!out) throw std::invalid_argument("out must not be null");
    *out = llngm::bessel_k(nu, x);
    return LLNGM_OK;
  });
}

llngm_status llngm_log_bessel_k(double nu, double x, double* out) {
  return guarded([&] {
    if (!out) throw std::invalid_argument("out must not be null");
    *out = llngm::log_bessel_k(nu, x);
    return LLNGM_OK;
  });
}

llngm_status llngm_gig_log_density(double p, double a, double b, double x,
                                   double* out) {
  return guarded([&] {
    if (!out) throw std::invalid_argument("out must not be null");
    *out = llngm::gig_log_density(llngm::GigParams(p, a, b), x);
    return LLNGM_OK;
  });
}

llngm_status llngm_gig_moment(double p, double a, double b, double r,
                              double* out) {
  return guarded([&] {
    if (!out) throw std::invalid_argument("out must not be null");
    *out = llngm::gig_moment(llngm::GigParams(p, a, b), r);
    return LLNGM_OK;
  });
}

llngm_rng* llngm_rng_create(uint64_t seed) {
  return new (std::nothrow) llngm_rng{llngm::RngStream(seed)};
}

void llngm_rng_free(llngm_rng* rng) { delete rng; }

llngm_status llngm_gig_sample(llngm_rng* rng, double p, double a, double b,
                              double* out) {
  return llngm_gig_sample_many(rng, p, a, b, 1, out);
}

llngm_status llngm_gig_sample_many(llngm_rng* rng, double p, double a, double b,
                                   size_t count, double* out) {
  return guarded([&] {
    if (!rng || !out) throw std::invalid_argument("rng/out must not be null");
    const llngm::GigParams g(p, a, b);
    for (size_t i = 0; i < count; ++i)
      out[i] = llngm::gig_sample(g, rng->stream);
    return LLNGM_OK;
  });
}

llngm_status llngm_model_create(const char* config_text, llngm_model** out) {
  return guarded([&] {
    if (!config_text || !out)
      throw std::invalid_argument("config_text/out must not be null");
    llngm::Config cfg = llngm::Config::from_string(config_text);
    llngm::ModelSpec spec = llngm::model_from_config(cfg);
    *out = new llngm_model{std::move(cfg), std::move(spec)};
    return LLNGM_OK;
  });
}

llngm_status llngm_model_create_from_file(const char* path, llngm_model** out) {
  return guarded([&] {
    if (!path || !out) throw std::invalid_argument("path/out must not be null");
    llngm::Config cfg = llngm::Config::from_file(path);
    llngm::ModelSpec spec = llngm::model_from_config(cfg);
    *out = new llngm_model{std::move(cfg), std::move(spec)};
    return LLNGM_OK;
  });
}

void llngm_model_free(llngm_model* model) { delete model; }

llngm_status llngm_regime_report(const llngm_model* model, char** json_out) {
  return guarded([&] {
    if (!model) throw std::invalid_argument("model must not be null");
    const llngm::RegimeReport rep = llngm::classify_regime(model->spec);
    llngm::json j = llngm::report_header(model->cfg);
    j["regime"] = llngm::to_string(rep.regime);
    j["trace_class"] = llngm::to_string(rep.trace_class);
    j["geo_ergodic"] = llngm::to_string(rep.geo_ergodic);
    if (rep.ns) j["null_smallness"] = ns_to_json(*rep.ns);
    return emit_json(j, json_out);
  });
}

llngm_status llngm_nullsmall_report(const llngm_model* model, char** json_out) {
  return guarded([&] {
    if (!model) throw std::invalid_argument("model must not be null");
    const llngm::NullSpaceReport ns = llngm::null_smallness(model->spec);
    llngm::json j = llngm::report_header(model->cfg);
    j.update(ns_to_json(ns));
    return emit_json(j, json_out);
  });
}

llngm_status llngm_drift_report(const llngm_model* model, int drift_case,
                                char** json_out) {
  return guarded([&] {
    if (!model) throw std::invalid_argument("model must not be null");
    if (drift_case < 1 || drift_case > 3)
      throw std::invalid_argument("drift_case must be 1, 2 or 3");
    const auto c = static_cast<llngm::DriftCase>(drift_case - 1);
    const llngm::DriftReport rep = llngm::drift_constants(model->spec, c);
    llngm::json j = llngm::report_header(model->cfg);
    j["case"] = drift_case;
    j["delta"] = rep.delta;
    j["gamma_minus"] = rep.gamma_minus;
    j["gamma_plus"] = rep.gamma_plus;
    j["gamma"] = rep.gamma;
    j["C1"] = rep.C1;
    j["kappa"] = rep.kappa;
    j["eps"] = rep.eps;
    j["eps_star"] = rep.eps_star;
    j["eps_crossover"] = rep.eps_crossover;
    j["L"] = rep.L;
    j["L_rigorous"] = rep.L_rigorous;
    j["L_note"] = rep.L_note;
    return emit_json(j, json_out);
  });
}

llngm_status llngm_run_sample(const char* config_text, const char* out_dir,
                              char** json_out) {
  return run_with_config(config_text, out_dir, json_out, llngm::run_sample);
}

llngm_status llngm_diagnose(const char* chain_dir, char** json_out) {
  return guarded([&] {
    if (!chain_dir) throw std::invalid_argument("chain_dir must not be null");
    const llngm::json j =
        llngm::run_diagnose(llngm::Config{}, std::string(chain_dir));
    return emit_json(j, json_out);
  });
}

llngm_status llngm_run_s1(const char* config_text, const char* out_dir,
                          char** json_out) {
  return run_with_config(config_text, out_dir, json_out, llngm::run_s1);
}

llngm_status llngm_run_s2(const char* config_text, const char* out_dir,
                          char** json_out) {
  return run_with_config(config_text, out_dir, json_out, llngm::run_s2);
}

llngm_status llngm_run_estimate(const char* config_text, const char* out_dir,
                                char** json_out) {
  return run_with_config(config_text, out_dir, json_out, llngm::run_estimate);
}

llngm_status llngm_gigcheck(uint64_t seed, char** json_out) {
  return guarded([&] { return emit_json(llngm::run_gigcheck(seed), json_out); });
}

}  // extern "C"
