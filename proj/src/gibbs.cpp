#include "llngm/gibbs.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace llngm {

void GibbsConfig::validate() const {
  if (burn >= T) throw std::invalid_argument("GibbsConfig: burn must be < T");
  if (thin < 1) throw std::invalid_argument("GibbsConfig: thin must be >= 1");
  if (n_chains < 1) throw std::invalid_argument("GibbsConfig: n_chains >= 1");
  if (!(q_minus > 0.0)) throw std::invalid_argument("GibbsConfig: q_minus > 0");
}

namespace {

// Shared sweep body; `mbar` is the V-independent part of the non-centered
// conditional, precomputed by the caller for the hot loop.
void sweep_noncentered(const ModelSpec& spec, ChainState& st,
                       const VectorXd& mbar, RngStream& rng) {
  MatrixXd Qbar = spec.rho() * spec.BtB();
  for (int i = 0; i < spec.n(); ++i) {
    double v = st.V[i];
    if (v < kVClampFloor) v = kVClampFloor;
    Qbar(i, i) += 1.0 / v;
  }
  Eigen::LLT<MatrixXd> llt(Qbar);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("gibbs_step: conditional precision not SPD");
  VectorXd z(spec.n());
  for (int i = 0; i < spec.n(); ++i) z[i] = rng.normal();
  st.latent = llt.solve(mbar) + spec.sigma() * llt.matrixU().solve(z);
  for (int i = 0; i < spec.n(); ++i) {
    double v = gig_sample(spec.v_conditional(i, st.latent[i]), rng);
    st.V[i] = (v > kVClampFloor) ? v : kVClampFloor;
  }
}

void sweep_centered(const ModelSpec& spec, ChainState& st, const VectorXd& y,
                    RngStream& rng) {
  const PrecisionGaussian g = conditional_W(spec, st.V, y);
  st.latent = sample_gaussian(g, rng);
  const VectorXd KW = spec.K() * st.latent;
  for (int i = 0; i < spec.n(); ++i) {
    const double zi = KW[i] + spec.mu() * spec.h()[i];
    double v = gig_sample(spec.v_conditional(i, zi), rng);
    st.V[i] = (v > kVClampFloor) ? v : kVClampFloor;
  }
}

}  // namespace

ChainState gibbs_step(const ModelSpec& spec, Parameterization param,
                      const ChainState& state, const VectorXd& y,
                      RngStream& rng) {
  if (state.V.size() != spec.n())
    throw std::invalid_argument("gibbs_step: V must have length n");
  ChainState st = state;
  if (param == Parameterization::NonCentered) {
    sweep_noncentered(spec, st, spec.mbar(y), rng);
  } else {
    sweep_centered(spec, st, y, rng);
  }
  ++st.iter;
  return st;
}

ChainTrace run_chain(const ModelSpec& spec, Parameterization param,
                     const GibbsConfig& cfg, const VectorXd& y,
                     const VectorXd& V0, RngStream& rng,
                     const VectorXd* tnull_dir) {
  cfg.validate();
  if (!y.allFinite()) throw std::invalid_argument("run_chain: y has non-finite entries");
  if ((V0.array() <= 0.0).any())
    throw std::invalid_argument("run_chain: initial V must be positive");

  const int n = spec.n();
  ChainState st;
  st.V = V0;
  st.latent = VectorXd::Zero(n);

  ChainTrace tr;
  tr.q_minus = cfg.q_minus;
  tr.T = cfg.T;
  tr.burn = cfg.burn;
  tr.thin = cfg.thin;
  tr.s_plus.reserve(cfg.T);
  tr.s_minus.reserve(cfg.T);
  tr.s_log.reserve(cfg.T);
  tr.t_null.reserve(cfg.T);

  const VectorXd mbar =
      (param == Parameterization::NonCentered) ? spec.mbar(y) : VectorXd();
  // For the centered chain, <d, M - mu h> = <K^T d, W>.
  const VectorXd tdir_c =
      (tnull_dir && param == Parameterization::Centered)
          ? VectorXd(spec.K().transpose() * (*tnull_dir))
          : VectorXd();

  const auto t0 = std::chrono::steady_clock::now();
  for (long t = 1; t <= cfg.T; ++t) {
    if (param == Parameterization::NonCentered)
      sweep_noncentered(spec, st, mbar, rng);
    else
      sweep_centered(spec, st, y, rng);
    st.iter = t;

    double sp = 0.0, sm = 0.0, sl = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = st.V[i];
      sp += v;
      sm += std::pow(v, -cfg.q_minus);
      sl += std::log(v);
    }
    tr.s_plus.push_back(sp / n);
    tr.s_minus.push_back(sm / n);
    tr.s_log.push_back(sl / n);
    if (tnull_dir) {
      double tn;
      if (param == Parameterization::NonCentered)
        tn = tnull_dir->dot(st.latent - spec.mu() * spec.h());
      else
        tn = tdir_c.dot(st.latent);
      tr.t_null.push_back(tn);
    } else {
      tr.t_null.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    if (cfg.record_states) tr.states.push_back(st.V);
  }
  tr.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return tr;
}

std::vector<long> ChainTrace::retained_iters() const {
  std::vector<long> out;
  for (long t = burn + 1; t <= T; t += thin) out.push_back(t);
  return out;
}

std::vector<double> ChainTrace::retained(const std::vector<double>& full) const {
  std::vector<double> out;
  out.reserve((T - burn) / thin + 1);
  for (long t = burn + 1; t <= T; t += thin)
    out.push_back(full[static_cast<size_t>(t - 1)]);
  return out;
}

std::vector<VectorXd> overdispersed_inits(int n, RngStream& rng) {
  std::vector<VectorXd> inits;
  inits.push_back(VectorXd::Ones(n));
  inits.push_back(0.1 * VectorXd::Ones(n));
  inits.push_back(10.0 * VectorXd::Ones(n));
  VectorXd g(n);
  const GigParams gig111(1.0, 1.0, 1.0);
  for (int i = 0; i < n; ++i) g[i] = gig_sample(gig111, rng);
  inits.push_back(g);
  return inits;
}

void write_chain_csv(const std::string& path, const ChainTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_chain_csv: cannot open " + path);
  out << "iter,S_plus,S_minus,S_log,T_null\n";
  char buf[256];
  for (long t = trace.burn + 1; t <= trace.T; t += trace.thin) {
    const size_t k = static_cast<size_t>(t - 1);
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%.17g\n", t,
                  trace.s_plus[k], trace.s_minus[k], trace.s_log[k],
                  trace.t_null[k]);
    out << buf;
  }
  if (!out) throw std::runtime_error("write_chain_csv: write failed: " + path);
}

LoadedTrace read_chain_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_chain_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("read_chain_csv: empty file " + path);
  if (line.rfind("iter,", 0) != 0)
    throw std::runtime_error("read_chain_csv: missing header in " + path);
  LoadedTrace lt;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    long it;
    double a, b, c, d;
    if (std::sscanf(line.c_str(), "%ld,%lf,%lf,%lf,%lf", &it, &a, &b, &c, &d) != 5)
      throw std::runtime_error("read_chain_csv: bad row at " + path + ":" +
                               std::to_string(lineno));
    lt.iters.push_back(it);
    lt.s_plus.push_back(a);
    lt.s_minus.push_back(b);
    lt.s_log.push_back(c);
    lt.t_null.push_back(d);
  }
  return lt;
}

}  // namespace llngm
