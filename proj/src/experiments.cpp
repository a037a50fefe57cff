#include "llngm/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "llngm/bessel.hpp"
#include "llngm/diagnostics.hpp"
#include "llngm/ergodicity.hpp"
#include "llngm/estimation.hpp"
#include "llngm/gibbs.hpp"
#include "llngm/quadrature.hpp"
#include "llngm/version.hpp"

namespace llngm {

namespace fs = std::filesystem;

namespace {

MatrixXd load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open matrix file " + path);
  long rows, cols;
  if (!(in >> rows >> cols) || rows < 1 || cols < 1)
    throw ConfigError("matrix file " + path + ": expected 'rows cols' header");
  MatrixXd M(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j)
      if (!(in >> M(i, j)))
        throw ConfigError("matrix file " + path + ": too few values");
  return M;
}

int n_workers(const Config& cfg) {
  if (const char* env = std::getenv("LLNGM_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  const long t = cfg.get_long("run.threads", 0);
  if (t > 0) return static_cast<int>(t);
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 2;
}

template <class Fn>
void parallel_for(int n_tasks, int workers, Fn&& fn) {
  if (workers <= 1 || n_tasks <= 1) {
    for (int i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto body = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_tasks) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min(workers, n_tasks); ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string two_digits(int i) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d", i);
  return buf;
}

}  // namespace

ModelSpec model_from_config(const Config& cfg) {
  ModelSpec::Inputs in;
  const std::string fam = cfg.get_str("model.family", "gig");
  if (fam == "gig") {
    in.family = MixingFamily::Gig;
    in.p = cfg.get_double("model.p", -0.5);
    in.a = cfg.get_double("model.a", 1.0);
    in.b = cfg.get_double("model.b", 1.0);
  } else if (fam == "nig") {
    in.family = MixingFamily::Nig;
    in.nu = cfg.get_double("model.nu", 1.0);
  } else if (fam == "gal") {
    in.family = MixingFamily::Gal;
    in.nu = cfg.get_double("model.nu", 1.0);
  } else {
    throw ConfigError("model.family must be gig|nig|gal, got '" + fam + "'");
  }
  in.mu = cfg.get_double("model.mu", 0.0);
  in.sigma = cfg.get_double("model.sigma", 1.0);
  in.sigma_eps = cfg.get_double("model.sigma_eps", 1.0);

  const int n = static_cast<int>(cfg.get_long("model.n", 1));
  const std::string kkind = cfg.get_str("model.K", "ar1");
  if (kkind == "ar1")
    in.K = build_ar1_operator(n, cfg.get_double("model.phi", 0.5));
  else if (kkind == "identity")
    in.K = MatrixXd::Identity(n, n);
  else if (kkind.rfind("file:", 0) == 0)
    in.K = load_matrix(kkind.substr(5));
  else
    throw ConfigError("model.K must be ar1|identity|file:<path>");

  const std::string akind = cfg.get_str("model.A", "identity");
  if (akind == "identity")
    in.A = MatrixXd::Identity(n, n);
  else if (akind == "rank_deficient")
    in.A = build_rank_deficient_A(n);
  else if (akind.rfind("file:", 0) == 0)
    in.A = load_matrix(akind.substr(5));
  else
    throw ConfigError("model.A must be identity|rank_deficient|file:<path>");

  const std::string hkind = cfg.get_str("model.h", "ones");
  if (hkind == "ones")
    in.h = VectorXd::Ones(n);
  else if (hkind.rfind("file:", 0) == 0)
    in.h = VectorXd(load_matrix(hkind.substr(5)).reshaped());
  else
    throw ConfigError("model.h must be ones|file:<path>");

  const std::string xkind = cfg.get_str("model.X", "none");
  if (xkind.rfind("file:", 0) == 0) {
    in.X = load_matrix(xkind.substr(5));
    in.beta = VectorXd(load_matrix(cfg.require_str("model.beta").substr(5)).reshaped());
  } else if (xkind != "none") {
    throw ConfigError("model.X must be none|file:<path>");
  }
  return ModelSpec(std::move(in));
}

VectorXd data_from_config(const Config& cfg, const ModelSpec& spec) {
  const std::string ykind = cfg.get_str("data.y", "zeros");
  if (ykind == "zeros") return VectorXd::Zero(spec.m());
  if (ykind == "simulate") {
    RngStream rng(static_cast<std::uint64_t>(cfg.get_long("data.seed", 7)));
    return simulate_from_prior(spec, rng).y;
  }
  if (ykind.rfind("file:", 0) == 0)
    return VectorXd(load_matrix(ykind.substr(5)).reshaped());
  throw ConfigError("data.y must be zeros|simulate|file:<path>");
}

json report_header(const Config& cfg) {
  json echo = json::object();
  for (const auto& [k, v] : cfg.entries()) echo[k] = v;
  return json{{"version", kVersion}, {"config", echo}};
}

namespace {

struct ChainResult {
  ChainTrace trace;
  std::uint64_t seed = 0;
  std::string init_label;
};

// Runs cfg.n_chains chains with the standard overdispersed inits (cycled
// when more than four chains are requested).
std::vector<ChainResult> run_chain_set(const ModelSpec& spec,
                                       Parameterization param,
                                       const GibbsConfig& gc, const VectorXd& y,
                                       const VectorXd* tnull_dir, int workers) {
  RngStream init_rng(RngStream::derive(gc.seed, 0xd15, 0));
  const auto inits = overdispersed_inits(spec.n(), init_rng);
  const char* labels[4] = {"ones", "0.1*ones", "10*ones", "gig(1,1,1)"};
  std::vector<ChainResult> out(gc.n_chains);
  parallel_for(gc.n_chains, workers, [&](int c) {
    const std::uint64_t seed_c = RngStream::derive(gc.seed, 1, c);
    RngStream rng(seed_c);
    out[c].trace =
        run_chain(spec, param, gc, y, inits[c % 4], rng, tnull_dir);
    out[c].seed = seed_c;
    out[c].init_label = labels[c % 4];
  });
  return out;
}

GibbsConfig gibbs_config_from(const Config& cfg, const std::string& section,
                              long t_dflt, long burn_dflt) {
  GibbsConfig gc;
  gc.T = cfg.get_long(section + ".T", t_dflt);
  gc.burn = cfg.get_long(section + ".burn", burn_dflt);
  gc.thin = static_cast<int>(cfg.get_long(section + ".thin", 1));
  gc.n_chains = static_cast<int>(cfg.get_long(section + ".chains", 4));
  gc.seed = static_cast<std::uint64_t>(cfg.get_long(section + ".seed", 20240901));
  gc.q_minus = cfg.get_double(section + ".q", 0.25);
  gc.validate();
  return gc;
}

// tracks[c][s]: retained series of statistic s for chain c.
std::vector<std::vector<std::vector<double>>> retained_tracks(
    const std::vector<ChainResult>& chains, bool with_tnull) {
  std::vector<std::vector<std::vector<double>>> tracks;
  for (const auto& cr : chains) {
    std::vector<std::vector<double>> per_stat;
    per_stat.push_back(cr.trace.retained(cr.trace.s_plus));
    per_stat.push_back(cr.trace.retained(cr.trace.s_minus));
    per_stat.push_back(cr.trace.retained(cr.trace.s_log));
    if (with_tnull) per_stat.push_back(cr.trace.retained(cr.trace.t_null));
    tracks.push_back(std::move(per_stat));
  }
  return tracks;
}

std::vector<double> wall_times_of(const std::vector<ChainResult>& chains) {
  std::vector<double> w;
  for (const auto& cr : chains) w.push_back(cr.trace.wall_seconds);
  return w;
}

json summaries_to_json(const std::vector<DiagSummary>& rows) {
  json out = json::array();
  for (const auto& r : rows)
    out.push_back(json{{"stat", r.stat},
                       {"iact", r.iact},
                       {"ess", r.ess},
                       {"ess_per_sec", r.ess_per_sec},
                       {"split_rhat", r.split_rhat}});
  return out;
}

void write_meta(const std::string& dir, const Config& cfg, const GibbsConfig& gc,
                const std::vector<ChainResult>& chains) {
  json meta = report_header(cfg);
  meta["T"] = gc.T;
  meta["burn"] = gc.burn;
  meta["thin"] = gc.thin;
  meta["q"] = gc.q_minus;
  meta["seed"] = gc.seed;
  json arr = json::array();
  for (size_t c = 0; c < chains.size(); ++c)
    arr.push_back(json{{"file", "chain_" + two_digits(static_cast<int>(c)) + ".csv"},
                       {"seed", chains[c].seed},
                       {"init", chains[c].init_label},
                       {"wall_seconds", chains[c].trace.wall_seconds}});
  meta["chains"] = arr;
  std::ofstream out(dir + "/run_meta.json");
  out << meta.dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write " + dir + "/run_meta.json");
}

}  // namespace

json run_sample(const Config& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const ModelSpec spec = model_from_config(cfg);
  const VectorXd y = data_from_config(cfg, spec);
  const GibbsConfig gc = gibbs_config_from(cfg, "run", 50000, 5000);
  const std::string pstr = cfg.get_str("run.parameterization", "noncentered");
  const Parameterization param = (pstr == "centered")
                                     ? Parameterization::Centered
                                     : Parameterization::NonCentered;

  // T_null direction when Null(B) is one-dimensional.
  std::optional<VectorXd> tdir;
  const NullSpaceReport ns = null_smallness(spec);
  if (ns.r == 1) {
    VectorXd u0 = spec.K() * ns.U_A.col(0);
    u0.normalize();
    tdir = spec.solve_K(u0);
  }

  const auto chains = run_chain_set(spec, param, gc, y,
                                    tdir ? &*tdir : nullptr, n_workers(cfg));
  for (size_t c = 0; c < chains.size(); ++c)
    write_chain_csv(out_dir + "/chain_" + two_digits(static_cast<int>(c)) + ".csv",
                    chains[c].trace);
  write_meta(out_dir, cfg, gc, chains);

  const bool with_tnull = tdir.has_value();
  std::vector<std::string> stats = {"S_plus", "S_minus", "S_log"};
  if (with_tnull) stats.push_back("T_null");
  const auto rows = summarize_run(stats, retained_tracks(chains, with_tnull),
                                  wall_times_of(chains));
  json rep = report_header(cfg);
  rep["out_dir"] = out_dir;
  rep["summaries"] = summaries_to_json(rows);
  rep["max_split_rhat"] = max_rhat(rows);
  rep["v_clamps"] = v_clamp_count();
  return rep;
}

json run_diagnose(const Config& cfg, const std::string& chain_dir) {
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(chain_dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("chain_", 0) == 0 && name.ends_with(".csv"))
      files.push_back(e.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw std::runtime_error("diagnose: no chain_*.csv in " + chain_dir);

  std::ifstream meta_in(chain_dir + "/run_meta.json");
  if (!meta_in)
    throw std::runtime_error("diagnose: missing run_meta.json in " + chain_dir);
  json meta = json::parse(meta_in);

  std::vector<double> wall;
  for (const auto& c : meta.at("chains"))
    wall.push_back(c.at("wall_seconds").get<double>());
  if (wall.size() != files.size())
    throw std::runtime_error("diagnose: meta chain count != csv count");

  std::vector<std::vector<std::vector<double>>> tracks;
  bool with_tnull = true;
  for (const auto& f : files) {
    LoadedTrace lt = read_chain_csv(f);
    for (double v : lt.t_null)
      if (std::isnan(v)) with_tnull = false;
    tracks.push_back({lt.s_plus, lt.s_minus, lt.s_log, lt.t_null});
  }
  std::vector<std::string> stats = {"S_plus", "S_minus", "S_log"};
  if (with_tnull)
    stats.push_back("T_null");
  else
    for (auto& t : tracks) t.pop_back();

  const auto rows = summarize_run(stats, tracks, wall);
  json rep = report_header(cfg);
  rep["chain_dir"] = chain_dir;
  rep["summaries"] = summaries_to_json(rows);
  rep["max_split_rhat"] = max_rhat(rows);

  std::ofstream csv(chain_dir + "/diagnostics.csv");
  csv << "stat,iact,ess,ess_per_sec,split_rhat\n";
  for (const auto& r : rows)
    csv << r.stat << "," << r.iact << "," << r.ess << "," << r.ess_per_sec
        << "," << r.split_rhat << "\n";
  return rep;
}

namespace {

struct S1Point {
  const char* name;
  const char* regime;
  double p, a, b, mu;
};

constexpr S1Point kS1Points[] = {
    {"A", "TC-1", -0.5, 1.0, 1.0, 1.0}, {"B", "TC-1", 1.0, 1.0, 1.0, 1.0},
    {"C", "TC-2", 0.6, 1.0, 0.0, 1.0},  {"D", "DM-III", 0.3, 1.0, 0.0, 1.0},
    {"E", "DM-I", -1.5, 0.0, 2.0, 0.0}, {"F", "DM-II", -1.5, 0.0, 2.0, 1.0},
};

ModelSpec s1_spec(const S1Point& pt, int n, double phi) {
  ModelSpec::Inputs in;
  in.family = MixingFamily::Gig;
  in.p = pt.p;
  in.a = pt.a;
  in.b = pt.b;
  in.mu = pt.mu;
  in.K = build_ar1_operator(n, phi);
  in.A = MatrixXd::Identity(n, n);
  return ModelSpec(std::move(in));
}

}  // namespace

json run_s1(const Config& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const int n = static_cast<int>(cfg.get_long("s1.n", 300));
  const double phi = cfg.get_double("s1.phi", 0.5);
  GibbsConfig gc = gibbs_config_from(cfg, "s1", 50000, 5000);
  const std::string which = cfg.get_str("s1.points", "A,B,C,D,E,F");

  std::vector<S1Point> points;
  for (const auto& pt : kS1Points)
    if (which.find(pt.name) != std::string::npos) points.push_back(pt);
  if (points.empty()) throw ConfigError("s1.points selected no points");

  const int workers = n_workers(cfg);
  const int n_pts = static_cast<int>(points.size());

  // One task per (point, chain); each point owns a seed block.
  std::vector<std::vector<ChainResult>> results(n_pts);
  std::vector<ModelSpec> specs;
  std::vector<std::vector<VectorXd>> inits_per_point;
  for (int p = 0; p < n_pts; ++p) {
    specs.push_back(s1_spec(points[p], n, phi));
    RngStream init_rng(RngStream::derive(gc.seed, 0xd15, p));
    inits_per_point.push_back(overdispersed_inits(n, init_rng));
    results[p].resize(gc.n_chains);
  }
  const VectorXd y = VectorXd::Zero(n);
  const char* labels[4] = {"ones", "0.1*ones", "10*ones", "gig(1,1,1)"};

  parallel_for(n_pts * gc.n_chains, workers, [&](int task) {
    const int p = task / gc.n_chains;
    const int c = task % gc.n_chains;
    const std::uint64_t seed_c = RngStream::derive(gc.seed, 100 + p, c);
    RngStream rng(seed_c);
    ChainResult cr;
    cr.trace = run_chain(specs[p], Parameterization::NonCentered, gc, y,
                         inits_per_point[p][c % 4], rng, nullptr);
    cr.seed = seed_c;
    cr.init_label = labels[c % 4];
    results[p][c] = std::move(cr);
  });

  const std::vector<std::string> stats = {"S_plus", "S_minus", "S_log"};
  json rep = report_header(cfg);
  json points_json = json::array();

  std::ofstream table(out_dir + "/s1_table.csv");
  table << "point,regime,stat,iact,ess_per_sec,rhat\n";
  std::ofstream plot(out_dir + "/s1_plot.csv");
  plot << "point,regime,stat,iact,rhat\n";

  for (int p = 0; p < n_pts; ++p) {
    const std::string pdir = out_dir + "/point_" + points[p].name;
    fs::create_directories(pdir);
    for (int c = 0; c < gc.n_chains; ++c)
      write_chain_csv(pdir + "/chain_" + two_digits(c) + ".csv",
                      results[p][c].trace);
    write_meta(pdir, cfg, gc, results[p]);

    const auto rows = summarize_run(stats, retained_tracks(results[p], false),
                                    wall_times_of(results[p]));
    for (const auto& r : rows) {
      table << points[p].name << "," << points[p].regime << "," << r.stat << ","
            << r.iact << "," << r.ess_per_sec << "," << r.split_rhat << "\n";
      plot << points[p].name << "," << points[p].regime << "," << r.stat << ","
           << r.iact << "," << r.split_rhat << "\n";
    }
    points_json.push_back(json{{"point", points[p].name},
                               {"regime", points[p].regime},
                               {"p", points[p].p},
                               {"a", points[p].a},
                               {"b", points[p].b},
                               {"mu", points[p].mu},
                               {"summaries", summaries_to_json(rows)},
                               {"max_split_rhat", max_rhat(rows)}});
  }
  rep["points"] = points_json;
  rep["out_dir"] = out_dir;
  rep["v_clamps"] = v_clamp_count();
  return rep;
}

json run_s2(const Config& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const int n = static_cast<int>(cfg.get_long("s2.n", 300));
  const double phi = cfg.get_double("s2.phi", 0.5);
  GibbsConfig gc = gibbs_config_from(cfg, "s2", 50000, 10000);
  const std::vector<double> mu_grid = cfg.get_vector(
      "s2.mu_grid", {0.0, 0.05, 0.1, 0.2, 0.4, 0.8, 1.6, 3.2});

  ModelSpec::Inputs in;
  in.family = MixingFamily::Gig;
  in.p = cfg.get_double("s2.p", 0.5);
  in.a = cfg.get_double("s2.a", 1.0);
  in.b = cfg.get_double("s2.b", 0.0);
  in.mu = 0.0;
  in.K = build_ar1_operator(n, phi);
  in.A = build_rank_deficient_A(n);
  const ModelSpec base(std::move(in));
  const VectorXd y = VectorXd::Zero(n);

  const VectorXd gamma_ns = gamma_ns_scan(
      base, y, Eigen::Map<const VectorXd>(mu_grid.data(), mu_grid.size()));

  // u0 spans Null(B) = span{K u}; T_null direction is K^{-1} u0.
  const NullSpaceReport ns = null_smallness(base);
  VectorXd u0 = base.K() * ns.U_A.col(0);
  u0.normalize();
  const VectorXd tdir = base.solve_K(u0);

  const int n_mu = static_cast<int>(mu_grid.size());
  const int workers = n_workers(cfg);
  std::vector<std::vector<ChainResult>> results(n_mu);
  std::vector<ModelSpec> specs;
  std::vector<std::vector<VectorXd>> inits_per_mu;
  for (int j = 0; j < n_mu; ++j) {
    specs.push_back(base.with_scalars(mu_grid[j], base.sigma(), base.sigma_eps()));
    RngStream init_rng(RngStream::derive(gc.seed, 0x52, j));
    inits_per_mu.push_back(overdispersed_inits(n, init_rng));
    results[j].resize(gc.n_chains);
  }
  const char* labels[4] = {"ones", "0.1*ones", "10*ones", "gig(1,1,1)"};

  parallel_for(n_mu * gc.n_chains, workers, [&](int task) {
    const int j = task / gc.n_chains;
    const int c = task % gc.n_chains;
    const std::uint64_t seed_c = RngStream::derive(gc.seed, 200 + j, c);
    RngStream rng(seed_c);
    ChainResult cr;
    cr.trace = run_chain(specs[j], Parameterization::NonCentered, gc, y,
                         inits_per_mu[j][c % 4], rng, &tdir);
    cr.seed = seed_c;
    cr.init_label = labels[c % 4];
    results[j][c] = std::move(cr);
  });

  const std::vector<std::string> stats = {"S_plus", "S_minus", "S_log",
                                          "T_null"};
  json rep = report_header(cfg);
  json scan = json::array();
  std::ofstream table(out_dir + "/s2_table.csv");
  table << "mu,gamma_ns,stat,iact,rhat\n";
  std::ofstream plot(out_dir + "/s2_plot.csv");
  plot << "mu,gamma_ns,stat,iact\n";

  std::vector<double> gns_vec, iact_tnull;
  for (int j = 0; j < n_mu; ++j) {
    const std::string mdir = out_dir + "/mu_" + two_digits(j);
    fs::create_directories(mdir);
    for (int c = 0; c < gc.n_chains; ++c)
      write_chain_csv(mdir + "/chain_" + two_digits(c) + ".csv",
                      results[j][c].trace);
    write_meta(mdir, cfg, gc, results[j]);

    const auto rows = summarize_run(stats, retained_tracks(results[j], true),
                                    wall_times_of(results[j]));
    for (const auto& r : rows) {
      table << mu_grid[j] << "," << gamma_ns[j] << "," << r.stat << ","
            << r.iact << "," << r.split_rhat << "\n";
      plot << mu_grid[j] << "," << gamma_ns[j] << "," << r.stat << ","
           << r.iact << "\n";
      if (r.stat == "T_null") iact_tnull.push_back(r.iact);
    }
    gns_vec.push_back(gamma_ns[j]);
    scan.push_back(json{{"mu", mu_grid[j]},
                        {"gamma_ns", gamma_ns[j]},
                        {"summaries", summaries_to_json(rows)},
                        {"max_split_rhat", max_rhat(rows)}});
  }
  rep["scan"] = scan;
  rep["spearman_gamma_ns_iact_tnull"] = spearman(gns_vec, iact_tnull);
  rep["out_dir"] = out_dir;
  rep["v_clamps"] = v_clamp_count();
  return rep;
}

json run_estimate(const Config& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const ModelSpec spec = model_from_config(cfg);
  const VectorXd y = data_from_config(cfg, spec);

  SgdConfig sc;
  sc.iterations = cfg.get_long("estimate.iterations", 2000);
  sc.k_gibbs = static_cast<int>(cfg.get_long("estimate.k_gibbs", 5));
  sc.step_c = cfg.get_double("estimate.step_c", 0.5);
  sc.step_t0 = cfg.get_double("estimate.step_t0", 100.0);
  sc.warm_start = cfg.get_bool("estimate.warm_start", true);
  sc.phi0 = cfg.get_double("model.phi", 0.5);

  const std::string free = cfg.get_str("estimate.free", "mu");
  std::istringstream toks(free);
  std::string tok;
  while (std::getline(toks, tok, ',')) {
    tok.erase(0, tok.find_first_not_of(" \t"));
    tok.erase(tok.find_last_not_of(" \t") + 1);
    if (tok == "beta")
      sc.mask.beta = true;
    else if (tok == "sigma_eps")
      sc.mask.sigma_eps = true;
    else if (tok == "sigma")
      sc.mask.sigma = true;
    else if (tok == "mu")
      sc.mask.mu = true;
    else if (tok == "phi" || tok == "zeta")
      sc.mask.zeta = true;
    else if (tok == "nu")
      sc.mask.nu = true;
    else if (!tok.empty())
      throw ConfigError("estimate.free: unknown parameter '" + tok + "'");
  }
  if (sc.mask.count(spec.q()) == 0)
    throw ConfigError("estimate.free selected no parameters");

  RngStream rng(static_cast<std::uint64_t>(cfg.get_long("estimate.seed", 99)));
  const SgdResult res = sgd_fit(spec, y, sc, rng);

  std::vector<std::string> names;
  if (sc.mask.beta)
    for (int j = 0; j < spec.q(); ++j) names.push_back("beta" + std::to_string(j));
  if (sc.mask.sigma_eps) names.push_back("log_sigma_eps");
  if (sc.mask.sigma) names.push_back("log_sigma");
  if (sc.mask.mu) names.push_back("mu");
  if (sc.mask.zeta) names.push_back("atanh_phi");
  if (sc.mask.nu) names.push_back("log_nu");

  std::ofstream csv(out_dir + "/trajectory.csv");
  csv << "iter";
  for (const auto& nme : names) csv << "," << nme;
  csv << ",grad_norm\n";
  for (size_t t = 0; t < res.trajectory.size(); ++t) {
    csv << (t + 1);
    for (Eigen::Index k = 0; k < res.trajectory[t].size(); ++k)
      csv << "," << res.trajectory[t][k];
    csv << "," << res.grad_norms[t] << "\n";
  }

  json rep = report_header(cfg);
  rep["diverged"] = res.diverged;
  if (!res.note.empty()) rep["note"] = res.note;
  json fin = json::object();
  fin["mu"] = res.final_spec.mu();
  fin["sigma"] = res.final_spec.sigma();
  fin["sigma_eps"] = res.final_spec.sigma_eps();
  if (res.final_spec.family() != MixingFamily::Gig)
    fin["nu"] = res.final_spec.nu();
  if (sc.mask.beta) {
    json b = json::array();
    for (int j = 0; j < spec.q(); ++j) b.push_back(res.final_spec.beta()[j]);
    fin["beta"] = b;
  }
  if (sc.mask.zeta && !res.trajectory.empty()) {
    const auto it = std::find(names.begin(), names.end(), "atanh_phi");
    const auto k = static_cast<Eigen::Index>(it - names.begin());
    fin["phi"] = std::tanh(res.trajectory.back()[k]);
  }
  rep["theta_final"] = fin;
  rep["iterations"] = res.trajectory.size();
  rep["out_dir"] = out_dir;
  std::ofstream fj(out_dir + "/estimate.json");
  fj << rep.dump(2) << "\n";
  return rep;
}

json run_gigcheck(std::uint64_t seed) {
  json rep;
  rep["version"] = kVersion;
  bool ok = true;
  json items = json::array();
  auto record = [&](const std::string& name, bool pass, double worst) {
    items.push_back(json{{"check", name}, {"pass", pass}, {"worst", worst}});
    ok = ok && pass;
  };

  {  // symmetry K_nu = K_{-nu}
    double worst = 0.0;
    for (double nu : {0.1, 0.5, 1.3, 2.7, 5.5})
      for (double x : {1e-6, 1e-3, 0.5, 2.0, 10.0, 100.0, 700.0}) {
        const double k1 = log_bessel_k(nu, x), k2 = log_bessel_k(-nu, x);
        worst = std::max(worst, std::fabs(k1 - k2));
      }
    record("bessel_symmetry_logdomain", worst <= 1e-12, worst);
  }
  {  // large-x asymptotic K ~ sqrt(pi/2x) e^{-x}, first correction folded in
    double worst = 0.0;
    for (double nu : {0.0, 0.5, 1.0, 2.0}) {
      const double x = 100.0;
      const double asym = std::sqrt(M_PI / (2.0 * x)) * std::exp(-x) *
                          (1.0 + (4.0 * nu * nu - 1.0) / (8.0 * x));
      worst = std::max(worst, std::fabs(bessel_k(nu, x) / asym - 1.0));
    }
    record("bessel_large_x_asymptotic", worst <= 1e-3, worst);
  }
  {  // ratio inequality, increment d = delta/2:
     // K_{nu+d}/K_nu <= ((2nu+1)/x)^d + 1
    double worst = -1e30;
    bool pass = true;
    for (double nu : {0.0, 0.3, 1.0, 2.5})
      for (double delta : {0.1, 0.5, 0.9})
        for (int i = 0; i <= 40; ++i) {
          const double d = 0.5 * delta;
          const double x = std::pow(10.0, -3.0 + 6.0 * i / 40.0);
          const double lhs = bessel_k_ratio(nu + d, nu, x);
          const double rhs = std::pow((2.0 * nu + 1.0) / x, d) + 1.0;
          worst = std::max(worst, lhs - rhs);
          if (lhs > rhs) pass = false;
        }
    record("bessel_ratio_bound", pass, worst);
  }
  {  // density normalization on all three branches
    double worst = 0.0;
    const double tuples[][3] = {{-0.5, 1, 1}, {2.0, 3, 0.5}, {0.7, 0.2, 4},
                                {-1.2, 0, 2}, {-0.5, 0, 1},  {1.0, 2, 0},
                                {0.3, 1, 0}};
    for (const auto& t : tuples) {
      const GigParams g(t[0], t[1], t[2]);
      const double mass = integrate_0inf(
          [&](double x) { return std::exp(gig_log_density(g, x)); }, 1e-12);
      worst = std::max(worst, std::fabs(mass - 1.0));
    }
    record("density_normalization", worst <= 1e-6, worst);
  }
  {  // sampler moments vs Bessel-ratio formula
    RngStream rng(seed);
    double worst = 0.0;
    bool pass = true;
    const double tuples[][3] = {{-0.5, 1, 1}, {1.5, 2, 3}, {0.2, 0.3, 0.1},
                                {-2.0, 0, 2}, {2.0, 2, 0}};
    const long N = 200000;
    for (const auto& t : tuples) {
      const GigParams g(t[0], t[1], t[2]);
      for (double r : {-0.5, 0.5, 1.0, 2.0}) {
        if (!gig_moment_exists(g, r) || !gig_moment_exists(g, 2.0 * r)) continue;
        const double target = gig_moment(g, r);
        const double second = gig_moment(g, 2.0 * r);
        double acc = 0.0;
        RngStream rr(RngStream::derive(seed, static_cast<std::uint64_t>(t[0] * 8),
                                       static_cast<std::uint64_t>(r * 4)));
        for (long i = 0; i < N; ++i) acc += std::pow(gig_sample(g, rr), r);
        const double mean = acc / N;
        const double se = std::sqrt(std::max(second - target * target, 0.0) / N);
        const double dev = std::fabs(mean - target) / std::max(se, 1e-300);
        worst = std::max(worst, dev);
        if (dev > 4.0) pass = false;
      }
    }
    (void)rng;
    record("sampler_moment_agreement_4se", pass, worst);
  }
  rep["ok"] = ok;
  rep["items"] = items;
  return rep;
}

}  // namespace llngm
