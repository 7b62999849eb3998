// Command-line front end: parse a JSON run configuration, dispatch the
// experiments and write CSV tables / legacy-VTK snapshots.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>

#include "stfem/aggregation.hpp"
#include "stfem/presets.hpp"
#include "stfem/vtk.hpp"

using nlohmann::json;
using namespace stfem;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  json cfg;
  try {
    f >> cfg;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!cfg.contains("schema_version") || cfg["schema_version"] != 1)
    throw ConfigError("config must declare \"schema_version\": 1");
  return cfg;
}

template <typename T>
T get_or(const json& cfg, const std::string& key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

std::string geometry_name(const json& cfg) {
  if (!cfg.contains("geometry") || !cfg["geometry"].contains("name"))
    throw ConfigError("config needs geometry.name");
  return cfg["geometry"]["name"].get<std::string>();
}

Stabilization parse_stabilization(const std::string& s) {
  if (s == "agfem") return Stabilization::AgFEM;
  if (s == "ghost-weak") return Stabilization::GhostWeak;
  if (s == "ghost-bulk") return Stabilization::GhostBulk;
  if (s == "ghost-face") return Stabilization::GhostFace;
  if (s == "none") return Stabilization::None;
  throw ConfigError("unknown stabilisation kind '" + s + "'");
}

RunParams run_params(const json& cfg) {
  RunParams params;
  params.p = get_or(cfg, "p", 1);
  params.q = get_or(cfg, "q", 1);
  if (params.p < 1 || params.p > 2 || params.q < 1 || params.q > 2)
    throw ConfigError("orders p and q must be 1 or 2");
  params.eta0 = get_or(cfg, "eta0", 1.0);
  if (!(params.eta0 > 0.0 && params.eta0 <= 1.0))
    throw ConfigError("eta0 must lie in (0, 1]");
  params.n_eta_samples = get_or(cfg, "n_eta_samples", 0);
  params.stab = parse_stabilization(get_or<std::string>(cfg, "stabilization", "agfem"));
  params.gamma_ghost = get_or(cfg, "gamma_ghost", 1.0);
  params.ghost_i_max = get_or(cfg, "i_max", 1);
  params.cond_dense_cap = get_or(cfg, "cond_dense_cap", 20000);
  return params;
}

// all floating-point CSV output carries 17 significant digits
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream f(dir / name);
  if (!f) throw std::runtime_error("cannot open output file " + (dir / name).string());
  return f;
}

int cmd_solve(const json& cfg, const std::string& out_dir, int threads) {
  (void)threads;
  const std::string geo = geometry_name(cfg);
  const int m = get_or(cfg, "m", 4);
  RunParams params = run_params(cfg);

  presets::Problem pr;
  if (geo == "two-disk") {
    pr = presets::two_disks(get_or(cfg, "nx", 60), get_or(cfg, "ny", 121),
                            get_or(cfg, "n_slabs", 60), get_or(cfg, "mu", 0.1));
  } else {
    pr = presets::manufactured(geo, m, params.p);
    if (cfg.contains("mu")) pr.data.mu = cfg["mu"].get<double>();
  }
  if (cfg.contains("gamma")) pr.data.gamma = cfg["gamma"].get<double>();

  auto res = run(pr.mesh, *pr.ls, pr.data, pr.u0, pr.slabs, params);

  auto f = open_out(out_dir, "solve_summary.csv");
  f << "slab,t_end,n_active,n_cut,n_free_dofs,residual\n";
  for (int n = 0; n < res.slabs.num_slabs(); ++n) {
    const auto& d = res.diagnostics[n];
    f << n << ',' << fmt(res.slabs.slab_end(n)) << ',' << d.n_active << ',' << d.n_cut << ','
      << d.n_free_dofs << ',' << fmt(d.residual) << '\n';
  }

  if (pr.has_exact) {
    auto err = error_norms(res, *pr.ls, pr.data, pr.exact, get_or(cfg, "c_mu", 1.0));
    auto fe = open_out(out_dir, "errors.csv");
    fe << "h,dg_error,l2_final\n";
    fe << fmt(std::pow(2.0, -m)) << ',' << fmt(err.accumulated_dg) << ',' << fmt(err.l2_final)
       << '\n';
    std::cout << "accumulated_dg = " << fmt(err.accumulated_dg)
              << "  l2_final = " << fmt(err.l2_final) << "\n";
  }

  if (get_or(cfg, "write_vtk", false)) {
    for (int n = 0; n < res.slabs.num_slabs(); ++n) {
      char name[64];
      std::snprintf(name, sizeof(name), "solution_%04d.vtk", n + 1);
      auto soup =
          solution_snapshot(*res.spaces[n], res.solutions[n], *pr.ls, res.slabs.slab_end(n));
      write_vtk_triangles((std::filesystem::path(out_dir) / name).string(), soup);
    }
  }
  std::cout << "solve: " << res.slabs.num_slabs() << " slabs completed\n";
  return 0;
}

int cmd_convergence(const json& cfg, const std::string& out_dir, int threads) {
  const std::string geo = geometry_name(cfg);
  const std::vector<int> m_list = get_or(cfg, "m_list", std::vector<int>{3, 4, 5, 6});
  const int p = get_or(cfg, "p", 1), q = get_or(cfg, "q", 1);
  const double c_mu = get_or(cfg, "c_mu", 1.0);
  auto table = presets::convergence_study(geo, m_list, p, q, c_mu, threads);

  auto f = open_out(out_dir, "convergence.csv");
  f << "m,h,dg_error,l2_final,dg_rate,l2_rate\n";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    f << r.m << ',' << fmt(r.h) << ',' << fmt(r.dg) << ',' << fmt(r.l2) << ',';
    if (i > 0) {
      const auto& prev = table.rows[i - 1];
      f << fmt(std::log(prev.dg / r.dg) / std::log(prev.h / r.h)) << ','
        << fmt(std::log(prev.l2 / r.l2) / std::log(prev.h / r.h));
    } else {
      f << ',';
    }
    f << '\n';
  }
  std::cout << "convergence (p=" << p << ", q=" << q << "): dg_slope = " << fmt(table.dg_slope)
            << "  l2_slope = " << fmt(table.l2_slope) << "\n";
  return 0;
}

int cmd_cond_sweep(const json& cfg, const std::string& out_dir, int threads) {
  const int m = get_or(cfg, "m", 5);
  const double tau = get_or(cfg, "tau", 1e-3);
  const int p = get_or(cfg, "p", 1), q = get_or(cfg, "q", 1);
  const int count = get_or(cfg, "ell_count", 50);
  if (count < 2) throw ConfigError("ell_count must be at least 2");
  const int cap = get_or(cfg, "cond_dense_cap", 2000);
  std::vector<double> ells;
  for (int k = 0; k < count; ++k) ells.push_back(double(k) / (count - 1));
  const std::string methods = get_or<std::string>(cfg, "methods", "both");
  const bool agfem = methods == "both" || methods == "agfem";
  const bool standard = methods == "both" || methods == "standard";
  if (!agfem && !standard) throw ConfigError("methods must be agfem, standard or both");
  auto samples = presets::condition_sweep(m, tau, ells, p, q, agfem, standard, cap, threads);

  auto f = open_out(out_dir, "cond_sweep.csv");
  f << "ell,method,kappa_mass,kappa_stiffness,estimate_mass,estimate_stiffness,singular_mass,"
       "singular_stiffness\n";
  for (const auto& s : samples)
    f << fmt(s.ell) << ',' << s.method << ',' << fmt(s.kappa_m) << ',' << fmt(s.kappa_a) << ','
      << int(s.est_m) << ',' << int(s.est_a) << ',' << int(s.sing_m) << ',' << int(s.sing_a)
      << '\n';
  std::cout << "cond-sweep: " << samples.size() << " samples written\n";
  return 0;
}

int cmd_cond_scaling(const json& cfg, const std::string& out_dir, int threads) {
  (void)threads;
  const std::vector<int> m_list = get_or(cfg, "m_list", std::vector<int>{3, 4, 5, 6});
  const int p = get_or(cfg, "p", 1), q = get_or(cfg, "q", 1);
  const int cap = get_or(cfg, "cond_dense_cap", 2000);
  auto table = presets::condition_scaling(m_list, p, q, cap);

  auto f = open_out(out_dir, "cond_scaling.csv");
  f << "m,h,kappa_mass,kappa_stiffness,estimated\n";
  for (const auto& r : table.rows)
    f << r.m << ',' << fmt(r.h) << ',' << fmt(r.kappa_m) << ',' << fmt(r.kappa_a) << ','
      << int(r.est) << '\n';
  std::cout << "cond-scaling: slope_mass = " << fmt(table.slope_m)
            << "  slope_stiffness = " << fmt(table.slope_a) << "\n";
  return 0;
}

int cmd_topology(const json& cfg, const std::string& out_dir, int threads) {
  (void)threads;
  const int nx = get_or(cfg, "nx", 60), ny = get_or(cfg, "ny", 121);
  const int n_slabs = get_or(cfg, "n_slabs", 60);
  const double mu = get_or(cfg, "mu", 0.1);
  RunParams params = run_params(cfg);
  auto rep = presets::topology_run(nx, ny, n_slabs, mu, params.p, params.q, params.stab);

  auto f = open_out(out_dir, "conservation.csv");
  f << "slab,t_end,mass,residual\n";
  for (int n = 0; n < n_slabs; ++n)
    f << n << ',' << fmt(rep.result.slabs.slab_end(n)) << ',' << fmt(rep.mass[n]) << ','
      << fmt(rep.result.diagnostics[n].residual) << '\n';

  if (get_or(cfg, "write_vtk", true)) {
    auto pr = presets::two_disks(nx, ny, n_slabs, mu);
    for (int n = 0; n < n_slabs; ++n) {
      char name[64];
      std::snprintf(name, sizeof(name), "solution_%04d.vtk", n + 1);
      auto soup = solution_snapshot(*rep.result.spaces[n], rep.result.solutions[n], *pr.ls,
                                    rep.result.slabs.slab_end(n));
      write_vtk_triangles((std::filesystem::path(out_dir) / name).string(), soup);
    }
  }
  std::cout << "topology: first contact at slab " << rep.first_contact_slab + 1 << " of "
            << n_slabs << "; max |mass| = " << fmt(rep.max_abs_mass) << " (domain area "
            << fmt(rep.domain_area_t0) << ")\n"
            << "pre-contact samples: upper [" << fmt(rep.upper_min) << ", " << fmt(rep.upper_max)
            << "], lower [" << fmt(rep.lower_min) << ", " << fmt(rep.lower_max) << "]\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"space-time unfitted finite element solver for moving domains"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int threads = 1;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--threads", threads, "worker threads for independent runs (default 1)");
  app.add_option("--out", out_dir, "output directory (overrides config)");

  auto* solve = app.add_subcommand("solve", "single run with per-slab diagnostics");
  auto* conv = app.add_subcommand("convergence", "manufactured-solution rate study");
  auto* sweep = app.add_subcommand("cond-sweep", "condition numbers vs cut position");
  auto* scaling = app.add_subcommand("cond-scaling", "condition numbers vs mesh size");
  auto* topo = app.add_subcommand("topology", "two-disk topology-change benchmark");
  for (auto* sub : {solve, conv, sweep, scaling, topo}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const json cfg = load_config(config_path);
    const std::string out = !out_dir.empty() ? out_dir : get_or<std::string>(cfg, "out", "results");
    if (solve->parsed()) return cmd_solve(cfg, out, threads);
    if (conv->parsed()) return cmd_convergence(cfg, out, threads);
    if (sweep->parsed()) return cmd_cond_sweep(cfg, out, threads);
    if (scaling->parsed()) return cmd_cond_scaling(cfg, out, threads);
    if (topo->parsed()) return cmd_topology(cfg, out, threads);
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}
