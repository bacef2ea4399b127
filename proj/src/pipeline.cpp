#include "alm/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "alm/decomposer.hpp"
#include "alm/dominance.hpp"
#include "alm/extensive.hpp"

namespace alm::pipe {

namespace fs = std::filesystem;

namespace {

constexpr double kSsdTol = 1e-6;
constexpr double kOracleTol = 1e-5;

/// Processes for the dominance checks: zero everywhere except the leaves,
/// which carry the one-step portfolio value from the last rebalancing and the
/// phi-scaled benchmark. The last-but-one comparison is then exactly the
/// model's dominance constraint, and earlier histories compare the projected
/// tail values it implies.
void build_processes(const ScenarioTree& tree, const rpt::Solution& s,
                     std::vector<double>& x, std::vector<double>& y) {
  const auto& topo = tree.topo;
  x.assign(topo.num_nodes(), 0.0);
  y.assign(topo.num_nodes(), 0.0);
  for (int m = 1; m < topo.num_nodes(); ++m) {
    if (!topo.is_leaf(m)) continue;
    int a = topo.nodes[m].ancestor;
    double v = 0;
    for (size_t i = 0; i < s.policy[a].x.size(); ++i)
      v += s.policy[a].x[i] * (1.0 + tree.coeff[m].r[i]);
    x[m] = v;
    y[m] = s.params.phi * tree.coeff[m].Lambda();
  }
}

std::string fmt_short(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

int thread_count() {
  if (const char* env = std::getenv("ALM_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

VerifyReport verify_solution(const ScenarioTree& tree, const rpt::Solution& s,
                             bool oracle, const lp::SolveOptions& lp_opts) {
  VerifyReport out;
  if (s.infeasible) {
    out.pass = false;
    out.notes.push_back("solution is marked infeasible");
    return out;
  }

  if (s.params.phi > 0) {
    out.ssd_checked = true;
    dom::SequentialProcess px, py;
    px.tree = py.tree = &tree.topo;
    build_processes(tree, s, px.value, py.value);
    auto t1 = dom::dominance_propagation(px, py, kSsdTol);
    out.ssd_ok = t1.premise && t1.conclusion;
    if (!t1.premise)
      out.notes.push_back("dominance fails at a last-but-one node");
    if (!t1.conclusion)
      out.notes.push_back("sequential dominance fails at an earlier history");
    // Record the worst last-but-one violation for diagnostics.
    const auto& topo = tree.topo;
    for (int n : topo.stage_nodes[topo.last_stage() - 1]) {
      std::vector<std::pair<double, double>> xa, ya;
      for (int m : topo.nodes[n].children) {
        xa.emplace_back(px.value[m], topo.cond_prob(m));
        ya.emplace_back(py.value[m], topo.cond_prob(m));
      }
      auto res = dom::ssd_dominates(dom::DiscreteDistribution(std::move(xa)),
                                    dom::DiscreteDistribution(std::move(ya)),
                                    kSsdTol);
      out.worst_ssd_violation =
          std::max(out.worst_ssd_violation, res.worst_violation);
    }
  } else {
    out.notes.push_back("phi = 0: dominance checks skipped");
  }

  if (oracle) {
    out.oracle_checked = true;
    try {
      auto ext = xf::solve_extensive(tree, s.params, lp_opts);
      if (ext.status != lp::Status::Optimal) {
        out.oracle_ok = false;
        out.notes.push_back("extensive oracle did not solve to optimality");
      } else {
        auto cmp =
            xf::oracle_compare(ext, s.objective, s.K0, s.policy.at(0));
        out.oracle_gap = cmp.objective_gap;
        out.oracle_ok = cmp.objective_gap <= kOracleTol;
        if (!out.oracle_ok)
          out.notes.push_back("objective gap " + fmt_short(cmp.objective_gap) +
                              " exceeds " + fmt_short(kOracleTol));
      }
    } catch (const std::length_error&) {
      out.oracle_checked = false;
      out.notes.push_back("tree too large for the extensive oracle; skipped");
    }
  }

  out.pass = out.ssd_ok && out.oracle_ok;
  return out;
}

int cmd_generate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed, std::ostream& log) {
  cfg::RunConfig c;
  try {
    c = cfg::load_config(config_path);
  } catch (const cfg::ConfigError& e) {
    log << e.what() << "\n";
    return kConfigError;
  }
  if (seed) c.seed = *seed;
  try {
    fs::create_directories(out_dir);
    ScenarioTree tree = cfg::generate_tree(c, c.seed);
    save_tree(tree, (fs::path(out_dir) / "tree.txt").string());
    cfg::save_config(c, (fs::path(out_dir) / "config.ini").string());
    log << "generated " << tree.topo.num_nodes() << " nodes, "
        << tree.num_assets() - 1 << " assets + cash, seed " << c.seed << "\n";
  } catch (const std::exception& e) {
    log << "generate failed: " << e.what() << "\n";
    return kError;
  }
  return kOk;
}

int cmd_solve(const std::string& tree_path, const std::string& config_path,
              std::ostream& log) {
  cfg::RunConfig c;
  try {
    c = cfg::load_config(config_path);
  } catch (const cfg::ConfigError& e) {
    log << e.what() << "\n";
    return kConfigError;
  }
  try {
    ScenarioTree tree = load_tree(tree_path);
    ModelParams params = cfg::model_params(c);
    auto res = dec::solve_decomposed(tree, params, cfg::decomp_options(c));
    rpt::Solution sol = rpt::from_result(res, params);
    fs::path out = fs::path(tree_path).parent_path() / "solution.txt";
    rpt::save_solution(sol, out.string());
    if (res.infeasible) {
      log << "model infeasible\n";
      return kInfeasible;
    }
    log << "objective " << res.objective << ", K0 " << res.K0 << ", "
        << res.stats.outer_iterations << " iterations, "
        << res.stats.feasibility_cuts << " feasibility cuts -> " << out.string()
        << "\n";
  } catch (const std::exception& e) {
    log << "solve failed: " << e.what() << "\n";
    return kError;
  }
  return kOk;
}

int cmd_verify(const std::string& tree_path, const std::string& solution_path,
               bool oracle, std::ostream& log) {
  try {
    ScenarioTree tree = load_tree(tree_path);
    rpt::Solution sol = rpt::load_solution(solution_path);
    auto rep = verify_solution(tree, sol, oracle, {});
    for (const auto& n : rep.notes) log << n << "\n";
    if (rep.ssd_checked)
      log << "dominance: " << (rep.ssd_ok ? "ok" : "FAILED")
          << " (worst violation " << rep.worst_ssd_violation << ")\n";
    if (rep.oracle_checked)
      log << "oracle gap: " << rep.oracle_gap << " ("
          << (rep.oracle_ok ? "ok" : "FAILED") << ")\n";
    if (!rep.pass) return kVerifyFailed;
  } catch (const std::exception& e) {
    log << "verify failed: " << e.what() << "\n";
    return kError;
  }
  return kOk;
}

int cmd_report(const std::string& solution_path, const std::string& tree_path,
               const std::string& format, std::ostream& log) {
  if (format != "csv" && format != "json") {
    log << "unknown format '" << format << "' (csv|json)\n";
    return kConfigError;
  }
  try {
    ScenarioTree tree = load_tree(tree_path);
    rpt::Solution sol = rpt::load_solution(solution_path);
    rpt::ReportTables tables = rpt::report_tables(tree, sol);
    fs::path dir = fs::path(solution_path).parent_path();
    fs::path rp = dir / ("report." + format);
    {
      std::ofstream f(rp);
      if (format == "csv")
        rpt::write_report_csv(tables, f);
      else
        rpt::write_report_json(tables, f);
    }
    // CDF curves at a representative last-but-one node: prefer one whose
    // dominance constraint binds.
    const auto& topo = tree.topo;
    const auto& tn = topo.stage_nodes[topo.last_stage() - 1];
    int pick = tn.empty() ? -1 : tn.front();
    for (int n : tn)
      if (static_cast<size_t>(n) < sol.event_pools.size() &&
          !sol.event_pools[n].empty()) {
        pick = n;
        break;
      }
    if (pick >= 0) {
      fs::path cp = dir / ("cdf_node" + std::to_string(pick) + ".csv");
      std::ofstream f(cp);
      rpt::export_cdf(tree, sol, nullptr, pick, f);
      log << "wrote " << rp.string() << " and " << cp.string() << "\n";
    } else {
      log << "wrote " << rp.string() << "\n";
    }
  } catch (const std::exception& e) {
    log << "report failed: " << e.what() << "\n";
    return kError;
  }
  return kOk;
}

int cmd_sweep(const std::string& config_path, const std::string& param,
              const std::vector<double>& values, const std::string& out_dir,
              std::ostream& log) {
  cfg::RunConfig base;
  try {
    base = cfg::load_config(config_path);
  } catch (const cfg::ConfigError& e) {
    log << e.what() << "\n";
    return kConfigError;
  }
  auto apply = [&](cfg::RunConfig& c, double v) -> bool {
    if (param == "phi") c.phi = v;
    else if (param == "alpha") c.alpha = v;
    else if (param == "beta") c.beta = v;
    else if (param == "kappa") c.kappa = v;
    else if (param == "delta_bar") c.deltaBar = v;
    else if (param == "q") c.q = v;
    else if (param == "seed") c.seed = static_cast<std::uint64_t>(v);
    else return false;
    return true;
  };
  {
    cfg::RunConfig probe = base;
    if (!apply(probe, values.empty() ? 0.0 : values.front())) {
      log << "unknown sweep parameter '" << param << "'\n";
      return kConfigError;
    }
  }

  struct Row {
    double value = 0;
    int code = kOk;
    rpt::ReportTables tables;
    int iterations = 0;
    long fcuts = 0;
  };
  std::vector<Row> rows(values.size());

  // Independent runs in isolated directories; a small thread pool since each
  // solve is already parallel inside.
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t k = next++; k < values.size(); k = next++) {
      Row& row = rows[k];
      row.value = values[k];
      cfg::RunConfig c = base;
      apply(c, values[k]);
      std::ostringstream tag;
      tag << param << "_" << values[k];
      fs::path dir = fs::path(out_dir) / tag.str();
      try {
        fs::create_directories(dir);
        ScenarioTree tree = cfg::generate_tree(c, c.seed);
        save_tree(tree, (dir / "tree.txt").string());
        cfg::save_config(c, (dir / "config.ini").string());
        ModelParams params = cfg::model_params(c);
        auto res = dec::solve_decomposed(tree, params, cfg::decomp_options(c));
        rpt::Solution sol = rpt::from_result(res, params);
        rpt::save_solution(sol, (dir / "solution.txt").string());
        if (res.infeasible) {
          row.code = kInfeasible;
          continue;
        }
        row.tables = rpt::report_tables(tree, sol);
        row.iterations = res.stats.outer_iterations;
        row.fcuts = res.stats.feasibility_cuts;
        std::ofstream f(dir / "report.csv");
        rpt::write_report_csv(row.tables, f);
      } catch (const std::exception&) {
        row.code = kError;
      }
    }
  };
  int nthreads = std::min<int>(thread_count(), static_cast<int>(values.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  fs::create_directories(out_dir);
  std::ofstream f(fs::path(out_dir) / "sweep.csv");
  f << param
    << ",status,K0,objective,FR0,active_ssd_fraction,iterations,"
       "feasibility_cuts\n";
  int worst = kOk;
  for (const Row& r : rows) {
    f << r.value << "," << r.code << ",";
    if (r.code == kOk)
      f << r.tables.K0 << "," << r.tables.objective << "," << r.tables.FR0
        << "," << r.tables.active_ssd_fraction << "," << r.iterations << ","
        << r.fcuts;
    else
      f << ",,,,,";
    f << "\n";
    worst = std::max(worst, r.code);
  }
  log << "sweep over " << values.size() << " values -> "
      << (fs::path(out_dir) / "sweep.csv").string() << "\n";
  return worst;
}

}  // namespace alm::pipe
