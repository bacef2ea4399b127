// Acceptance gate: one pass/fail line per criterion, nonzero exit when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "alm/config.hpp"
#include "alm/decomposer.hpp"
#include "alm/dominance.hpp"
#include "alm/extensive.hpp"
#include "alm/pipeline.hpp"
#include "alm/report.hpp"
#include "alm/risk.hpp"

using namespace alm;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

#ifndef ALM_CONFIG_DIR
#define ALM_CONFIG_DIR "configs"
#endif

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string config_path(const char* name) {
  return std::string(ALM_CONFIG_DIR) + "/" + name;
}

// --- shared random instance generators (3 assets + cash, 1 liability) ---

ScenarioTree zero_tree(TreeTopology topo, int num_assets) {
  ScenarioTree t;
  t.topo = std::move(topo);
  t.coeff.resize(t.topo.num_nodes());
  for (auto& c : t.coeff) {
    c.r.assign(num_assets, 0.0);
    c.g.assign(num_assets - 1, 0.0);
    c.L = {0.0};
    c.lambda = {0.0};
    c.deltaLambda = {0.0};
  }
  return t;
}

ScenarioTree random_tree(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> br(1, 3);
  auto topo = build_topology({0, 1, 2, 3}, {br(rng), br(rng), br(rng)});
  ScenarioTree t = zero_tree(topo, 4);
  std::uniform_real_distribution<double> ret(-0.08, 0.14);
  std::uniform_real_distribution<double> pos(0.2, 1.5);
  for (const auto& node : t.topo.nodes) {
    double r0 = std::uniform_real_distribution<double>(0.0, 0.04)(rng);
    for (int m : node.children) {
      auto& c = t.coeff[m];
      c.r[0] = r0;
      for (int i = 1; i < 4; ++i) c.r[i] = ret(rng);
      for (int i = 0; i < 3; ++i) c.g[i] = ret(rng);
      c.L[0] = pos(rng);
      c.c = pos(rng);
      c.lambda[0] = 2.0 + pos(rng);
      c.deltaLambda[0] = std::uniform_real_distribution<double>(0.0, 1.5)(rng);
      c.rMinus = std::uniform_real_distribution<double>(0.0, 0.06)(rng);
    }
  }
  t.coeff[0].lambda[0] = 3.0;
  t.coeff[0].deltaLambda[0] = 1.0;
  return t;
}

ModelParams random_params(std::mt19937_64& rng) {
  ModelParams p;
  p.thetaMin.assign(4, 0.0);
  p.thetaMax.assign(4, 0.9);
  p.xhat.assign(4, 0.0);
  p.fixedIncome.assign(4, 0);
  p.equity.assign(4, 0);
  p.durationX.assign(4, 0.0);
  p.fixedIncome[1] = 1;
  p.durationX[1] = 2.0;
  p.equity[2] = 1;
  p.q = 0.8;
  p.deltaBar = 1.0;
  p.alpha = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
  p.beta = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
  p.kappa = (rng() % 2) ? 0.1 : 0.0;
  p.phi = (rng() % 2) ? 1.0 : 0.0;
  p.phiPlus = p.phiMinus = 0.001;
  return p;
}

dom::DiscreteDistribution random_dist(std::mt19937_64& rng, int max_atoms = 6) {
  std::uniform_int_distribution<int> na(1, max_atoms);
  int n = na(rng);
  std::vector<std::pair<double, double>> atoms(n);
  double tot = 0;
  for (auto& [v, p] : atoms) {
    v = std::uniform_real_distribution<double>(-3.0, 5.0)(rng);
    p = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    tot += p;
  }
  for (auto& [v, p] : atoms) p /= tot;
  return dom::DiscreteDistribution(std::move(atoms));
}

struct SolvedInstance {
  ScenarioTree tree;
  ModelParams params;
  rpt::Solution solution;
};

std::vector<SolvedInstance> g_solved;  // feasible runs collected for checks

// 1. Decomposer vs extensive-form oracle on randomized instances.
bool criterion1(std::string& msg) {
  std::mt19937_64 rng(20260825);
  int compared = 0, attempts = 0;
  double worst_obj = 0, worst_pol = 0, worst_time = 0;
  while (compared < 20 && attempts < 80) {
    ++attempts;
    ScenarioTree t = random_tree(rng);
    ModelParams p = random_params(rng);
    auto t0 = Clock::now();
    auto ext = xf::solve_extensive(t, p);
    if (ext.status == lp::Status::Infeasible) continue;
    if (ext.status != lp::Status::Optimal) {
      msg = "extensive solve failed on a random instance";
      return false;
    }
    auto dc = dec::solve_decomposed(t, p);
    double dt = seconds_since(t0);
    if (dc.infeasible) {
      msg = "decomposer infeasible where the oracle is feasible";
      return false;
    }
    auto cmp = xf::oracle_compare(ext, dc.objective, dc.K0, dc.policy[0]);
    worst_obj = std::max(worst_obj, cmp.objective_gap);
    worst_pol = std::max(worst_pol, cmp.max_policy_dev);
    worst_time = std::max(worst_time, dt);
    ++compared;
    auto sol = rpt::from_result(dc, p);
    sol.event_pools = dc.event_pools;
    g_solved.push_back({std::move(t), p, std::move(sol)});
  }
  std::ostringstream os;
  os << compared << " instances, worst objective gap " << worst_obj
     << ", worst root deviation " << worst_pol << ", slowest " << worst_time
     << "s";
  msg = os.str();
  return compared >= 20 && worst_obj <= 1e-5 && worst_pol <= 1e-4 &&
         worst_time < 10.0;
}

// 2. Last-but-one dominance implies the sequential order at every history.
bool criterion2(std::string& msg) {
  std::mt19937_64 rng(42);
  int fails = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<int> br(1, 3);
    auto topo = build_topology({0, 1, 2, 3}, {br(rng), br(rng), br(rng)});
    dom::SequentialProcess x, y;
    x.tree = y.tree = &topo;
    y.value.resize(topo.num_nodes());
    for (auto& v : y.value)
      v = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
    x.value = y.value;
    // Enforce the premise by construction: either lift X pointwise or replace
    // the terminal X outcomes by their conditional mean.
    for (int n = 0; n < topo.num_nodes(); ++n) {
      if (topo.is_leaf(n)) continue;
      if (!topo.is_leaf(topo.nodes[n].children.front())) {
        x.value[n] +=
            std::uniform_real_distribution<double>(0.0, 0.5)(rng);
        continue;
      }
      if (rng() % 2) {
        for (int m : topo.nodes[n].children)
          x.value[m] += std::uniform_real_distribution<double>(0.0, 0.5)(rng);
      } else {
        double mean = 0;
        for (int m : topo.nodes[n].children)
          mean += topo.cond_prob(m) * y.value[m];
        for (int m : topo.nodes[n].children) x.value[m] = mean;
      }
    }
    auto res = dom::dominance_propagation(x, y, 1e-10);
    if (!res.premise || !res.conclusion) ++fails;
  }
  std::ostringstream os;
  os << "200 constructed pairs, " << fails << " counterexamples";
  msg = os.str();
  return fails == 0;
}

// 3. Solved policies dominate the scaled benchmark wherever phi > 0.
bool criterion3(std::string& msg) {
  int checked = 0;
  double worst = 0;
  for (const auto& inst : g_solved) {
    if (inst.params.phi <= 0) continue;
    auto rep = pipe::verify_solution(inst.tree, inst.solution, false, {});
    worst = std::max(worst, rep.worst_ssd_violation);
    if (!rep.ssd_ok) {
      msg = "dominance violated on a random solved instance";
      return false;
    }
    ++checked;
  }
  for (const char* name : {"base_small.ini", "stressed.ini"}) {
    auto c = cfg::load_config(config_path(name));
    auto tree = cfg::generate_tree(c, c.seed);
    for (double phi : {0.8, 1.0, 1.1}) {
      auto c2 = c;
      c2.phi = phi;
      auto params = cfg::model_params(c2);
      auto res = dec::solve_decomposed(tree, params, cfg::decomp_options(c2));
      if (res.infeasible) {
        msg = std::string(name) + " infeasible at phi " + std::to_string(phi);
        return false;
      }
      auto rep =
          pipe::verify_solution(tree, rpt::from_result(res, params), false, {});
      worst = std::max(worst, rep.worst_ssd_violation);
      if (!rep.ssd_ok) {
        msg = std::string("dominance violated on ") + name;
        return false;
      }
      ++checked;
    }
  }
  std::ostringstream os;
  os << checked << " solved runs, worst violation " << worst;
  msg = os.str();
  return checked > 0;
}

// 4. Lorenz/shortfall agreement, conjugacy, separation oracle equivalence.
bool criterion4(std::string& msg) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    auto a = random_dist(rng), b = random_dist(rng);
    bool lorenz = dom::ssd_dominates(a, b, 1e-12).dominates;
    bool shortfall = true;
    for (const auto& [eta, p] : a.atoms())
      shortfall = shortfall &&
                  dom::integrated_cdf(a, eta) <= dom::integrated_cdf(b, eta) +
                                                     1e-12;
    for (const auto& [eta, p] : b.atoms())
      shortfall = shortfall &&
                  dom::integrated_cdf(a, eta) <= dom::integrated_cdf(b, eta) +
                                                     1e-12;
    if (lorenz != shortfall) {
      msg = "Lorenz and shortfall dominance disagree";
      return false;
    }
  }
  double worst_gap = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto d = random_dist(rng);
    std::vector<double> grid;
    for (int k = 1; k <= 20; ++k) grid.push_back(k / 20.0);
    worst_gap = std::max(worst_gap, dom::conjugacy_check(d, grid));
  }
  if (worst_gap >= 1e-9) {
    msg = "Fenchel conjugacy gap " + std::to_string(worst_gap);
    return false;
  }
  for (int trial = 0; trial < 500; ++trial) {
    auto bench = random_dist(rng);
    int n = 1 + static_cast<int>(rng() % 5);
    std::vector<double> xv(n), pr(n);
    double tot = 0;
    for (int i = 0; i < n; ++i) {
      xv[i] = std::uniform_real_distribution<double>(-3.0, 5.0)(rng);
      pr[i] = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
      tot += pr[i];
    }
    for (double& p : pr) p /= tot;
    std::vector<std::pair<double, double>> atoms;
    for (int i = 0; i < n; ++i) atoms.emplace_back(xv[i], pr[i]);
    bool ssd =
        dom::ssd_dominates(dom::DiscreteDistribution(atoms), bench, 1e-12)
            .dominates;
    double delta = dom::separation_oracle(xv, pr, bench).delta;
    if (ssd != (delta <= 1e-12)) {
      msg = "separation oracle disagrees with ssd_dominates";
      return false;
    }
  }
  msg = "500 Lorenz/shortfall pairs, 100 conjugacy checks (worst gap " +
        std::to_string(worst_gap) + "), 500 separation pairs";
  return true;
}

// 5. Mean-semideviation closed form, dual-grid dominance, coherence axioms.
bool criterion5(std::string& msg) {
  std::mt19937_64 rng(11);
  auto random_outcomes = [&](std::vector<double>& v, std::vector<double>& p) {
    int n = 2 + static_cast<int>(rng() % 6);
    v.resize(n);
    p.resize(n);
    double tot = 0;
    for (int i = 0; i < n; ++i) {
      v[i] = std::uniform_real_distribution<double>(-4.0, 6.0)(rng);
      p[i] = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
      tot += p[i];
    }
    for (double& q : p) q /= tot;
  };

  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v, p;
    random_outcomes(v, p);
    double kappa = (trial % 2) ? 0.1 : 0.7;
    double rho = risk::mean_semideviation(v, p, kappa);
    auto mu = risk::risk_cut(v, p, kappa);
    double dual = 0, musum = 0;
    for (size_t i = 0; i < v.size(); ++i) {
      dual += p[i] * mu[i] * v[i];
      musum += p[i] * mu[i];
      if (mu[i] < -1e-15) {
        msg = "dual multiplier negative";
        return false;
      }
    }
    if (std::fabs(dual - rho) > 1e-12 || std::fabs(musum - 1.0) > 1e-12) {
      msg = "closed-form dual value mismatch";
      return false;
    }
    // The closed form dominates every feasible h in [0, kappa]^n.
    for (int probe = 0; probe < 40; ++probe) {
      double val = 0, ph = 0;
      std::vector<double> h(v.size());
      for (double& hi : h)
        hi = std::uniform_real_distribution<double>(0.0, kappa)(rng);
      for (size_t i = 0; i < v.size(); ++i) ph += p[i] * h[i];
      for (size_t i = 0; i < v.size(); ++i)
        val += p[i] * (1.0 + h[i] - ph) * v[i];
      if (val > rho + 1e-10) {
        msg = "grid dual exceeds the closed form";
        return false;
      }
    }
  }

  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v, p;
    random_outcomes(v, p);
    double kappa = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double rho = risk::mean_semideviation(v, p, kappa);
    double c = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
    double t = std::uniform_real_distribution<double>(0.0, 3.0)(rng);
    std::vector<double> vc(v), vt(v), w(v);
    for (auto& x : vc) x += c;
    for (auto& x : vt) x *= t;
    for (auto& x : w) x += std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (std::fabs(risk::mean_semideviation(vc, p, kappa) - (rho + c)) > 1e-10) {
      msg = "translation equivariance fails";
      return false;
    }
    if (std::fabs(risk::mean_semideviation(vt, p, kappa) - t * rho) > 1e-10) {
      msg = "positive homogeneity fails";
      return false;
    }
    if (risk::mean_semideviation(w, p, kappa) < rho - 1e-12) {
      msg = "monotonicity fails";
      return false;
    }
    auto mu = risk::risk_cut(v, p, kappa);
    double lin = rho;
    for (size_t i = 0; i < v.size(); ++i)
      lin += p[i] * mu[i] * (w[i] - v[i]);
    if (risk::mean_semideviation(w, p, kappa) < lin - 1e-10) {
      msg = "subgradient inequality fails";
      return false;
    }
  }
  msg = "500 closed-form/dual-grid instances, 200 coherence instances";
  return true;
}

// 6. Scenario statistics under the shipped coefficients.
bool criterion6(std::string& msg) {
  auto full = cfg::load_config(config_path("base_full.ini"));

  // 10^4 monthly inflation paths over ten years.
  std::mt19937_64 rng(123);
  std::normal_distribution<double> N(0.0, 1.0);
  double sum = 0;
  const int paths = 10000, months = 120;
  for (int s = 0; s < paths; ++s) {
    double pi = full.init.pi;
    for (int m = 0; m < months; ++m)
      pi = econ::step_inflation(pi, 1.0 / 12.0, full.econ.inflation, N(rng));
    sum += pi;
  }
  double mean_pi = sum / paths;
  if (mean_pi < 0.015 || mean_pi > 0.035) {
    msg = "10y inflation mean " + std::to_string(mean_pi) + " out of range";
    return false;
  }

  // Zero-noise recursions match their closed forms exactly.
  {
    double pi = full.init.pi;
    for (int m = 0; m < 24; ++m) {
      double expect =
          pi + full.econ.inflation.aPi * (0.02 - pi) / 12.0;
      pi = econ::step_inflation(pi, 1.0 / 12.0, full.econ.inflation, 0.0);
      if (pi != expect) {
        msg = "zero-noise inflation deviates from the closed form";
        return false;
      }
    }
    double s = full.init.sIG;
    double y1 = econ::yield(full.init.curve, 0.0);
    const auto& sc = full.econ.spread;
    double expect =
        sc.unitScale * (sc.c0 + sc.c1 * (s / sc.unitScale) + sc.c2 * y1);
    double got = econ::step_spread(s, y1, sc, 0.0);
    if (std::fabs(got - std::max(expect, 0.0)) > 1e-18) {
      msg = "zero-noise spread deviates from the closed form";
      return false;
    }
    econ::CurveState cs{0.02, -0.01, 0.005, 2.0};
    double tau = 3.0;
    double manual = cs.b1 + cs.b2 * std::exp(-tau / cs.gamma) +
                    cs.b3 * (tau / cs.gamma) * std::exp(-tau / cs.gamma);
    if (econ::yield(cs, tau) != manual) {
      msg = "yield curve closed form mismatch";
      return false;
    }
  }

  auto tree = cfg::generate_tree(full, full.seed);
  double lambda0 = tree.coeff[0].Lambda();
  std::ostringstream os;
  os << "inflation mean " << mean_pi << ", Lambda0 " << lambda0;
  msg = os.str();
  return std::fabs(lambda0 - 10.21) <= 0.05 * 10.21;
}

struct DirectionRun {
  double K0 = 0;
  double active = 0;
  rpt::ReportTables tables;
};

DirectionRun run_config(const cfg::RunConfig& base, const ScenarioTree& tree,
                        double phi) {
  cfg::RunConfig c = base;
  c.phi = phi;
  auto params = cfg::model_params(c);
  auto res = dec::solve_decomposed(tree, params, cfg::decomp_options(c));
  if (res.infeasible) throw std::runtime_error("unexpected infeasibility");
  DirectionRun out;
  out.K0 = res.K0;
  auto sol = rpt::from_result(res, params);
  out.tables = rpt::report_tables(tree, sol);
  out.active = out.tables.active_ssd_fraction;
  return out;
}

// 7. Directional reproduction of the experimental findings.
bool criterion7(std::string& msg) {
  auto base = cfg::load_config(config_path("base_small.ini"));
  auto stressed = cfg::load_config(config_path("stressed.ini"));
  auto base_tree = cfg::generate_tree(base, base.seed);
  auto stressed_tree = cfg::generate_tree(stressed, stressed.seed);

  const std::vector<double> phis{0.0, 0.8, 1.0, 1.1};
  std::vector<DirectionRun> runs;
  for (double phi : phis) runs.push_back(run_config(base, base_tree, phi));
  for (size_t k = 1; k < runs.size(); ++k) {
    if (runs[k].K0 < runs[k - 1].K0 - 1e-6) {
      msg = "K0 decreases in phi";
      return false;
    }
    if (runs[k].active < runs[k - 1].active - 1e-12) {
      msg = "active dominance fraction decreases in phi";
      return false;
    }
  }
  auto stressed_run = run_config(stressed, stressed_tree, 1.0);
  if (stressed_run.K0 < runs[2].K0 - 1e-6) {
    msg = "stressed K0 below the base case at phi 1";
    return false;
  }
  for (const auto& r : runs) {
    const auto& prof = r.tables.profit;
    size_t T = prof.size() - 1;
    if (std::fabs(prof[T].mean - prof[T - 1].mean) > 1e-9 ||
        std::fabs(prof[T].stdev - prof[T - 1].stdev) > 1e-9) {
      msg = "cumulative profits move between the last two stages";
      return false;
    }
  }
  std::ostringstream os;
  os << "K0 " << runs[0].K0 << " -> " << runs[3].K0 << ", active fraction "
     << runs[0].active << " -> " << runs[3].active << ", stressed K0 "
     << stressed_run.K0;
  msg = os.str();
  return true;
}

// 8. Decomposer mechanics on the shipped base case.
bool criterion8(std::string& msg) {
  auto c = cfg::load_config(config_path("base_small.ini"));
  auto tree = cfg::generate_tree(c, c.seed);
  auto params = cfg::model_params(c);
  auto res = dec::solve_decomposed(tree, params, cfg::decomp_options(c));
  if (res.infeasible) {
    msg = "base case infeasible";
    return false;
  }
  bool monotone = true;
  for (size_t k = 1; k < res.stats.root_bounds.size(); ++k)
    monotone = monotone &&
               res.stats.root_bounds[k] >= res.stats.root_bounds[k - 1] - 1e-7;
  int max_children = 0;
  for (const auto& n : tree.topo.nodes)
    max_children = std::max(max_children, static_cast<int>(n.children.size()));
  std::ostringstream os;
  os << res.stats.outer_iterations << " iterations, "
     << res.stats.feasibility_cuts << " feasibility cuts, worst event loop "
     << res.stats.max_event_loop << " (cap " << 50 * max_children << ")";
  msg = os.str();
  return res.stats.outer_iterations <= 15 && res.stats.feasibility_cuts == 0 &&
         monotone && res.stats.max_event_loop <= 50 * max_children;
}

// 9. Full pipeline on the shipped base case within the time budget.
bool criterion9(std::string& msg) {
  fs::path dir = fs::temp_directory_path() / "alm_acceptance_e2e";
  fs::remove_all(dir);
  std::ostringstream log;
  auto t0 = Clock::now();
  int rc = pipe::cmd_generate(config_path("base_small.ini"), dir.string(),
                              std::nullopt, log);
  if (rc == pipe::kOk)
    rc = pipe::cmd_solve((dir / "tree.txt").string(),
                         config_path("base_small.ini"), log);
  if (rc == pipe::kOk)
    rc = pipe::cmd_verify((dir / "tree.txt").string(),
                          (dir / "solution.txt").string(), false, log);
  if (rc == pipe::kOk)
    rc = pipe::cmd_report((dir / "solution.txt").string(),
                          (dir / "tree.txt").string(), "csv", log);
  double dt = seconds_since(t0);
  bool artifacts = fs::exists(dir / "report.csv");
  bool cdf = false;
  if (fs::exists(dir))
    for (const auto& e : fs::directory_iterator(dir))
      cdf = cdf || e.path().filename().string().rfind("cdf_node", 0) == 0;
  fs::remove_all(dir);
  std::ostringstream os;
  os << "generate/solve/verify/report in " << dt << "s, exit " << rc;
  msg = os.str();
  return rc == pipe::kOk && dt < 60.0 && artifacts && cdf;
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    bool (*fn)(std::string&);
  };
  const Entry entries[] = {
      {"oracle equivalence on random instances", criterion1},
      {"last-but-one dominance implies the sequential order", criterion2},
      {"solved policies dominate the benchmark", criterion3},
      {"dominance calculus equivalences", criterion4},
      {"mean-semideviation closed form and coherence", criterion5},
      {"scenario statistics under shipped coefficients", criterion6},
      {"directional reproduction of the experiments", criterion7},
      {"decomposer mechanics on the base case", criterion8},
      {"end-to-end pipeline within budget", criterion9},
  };
  int failures = 0;
  for (size_t k = 0; k < std::size(entries); ++k) {
    std::string msg;
    bool ok = false;
    try {
      ok = entries[k].fn(msg);
    } catch (const std::exception& e) {
      msg = std::string("exception: ") + e.what();
    }
    std::printf("criterion %zu (%s): %s%s%s\n", k + 1, entries[k].name,
                ok ? "PASS" : "FAIL", msg.empty() ? "" : " - ", msg.c_str());
    if (!ok) ++failures;
  }
  return failures;
}
