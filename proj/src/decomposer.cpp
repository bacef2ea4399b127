#include "alm/decomposer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "alm/dominance.hpp"
#include "alm/extensive.hpp"
#include "alm/risk.hpp"

namespace alm::dec {

namespace {

std::string nn(const char* tag, int n, int extra = -1) {
  std::string s = std::string(tag) + "_" + std::to_string(n);
  if (extra >= 0) s += "_" + std::to_string(extra);
  return s;
}

struct Pools {
  std::vector<std::vector<ObjectiveCut>> ocuts;  // on v_node at its ancestor
  std::vector<std::vector<std::vector<double>>> rcuts;  // mu vectors per node
  std::vector<std::vector<EventCut>> ecuts;
  std::vector<std::vector<FeasibilityCut>> fcuts;  // on the node's own (x,b)
};

/// One node's LP plus the bookkeeping to translate duals into cuts on the
/// ancestor state s = (x_{a}, b_{a}); coordinate I+1 is the debt.
struct Sub {
  lp::LinearModel model;
  std::vector<int> x, xp, xm;  // var ids, -1 where absent
  int b = -1, bp = -1, bm = -1, K0 = -1, w = -1;
  std::vector<int> v;  // per child
  struct Coup {
    int row;
    int coord;
    double coef;  // d(rhs)/d(s_coord)
  };
  std::vector<Coup> coup;
};

struct Outcome {
  lp::Status status = lp::Status::NumericFailure;
  double value = 0.0;
  NodePolicy pol;
  ObjectiveCut ocut;
  FeasibilityCut fcut;
  long event_loops = 0;
  std::vector<EventCut> new_ecuts;
  double K0 = 0.0;
};

void add_structural_rows(lp::LinearModel& m, const std::vector<int>& x,
                         const NodeCoefficients& co, const ModelParams& p,
                         int n) {
  const int I = static_cast<int>(x.size()) - 1;
  for (int i = 1; i <= I; ++i) {
    if (p.thetaMin[i] > 0) {
      std::vector<std::pair<int, double>> lo;
      for (int k = 1; k <= I; ++k)
        lo.emplace_back(x[k], (k == i ? 1.0 : 0.0) - p.thetaMin[i]);
      m.add_row(nn("divlo", n, i), std::move(lo), lp::Sense::GE, 0.0);
    }
    std::vector<std::pair<int, double>> hi;
    for (int k = 1; k <= I; ++k)
      hi.emplace_back(x[k], (k == i ? 1.0 : 0.0) - p.thetaMax[i]);
    m.add_row(nn("divhi", n, i), std::move(hi), lp::Sense::LE, 0.0);
  }
  bool has_eq = false;
  for (int i = 1; i <= I; ++i) has_eq = has_eq || p.equity[i];
  if (has_eq) {
    std::vector<std::pair<int, double>> eq;
    for (int k = 1; k <= I; ++k)
      eq.emplace_back(x[k], (p.equity[k] ? 1.0 : 0.0) - p.q);
    m.add_row(nn("equity", n), std::move(eq), lp::Sense::LE, 0.0);
  }
  double lamSum = 0, lamDur = 0;
  for (size_t j = 0; j < co.lambda.size(); ++j) {
    lamSum += co.lambda[j];
    lamDur += co.lambda[j] * co.deltaLambda[j];
  }
  std::vector<std::pair<int, double>> dur;
  for (int i = 1; i <= I; ++i)
    if (p.fixedIncome[i]) dur.emplace_back(x[i], p.durationX[i]);
  m.add_row(nn("durhi", n), dur, lp::Sense::LE, lamDur + p.deltaBar * lamSum);
  m.add_row(nn("durlo", n), std::move(dur), lp::Sense::GE,
            lamDur - p.deltaBar * lamSum);
}

void add_cut_rows(lp::LinearModel& m, const ScenarioTree& t,
                  const ModelParams& p, int n, const Pools& pools, Sub& sub) {
  const int I = t.num_assets() - 1;
  const auto& ch = t.topo.nodes[n].children;
  sub.v.resize(ch.size());
  for (size_t c = 0; c < ch.size(); ++c)
    sub.v[c] = m.add_var(nn("v", n, static_cast<int>(c)), -p.bigM);
  sub.w = m.add_var(nn("w", n), p.wFloor);
  m.set_cost(sub.w, 1.0);

  for (const auto& mu : pools.rcuts[n]) {
    std::vector<std::pair<int, double>> row{{sub.w, 1.0}};
    for (size_t c = 0; c < ch.size(); ++c)
      row.emplace_back(sub.v[c], -t.topo.cond_prob(ch[c]) * mu[c]);
    m.add_row(nn("risk", n), std::move(row), lp::Sense::GE, 0.0);
  }
  for (size_t c = 0; c < ch.size(); ++c) {
    for (const auto& cut : pools.ocuts[ch[c]]) {
      std::vector<std::pair<int, double>> row{{sub.v[c], 1.0}};
      for (int i = 0; i <= I; ++i)
        if (cut.gx[i] != 0.0) row.emplace_back(sub.x[i], -cut.gx[i]);
      if (sub.b >= 0 && cut.gb != 0.0) row.emplace_back(sub.b, -cut.gb);
      m.add_row(nn("ocut", ch[c]), std::move(row), lp::Sense::GE,
                cut.intercept);
    }
  }
  for (const auto& fc : pools.fcuts[n]) {
    std::vector<std::pair<int, double>> row;
    for (int i = 0; i <= I; ++i)
      if (fc.dx[i] != 0.0) row.emplace_back(sub.x[i], fc.dx[i]);
    if (sub.b >= 0 && fc.db != 0.0) row.emplace_back(sub.b, fc.db);
    m.add_row(nn("fcut", n), std::move(row), lp::Sense::LE, fc.e);
  }
}

void add_event_row(lp::LinearModel& m, const ScenarioTree& t, int n,
                   const Sub& sub, const EventCut& ec) {
  const int I = t.num_assets() - 1;
  const auto& ch = t.topo.nodes[n].children;
  std::vector<double> coef(I + 1, 0.0);
  for (int idx : ec.members) {
    const double pc = t.topo.cond_prob(ch[idx]);
    for (int i = 0; i <= I; ++i)
      coef[i] += pc * (1.0 + t.coeff[ch[idx]].r[i]);
  }
  std::vector<std::pair<int, double>> row;
  for (int i = 0; i <= I; ++i) row.emplace_back(sub.x[i], coef[i]);
  m.add_row(nn("event", n), std::move(row), lp::Sense::GE, ec.target);
}

/// ancestor state: xa null for the root.
Sub build_sub(const ScenarioTree& t, const ModelParams& p, int n,
              const std::vector<double>* xa, double ba, const Pools& pools) {
  const auto& topo = t.topo;
  const int I = t.num_assets() - 1;
  const auto& co = t.coeff[n];
  const bool leaf = topo.is_leaf(n);
  const bool root = n == 0;
  const int a = topo.nodes[n].ancestor;
  const int T = topo.last_stage();

  Sub sub;
  auto& m = sub.model;
  sub.x.resize(I + 1);
  sub.xp.assign(I + 1, -1);
  sub.xm.assign(I + 1, -1);
  for (int i = 0; i <= I; ++i) sub.x[i] = m.add_var(nn("x", n, i));
  if (!leaf)
    for (int i = 1; i <= I; ++i) {
      sub.xp[i] = m.add_var(nn("xp", n, i));
      sub.xm[i] = m.add_var(nn("xm", n, i));
    }
  if (!root) {
    sub.b = m.add_var(nn("b", n), 0.0, lp::kInf, p.alpha);
    if (!leaf) sub.bp = m.add_var(nn("bp", n));
    sub.bm = m.add_var(nn("bm", n));
    if (!leaf)
      for (int i = 1; i <= I; ++i)
        m.set_cost(sub.xm[i], -(1.0 - p.alpha) * co.g[i - 1]);
  } else {
    sub.K0 = m.add_var("K0", 0.0, lp::kInf, p.beta);
  }

  const double buyF = 1.0 + p.phiPlus;
  const double sellF = 1.0 - p.phiMinus;

  if (root) {
    for (int i = 1; i <= I; ++i)
      m.add_row(nn("alloc", n, i),
                {{sub.x[i], 1.0}, {sub.xp[i], -1.0}, {sub.xm[i], 1.0}},
                lp::Sense::EQ, p.xhat[i]);
    std::vector<std::pair<int, double>> cash{{sub.x[0], 1.0}, {sub.K0, -1.0}};
    for (int i = 1; i <= I; ++i) {
      cash.emplace_back(sub.xp[i], buyF);
      cash.emplace_back(sub.xm[i], -sellF);
    }
    m.add_row(nn("cash", n), std::move(cash), lp::Sense::EQ, 0.0);
    for (int i = 1; i <= I; ++i)
      m.add_row(nn("sell", n, i), {{sub.xm[i], 1.0}}, lp::Sense::LE,
                p.xhat[i]);
  } else {
    const double rMa = t.coeff[a].rMinus;
    for (int i = 1; i <= I; ++i) {
      std::vector<std::pair<int, double>> reb{{sub.x[i], 1.0}};
      if (!leaf) {
        reb.emplace_back(sub.xp[i], -1.0);
        reb.emplace_back(sub.xm[i], 1.0);
      }
      int row = m.add_row(nn("reb", n, i), std::move(reb), lp::Sense::EQ,
                          (*xa)[i] * (1.0 + co.r[i]), true);
      sub.coup.push_back({row, i, 1.0 + co.r[i]});
    }
    double outflow = 0;
    for (double L : co.L) outflow += L;
    double crhs = (*xa)[0] * (1.0 + co.r[0]) + co.c - outflow;
    if (a != 0) crhs -= ba * rMa;
    std::vector<std::pair<int, double>> cash{{sub.x[0], 1.0},
                                             {sub.bm, 1.0}};
    if (!leaf) {
      for (int i = 1; i <= I; ++i) {
        cash.emplace_back(sub.xp[i], buyF);
        cash.emplace_back(sub.xm[i], -sellF);
      }
      cash.emplace_back(sub.bp, -1.0);
    }
    int crow = m.add_row(nn("cash", n), std::move(cash), lp::Sense::EQ, crhs,
                         true);
    sub.coup.push_back({crow, 0, 1.0 + co.r[0]});
    if (a != 0) sub.coup.push_back({crow, I + 1, -rMa});

    std::vector<std::pair<int, double>> debt{{sub.b, 1.0}, {sub.bm, 1.0}};
    if (!leaf) debt.emplace_back(sub.bp, -1.0);
    int drow = m.add_row(nn("debt", n), std::move(debt), lp::Sense::EQ,
                         a != 0 ? ba : 0.0, true);
    if (a != 0) sub.coup.push_back({drow, I + 1, 1.0});

    if (!leaf)
      for (int i = 1; i <= I; ++i) {
        int srow = m.add_row(nn("sell", n, i), {{sub.xm[i], 1.0}},
                             lp::Sense::LE, (*xa)[i] * (1.0 + co.r[i]), true);
        sub.coup.push_back({srow, i, 1.0 + co.r[i]});
      }
  }

  if (!leaf) {
    add_structural_rows(m, sub.x, co, p, n);
    add_cut_rows(m, t, p, n, pools, sub);
    if (topo.nodes[n].stage == T - 1)
      for (const auto& ec : pools.ecuts[n]) add_event_row(m, t, n, sub, ec);
  }
  return sub;
}

NodePolicy extract_policy(const Sub& sub, const lp::SolveResult& sol, int I) {
  NodePolicy pol;
  pol.x.assign(I + 1, 0.0);
  pol.xPlus.assign(I + 1, 0.0);
  pol.xMinus.assign(I + 1, 0.0);
  for (int i = 0; i <= I; ++i) pol.x[i] = sol.x[sub.x[i]];
  for (int i = 1; i <= I; ++i) {
    if (sub.xp[i] >= 0) pol.xPlus[i] = sol.x[sub.xp[i]];
    if (sub.xm[i] >= 0) pol.xMinus[i] = sol.x[sub.xm[i]];
  }
  if (sub.b >= 0) pol.b = sol.x[sub.b];
  if (sub.bp >= 0) pol.bPlus = sol.x[sub.bp];
  if (sub.bm >= 0) pol.bMinus = sol.x[sub.bm];
  return pol;
}

ObjectiveCut make_objective_cut(const Sub& sub, const lp::SolveResult& sol,
                                const std::vector<double>& xa, double ba,
                                double value, int I, int iter) {
  ObjectiveCut cut;
  cut.gx.assign(I + 1, 0.0);
  cut.iteration = iter;
  for (const auto& c : sub.coup) {
    const double d = sol.duals[c.row];
    if (c.coord <= I)
      cut.gx[c.coord] += d * c.coef;
    else
      cut.gb += d * c.coef;
  }
  double at = cut.gb * ba;
  for (int i = 0; i <= I; ++i) at += cut.gx[i] * xa[i];
  cut.intercept = value - at;
  return cut;
}

FeasibilityCut make_feasibility_cut(const Sub& sub, const lp::SolveResult& sol,
                                    const std::vector<double>& xa, double ba,
                                    int I, int iter) {
  FeasibilityCut fc;
  fc.dx.assign(I + 1, 0.0);
  fc.iteration = iter;
  for (const auto& c : sub.coup) {
    const double y = sol.farkas[c.row];
    if (c.coord <= I)
      fc.dx[c.coord] += y * c.coef;
    else
      fc.db += y * c.coef;
  }
  double yrhs = 0;
  for (int r = 0; r < sub.model.num_rows(); ++r)
    yrhs += sol.farkas[r] * sub.model.row(r).rhs;
  double at = fc.db * ba;
  for (int i = 0; i <= I; ++i) at += fc.dx[i] * xa[i];
  fc.e = sol.farkas_bound - yrhs + at;
  return fc;
}

double cut_value_at(const ObjectiveCut& cut, const std::vector<double>& x,
                    double b) {
  double v = cut.intercept + cut.gb * b;
  for (size_t i = 0; i < cut.gx.size(); ++i) v += cut.gx[i] * x[i];
  return v;
}

bool same_mu(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (std::fabs(a[i] - b[i]) > 1e-12) return false;
  return true;
}

}  // namespace

InitialGuess initialize_from_worst_case(const ScenarioTree& tree,
                                        const ModelParams& params) {
  const auto& topo = tree.topo;
  const int T = topo.last_stage();
  const int I = tree.num_assets() - 1;

  // Heaviest path by total outflow plus terminal liability value.
  int worst_leaf = -1;
  double worst_w = -1, worst_out = 0;
  for (int n : topo.stage_nodes[T]) {
    double w = tree.coeff[n].Lambda(), out = 0;
    for (int k = n; k > 0; k = topo.nodes[k].ancestor)
      for (double L : tree.coeff[k].L) out += L;
    w += out;
    if (w > worst_w) {
      worst_w = w;
      worst_leaf = n;
      worst_out = out;
    }
  }

  std::vector<int> path(T + 1);
  for (int k = worst_leaf, t = T; t >= 0; k = topo.nodes[k].ancestor, --t)
    path[t] = k;

  ScenarioTree pt;
  pt.topo = build_topology(topo.stages, std::vector<int>(T, 1));
  pt.coeff.resize(T + 1);
  for (int t = 0; t <= T; ++t) pt.coeff[t] = tree.coeff[path[t]];

  InitialGuess g;
  g.policy.resize(topo.num_nodes());
  auto ext = xf::solve_extensive(pt, params);
  if (ext.status == lp::Status::Optimal) {
    g.from_worst_path = true;
    g.K0 = ext.K0;
    for (int n = 0; n < topo.num_nodes(); ++n)
      g.policy[n] = ext.policy[topo.nodes[n].stage];
    return g;
  }

  // All-cash fallback: hold the worst path's gross outflows as cash.
  g.K0 = worst_out;
  for (int n = 0; n < topo.num_nodes(); ++n) {
    auto& pol = g.policy[n];
    pol.x.assign(I + 1, 0.0);
    pol.xPlus.assign(I + 1, 0.0);
    pol.xMinus.assign(I + 1, 0.0);
    pol.x[0] = g.K0;
  }
  return g;
}

DecompResult solve_decomposed(const ScenarioTree& tree,
                              const ModelParams& params,
                              const DecompOptions& opts) {
  const auto& topo = tree.topo;
  const int N = topo.num_nodes();
  const int I = tree.num_assets() - 1;
  const int T = topo.last_stage();

  DecompResult res;
  auto& st = res.stats;

  Pools pools;
  pools.ocuts.resize(N);
  pools.rcuts.resize(N);
  pools.ecuts.resize(N);
  pools.fcuts.resize(N);

  std::vector<dom::DiscreteDistribution> bench(N);
  if (params.phi > 0 && T >= 1) {
    for (int n : topo.stage_nodes[T - 1]) {
      std::vector<std::pair<double, double>> atoms;
      for (int m : topo.nodes[n].children)
        atoms.emplace_back(params.phi * tree.coeff[m].Lambda(),
                           topo.cond_prob(m));
      bench[n] = dom::DiscreteDistribution(atoms);
      // The mean constraint over the full child set seeds the event pool.
      EventCut full;
      full.members.resize(topo.nodes[n].children.size());
      for (size_t c = 0; c < full.members.size(); ++c)
        full.members[c] = static_cast<int>(c);
      full.prob = 1.0;
      full.target = bench[n].mean();
      pools.ecuts[n].push_back(std::move(full));
      ++st.event_cuts;
      ++st.dominance_nodes;
    }
  }

  auto init = initialize_from_worst_case(tree, params);
  std::vector<NodePolicy> pol = opts.worst_case_init
                                    ? init.policy
                                    : std::vector<NodePolicy>();
  if (!opts.worst_case_init) {
    pol.resize(N);
    double K0 = 0;
    for (int n : topo.stage_nodes[T]) {
      double out = 0;
      for (int k = n; k > 0; k = topo.nodes[k].ancestor)
        for (double L : tree.coeff[k].L) out += L;
      K0 = std::max(K0, out);
    }
    for (auto& p : pol) {
      p.x.assign(I + 1, 0.0);
      p.xPlus.assign(I + 1, 0.0);
      p.xMinus.assign(I + 1, 0.0);
      p.x[0] = K0;
    }
  }
  double K0 = opts.worst_case_init ? init.K0 : pol[0].x[0];

  std::vector<double> v(N, -params.bigM);
  std::vector<char> has_sol(N, 0), on(N, 1), anc_changed(N, 0),
      new_cuts(N, 0);

  bool root_infeasible = false;

  for (int iter = 1; iter <= opts.max_outer && !root_infeasible; ++iter) {
    bool any = false;
    for (int n = 0; n < N; ++n) any = any || on[n];
    if (!any) break;
    st.outer_iterations = iter;
    long iter_obj = 0, iter_risk = 0, iter_evt = 0, iter_feas = 0,
         iter_nodes = 0;

    for (int t = T; t >= 0 && !root_infeasible; --t) {
      std::vector<int> todo;
      for (int n : topo.stage_nodes[t])
        if (on[n]) todo.push_back(n);
      if (todo.empty()) continue;

      // Refresh the risk approximation from current child values.
      for (int n : todo) {
        if (topo.is_leaf(n)) continue;
        const auto& ch = topo.nodes[n].children;
        std::vector<double> cv(ch.size()), cp(ch.size());
        for (size_t c = 0; c < ch.size(); ++c) {
          cv[c] = has_sol[ch[c]] ? v[ch[c]] : -params.bigM;
          cp[c] = topo.cond_prob(ch[c]);
        }
        auto mu = risk::risk_cut(cv, cp, params.kappa);
        bool dup = false;
        for (const auto& old : pools.rcuts[n]) dup = dup || same_mu(old, mu);
        if (!dup) {
          pools.rcuts[n].push_back(std::move(mu));
          ++st.risk_cuts;
          ++iter_risk;
        }
      }

      std::vector<Outcome> out(todo.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (opts.parallel)
#endif
      for (int k = 0; k < static_cast<int>(todo.size()); ++k) {
        const int n = todo[k];
        const int a = topo.nodes[n].ancestor;
        const std::vector<double>* xa = a >= 0 ? &pol[a].x : nullptr;
        const double ba = a >= 0 ? pol[a].b : 0.0;
        Sub sub = build_sub(tree, params, n, xa, ba, pools);
        auto sol = lp::solve(sub.model, opts.lp);
        Outcome& o = out[k];

        if (sol.status == lp::Status::Optimal && t == T - 1 &&
            params.phi > 0) {
          // Event-cut inner loop: separate on the quantile form until the
          // child portfolio values dominate the benchmark.
          const auto& ch = topo.nodes[n].children;
          const long cap = 50 * static_cast<long>(ch.size());
          std::vector<EventCut> local = pools.ecuts[n];
          while (o.event_loops < cap) {
            std::vector<double> X(ch.size()), cp(ch.size());
            auto px = extract_policy(sub, sol, I);
            for (size_t c = 0; c < ch.size(); ++c) {
              double port = 0;
              for (int i = 0; i <= I; ++i)
                port += px.x[i] * (1.0 + tree.coeff[ch[c]].r[i]);
              X[c] = port;
              cp[c] = topo.cond_prob(ch[c]);
            }
            auto sep = dom::separation_oracle(X, cp, bench[n]);
            if (sep.delta <= opts.event_tol) break;
            EventCut ec;
            ec.members = sep.event;
            std::sort(ec.members.begin(), ec.members.end());
            ec.prob = sep.event_prob;
            ec.target = sep.target * sep.event_prob;
            bool dup = false;
            for (const auto& old : local) dup = dup || old.members == ec.members;
            if (dup) break;
            add_event_row(sub.model, tree, n, sub, ec);
            local.push_back(ec);
            o.new_ecuts.push_back(std::move(ec));
            ++o.event_loops;
            sol = lp::solve(sub.model, opts.lp);
            if (sol.status != lp::Status::Optimal) break;
          }
        }

        o.status = sol.status;
        if (sol.status == lp::Status::Optimal) {
          o.value = sol.objective;
          o.pol = extract_policy(sub, sol, I);
          if (sub.K0 >= 0) o.K0 = sol.x[sub.K0];
          if (n != 0)
            o.ocut = make_objective_cut(sub, sol, *xa, ba, sol.objective, I,
                                        iter);
        } else if (sol.status == lp::Status::Infeasible && n != 0) {
          o.fcut = make_feasibility_cut(sub, sol, *xa, ba, I, iter);
        }
      }

      // Serial application in node order keeps pools schedule independent.
      for (size_t k = 0; k < todo.size(); ++k) {
        const int n = todo[k];
        const int a = topo.nodes[n].ancestor;
        Outcome& o = out[k];
        on[n] = 0;
        ++st.nodes_solved;
        ++iter_nodes;
        st.max_event_loop = std::max(st.max_event_loop, o.event_loops);
        for (auto& ec : o.new_ecuts) {
          ec.iteration = iter;
          pools.ecuts[n].push_back(std::move(ec));
          ++st.event_cuts;
          ++iter_evt;
        }
        if (o.status == lp::Status::Infeasible) {
          if (n == 0) {
            root_infeasible = true;
            break;
          }
          pools.fcuts[a].push_back(o.fcut);
          new_cuts[a] = 1;
          ++st.feasibility_cuts;
          ++iter_feas;
          continue;
        }
        if (o.status != lp::Status::Optimal)
          throw std::runtime_error(
              "node subproblem failed at node " + std::to_string(n) +
              (o.status == lp::Status::Unbounded ? " (unbounded)"
                                                 : " (numeric failure)"));

        bool moved = !has_sol[n];
        if (has_sol[n]) {
          for (int i = 0; i <= I && !moved; ++i)
            moved = std::fabs(o.pol.x[i] - pol[n].x[i]) > 1e-9;
          moved = moved || std::fabs(o.pol.b - pol[n].b) > 1e-9;
        }
        pol[n] = o.pol;
        if (n == 0) K0 = o.K0;
        v[n] = o.value;
        has_sol[n] = 1;
        if (moved)
          for (int m : topo.nodes[n].children) anc_changed[m] = 1;

        if (n != 0) {
          // A new cut is worthwhile only if it raises the ancestor's current
          // under-approximation at the generating point.
          double implied = -params.bigM;
          for (const auto& old : pools.ocuts[n])
            implied = std::max(implied, cut_value_at(old, pol[a].x, pol[a].b));
          if (o.value >
              implied + opts.improve_tol * std::max(1.0, std::fabs(o.value))) {
            pools.ocuts[n].push_back(o.ocut);
            new_cuts[a] = 1;
            ++st.objective_cuts;
            ++iter_obj;
          }
        }
      }
    }

    if (root_infeasible) break;
    for (int n = 0; n < N; ++n) {
      on[n] = anc_changed[n] || new_cuts[n];
      anc_changed[n] = 0;
      new_cuts[n] = 0;
    }
    st.root_bounds.push_back(has_sol[0] ? v[0] : -params.bigM);
    char line[200];
    std::snprintf(line, sizeof line,
                  "iter=%d nodes=%ld ocuts=%ld rcuts=%ld ecuts=%ld fcuts=%ld "
                  "root=%.10g",
                  iter, iter_nodes, iter_obj, iter_risk, iter_evt, iter_feas,
                  st.root_bounds.back());
    st.log.emplace_back(line);
  }

  if (root_infeasible) {
    res.infeasible = true;
    return res;
  }

  res.objective = v[0];
  res.K0 = K0;
  res.policy = std::move(pol);
  res.objective_pools = pools.ocuts;
  res.event_pools = pools.ecuts;

  // Tight event cuts at the final policy.
  if (params.phi > 0 && T >= 1) {
    for (int n : topo.stage_nodes[T - 1]) {
      double min_slack = lp::kInf;
      for (const auto& ec : pools.ecuts[n]) {
        double lhs = 0;
        for (int idx : ec.members) {
          const int m = topo.nodes[n].children[idx];
          double port = 0;
          for (int i = 0; i <= I; ++i)
            port += res.policy[n].x[i] * (1.0 + tree.coeff[m].r[i]);
          lhs += topo.cond_prob(m) * port;
        }
        min_slack = std::min(min_slack, lhs - ec.target);
      }
      if (min_slack < opts.active_tol) ++st.active_event_nodes;
    }
  }
  return res;
}

}  // namespace alm::dec
