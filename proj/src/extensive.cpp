#include "alm/extensive.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "alm/dominance.hpp"

namespace alm::xf {

namespace {

std::string nn(const char* tag, int n, int extra = -1) {
  std::string s = std::string(tag) + "_" + std::to_string(n);
  if (extra >= 0) s += "_" + std::to_string(extra);
  return s;
}

void check_params(const ScenarioTree& tree, const ModelParams& p) {
  const size_t na = static_cast<size_t>(tree.num_assets());
  if (na < 2) throw std::invalid_argument("tree needs cash plus assets");
  for (const auto* v : {&p.thetaMin, &p.thetaMax, &p.xhat, &p.durationX})
    if (v->size() != na)
      throw std::invalid_argument("parameter vector size mismatch");
  if (p.fixedIncome.size() != na || p.equity.size() != na)
    throw std::invalid_argument("asset class flag size mismatch");
  if (p.alpha < 0 || p.alpha > 1 || p.kappa < 0 || p.kappa > 1)
    throw std::invalid_argument("alpha and kappa must lie in [0,1]");
}

}  // namespace

ExtensiveModel build_extensive(const ScenarioTree& tree,
                               const ModelParams& params, int max_vars) {
  check_params(tree, params);
  const auto& topo = tree.topo;
  const int N = topo.num_nodes();
  const int I = tree.num_assets() - 1;  // investment assets
  const int T = topo.last_stage();

  ExtensiveModel em;
  auto& m = em.model;
  em.x.assign(N, std::vector<int>(I + 1, -1));
  em.xPlus.assign(N, std::vector<int>(I + 1, -1));
  em.xMinus.assign(N, std::vector<int>(I + 1, -1));
  em.b.assign(N, -1);
  em.bPlus.assign(N, -1);
  em.bMinus.assign(N, -1);
  em.Y.assign(N, -1);
  em.z.assign(N, -1);

  for (int n = 0; n < N; ++n) {
    const bool leaf = topo.is_leaf(n);
    const bool root = n == 0;
    for (int i = 0; i <= I; ++i) em.x[n][i] = m.add_var(nn("x", n, i));
    if (!leaf) {
      for (int i = 1; i <= I; ++i) {
        em.xPlus[n][i] = m.add_var(nn("xp", n, i));
        em.xMinus[n][i] = m.add_var(nn("xm", n, i));
      }
    }
    if (!root) {
      em.b[n] = m.add_var(nn("b", n));
      if (!leaf) em.bPlus[n] = m.add_var(nn("bp", n));
      em.bMinus[n] = m.add_var(nn("bm", n));
      em.z[n] = m.add_var(nn("z", n));
    }
    em.Y[n] = m.add_var(nn("Y", n), -params.bigM);
  }
  em.K0 = m.add_var("K0", 0.0, lp::kInf, params.beta);
  m.set_cost(em.Y[0], 1.0);

  // Dominance shortfall variables, one per (T-1 node, child, benchmark atom).
  std::vector<std::vector<std::vector<int>>> svar(N);
  std::vector<dom::DiscreteDistribution> bench(N);
  if (params.phi > 0 && T >= 1) {
    for (int n : topo.stage_nodes[T - 1]) {
      const auto& ch = topo.nodes[n].children;
      std::vector<std::pair<double, double>> atoms;
      for (int mm : ch)
        atoms.emplace_back(params.phi * tree.coeff[mm].Lambda(),
                           topo.cond_prob(mm));
      bench[n] = dom::DiscreteDistribution(atoms);
      svar[n].assign(ch.size(), {});
      const int K = static_cast<int>(bench[n].atoms().size());
      for (size_t c = 0; c < ch.size(); ++c)
        for (int k = 0; k < K; ++k)
          svar[n][c].push_back(m.add_var(nn("s", n, static_cast<int>(c) * K + k)));
    }
  }

  if (m.num_vars() > max_vars)
    throw std::length_error("extensive form exceeds " +
                            std::to_string(max_vars) + " variables: " +
                            std::to_string(m.num_vars()));

  const double buyF = 1.0 + params.phiPlus;
  const double sellF = 1.0 - params.phiMinus;

  for (int n = 0; n < N; ++n) {
    const bool leaf = topo.is_leaf(n);
    const bool root = n == 0;
    const int a = topo.nodes[n].ancestor;
    const auto& co = tree.coeff[n];

    if (root) {
      for (int i = 1; i <= I; ++i)
        m.add_row(nn("alloc", n, i),
                  {{em.x[n][i], 1.0}, {em.xPlus[n][i], -1.0},
                   {em.xMinus[n][i], 1.0}},
                  lp::Sense::EQ, params.xhat[i]);
      std::vector<std::pair<int, double>> cash{{em.x[n][0], 1.0},
                                               {em.K0, -1.0}};
      for (int i = 1; i <= I; ++i) {
        cash.emplace_back(em.xPlus[n][i], buyF);
        cash.emplace_back(em.xMinus[n][i], -sellF);
      }
      m.add_row(nn("cash", n), std::move(cash), lp::Sense::EQ, 0.0);
      // Sales cannot exceed holdings; rules out the buy-and-sell churn that
      // would otherwise monetize positive gain-loss coefficients without
      // bound.
      for (int i = 1; i <= I; ++i)
        m.add_row(nn("sell", n, i), {{em.xMinus[n][i], 1.0}}, lp::Sense::LE,
                  params.xhat[i]);
    } else {
      for (int i = 1; i <= I; ++i) {
        std::vector<std::pair<int, double>> reb{{em.x[n][i], 1.0},
                                                {em.x[a][i], -(1.0 + co.r[i])}};
        if (!leaf) {
          reb.emplace_back(em.xPlus[n][i], -1.0);
          reb.emplace_back(em.xMinus[n][i], 1.0);
        }
        m.add_row(nn("reb", n, i), std::move(reb), lp::Sense::EQ, 0.0);
      }
      double outflow = 0;
      for (double L : co.L) outflow += L;
      std::vector<std::pair<int, double>> cash{
          {em.x[n][0], 1.0}, {em.x[a][0], -(1.0 + co.r[0])}};
      if (a != 0) cash.emplace_back(em.b[a], tree.coeff[a].rMinus);
      if (!leaf) {
        for (int i = 1; i <= I; ++i) {
          cash.emplace_back(em.xPlus[n][i], buyF);
          cash.emplace_back(em.xMinus[n][i], -sellF);
        }
        cash.emplace_back(em.bPlus[n], -1.0);
      }
      cash.emplace_back(em.bMinus[n], 1.0);
      m.add_row(nn("cash", n), std::move(cash), lp::Sense::EQ, co.c - outflow);

      std::vector<std::pair<int, double>> debt{{em.b[n], 1.0},
                                               {em.bMinus[n], 1.0}};
      if (a != 0) debt.emplace_back(em.b[a], -1.0);
      if (!leaf) debt.emplace_back(em.bPlus[n], -1.0);
      m.add_row(nn("debt", n), std::move(debt), lp::Sense::EQ, 0.0);

      if (!leaf)
        for (int i = 1; i <= I; ++i)
          m.add_row(nn("sell", n, i),
                    {{em.xMinus[n][i], 1.0}, {em.x[a][i], -(1.0 + co.r[i])}},
                    lp::Sense::LE, 0.0);
    }

    if (!leaf) {
      // Portfolio composition limits on the investment assets.
      for (int i = 1; i <= I; ++i) {
        if (params.thetaMin[i] > 0) {
          std::vector<std::pair<int, double>> lo;
          for (int k = 1; k <= I; ++k)
            lo.emplace_back(em.x[n][k],
                            (k == i ? 1.0 : 0.0) - params.thetaMin[i]);
          m.add_row(nn("divlo", n, i), std::move(lo), lp::Sense::GE, 0.0);
        }
        std::vector<std::pair<int, double>> hi;
        for (int k = 1; k <= I; ++k)
          hi.emplace_back(em.x[n][k],
                          (k == i ? 1.0 : 0.0) - params.thetaMax[i]);
        m.add_row(nn("divhi", n, i), std::move(hi), lp::Sense::LE, 0.0);
      }
      bool has_eq = false;
      for (int i = 1; i <= I; ++i) has_eq = has_eq || params.equity[i];
      if (has_eq) {
        std::vector<std::pair<int, double>> eq;
        for (int k = 1; k <= I; ++k)
          eq.emplace_back(em.x[n][k],
                          (params.equity[k] ? 1.0 : 0.0) - params.q);
        m.add_row(nn("equity", n), std::move(eq), lp::Sense::LE, 0.0);
      }
      double lamSum = 0, lamDur = 0;
      for (size_t j = 0; j < co.lambda.size(); ++j) {
        lamSum += co.lambda[j];
        lamDur += co.lambda[j] * co.deltaLambda[j];
      }
      std::vector<std::pair<int, double>> dur;
      for (int i = 1; i <= I; ++i)
        if (params.fixedIncome[i])
          dur.emplace_back(em.x[n][i], params.durationX[i]);
      m.add_row(nn("durhi", n), dur, lp::Sense::LE,
                lamDur + params.deltaBar * lamSum);
      m.add_row(nn("durlo", n), std::move(dur), lp::Sense::GE,
                lamDur - params.deltaBar * lamSum);
    }

    // Nested risk recursion in epigraph form; tight because the objective is
    // nondecreasing in every child value for kappa <= 1.
    if (leaf) {
      m.add_row(nn("value", n), {{em.Y[n], 1.0}, {em.b[n], -params.alpha}},
                lp::Sense::GE, 0.0);
    } else {
      std::vector<std::pair<int, double>> val{{em.Y[n], 1.0}};
      if (!root) {
        val.emplace_back(em.b[n], -params.alpha);
        for (int i = 1; i <= I; ++i)
          val.emplace_back(em.xMinus[n][i], (1.0 - params.alpha) * co.g[i - 1]);
      }
      for (int mm : topo.nodes[n].children) {
        const double pc = topo.cond_prob(mm);
        val.emplace_back(em.Y[mm], -pc);
        val.emplace_back(em.z[mm], -params.kappa * pc);
      }
      m.add_row(nn("value", n), std::move(val), lp::Sense::GE, 0.0);
      for (int mm : topo.nodes[n].children) {
        std::vector<std::pair<int, double>> dev{{em.z[mm], 1.0},
                                                {em.Y[mm], -1.0}};
        for (int kk : topo.nodes[n].children) {
          if (kk == mm)
            dev[1].second += topo.cond_prob(kk);
          else
            dev.emplace_back(em.Y[kk], topo.cond_prob(kk));
        }
        m.add_row(nn("dev", mm), std::move(dev), lp::Sense::GE, 0.0);
      }
    }

    if (!svar[n].empty()) {
      const auto& ch = topo.nodes[n].children;
      const auto& atoms = bench[n].atoms();
      for (size_t k = 0; k < atoms.size(); ++k) {
        for (size_t c = 0; c < ch.size(); ++c) {
          std::vector<std::pair<int, double>> row{{svar[n][c][k], 1.0}};
          for (int i = 0; i <= I; ++i)
            row.emplace_back(em.x[n][i], 1.0 + tree.coeff[ch[c]].r[i]);
          m.add_row(nn("sfall", n, static_cast<int>(c * atoms.size() + k)),
                    std::move(row), lp::Sense::GE, atoms[k].first);
        }
        std::vector<std::pair<int, double>> agg;
        for (size_t c = 0; c < ch.size(); ++c)
          agg.emplace_back(svar[n][c][k], topo.cond_prob(ch[c]));
        m.add_row(nn("ssd", n, static_cast<int>(k)), std::move(agg),
                  lp::Sense::LE,
                  dom::integrated_cdf(bench[n], atoms[k].first));
      }
    }
  }
  return em;
}

CostToGo subtree_cost_to_go(const ScenarioTree& tree,
                            const ModelParams& params, int node,
                            const std::vector<double>& xa, double ba,
                            const lp::SolveOptions& opts) {
  check_params(tree, params);
  const auto& topo = tree.topo;
  if (node <= 0 || node >= topo.num_nodes())
    throw std::invalid_argument("subtree root must be a non-root node");
  const int I = tree.num_assets() - 1;
  const int T = topo.last_stage();
  const double buyF = 1.0 + params.phiPlus;
  const double sellF = 1.0 - params.phiMinus;

  std::vector<int> nodes{node};
  for (size_t k = 0; k < nodes.size(); ++k)
    for (int c : topo.nodes[nodes[k]].children) nodes.push_back(c);
  std::vector<int> loc(topo.num_nodes(), -1);
  for (size_t k = 0; k < nodes.size(); ++k) loc[nodes[k]] = static_cast<int>(k);

  lp::LinearModel m;
  const int S = static_cast<int>(nodes.size());
  std::vector<std::vector<int>> x(S, std::vector<int>(I + 1)),
      xp(S, std::vector<int>(I + 1, -1)), xm(S, std::vector<int>(I + 1, -1));
  std::vector<int> b(S), bp(S, -1), bm(S), Y(S), z(S, -1);
  for (int k = 0; k < S; ++k) {
    const int n = nodes[k];
    const bool leaf = topo.is_leaf(n);
    for (int i = 0; i <= I; ++i) x[k][i] = m.add_var(nn("x", n, i));
    if (!leaf)
      for (int i = 1; i <= I; ++i) {
        xp[k][i] = m.add_var(nn("xp", n, i));
        xm[k][i] = m.add_var(nn("xm", n, i));
      }
    b[k] = m.add_var(nn("b", n));
    if (!leaf) bp[k] = m.add_var(nn("bp", n));
    bm[k] = m.add_var(nn("bm", n));
    Y[k] = m.add_var(nn("Y", n), -params.bigM);
    if (k > 0) z[k] = m.add_var(nn("z", n));
  }
  m.set_cost(Y[0], 1.0);

  for (int k = 0; k < S; ++k) {
    const int n = nodes[k];
    const bool leaf = topo.is_leaf(n);
    const int a = topo.nodes[n].ancestor;
    const int ak = k == 0 ? -1 : loc[a];
    const auto& co = tree.coeff[n];

    for (int i = 1; i <= I; ++i) {
      std::vector<std::pair<int, double>> reb{{x[k][i], 1.0}};
      if (!leaf) {
        reb.emplace_back(xp[k][i], -1.0);
        reb.emplace_back(xm[k][i], 1.0);
      }
      double rhs = 0.0;
      if (ak < 0)
        rhs = xa[i] * (1.0 + co.r[i]);
      else
        reb.emplace_back(x[ak][i], -(1.0 + co.r[i]));
      m.add_row(nn("reb", n, i), std::move(reb), lp::Sense::EQ, rhs);
      if (!leaf) {
        std::vector<std::pair<int, double>> sell{{xm[k][i], 1.0}};
        double srhs = 0.0;
        if (ak < 0)
          srhs = xa[i] * (1.0 + co.r[i]);
        else
          sell.emplace_back(x[ak][i], -(1.0 + co.r[i]));
        m.add_row(nn("sell", n, i), std::move(sell), lp::Sense::LE, srhs);
      }
    }
    double outflow = 0;
    for (double L : co.L) outflow += L;
    std::vector<std::pair<int, double>> cash{{x[k][0], 1.0}, {bm[k], 1.0}};
    if (!leaf) {
      for (int i = 1; i <= I; ++i) {
        cash.emplace_back(xp[k][i], buyF);
        cash.emplace_back(xm[k][i], -sellF);
      }
      cash.emplace_back(bp[k], -1.0);
    }
    double crhs = co.c - outflow;
    if (ak < 0) {
      crhs += xa[0] * (1.0 + co.r[0]);
      if (a != 0) crhs -= ba * tree.coeff[a].rMinus;
    } else {
      cash.emplace_back(x[ak][0], -(1.0 + co.r[0]));
      if (a != 0) cash.emplace_back(b[ak], tree.coeff[a].rMinus);
    }
    m.add_row(nn("cash", n), std::move(cash), lp::Sense::EQ, crhs);

    std::vector<std::pair<int, double>> debt{{b[k], 1.0}, {bm[k], 1.0}};
    double drhs = 0.0;
    if (ak < 0)
      drhs = a != 0 ? ba : 0.0;
    else if (a != 0)
      debt.emplace_back(b[ak], -1.0);
    if (!leaf) debt.emplace_back(bp[k], -1.0);
    m.add_row(nn("debt", n), std::move(debt), lp::Sense::EQ, drhs);

    if (!leaf) {
      for (int i = 1; i <= I; ++i) {
        if (params.thetaMin[i] > 0) {
          std::vector<std::pair<int, double>> lo;
          for (int j = 1; j <= I; ++j)
            lo.emplace_back(x[k][j],
                            (j == i ? 1.0 : 0.0) - params.thetaMin[i]);
          m.add_row(nn("divlo", n, i), std::move(lo), lp::Sense::GE, 0.0);
        }
        std::vector<std::pair<int, double>> hi;
        for (int j = 1; j <= I; ++j)
          hi.emplace_back(x[k][j], (j == i ? 1.0 : 0.0) - params.thetaMax[i]);
        m.add_row(nn("divhi", n, i), std::move(hi), lp::Sense::LE, 0.0);
      }
      bool has_eq = false;
      for (int i = 1; i <= I; ++i) has_eq = has_eq || params.equity[i];
      if (has_eq) {
        std::vector<std::pair<int, double>> eq;
        for (int j = 1; j <= I; ++j)
          eq.emplace_back(x[k][j], (params.equity[j] ? 1.0 : 0.0) - params.q);
        m.add_row(nn("equity", n), std::move(eq), lp::Sense::LE, 0.0);
      }
      double lamSum = 0, lamDur = 0;
      for (size_t j = 0; j < co.lambda.size(); ++j) {
        lamSum += co.lambda[j];
        lamDur += co.lambda[j] * co.deltaLambda[j];
      }
      std::vector<std::pair<int, double>> dur;
      for (int i = 1; i <= I; ++i)
        if (params.fixedIncome[i]) dur.emplace_back(x[k][i], params.durationX[i]);
      m.add_row(nn("durhi", n), dur, lp::Sense::LE,
                lamDur + params.deltaBar * lamSum);
      m.add_row(nn("durlo", n), std::move(dur), lp::Sense::GE,
                lamDur - params.deltaBar * lamSum);
    }

    if (leaf) {
      m.add_row(nn("value", n), {{Y[k], 1.0}, {b[k], -params.alpha}},
                lp::Sense::GE, 0.0);
    } else {
      std::vector<std::pair<int, double>> val{{Y[k], 1.0},
                                              {b[k], -params.alpha}};
      for (int i = 1; i <= I; ++i)
        val.emplace_back(xm[k][i], (1.0 - params.alpha) * co.g[i - 1]);
      for (int mm : topo.nodes[n].children) {
        const double pc = topo.cond_prob(mm);
        val.emplace_back(Y[loc[mm]], -pc);
        val.emplace_back(z[loc[mm]], -params.kappa * pc);
      }
      m.add_row(nn("value", n), std::move(val), lp::Sense::GE, 0.0);
      for (int mm : topo.nodes[n].children) {
        std::vector<std::pair<int, double>> dev{{z[loc[mm]], 1.0},
                                                {Y[loc[mm]], -1.0}};
        for (int kk : topo.nodes[n].children) {
          if (kk == mm)
            dev[1].second += topo.cond_prob(kk);
          else
            dev.emplace_back(Y[loc[kk]], topo.cond_prob(kk));
        }
        m.add_row(nn("dev", mm), std::move(dev), lp::Sense::GE, 0.0);
      }
    }

    if (params.phi > 0 && topo.nodes[n].stage == T - 1) {
      const auto& ch = topo.nodes[n].children;
      std::vector<std::pair<double, double>> atoms;
      for (int mm : ch)
        atoms.emplace_back(params.phi * tree.coeff[mm].Lambda(),
                           topo.cond_prob(mm));
      dom::DiscreteDistribution bench(atoms);
      const auto& ba_atoms = bench.atoms();
      for (size_t kk = 0; kk < ba_atoms.size(); ++kk) {
        std::vector<std::pair<int, double>> agg;
        for (size_t c = 0; c < ch.size(); ++c) {
          int s = m.add_var(nn("s", n, static_cast<int>(c * ba_atoms.size() + kk)));
          std::vector<std::pair<int, double>> row{{s, 1.0}};
          for (int i = 0; i <= I; ++i)
            row.emplace_back(x[k][i], 1.0 + tree.coeff[ch[c]].r[i]);
          m.add_row(nn("sfall", n, static_cast<int>(c * ba_atoms.size() + kk)),
                    std::move(row), lp::Sense::GE, ba_atoms[kk].first);
          agg.emplace_back(s, topo.cond_prob(ch[c]));
        }
        m.add_row(nn("ssd", n, static_cast<int>(kk)), std::move(agg),
                  lp::Sense::LE, dom::integrated_cdf(bench, ba_atoms[kk].first));
      }
    }
  }

  auto sol = lp::solve(m, opts);
  CostToGo res;
  res.status = sol.status;
  if (sol.status == lp::Status::Optimal) res.value = sol.objective;
  return res;
}

ExtensiveResult solve_extensive(const ScenarioTree& tree,
                                const ModelParams& params,
                                const lp::SolveOptions& opts) {
  auto em = build_extensive(tree, params);
  auto sol = lp::solve(em.model, opts);

  ExtensiveResult res;
  res.status = sol.status;
  res.num_vars = em.model.num_vars();
  res.num_rows = em.model.num_rows();
  if (sol.status != lp::Status::Optimal) return res;

  res.objective = sol.objective;
  res.K0 = sol.x[em.K0];
  const int N = tree.topo.num_nodes();
  const int I = tree.num_assets() - 1;
  res.policy.resize(N);
  for (int n = 0; n < N; ++n) {
    auto& pol = res.policy[n];
    pol.x.assign(I + 1, 0.0);
    pol.xPlus.assign(I + 1, 0.0);
    pol.xMinus.assign(I + 1, 0.0);
    for (int i = 0; i <= I; ++i) pol.x[i] = sol.x[em.x[n][i]];
    for (int i = 1; i <= I; ++i) {
      if (em.xPlus[n][i] >= 0) pol.xPlus[i] = sol.x[em.xPlus[n][i]];
      if (em.xMinus[n][i] >= 0) pol.xMinus[i] = sol.x[em.xMinus[n][i]];
    }
    if (em.b[n] >= 0) pol.b = sol.x[em.b[n]];
    if (em.bPlus[n] >= 0) pol.bPlus = sol.x[em.bPlus[n]];
    if (em.bMinus[n] >= 0) pol.bMinus = sol.x[em.bMinus[n]];
  }
  return res;
}

OracleComparison oracle_compare(const ExtensiveResult& extensive,
                                double other_objective, double other_K0,
                                const NodePolicy& other_root) {
  OracleComparison c;
  c.extensive_objective = extensive.objective;
  c.other_objective = other_objective;
  c.objective_gap = std::fabs(extensive.objective - other_objective) /
                    std::max(1.0, std::fabs(extensive.objective));
  double dev = std::fabs(extensive.K0 - other_K0);
  if (!extensive.policy.empty()) {
    const auto& root = extensive.policy[0];
    for (size_t i = 0; i < root.x.size(); ++i) {
      dev = std::max(dev, std::fabs(root.x[i] - other_root.x[i]));
      dev = std::max(dev, std::fabs(root.xPlus[i] - other_root.xPlus[i]));
      dev = std::max(dev, std::fabs(root.xMinus[i] - other_root.xMinus[i]));
    }
  }
  c.max_policy_dev = dev;
  return c;
}

}  // namespace alm::xf
