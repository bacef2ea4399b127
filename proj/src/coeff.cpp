#include "alm/coeff.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace alm::coeff {

double asset_return_step(const AssetSpec& a, const Regressors& reg,
                         double noise) {
  double r;
  switch (a.family) {
    case AssetFamily::Cash:
      r = reg.cash_anchor_yield / 12.0;
      break;
    case AssetFamily::Treasury:
      r = a.b[0] + a.b[1] * reg.prev_return +
          a.b[2] * econ::yield(reg.prev->curve, a.duration) +
          a.b[3] * reg.cur->pi + noise;
      break;
    case AssetFamily::Corporate:
      if (!reg.has_smallcap)
        throw std::invalid_argument("corporate asset " + a.id +
                                    " needs the small-cap return");
      r = a.b[0] + a.b[1] * reg.prev_return +
          a.b[2] * econ::yield(reg.prev->curve, a.duration) +
          a.b[3] * reg.cur->sIG + a.b[4] * reg.smallcap + noise;
      break;
    case AssetFamily::Equity: {
      double y1 = econ::yield(reg.cur->curve, 1.0);
      double f = econ::yield(reg.cur->curve, 10.0) - y1;
      r = a.b[0] + a.b[1] * reg.prev_return + a.b[2] * y1 +
          a.b[3] * reg.cur->pi + a.b[4] * f + noise;
      break;
    }
    case AssetFamily::Currency:
      r = a.b[0] + a.b[1] * reg.prev_return +
          a.b[2] * econ::yield(reg.cur->curve, 0.25) + a.b[3] * reg.cur->pi +
          noise;
      break;
    default:
      throw std::logic_error("unknown asset family");
  }
  return std::max(r, -0.99);
}

double compound_stage_return(const std::vector<double>& monthly) {
  if (monthly.empty()) throw std::invalid_argument("no monthly returns");
  double f = 1.0;
  for (double r : monthly) f *= 1.0 + r;
  return f - 1.0;
}

double gain_loss(const std::vector<double>& stage_returns) {
  if (stage_returns.empty()) return 0.0;
  double cum = 1.0, sum = 0.0;
  for (double r : stage_returns) {
    cum *= 1.0 + r;
    sum += cum - 1.0;
  }
  return sum / static_cast<double>(stage_returns.size());
}

std::vector<double> growth_path(double init, double mu, double sigma,
                                int months, std::mt19937_64& rng,
                                long* floor_hits) {
  std::normal_distribution<double> N(0.0, 1.0);
  const double base = std::pow(1.0 + mu, 1.0 / 12.0);
  const double vol = sigma * std::sqrt(1.0 / 12.0);
  std::vector<double> out;
  out.reserve(months);
  double level = init;
  for (int h = 0; h < months; ++h) {
    double factor = base + vol * N(rng);
    if (factor < 0.01) {
      factor = 0.01;
      if (floor_hits) ++*floor_hits;
    }
    level *= factor;
    out.push_back(level);
  }
  return out;
}

namespace {

std::mt19937_64 node_rng(std::uint64_t seed, int node, std::uint32_t salt) {
  std::seed_seq sq{static_cast<std::uint32_t>(seed),
                   static_cast<std::uint32_t>(seed >> 32),
                   static_cast<std::uint32_t>(node), salt};
  return std::mt19937_64(sq);
}

}  // namespace

LiabilitySim simulate_liabilities(const TreeTopology& topo,
                                  const std::vector<LiabilitySpec>& specs,
                                  const RevenueSpec& revenue, int Tlambda,
                                  std::uint64_t seed, bool parallel) {
  int N = topo.num_nodes();
  int J = static_cast<int>(specs.size());
  LiabilitySim sim;
  sim.node_months.resize(N);
  sim.leaf_ext.resize(N);
  sim.node_L.resize(N);
  sim.node_c.resize(N);
  sim.c_months.resize(N);
  sim.node_L[0].resize(J);
  for (int j = 0; j < J; ++j) sim.node_L[0][j] = specs[j].L0;
  sim.node_c[0] = revenue.c0;
  std::vector<long> hits(N, 0);

  for (int t = 1; t < topo.num_stages(); ++t) {
    const auto& ids = topo.stage_nodes[t];
    int months = static_cast<int>(std::lround(topo.gap_months(t - 1)));
    long K = static_cast<long>(ids.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 64) if (parallel)
#endif
    for (long k = 0; k < K; ++k) {
      int m = ids[k];
      int a = topo.nodes[m].ancestor;
      auto rng = node_rng(seed, m, 0x11ab);
      sim.node_months[m].resize(J);
      sim.node_L[m].resize(J);
      for (int j = 0; j < J; ++j) {
        sim.node_months[m][j] =
            growth_path(sim.node_L[a][j], specs[j].muXi, specs[j].sigmaXi,
                        months, rng, &hits[m]);
        sim.node_L[m][j] = sim.node_months[m][j].back();
      }
      sim.c_months[m] = growth_path(sim.node_c[a], revenue.muRho,
                                    revenue.sigmaRho, months, rng, &hits[m]);
      sim.node_c[m] = sim.c_months[m].back();
    }
  }
  // One non-branching continuation per leaf for valuation beyond the horizon.
  const auto& leaves = topo.stage_nodes.back();
  long K = static_cast<long>(leaves.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 64) if (parallel)
#endif
  for (long k = 0; k < K; ++k) {
    int m = leaves[k];
    auto rng = node_rng(seed, m, 0x11ac);
    sim.leaf_ext[m].resize(J);
    for (int j = 0; j < J; ++j)
      sim.leaf_ext[m][j] = growth_path(sim.node_L[m][j], specs[j].muXi,
                                       specs[j].sigmaXi, 12 * Tlambda, rng,
                                       &hits[m]);
  }
  for (long h : hits) sim.growth_floor_hits += h;
  return sim;
}

namespace {

// Expected liability level of class j at k whole years past node n's date.
double expected_L(const TreeTopology& topo, const LiabilitySim& sim, int n,
                  int j, int k) {
  if (k == 0) return sim.node_L[n][j];
  if (topo.is_leaf(n)) return sim.leaf_ext[n][j][12 * k - 1];
  int t = topo.nodes[n].stage;
  int gap = static_cast<int>(std::lround(topo.stages[t + 1] - topo.stages[t]));
  double v = 0;
  for (int m : topo.nodes[n].children) {
    double val = k < gap ? sim.node_months[m][j][12 * k - 1]
               : k == gap ? sim.node_L[m][j]
                          : expected_L(topo, sim, m, j, k - gap);
    v += topo.cond_prob(m) * val;
  }
  return v;
}

}  // namespace

LiabilityValues liability_values(const TreeTopology& topo,
                                 const std::vector<econ::EconState>& states,
                                 const LiabilitySim& sim, int Tlambda,
                                 int firstOffset, bool parallel) {
  int N = topo.num_nodes();
  int J = static_cast<int>(sim.node_L[0].size());
  LiabilityValues out;
  out.lambda.assign(N, std::vector<double>(J, 0.0));
  out.deltaLambda.assign(N, std::vector<double>(J, 0.0));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 64) if (parallel)
#endif
  for (int n = 0; n < N; ++n) {
    for (int j = 0; j < J; ++j) {
      double lam = 0, wsum = 0;
      for (int k = firstOffset; k <= Tlambda; ++k) {
        double tau = static_cast<double>(k);
        double disc = std::exp(-econ::yield(states[n].curve, tau) * tau);
        double cash = disc * expected_L(topo, sim, n, j, k);
        lam += cash;
        wsum += tau * cash;
      }
      out.lambda[n][j] = lam;
      if (lam > 0) {
        out.deltaLambda[n][j] = wsum / lam;
      } else if (wsum > 1e-12) {
        throw std::runtime_error("zero liability value with nonzero duration");
      }
    }
  }
  return out;
}

CoeffResult generate_coefficients(const TreeTopology& topo,
                                  const econ::EconSimResult& econ_sim,
                                  const std::vector<AssetSpec>& assets,
                                  const std::vector<LiabilitySpec>& liabs,
                                  const RevenueSpec& revenue,
                                  std::uint64_t seed,
                                  const CoeffOptions& options) {
  if (assets.empty() || assets[0].family != AssetFamily::Cash)
    throw std::invalid_argument("asset 0 must be the cash account");
  for (size_t i = 0; i < assets.size(); ++i)
    if (assets[i].family == AssetFamily::Corporate &&
        options.smallcapIndex < 0)
      throw std::invalid_argument("corporate assets need smallcapIndex");

  int N = topo.num_nodes();
  int I1 = static_cast<int>(assets.size());  // including cash
  CoeffResult res;
  res.tree.topo = topo;
  res.tree.coeff.resize(N);

  // Forward pass: monthly regressions chained along each branch. Per node we
  // keep the last monthly return per asset to seed the children.
  std::vector<std::vector<double>> last_month(N,
                                              std::vector<double>(I1, 0.0));
  std::vector<std::vector<double>> cumprod(N, std::vector<double>(I1, 1.0));
  std::vector<std::vector<double>> rho_sum(N, std::vector<double>(I1, 0.0));
  std::vector<long> floor_hits(N, 0);

  for (int t = 1; t < topo.num_stages(); ++t) {
    const auto& ids = topo.stage_nodes[t];
    int months = static_cast<int>(std::lround(topo.gap_months(t - 1)));
    long K = static_cast<long>(ids.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 64) if (options.parallel)
#endif
    for (long k = 0; k < K; ++k) {
      int m = ids[k];
      int anc = topo.nodes[m].ancestor;
      auto rng = node_rng(seed, m, 0xa55e);
      std::normal_distribution<double> Nrm(0.0, 1.0);
      double anchor_y = econ::yield(econ_sim.node_state[anc].curve, 0.25);
      std::vector<std::vector<double>> monthly(I1);
      std::vector<double> prev_ret = last_month[anc];
      for (int h = 0; h < months; ++h) {
        const econ::EconState& cur = econ_sim.node_months[m][h];
        const econ::EconState& prev =
            h == 0 ? econ_sim.node_state[anc] : econ_sim.node_months[m][h - 1];
        std::vector<double> noise(I1, 0.0);
        for (int i = 1; i < I1; ++i) noise[i] = assets[i].residStd * Nrm(rng);
        // The small-cap return feeds the corporate regressions this month,
        // so evaluate it first.
        std::vector<double> ret(I1, 0.0);
        double smallcap = 0;
        bool has_small = options.smallcapIndex > 0;
        if (has_small) {
          int si = options.smallcapIndex;
          Regressors rg;
          rg.prev_return = prev_ret[si];
          rg.prev = &prev;
          rg.cur = &cur;
          ret[si] = asset_return_step(assets[si], rg, noise[si]);
          smallcap = ret[si];
        }
        for (int i = 0; i < I1; ++i) {
          if (has_small && i == options.smallcapIndex) continue;
          Regressors rg;
          rg.prev_return = prev_ret[i];
          rg.prev = &prev;
          rg.cur = &cur;
          rg.smallcap = smallcap;
          rg.has_smallcap = has_small;
          rg.cash_anchor_yield = anchor_y;
          ret[i] = asset_return_step(assets[i], rg, noise[i]);
        }
        for (int i = 0; i < I1; ++i) {
          if (ret[i] <= -0.99) ++floor_hits[m];
          monthly[i].push_back(ret[i]);
        }
        prev_ret = ret;
      }
      last_month[m] = prev_ret;
      NodeCoefficients& c = res.tree.coeff[m];
      c.r.resize(I1);
      c.g.resize(I1 - 1);
      for (int i = 0; i < I1; ++i) {
        c.r[i] = compound_stage_return(monthly[i]);
        cumprod[m][i] = cumprod[anc][i] * (1.0 + c.r[i]);
        rho_sum[m][i] = rho_sum[anc][i] + (cumprod[m][i] - 1.0);
        if (i > 0) c.g[i - 1] = rho_sum[m][i] / t;
      }
      c.rMinus = econ::borrow_rate(econ_sim.node_state[m]);
    }
  }

  NodeCoefficients& root = res.tree.coeff[0];
  root.r.assign(I1, 0.0);
  root.g.assign(I1 - 1, 0.0);
  root.rMinus = econ::borrow_rate(econ_sim.node_state[0]);

  auto sim = simulate_liabilities(topo, liabs, revenue, options.Tlambda, seed,
                                  options.parallel);
  auto vals = liability_values(topo, econ_sim.node_state, sim, options.Tlambda,
                               options.lambdaFirstOffset, options.parallel);
  for (int n = 0; n < N; ++n) {
    NodeCoefficients& c = res.tree.coeff[n];
    c.L = sim.node_L[n];
    c.c = sim.node_c[n];
    c.lambda = vals.lambda[n];
    c.deltaLambda = vals.deltaLambda[n];
  }
  for (long h : floor_hits) res.return_floor_hits += h;
  res.growth_floor_hits = sim.growth_floor_hits;
  return res;
}

}  // namespace alm::coeff
