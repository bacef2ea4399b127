#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "alm/coeff.hpp"

using namespace alm;
using namespace alm::coeff;

namespace {

econ::EconState flat_state(double y, double pi = 0.0, double s = 0.0) {
  econ::EconState st;
  st.curve = {y, 0.0, 0.0, 1.0};
  st.pi = pi;
  st.sIG = s;
  return st;
}

}  // namespace

TEST_CASE("monthly regression step per family") {
  econ::EconState prev = flat_state(0.02);
  econ::EconState cur = flat_state(0.02, 0.02, 0.01);
  Regressors rg;
  rg.prev = &prev;
  rg.cur = &cur;

  for (auto fam : {AssetFamily::Treasury, AssetFamily::Equity,
                   AssetFamily::Currency}) {
    AssetSpec a{"zero", fam, 1.0, {}, 0.0};
    CHECK(asset_return_step(a, rg, 0.0) == doctest::Approx(0.0));
  }
  AssetSpec corp{"zero", AssetFamily::Corporate, 1.0, {}, 0.0};
  rg.has_smallcap = true;
  CHECK(asset_return_step(corp, rg, 0.0) == doctest::Approx(0.0));
  rg.has_smallcap = false;
  CHECK_THROWS_AS(asset_return_step(corp, rg, 0.0), std::invalid_argument);

  AssetSpec gov{"gov5", AssetFamily::Treasury, 5.6,
                {0.0029, -0.0354, 0.4042, -0.2334, 0.0}, 0.0};
  CHECK(asset_return_step(gov, rg, 0.0) ==
        doctest::Approx(0.0029 + 0.4042 * 0.02 - 0.2334 * 0.02).epsilon(1e-12));
  CHECK(asset_return_step(gov, rg, 0.0) ==
        doctest::Approx(0.006316).epsilon(1e-6));

  AssetSpec cash{"cash", AssetFamily::Cash, 0.25, {}, 0.0};
  rg.cash_anchor_yield = 0.03;
  CHECK(asset_return_step(cash, rg, 0.0) == doctest::Approx(0.0025));

  // Limited liability floor.
  AssetSpec crash{"crash", AssetFamily::Equity, 0.0, {-5, 0, 0, 0, 0}, 0.0};
  CHECK(asset_return_step(crash, rg, 0.0) == doctest::Approx(-0.99));
}

TEST_CASE("stage compounding") {
  CHECK(compound_stage_return(std::vector<double>(12, 0.0)) ==
        doctest::Approx(0.0));
  CHECK(compound_stage_return({0.01, 0.02}) == doctest::Approx(0.0302));
  CHECK(compound_stage_return({0.07}) == doctest::Approx(0.07));
}

TEST_CASE("gain loss averaging") {
  CHECK(gain_loss({0.0, 0.0, 0.0}) == doctest::Approx(0.0));
  CHECK(gain_loss({0.1, -0.05}) == doctest::Approx(0.0725));
  CHECK(gain_loss({0.07}) == doctest::Approx(0.07));
  CHECK(gain_loss({}) == doctest::Approx(0.0));
  // Equal nonnegative stage returns give a nondecreasing g in t.
  double prev = 0;
  std::vector<double> path;
  for (int t = 1; t <= 8; ++t) {
    path.push_back(0.03);
    double g = gain_loss(path);
    CHECK(g >= prev - 1e-15);
    prev = g;
  }
}

TEST_CASE("growth path determinism and floors") {
  std::mt19937_64 rng(1);
  auto p = growth_path(2.2, 0.01, 0.0, 12, rng);
  REQUIRE(p.size() == 12);
  CHECK(p.back() == doctest::Approx(2.222).epsilon(1e-12));

  auto flat = growth_path(5.0, 0.0, 0.0, 24, rng);
  for (double v : flat) CHECK(v == doctest::Approx(5.0));

  long hits = 0;
  auto floored = growth_path(1.0, -0.9999, 10.0, 60, rng, &hits);
  CHECK(hits > 0);
  for (double v : floored) CHECK(v > 0.0);
}

TEST_CASE("stressed growth widens the terminal spread") {
  std::mt19937_64 rng(2);
  auto spread = [&](double mu, double sigma) {
    std::vector<double> ends;
    for (int i = 0; i < 2000; ++i)
      ends.push_back(growth_path(2.2, mu, sigma, 60, rng).back());
    double m = 0;
    for (double e : ends) m += e;
    m /= ends.size();
    double v = 0;
    for (double e : ends) v += (e - m) * (e - m);
    return std::sqrt(v / ends.size());
  };
  CHECK(spread(0.05, 0.05) > spread(0.01, 0.03));
}

TEST_CASE("liability valuation on a flat zero curve") {
  auto topo = build_topology({0, 1}, {2});
  std::vector<LiabilitySpec> specs{{2.2, 0.0, 0.0}};
  RevenueSpec rev{4.2, 0.0, 0.0};
  auto sim = simulate_liabilities(topo, specs, rev, 5, 9);
  std::vector<econ::EconState> states(topo.num_nodes(), flat_state(0.0));
  auto vals = liability_values(topo, states, sim, 5, 0);
  for (int n = 0; n < topo.num_nodes(); ++n)
    CHECK(vals.lambda[n][0] == doctest::Approx(6 * 2.2).epsilon(1e-12));
}

TEST_CASE("single payment duration") {
  auto topo = build_topology({0, 1}, {1});
  LiabilitySim sim;
  sim.node_months.resize(2);
  sim.leaf_ext.resize(2);
  sim.node_L = {{0.0}, {0.0}};
  sim.node_c = {0.0, 0.0};
  sim.node_months[1] = {std::vector<double>(12, 0.0)};
  sim.leaf_ext[1] = {std::vector<double>(60, 0.0)};
  sim.leaf_ext[1][0][59] = 7.0;  // the only cash flow, five years out
  std::vector<econ::EconState> states(2, flat_state(0.013));
  auto vals = liability_values(topo, states, sim, 5, 0);
  CHECK(vals.lambda[1][0] == doctest::Approx(std::exp(-0.013 * 5) * 7.0));
  CHECK(vals.deltaLambda[1][0] == doctest::Approx(5.0));
  CHECK(vals.deltaLambda[0][0] == doctest::Approx(0.0));
}

TEST_CASE("zero noise valuation matches the closed form sum") {
  auto topo = build_topology({0, 1, 2}, {2, 2});
  std::vector<LiabilitySpec> specs{{2.2, 0.01, 0.0}};
  RevenueSpec rev{4.2, 0.005, 0.0};
  auto sim = simulate_liabilities(topo, specs, rev, 5, 3);
  double y = 0.017;
  std::vector<econ::EconState> states(topo.num_nodes(), flat_state(y));
  auto vals = liability_values(topo, states, sim, 5, 0);
  for (int n = 0; n < topo.num_nodes(); ++n) {
    int t = topo.nodes[n].stage;
    double lam = 0, w = 0;
    for (int k = 0; k <= 5; ++k) {
      double cash = std::exp(-y * k) * 2.2 * std::pow(1.01, t + k);
      lam += cash;
      w += k * cash;
    }
    CHECK(vals.lambda[n][0] == doctest::Approx(lam).epsilon(1e-10));
    CHECK(vals.deltaLambda[n][0] == doctest::Approx(w / lam).epsilon(1e-10));
    CHECK(vals.deltaLambda[n][0] >= 0);
    CHECK(vals.deltaLambda[n][0] <= 5.0);
  }
}

TEST_CASE("full coefficient generation") {
  auto topo = build_topology({0, 1, 2, 3, 5}, {3, 3, 3, 3});
  econ::EconCoefficients eco;
  eco.curveFactorCov = {{{0.000257, -0.000063, 0.000012},
                         {-0.000063, 0.000093, -0.000062},
                         {0.000012, -0.000062, 0.000144}}};
  eco.decay = {7.0549, 47.7621, 121.3425, 50.8006, 0.5, 0.5};
  eco.inflation = {0.2344, 0.0508};
  eco.spread = {0.0614, 0.9479, 4.1689, 0.05, 0.01};
  econ::EconState init;
  init.curve = {0.0247, -0.0188, 0.0182, 4.9924};
  init.pi = 0.0333;
  init.sIG = 0.015;
  auto esim = econ::simulate_econ_tree(topo, eco, init, 77);

  std::vector<AssetSpec> assets{
      {"cash", AssetFamily::Cash, 0.25, {}, 0.0},
      {"gov", AssetFamily::Treasury, 5.6,
       {0.0029, -0.0354, 0.4042, -0.2334, 0.0}, 0.007},
      {"smallcap", AssetFamily::Equity, 0.0,
       {-0.0089, -0.0422, -5.4131, -1.1704, -2.0308}, 0.04},
      {"corp", AssetFamily::Corporate, 8.4,
       {0.0019, -0.0156, -0.1251, -0.0757, 0.0}, 0.015}};
  std::vector<LiabilitySpec> liabs{{2.2, 0.01, 0.03}};
  RevenueSpec rev{4.2, 0.005, 0.01};
  CoeffOptions opt;
  opt.Tlambda = 5;
  opt.lambdaFirstOffset = 1;
  opt.smallcapIndex = 2;

  auto res = generate_coefficients(topo, esim, assets, liabs, rev, 77, opt);
  const auto& tree = res.tree;
  CHECK(tree.num_assets() == 4);
  CHECK(tree.num_liabilities() == 1);
  CHECK(tree.coeff[0].r == std::vector<double>(4, 0.0));
  CHECK(tree.coeff[0].g == std::vector<double>(3, 0.0));
  // The root liability estimate of the shipped base setup.
  CHECK(tree.coeff[0].Lambda() == doctest::Approx(10.21).epsilon(0.05));
  for (int n = 0; n < topo.num_nodes(); ++n) {
    const auto& c = tree.coeff[n];
    for (double r : c.r) CHECK(r > -1.0);
    for (double l : c.lambda) CHECK(l >= 0.0);
    for (double d : c.deltaLambda) {
      CHECK(d >= 0.0);
      CHECK(d <= 5.0);
    }
    CHECK(c.L[0] > 0.0);
    CHECK(c.c > 0.0);
    CHECK(std::isfinite(c.rMinus));
  }
  // Cash is riskless one stage ahead: siblings share r_0.
  for (const auto& n : topo.nodes)
    for (size_t k = 1; k < n.children.size(); ++k)
      CHECK(tree.coeff[n.children[k]].r[0] ==
            tree.coeff[n.children[0]].r[0]);

  // Reproducible and schedule independent.
  CoeffOptions serial = opt;
  serial.parallel = false;
  auto res2 = generate_coefficients(topo, esim, assets, liabs, rev, 77, serial);
  for (int n = 0; n < topo.num_nodes(); ++n) {
    CHECK(res2.tree.coeff[n].r == tree.coeff[n].r);
    CHECK(res2.tree.coeff[n].lambda == tree.coeff[n].lambda);
  }

  // Zero noise collapses siblings.
  econ::EconCoefficients det = eco;
  det.curveFactorCov = {};
  det.decay.residStd = 0;
  det.inflation.sigmaPi = 0;
  det.spread.residStd = 0;
  auto dsim = econ::simulate_econ_tree(topo, det, init, 1);
  std::vector<AssetSpec> dassets = assets;
  for (auto& a : dassets) a.residStd = 0;
  std::vector<LiabilitySpec> dliabs{{2.2, 0.01, 0.0}};
  RevenueSpec drev{4.2, 0.005, 0.0};
  auto dres = generate_coefficients(topo, dsim, dassets, dliabs, drev, 1, opt);
  for (const auto& n : topo.nodes)
    for (size_t k = 1; k < n.children.size(); ++k) {
      CHECK(dres.tree.coeff[n.children[k]].r ==
            dres.tree.coeff[n.children[0]].r);
      CHECK(dres.tree.coeff[n.children[k]].lambda ==
            dres.tree.coeff[n.children[0]].lambda);
    }
}
