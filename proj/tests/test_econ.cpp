#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "alm/econ.hpp"
#include "alm/tree.hpp"

using namespace alm;
using namespace alm::econ;

namespace {

// Factor levels, decay regression, inflation and spread coefficients of the
// shipped base configuration.
EconCoefficients base_coeffs() {
  EconCoefficients co;
  co.curveFactorCov = {{{0.000257, -0.000063, 0.000012},
                        {-0.000063, 0.000093, -0.000062},
                        {0.000012, -0.000062, 0.000144}}};
  co.decay = {7.0549, 47.7621, 121.3425, 50.8006, 0.5, 0.5};
  co.inflation = {0.2344, 0.0508};
  co.spread = {0.0614, 0.9479, 4.1689, 0.05, 0.01};
  return co;
}

EconState base_init() {
  EconState s;
  s.curve = {0.0247, -0.0188, 0.0182, 4.9924};
  s.pi = 0.0333;
  s.sIG = 0.015;
  return s;
}

}  // namespace

TEST_CASE("curve evaluation") {
  CurveState c{0.02, -0.01, 0.01, 5.0};
  CHECK(yield(c, 1e6) == doctest::Approx(0.02).epsilon(1e-6));
  CHECK(yield(c, 0.0) == doctest::Approx(0.01));
  CHECK(yield(c, 1e-9) == doctest::Approx(0.01).epsilon(1e-6));
  // At tau = gamma the slope and convexity terms cancel for this state.
  CHECK(yield(c, 5.0) == doctest::Approx(0.02));
}

TEST_CASE("decay regression") {
  DecayCoefficients d{7.0549, 47.7621, 121.3425, 50.8006, 0.0, 0.5};
  CHECK(decay_factor(0.0247, -0.0188, 0.0182, d, 0.0) ==
        doctest::Approx(6.878).epsilon(1e-3));
  DecayCoefficients flat{5, 0, 0, 0, 0, 0.5};
  CHECK(decay_factor(0.1, 0.2, 0.3, flat, 0.0) == doctest::Approx(5.0));
  CHECK(decay_factor(0, 0, 0, flat, -10.0) == doctest::Approx(0.5));  // floor
}

TEST_CASE("inflation step") {
  InflationCoefficients c{0.2344, 0.0508};
  CHECK(step_inflation(0.02, 1.0 / 12, c, 0.0) == doctest::Approx(0.02));
  CHECK(step_inflation(0.04, 1.0 / 12, c, 0.0) ==
        doctest::Approx(0.04 + 0.2344 * (-0.02) / 12).epsilon(1e-12));
  CHECK(step_inflation(0.04, 1.0 / 12, c, 0.0) ==
        doctest::Approx(0.039609).epsilon(1e-4));
  CHECK(step_inflation(0.001, 1.0 / 12, c, -100.0) == doctest::Approx(0.0));
  // Drift signs around the 2% target.
  CHECK(step_inflation(0.03, 0.25, c, 0.0) < 0.03);
  CHECK(step_inflation(0.01, 0.25, c, 0.0) > 0.01);
}

TEST_CASE("spread step") {
  SpreadCoefficients c{0.0614, 0.9479, 4.1689, 0.0, 1.0};
  CHECK(step_spread(0.0, 0.0, c, 0.0) == doctest::Approx(0.0614));
  SpreadCoefficients persist{0.0, 1.0, 0.0, 0.0, 1.0};
  CHECK(step_spread(0.0123, 0.05, persist, 0.0) == doctest::Approx(0.0123));
  SpreadCoefficients neg{-1.0, 0.0, 0.0, 0.0, 1.0};
  CHECK(step_spread(0.5, 0.0, neg, 0.0) == doctest::Approx(0.0));
  // Percent-unit coefficients with fractional state round trip via the scale.
  SpreadCoefficients pct{0.0614, 0.9479, 4.1689, 0.0, 0.01};
  double s = step_spread(0.015, 0.0059, pct, 0.0);
  CHECK(s == doctest::Approx(0.01 * (0.0614 + 0.9479 * 1.5 + 4.1689 * 0.0059))
                 .epsilon(1e-12));
}

TEST_CASE("borrowing rate") {
  EconState s;
  s.curve = {0.03, 0.0, 0.0, 3.0};
  s.sIG = 0.015;
  CHECK(borrow_rate(s) == doctest::Approx(0.045));
  s.sIG = 0.0;
  CHECK(borrow_rate(s) == doctest::Approx(yield(s.curve, 1.0)));
  EconState b = base_init();
  double y1 = 0.0247 - 0.0188 * std::exp(-1.0 / 4.9924) +
              0.0182 * (1.0 / 4.9924) * std::exp(-1.0 / 4.9924);
  CHECK(borrow_rate(b) == doctest::Approx(y1 + 0.015).epsilon(1e-12));
}

TEST_CASE("zero noise simulation is deterministic and siblings coincide") {
  auto topo = build_topology({0, 1, 2}, {3, 2});
  EconCoefficients co = base_coeffs();
  co.curveFactorCov = {};
  co.decay.residStd = 0;
  co.inflation.sigmaPi = 0;
  co.spread.residStd = 0;
  auto res = simulate_econ_tree(topo, co, base_init(), 42);
  for (int t = 1; t < topo.num_stages(); ++t) {
    const auto& ids = topo.stage_nodes[t];
    for (size_t k = 1; k < ids.size(); ++k) {
      CHECK(res.node_state[ids[k]].pi == res.node_state[ids[0]].pi);
      CHECK(res.node_state[ids[k]].sIG == res.node_state[ids[0]].sIG);
      CHECK(res.node_state[ids[k]].curve.b1 ==
            res.node_state[ids[0]].curve.b1);
    }
  }
  // Deterministic iteration matches a hand loop of the three recursions.
  EconState s = base_init();
  for (int h = 0; h < 12; ++h) {
    s.curve.gamma = decay_factor(s.curve.b1, s.curve.b2, s.curve.b3, co.decay, 0);
    s.pi = step_inflation(s.pi, 1.0 / 12, co.inflation, 0);
    s.sIG = step_spread(s.sIG, yield(s.curve, 0.0), co.spread, 0);
  }
  CHECK(res.node_state[1].pi == doctest::Approx(s.pi).epsilon(1e-14));
  CHECK(res.node_state[1].sIG == doctest::Approx(s.sIG).epsilon(1e-14));
  CHECK(res.node_months[1].size() == 12);
}

TEST_CASE("identical seeds reproduce bit-identically, parallel or not") {
  auto topo = build_topology({0, 1, 2, 3}, {4, 3, 2});
  auto co = base_coeffs();
  auto a = simulate_econ_tree(topo, co, base_init(), 7, true);
  auto b = simulate_econ_tree(topo, co, base_init(), 7, true);
  auto c = simulate_econ_tree_serial(topo, co, base_init(), 7);
  for (int n = 0; n < topo.num_nodes(); ++n) {
    CHECK(a.node_state[n].pi == b.node_state[n].pi);
    CHECK(a.node_state[n].pi == c.node_state[n].pi);
    CHECK(a.node_state[n].sIG == c.node_state[n].sIG);
    CHECK(a.node_state[n].curve.b2 == c.node_state[n].curve.b2);
  }
  auto d = simulate_econ_tree(topo, co, base_init(), 8);
  CHECK(a.node_state[1].pi != d.node_state[1].pi);
}

TEST_CASE("inflation mean reverts toward the target over ten years") {
  auto topo = build_topology({0, 10}, {10000});
  auto res = simulate_econ_tree(topo, base_coeffs(), base_init(), 123);
  double mean = 0;
  for (int n : topo.stage_nodes[1]) mean += res.node_state[n].pi;
  mean /= 10000;
  CHECK(mean > 0.015);
  CHECK(mean < 0.035);
}

TEST_CASE("simulated five year spread magnitude") {
  auto topo = build_topology({0, 5}, {2000});
  auto res = simulate_econ_tree(topo, base_coeffs(), base_init(), 321);
  double mean = 0;
  for (int n : topo.stage_nodes[1]) mean += res.node_state[n].sIG;
  mean /= 2000;
  CHECK(mean > 0.0168 * 0.7);
  CHECK(mean < 0.0168 * 1.3);
}

TEST_CASE("non PSD covariance is rejected") {
  auto topo = build_topology({0, 1}, {2});
  auto co = base_coeffs();
  co.curveFactorCov = {{{-1.0, 0, 0}, {0, 1.0, 0}, {0, 0, 1.0}}};
  CHECK_THROWS_AS(simulate_econ_tree(topo, co, base_init(), 1),
                  std::invalid_argument);
}
