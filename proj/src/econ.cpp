#include "alm/econ.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "alm/tree.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace alm::econ {

double yield(const CurveState& curve, double tau) {
  double e = std::exp(-tau / curve.gamma);
  return curve.b1 + curve.b2 * e + curve.b3 * (tau / curve.gamma) * e;
}

double decay_factor(double b1, double b2, double b3,
                    const DecayCoefficients& c, double noise) {
  double g = c.a0 + c.a1 * b1 + c.a2 * b2 + c.a3 * b3 + noise;
  return std::max(g, c.floor);
}

double step_inflation(double pi_prev, double dt,
                      const InflationCoefficients& c, double noise) {
  if (pi_prev < 0) throw std::invalid_argument("inflation must be >= 0");
  double pi = pi_prev + c.aPi * (0.02 - pi_prev) * dt +
              c.sigmaPi * std::sqrt(pi_prev) * std::sqrt(dt) * noise;
  return std::max(pi, 0.0);
}

double step_spread(double s_prev, double short_rate,
                   const SpreadCoefficients& c, double noise) {
  double u = c.unitScale;
  double s = u * (c.c0 + c.c1 * (s_prev / u) + c.c2 * short_rate + noise);
  return std::max(s, 0.0);
}

double borrow_rate(const EconState& state) {
  return yield(state.curve, 1.0) + state.sIG;
}

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

// Cholesky factor with a PSD tolerance; zero rows are allowed.
Mat3 cholesky(const Mat3& a) {
  Mat3 l{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[i][j];
      for (int k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      if (i == j) {
        if (s < -1e-12) throw std::invalid_argument("covariance not PSD");
        l[i][i] = s > 0 ? std::sqrt(s) : 0.0;
      } else {
        l[i][j] = l[j][j] > 0 ? s / l[j][j] : 0.0;
      }
    }
  }
  return l;
}

struct MonthCounters {
  long pi = 0, spread = 0, gamma = 0;
};

// Advances state by the given number of monthly steps, drawing from rng.
// Fills out with the state after each month.
void simulate_months(EconState state, int months, const EconCoefficients& co,
                     const Mat3& factor_chol, const Mat3& resid_chol,
                     bool correlated, std::mt19937_64& rng,
                     std::vector<EconState>& out, MonthCounters& cnt) {
  std::normal_distribution<double> N(0.0, 1.0);
  const double dt = 1.0 / 12.0;
  out.clear();
  out.reserve(months);
  for (int h = 0; h < months; ++h) {
    double z[3] = {N(rng), N(rng), N(rng)};
    double e[3] = {N(rng), N(rng), N(rng)};
    if (correlated) {
      double w[3];
      for (int i = 0; i < 3; ++i) {
        w[i] = 0;
        for (int j = 0; j <= i; ++j) w[i] += resid_chol[i][j] * e[j];
      }
      for (int i = 0; i < 3; ++i) e[i] = w[i];
    }
    CurveState& cur = state.curve;
    cur.b1 += factor_chol[0][0] * z[0];
    cur.b2 += factor_chol[1][0] * z[0] + factor_chol[1][1] * z[1];
    cur.b3 += factor_chol[2][0] * z[0] + factor_chol[2][1] * z[1] +
              factor_chol[2][2] * z[2];
    double g = co.decay.a0 + co.decay.a1 * cur.b1 + co.decay.a2 * cur.b2 +
               co.decay.a3 * cur.b3 + co.decay.residStd * e[0];
    if (g < co.decay.floor) ++cnt.gamma;
    cur.gamma = std::max(g, co.decay.floor);

    double pi_raw = state.pi + co.inflation.aPi * (0.02 - state.pi) * dt +
                    co.inflation.sigmaPi * std::sqrt(std::max(state.pi, 0.0)) *
                        std::sqrt(dt) * e[1];
    if (pi_raw < 0) ++cnt.pi;
    state.pi = std::max(pi_raw, 0.0);

    double short_rate = yield(cur, 0.0);
    double u = co.spread.unitScale;
    double s_raw = u * (co.spread.c0 + co.spread.c1 * (state.sIG / u) +
                        co.spread.c2 * short_rate + co.spread.residStd * e[2]);
    if (s_raw < 0) ++cnt.spread;
    state.sIG = std::max(s_raw, 0.0);

    out.push_back(state);
  }
}

EconSimResult simulate_impl(const TreeTopology& topo,
                            const EconCoefficients& co, const EconState& init,
                            std::uint64_t seed, bool parallel) {
  Mat3 cov_month{};
  const double dt = 1.0 / 12.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) cov_month[i][j] = co.curveFactorCov[i][j] * dt;
  Mat3 factor_chol = cholesky(cov_month);
  Mat3 resid_chol{};
  bool correlated = co.residualCorrelation.has_value();
  if (correlated) resid_chol = cholesky(*co.residualCorrelation);

  int N = topo.num_nodes();
  EconSimResult res;
  res.node_state.resize(N);
  res.node_months.resize(N);
  res.node_state[0] = init;
  std::vector<MonthCounters> cnt(N);

  for (int t = 1; t < topo.num_stages(); ++t) {
    const auto& ids = topo.stage_nodes[t];
    int months = static_cast<int>(std::lround(topo.gap_months(t - 1)));
    long K = static_cast<long>(ids.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 64) if (parallel)
#endif
    for (long k = 0; k < K; ++k) {
      int m = ids[k];
      std::seed_seq sq{static_cast<std::uint32_t>(seed),
                       static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(m)};
      std::mt19937_64 rng(sq);
      simulate_months(res.node_state[topo.nodes[m].ancestor], months, co,
                      factor_chol, resid_chol, correlated, rng,
                      res.node_months[m], cnt[m]);
      res.node_state[m] = res.node_months[m].back();
    }
  }
  for (const auto& c : cnt) {
    res.pi_floor_hits += c.pi;
    res.spread_floor_hits += c.spread;
    res.gamma_floor_hits += c.gamma;
  }
  return res;
}

}  // namespace

EconSimResult simulate_econ_tree(const TreeTopology& topo,
                                 const EconCoefficients& coeffs,
                                 const EconState& init, std::uint64_t seed,
                                 bool parallel) {
  return simulate_impl(topo, coeffs, init, seed, parallel);
}

EconSimResult simulate_econ_tree_serial(const TreeTopology& topo,
                                        const EconCoefficients& coeffs,
                                        const EconState& init,
                                        std::uint64_t seed) {
  return simulate_impl(topo, coeffs, init, seed, false);
}

}  // namespace alm::econ
