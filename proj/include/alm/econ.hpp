#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace alm {
struct TreeTopology;
}

namespace alm::econ {

struct CurveState {
  double b1 = 0, b2 = 0, b3 = 0;  // level, slope, convexity factors
  double gamma = 1.0;             // decay factor, years
};

struct EconState {
  CurveState curve;
  double pi = 0.0;   // annual inflation, fraction
  double sIG = 0.0;  // investment-grade credit spread, fraction p.a.
};

struct DecayCoefficients {
  double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
  double residStd = 0.0;
  double floor = 0.5;  // years; keeps the curve formula well conditioned
};

struct InflationCoefficients {
  double aPi = 0.0;      // mean-reversion speed toward the 2% target
  double sigmaPi = 0.0;  // square-root diffusion volatility
};

struct SpreadCoefficients {
  double c0 = 0, c1 = 0, c2 = 0;
  double residStd = 0.0;
  // The AR recursion runs in the units the coefficients were estimated in;
  // unitScale converts to fractions (1 = already fractional).
  double unitScale = 1.0;
};

struct EconCoefficients {
  std::array<std::array<double, 3>, 3> curveFactorCov{};  // per year
  DecayCoefficients decay;
  InflationCoefficients inflation;
  SpreadCoefficients spread;
  // Optional correlation among the (gamma, pi, spread) residual draws.
  std::optional<std::array<std::array<double, 3>, 3>> residualCorrelation;
};

/// Nelson-Siegel-Svensson: y = b1 + b2 e^{-tau/g} + b3 (tau/g) e^{-tau/g}.
/// yield(curve, 0) = b1 + b2, the instantaneous short rate.
double yield(const CurveState& curve, double tau);

double decay_factor(double b1, double b2, double b3,
                    const DecayCoefficients& coeffs, double noise);

/// pi + aPi (0.02 - pi) dt + sigmaPi sqrt(pi) sqrt(dt) noise, floored at 0.
double step_inflation(double pi_prev, double dt,
                      const InflationCoefficients& coeffs, double noise);

/// c0 + c1 s_prev + c2 shortRate + noise in table units (see unitScale),
/// floored at 0; shortRate and the result are fractions.
double step_spread(double s_prev, double short_rate,
                   const SpreadCoefficients& coeffs, double noise);

double borrow_rate(const EconState& state);  // 1y yield + spread

struct EconSimResult {
  std::vector<EconState> node_state;  // at each node's stage date
  // Monthly states strictly after the ancestor date up to and including the
  // node date; empty for the root.
  std::vector<std::vector<EconState>> node_months;
  long pi_floor_hits = 0;
  long spread_floor_hits = 0;
  long gamma_floor_hits = 0;
};

/// Monthly simulation of the factor random walk, decay regression, inflation
/// and spread recursions along every tree branch. Every node draws from its
/// own (seed, node id) stream, so results do not depend on thread schedule.
EconSimResult simulate_econ_tree(const TreeTopology& topo,
                                 const EconCoefficients& coeffs,
                                 const EconState& init, std::uint64_t seed,
                                 bool parallel = true);

/// Plain single-threaded reference of the same computation.
EconSimResult simulate_econ_tree_serial(const TreeTopology& topo,
                                        const EconCoefficients& coeffs,
                                        const EconState& init,
                                        std::uint64_t seed);

}  // namespace alm::econ
