#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "alm/econ.hpp"
#include "alm/tree.hpp"

namespace alm::coeff {

enum class AssetFamily { Cash, Treasury, Corporate, Equity, Currency };

struct AssetSpec {
  std::string id;
  AssetFamily family = AssetFamily::Treasury;
  double duration = 0.0;       // years, fixed income only
  std::array<double, 5> b{};   // regression coefficients b0..b4
  double residStd = 0.0;
};

struct LiabilitySpec {
  double L0 = 0.0;     // initial annual outflow, millions
  double muXi = 0.0;   // average annual growth
  double sigmaXi = 0.0;
};

struct RevenueSpec {
  double c0 = 0.0;
  double muRho = 0.0;
  double sigmaRho = 0.0;
};

/// Inputs of one monthly regression step.
struct Regressors {
  double prev_return = 0.0;                 // r_{i,t-1}
  const econ::EconState* prev = nullptr;    // state at t-1
  const econ::EconState* cur = nullptr;     // state at t
  double smallcap = 0.0;                    // small-cap equity return at t
  bool has_smallcap = false;
  double cash_anchor_yield = 0.0;           // 3m yield fixed one stage ahead
};

/// Monthly return of one asset; family selects the regressor set. Returns
/// are floored at -0.99. Throws if a corporate asset lacks the small-cap
/// return.
double asset_return_step(const AssetSpec& asset, const Regressors& reg,
                         double noise);

/// Product compounding of monthly returns into the inter-stage return.
double compound_stage_return(const std::vector<double>& monthly);

/// g_t = (1/t) sum_{h=1..t} rho_h with rho_h the cumulative return through
/// stage h; input is the stage return path r_1..r_t.
double gain_loss(const std::vector<double>& stage_returns);

/// Multiplicative growth path: each month the level is scaled by
/// (1+mu)^(1/12) + sigma sqrt(1/12) eps, factors floored at 0.01. Returns
/// `months` values, the level after each month.
std::vector<double> growth_path(double init, double mu, double sigma,
                                int months, std::mt19937_64& rng,
                                long* floor_hits = nullptr);

/// Monthly liability and revenue paths on the tree plus the single
/// non-branching continuation path per leaf used for valuation beyond the
/// last stage.
struct LiabilitySim {
  // [node][class][month], months strictly after the ancestor date.
  std::vector<std::vector<std::vector<double>>> node_months;
  // [node][class][month], nonempty only for leaves; covers Tlambda years.
  std::vector<std::vector<std::vector<double>>> leaf_ext;
  std::vector<std::vector<double>> node_L;  // [node][class], at node date
  std::vector<double> node_c;               // revenue at node date
  std::vector<std::vector<double>> c_months;  // [node][month]
  long growth_floor_hits = 0;
};

LiabilitySim simulate_liabilities(const TreeTopology& topo,
                                  const std::vector<LiabilitySpec>& specs,
                                  const RevenueSpec& revenue, int Tlambda,
                                  std::uint64_t seed, bool parallel = true);

struct LiabilityValues {
  // [node][class]
  std::vector<std::vector<double>> lambda;
  std::vector<std::vector<double>> deltaLambda;
};

/// Backward valuation: lambda_{j,n} is the conditional expectation over
/// descendant paths of the annual cash flows at offsets firstOffset..Tlambda
/// years, discounted on the node curve; deltaLambda is the time-weighted
/// version divided by lambda.
LiabilityValues liability_values(const TreeTopology& topo,
                                 const std::vector<econ::EconState>& states,
                                 const LiabilitySim& sim, int Tlambda,
                                 int firstOffset, bool parallel = true);

struct CoeffOptions {
  int Tlambda = 5;
  int lambdaFirstOffset = 0;  // first annual cash-flow offset in years
  int smallcapIndex = -1;     // asset index of the small-cap equity
  bool parallel = true;
};

struct CoeffResult {
  ScenarioTree tree;
  long return_floor_hits = 0;
  long growth_floor_hits = 0;
};

/// Full coefficient generation: asset stage returns and gain-loss factors
/// from the simulated economy, liability outflows, revenues, discounted
/// liability values, durations and borrowing rates, assembled per node.
CoeffResult generate_coefficients(const TreeTopology& topo,
                                  const econ::EconSimResult& econ_sim,
                                  const std::vector<AssetSpec>& assets,
                                  const std::vector<LiabilitySpec>& liabs,
                                  const RevenueSpec& revenue,
                                  std::uint64_t seed,
                                  const CoeffOptions& options);

}  // namespace alm::coeff
