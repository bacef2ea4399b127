#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "alm/coeff.hpp"
#include "alm/decomposer.hpp"
#include "alm/econ.hpp"
#include "alm/model.hpp"
#include "alm/tree.hpp"

namespace alm::cfg {

/// Carries every validation problem found, not just the first.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

private:
  std::vector<std::string> errors_;
};

/// One tradable asset plus its portfolio-level limits.
struct AssetEntry {
  coeff::AssetSpec spec;
  double thetaMin = 0.0;
  double thetaMax = 1.0;
  double xhat = 0.0;  // initial holding, millions
};

/// Full run description: tree layout, economy, asset universe, liabilities,
/// model parameters and solver tolerances. Currency in millions, rates as
/// fractions.
struct RunConfig {
  std::string name = "run";
  std::vector<double> stages{0, 1, 2, 3, 5};
  std::vector<int> branching{4, 4, 4, 4};
  std::uint64_t seed = 1;
  int tlambda = 5;             // liability valuation horizon, years
  int lambdaFirstOffset = 0;   // first annual cash-flow offset in years
  std::string smallcap;        // asset id feeding the corporate regressions

  // Objective and constraint parameters.
  double alpha = 0.5, beta = 1.0, phi = 1.0, deltaBar = 0.5, q = 0.4;
  double phiPlus = 0.001, phiMinus = 0.001, kappa = 0.1;
  double bigM = 1e6, wFloor = -1e6;

  econ::EconState init;
  econ::EconCoefficients econ;
  std::vector<AssetEntry> assets;  // order defines indices 1..I
  std::vector<coeff::LiabilitySpec> liabilities;
  coeff::RevenueSpec revenue;

  // Solver knobs.
  double feasTol = 1e-9, optTol = 1e-9;
  int maxIters = 200000;
  double eventTol = 1e-8, improveTol = 1e-7, activeTol = 1e-6;
  int maxOuter = 200;
  bool parallel = true;
  bool worstCaseInit = true;
};

/// Parses the sectioned key-value text format; throws ConfigError listing
/// every syntax and validation problem.
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::string& path);

/// Inverse of parse_config; 17 significant digits so the round trip is
/// lossless.
void write_config(const RunConfig& c, std::ostream& os);
void save_config(const RunConfig& c, const std::string& path);

/// Empty when the config is valid; otherwise one message per problem.
std::vector<std::string> validate(const RunConfig& c);

TreeTopology topology(const RunConfig& c);
ModelParams model_params(const RunConfig& c);
std::vector<coeff::AssetSpec> asset_specs(const RunConfig& c);
coeff::CoeffOptions coeff_options(const RunConfig& c);
dec::DecompOptions decomp_options(const RunConfig& c);
lp::SolveOptions lp_options(const RunConfig& c);

/// Economy plus coefficient generation in one call.
ScenarioTree generate_tree(const RunConfig& c, std::uint64_t seed);

}  // namespace alm::cfg
