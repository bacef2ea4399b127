#pragma once

#include <vector>

namespace alm {

/// Deterministic parameters of the allocation model. Asset index 0 is cash;
/// per-asset vectors cover the investment assets 1..I (index 0 unused).
struct ModelParams {
  double alpha = 0.5;     // trade-off between cumulative debt and profits
  double beta = 1.0;      // penalty on the initial investment
  double phi = 1.0;       // funding ratio scaling the liability benchmark
  double q = 0.4;         // maximum equity proportion
  double phiPlus = 0.001;   // buying transaction cost
  double phiMinus = 0.001;  // selling transaction cost
  double deltaBar = 0.5;  // maximum duration mismatch, years
  std::vector<double> thetaMin;   // [I+1], entry 0 ignored
  std::vector<double> thetaMax;   // [I+1], entry 0 ignored
  std::vector<double> xhat;       // [I+1] initial holdings, entry 0 ignored
  std::vector<char> fixedIncome;  // [I+1] class flags
  std::vector<char> equity;       // [I+1]
  std::vector<double> durationX;  // [I+1], years, fixed income only
  double kappa = 0.1;     // mean-semideviation weight
  double wFloor = -1.0e6; // lower bound for the nodal risk value
  double bigM = 1.0e6;    // lower bound -M for cost-to-go approximations
};

struct NodePolicy {
  std::vector<double> x;                // [I+1]
  std::vector<double> xPlus, xMinus;    // [I+1], entry 0 unused
  double b = 0, bPlus = 0, bMinus = 0;
};

}  // namespace alm
