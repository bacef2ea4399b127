#pragma once

#include <vector>

namespace alm {
struct TreeTopology;
}

namespace alm::risk {

struct RiskSpec {
  double kappa = 0.1;       // weight on the upper semideviation, in [0,1]
  double wFloor = -1.0e6;   // lower bound for the risk value in subproblems
};

/// rho(Z) = E[Z] + kappa * E[(Z - E[Z])_+] for a cost variable Z given as
/// child values with conditional probabilities.
double mean_semideviation(const std::vector<double>& values,
                          const std::vector<double>& probs, double kappa);

/// Closed-form maximizer of sum_m p_m mu_m v_m over the dual set of the
/// mean-semideviation: mu_m = 1 + h_m - sum_k p_k h_k with
/// h_m = kappa * 1{v_m >= E[v]} (ties get kappa). The achieved value equals
/// mean_semideviation exactly; mu >= 0 and sum p_m mu_m = 1.
std::vector<double> risk_cut(const std::vector<double>& values,
                             const std::vector<double>& probs, double kappa);

/// Backward recursion of the nested measure: leaf value is its stage cost,
/// interior value is cost_n + rho over children.
double nested_risk_evaluate(const TreeTopology& topo,
                            const std::vector<double>& stage_cost,
                            double kappa);

}  // namespace alm::risk
