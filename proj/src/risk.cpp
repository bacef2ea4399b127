#include "alm/risk.hpp"

#include <algorithm>
#include <stdexcept>

#include "alm/tree.hpp"

namespace alm::risk {

double mean_semideviation(const std::vector<double>& values,
                          const std::vector<double>& probs, double kappa) {
  if (values.size() != probs.size())
    throw std::invalid_argument("values/probs size mismatch");
  double mean = 0;
  for (size_t i = 0; i < values.size(); ++i) mean += probs[i] * values[i];
  double sd = 0;
  for (size_t i = 0; i < values.size(); ++i)
    sd += probs[i] * std::max(0.0, values[i] - mean);
  return mean + kappa * sd;
}

std::vector<double> risk_cut(const std::vector<double>& values,
                             const std::vector<double>& probs, double kappa) {
  double mean = 0;
  for (size_t i = 0; i < values.size(); ++i) mean += probs[i] * values[i];
  std::vector<double> h(values.size());
  double eh = 0;
  for (size_t i = 0; i < values.size(); ++i) {
    h[i] = values[i] >= mean ? kappa : 0.0;
    eh += probs[i] * h[i];
  }
  std::vector<double> mu(values.size());
  for (size_t i = 0; i < values.size(); ++i) mu[i] = 1.0 + h[i] - eh;
  return mu;
}

double nested_risk_evaluate(const TreeTopology& topo,
                            const std::vector<double>& stage_cost,
                            double kappa) {
  std::vector<double> val(topo.num_nodes());
  for (int t = topo.last_stage(); t >= 0; --t) {
    for (int n : topo.stage_nodes[t]) {
      val[n] = stage_cost[n];
      if (topo.is_leaf(n)) continue;
      std::vector<double> v, p;
      for (int m : topo.nodes[n].children) {
        v.push_back(val[m]);
        p.push_back(topo.cond_prob(m));
      }
      val[n] += mean_semideviation(v, p, kappa);
    }
  }
  return val[0];
}

}  // namespace alm::risk
