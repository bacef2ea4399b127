#pragma once

#include <vector>

#include "alm/lp.hpp"
#include "alm/model.hpp"
#include "alm/tree.hpp"

namespace alm::xf {

/// Joint LP over all nodes with the nested mean-semideviation objective in
/// epigraph form and per-atom shortfall rows for the dominance constraints.
/// Variable indices are kept for policy extraction and inspection.
struct ExtensiveModel {
  lp::LinearModel model;
  // [node][asset]; -1 where the variable does not exist at that node.
  std::vector<std::vector<int>> x, xPlus, xMinus;
  std::vector<int> b, bPlus, bMinus;  // -1 where absent
  std::vector<int> Y;                 // cost-to-go value per node
  std::vector<int> z;                 // upper deviation per non-root node
  int K0 = -1;
};

/// Throws std::invalid_argument on inconsistent parameter sizes and
/// std::length_error when the LP would exceed max_vars variables.
ExtensiveModel build_extensive(const ScenarioTree& tree,
                               const ModelParams& params,
                               int max_vars = 5000);

struct ExtensiveResult {
  lp::Status status = lp::Status::NumericFailure;
  double objective = 0.0;
  double K0 = 0.0;
  std::vector<NodePolicy> policy;  // indexed by node id
  int num_vars = 0;
  int num_rows = 0;
};

ExtensiveResult solve_extensive(const ScenarioTree& tree,
                                const ModelParams& params,
                                const lp::SolveOptions& opts = {});

struct CostToGo {
  lp::Status status = lp::Status::NumericFailure;
  double value = 0.0;
};

/// Exact cost-to-go of the subtree below `node` (its own stage cost plus the
/// nested risk of its descendants) given the fixed ancestor state (xa, ba).
/// Extensive LP over the subtree; verification helper for small trees.
CostToGo subtree_cost_to_go(const ScenarioTree& tree, const ModelParams& params,
                            int node, const std::vector<double>& xa, double ba,
                            const lp::SolveOptions& opts = {});

struct OracleComparison {
  double extensive_objective = 0.0;
  double other_objective = 0.0;
  double objective_gap = 0.0;   // relative, against max(1,|extensive|)
  double max_policy_dev = 0.0;  // max abs deviation over root decisions
};

/// Compares another solver's objective and root-stage policy against the
/// extensive solution.
OracleComparison oracle_compare(const ExtensiveResult& extensive,
                                double other_objective, double other_K0,
                                const NodePolicy& other_root);

}  // namespace alm::xf
