#pragma once

#include <string>
#include <vector>

#include "alm/lp.hpp"
#include "alm/model.hpp"
#include "alm/tree.hpp"

namespace alm::dec {

/// v_m >= intercept + <gx, x_n> + gb * b_n on the ancestor's decision.
struct ObjectiveCut {
  std::vector<double> gx;  // [I+1]
  double gb = 0.0;
  double intercept = 0.0;
  int iteration = 0;
};

/// <d, (x_n, b_n)> <= e, emitted by an infeasible child subproblem.
struct FeasibilityCut {
  std::vector<double> dx;  // [I+1]
  double db = 0.0;
  double e = 0.0;
  int iteration = 0;
};

/// Quantile-form dominance cut over the lower set S of children:
/// sum_{m in S} p_{n,m} X_{n,m} >= target = L_{phi Lambda}(P(S)).
struct EventCut {
  std::vector<int> members;  // child list indices
  double prob = 0.0;
  double target = 0.0;
  int iteration = 0;
};

struct SolveStats {
  int outer_iterations = 0;
  long nodes_solved = 0;
  long objective_cuts = 0;
  long risk_cuts = 0;
  long event_cuts = 0;
  long feasibility_cuts = 0;
  long max_event_loop = 0;  // worst inner separation loop length
  int active_event_nodes = 0;  // stage T-1 nodes with a tight event cut
  int dominance_nodes = 0;     // stage T-1 nodes carrying event cuts
  std::vector<double> root_bounds;  // root value after each outer sweep
  std::vector<std::string> log;
};

struct DecompOptions {
  double event_tol = 1e-8;    // separation stop threshold
  double improve_tol = 1e-7;  // relative value improvement worth a new cut
  double active_tol = 1e-6;   // slack threshold for an active event cut
  int max_outer = 200;
  bool parallel = true;
  bool worst_case_init = true;  // all-cash fallback otherwise
  lp::SolveOptions lp;
};

struct DecompResult {
  bool infeasible = false;
  double objective = 0.0;
  double K0 = 0.0;
  std::vector<NodePolicy> policy;  // indexed by node id
  SolveStats stats;
  // Final cut pools, exposed for verification and reporting.
  std::vector<std::vector<ObjectiveCut>> objective_pools;  // per owner node
  std::vector<std::vector<EventCut>> event_pools;
};

DecompResult solve_decomposed(const ScenarioTree& tree,
                              const ModelParams& params,
                              const DecompOptions& opts = {});

struct InitialGuess {
  std::vector<NodePolicy> policy;
  double K0 = 0.0;
  bool from_worst_path = false;  // false when the all-cash fallback was used
};

/// Deterministic single-scenario solve along the heaviest liability path,
/// stage decisions broadcast to every node; all-cash fallback when that path
/// problem is infeasible.
InitialGuess initialize_from_worst_case(const ScenarioTree& tree,
                                        const ModelParams& params);

}  // namespace alm::dec
