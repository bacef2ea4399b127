#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "alm/decomposer.hpp"
#include "alm/model.hpp"
#include "alm/tree.hpp"

namespace alm::rpt {

/// Solved run: policy, headline numbers and the dominance cut pools, plus the
/// model parameters so downstream steps need no separate config.
struct Solution {
  bool infeasible = false;
  double objective = 0.0;
  double K0 = 0.0;
  int iterations = 0;
  long feasibility_cuts = 0;
  ModelParams params;
  std::vector<NodePolicy> policy;                       // by node id
  std::vector<std::vector<dec::EventCut>> event_pools;  // by node id
};

Solution from_result(const dec::DecompResult& res, const ModelParams& params);

/// Line-oriented text, 17 significant digits, lossless round trip.
void serialize_solution(const Solution& s, std::ostream& os);
Solution deserialize_solution(std::istream& is);
void save_solution(const Solution& s, const std::string& path);
Solution load_solution(const std::string& path);

struct StageStat {
  double mean = 0.0;
  double stdev = 0.0;
};

/// Duration-mismatch bins: lower bound active, (-deltaBar, 0], (0, deltaBar),
/// upper bound active; probability-weighted shares over non-leaf nodes.
struct ReportTables {
  double objective = 0.0;
  double K0 = 0.0;
  bool liabilities_present = true;
  double FR0 = 0.0;          // portfolio value over liability value at stage 0
  double mean_FR_T = 0.0;    // probability-weighted over leaves
  std::vector<StageStat> debt;    // index = stage, entry 0 always zero
  std::vector<StageStat> profit;  // cumulative realized gains per stage
  std::array<double, 4> mismatch = {0, 0, 0, 0};
  double active_ssd_fraction = 0.0;  // stage T-1 nodes with a tight event cut
  int dominance_nodes = 0;           // stage T-1 nodes carrying event cuts
};

/// Pure function of (solution, tree): rerunning on saved artifacts is
/// bit-identical. Cut activity uses an absolute slack tolerance of 1e-6.
ReportTables report_tables(const ScenarioTree& tree, const Solution& s);

void write_report_csv(const ReportTables& t, std::ostream& os);
void write_report_json(const ReportTables& t, std::ostream& os);

/// First- and second-order CDF curves at a stage-(T-1) node: the one-step
/// portfolio under `with` and optionally `without`, and the phi-scaled
/// liability benchmark. Long-format CSV: curve,order,eta,value.
void export_cdf(const ScenarioTree& tree, const Solution& with,
                const Solution* without, int node, std::ostream& os);

}  // namespace alm::rpt
