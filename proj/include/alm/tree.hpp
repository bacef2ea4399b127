#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace alm {

struct TreeNode {
  int id = 0;
  int stage = 0;
  int ancestor = -1;  // -1 for the root
  std::vector<int> children;
  double p = 1.0;  // path probability
};

/// Non-recombining scenario tree. Node ids are breadth-first by stage, so
/// the layout is deterministic given (stages, branching).
struct TreeTopology {
  std::vector<double> stages;  // stage dates in years, e.g. {0,1,2,3,5}
  std::vector<int> branching;  // children per node, one entry per transition
  std::vector<TreeNode> nodes;
  std::vector<std::vector<int>> stage_nodes;  // ids grouped by stage

  int num_stages() const { return static_cast<int>(stages.size()); }
  int last_stage() const { return num_stages() - 1; }
  int num_nodes() const { return static_cast<int>(nodes.size()); }
  bool is_leaf(int n) const { return nodes[n].children.empty(); }
  /// p_{a(m),m} = p_m / p_{a(m)}; 1 for the root.
  double cond_prob(int m) const {
    int a = nodes[m].ancestor;
    return a < 0 ? 1.0 : nodes[m].p / nodes[a].p;
  }
  /// Months between stage t and t+1; stage dates may be unevenly spaced.
  double gap_months(int t) const { return (stages[t + 1] - stages[t]) * 12.0; }
};

/// Throws std::invalid_argument on empty stages or nonpositive branching.
TreeTopology build_topology(const std::vector<double>& stages,
                            const std::vector<int>& branching);

/// One row per leaf scenario, one column per stage; entry (s,t) is the unique
/// stage-t node on leaf s's root path.
std::vector<std::vector<int>> nodal_partition_matrix(const TreeTopology& topo);

/// Per-node stochastic data. r includes cash at index 0; g, per-asset
/// gain-loss, starts at asset 1 (cash has none). Amounts are in millions.
struct NodeCoefficients {
  std::vector<double> r;            // price return over the inter-stage period
  std::vector<double> g;            // gain-loss coefficients, assets 1..I
  std::vector<double> L;            // cash outflow per liability class
  double c = 0.0;                   // core revenue
  std::vector<double> lambda;       // discounted liability value per class
  std::vector<double> deltaLambda;  // liability duration per class, years
  double rMinus = 0.0;              // borrowing rate p.a.

  double Lambda() const {
    double s = 0;
    for (double v : lambda) s += v;
    return s;
  }
};

struct ScenarioTree {
  TreeTopology topo;
  std::vector<NodeCoefficients> coeff;  // indexed by node id

  int num_assets() const {  // including cash
    return coeff.empty() ? 0 : static_cast<int>(coeff[0].r.size());
  }
  int num_liabilities() const {
    return coeff.empty() ? 0 : static_cast<int>(coeff[0].L.size());
  }
};

class TreeParseError : public std::runtime_error {
public:
  TreeParseError(int line, const std::string& what)
      : std::runtime_error("tree line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

/// Line-oriented text table: header `stages=<csv>;branching=<csv>`, then one
/// CSV row per node. Numbers use 17 significant digits so the round trip is
/// bit exact.
void serialize_tree(const ScenarioTree& tree, std::ostream& os);
ScenarioTree deserialize_tree(std::istream& is);

void save_tree(const ScenarioTree& tree, const std::string& path);
ScenarioTree load_tree(const std::string& path);

}  // namespace alm
