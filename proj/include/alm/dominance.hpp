#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

namespace alm {
struct TreeTopology;
}

namespace alm::dom {

/// Finite distribution in canonical form: atoms sorted by value, equal
/// values merged, probabilities summing to 1.
class DiscreteDistribution {
public:
  DiscreteDistribution() = default;
  explicit DiscreteDistribution(std::vector<std::pair<double, double>> atoms);

  const std::vector<std::pair<double, double>>& atoms() const { return atoms_; }
  double mean() const;
  double min_value() const { return atoms_.front().first; }
  double max_value() const { return atoms_.back().first; }

private:
  std::vector<std::pair<double, double>> atoms_;  // (value, prob)
};

double cdf(const DiscreteDistribution& d, double eta);
double survival(const DiscreteDistribution& d, double eta);
/// Left-continuous inverse: inf{eta : F(eta) >= p}, 0 < p <= 1.
double quantile(const DiscreteDistribution& d, double p);

/// F^(2)(eta) = E[eta - Z]_+.
double integrated_cdf(const DiscreteDistribution& d, double eta);
/// F^(k), k >= 2, by exact repeated integration of the piecewise step CDF.
double integrated_cdf_k(const DiscreteDistribution& d, double eta, int k);

/// Absolute Lorenz function: integral of the quantile from 0 to p.
double lorenz(const DiscreteDistribution& d, double p);

struct SsdResult {
  bool dominates = false;
  double worst_violation = 0.0;  // max_p (L_y - L_x), positive when violated
  double worst_p = 0.0;
};

/// x >=_(2) y iff L_x(p) >= L_y(p) at every Lorenz breakpoint of either side.
SsdResult ssd_dominates(const DiscreteDistribution& x,
                        const DiscreteDistribution& y, double tol = 1e-8);

/// Max gap |L(p) - sup_eta (p*eta - F2(eta))| over the given p grid, with eta
/// restricted to atom values.
double conjugacy_check(const DiscreteDistribution& d,
                       const std::vector<double>& p_grid);

/// Process on a scenario tree: one value per node.
struct SequentialProcess {
  const TreeTopology* tree = nullptr;
  std::vector<double> value;  // indexed by node id
};

/// Nested conditional expectation of the tail: V(n) = X_n + sum p~ V(child);
/// the "projected future value" collapsed below node n.
double project_future_value(const SequentialProcess& proc, int node);

struct SequentialCheck {
  bool pass = true;
  // (node id) -> worst violation at that history; only non-leaf nodes appear.
  std::map<int, double> violation;
};

/// Checks sigma_t + X_{t+1}|history >=_(2) Y_{t+1}|history at every non-leaf
/// node, where the one-step distributions place the collapsed tail values on
/// the children.
SequentialCheck check_sequential_ssd(const SequentialProcess& x,
                                     const SequentialProcess& y, double tol);

struct DominancePropagation {
  bool premise = false;     // SSD at every stage T-1 history
  bool conclusion = false;  // sequential SSD at every earlier history
};

DominancePropagation dominance_propagation(const SequentialProcess& x,
                                 const SequentialProcess& y, double tol);

struct SeparationResult {
  double delta = 0.0;          // worst normalized violation
  std::vector<int> event;      // indices into the child list (lower set)
  double event_prob = 0.0;     // P(S)
  double target = 0.0;         // (1/P(S)) * L_benchmark(P(S))
};

/// Event-cut separation: X given as child realizations with conditional
/// probabilities; delta <= 0 certifies the quantile-form SSD constraints at
/// all lower sets. Ties in the argmax break toward the smallest eta.
SeparationResult separation_oracle(const std::vector<double>& x_values,
                                   const std::vector<double>& probs,
                                   const DiscreteDistribution& benchmark);

/// Two-column CSV dump (abscissa, value) of the CDF or F^(2) for plotting.
void dump_cdf_csv(const DiscreteDistribution& d, std::ostream& os,
                  bool second_order);

}  // namespace alm::dom
