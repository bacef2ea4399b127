#include "alm/dominance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "alm/tree.hpp"

namespace alm::dom {

DiscreteDistribution::DiscreteDistribution(
    std::vector<std::pair<double, double>> atoms)
    : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("distribution needs atoms");
  std::sort(atoms_.begin(), atoms_.end());
  size_t w = 0;
  for (size_t i = 1; i < atoms_.size(); ++i) {
    if (atoms_[i].first == atoms_[w].first)
      atoms_[w].second += atoms_[i].second;
    else
      atoms_[++w] = atoms_[i];
  }
  atoms_.resize(w + 1);
  double total = 0;
  for (auto& [v, p] : atoms_) {
    if (p <= 0) throw std::invalid_argument("atom probabilities must be > 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("atom probabilities must sum to 1");
}

double DiscreteDistribution::mean() const {
  double m = 0;
  for (auto [v, p] : atoms_) m += v * p;
  return m;
}

double cdf(const DiscreteDistribution& d, double eta) {
  double f = 0;
  for (auto [v, p] : d.atoms())
    if (v <= eta) f += p;
  return f;
}

double survival(const DiscreteDistribution& d, double eta) {
  return 1.0 - cdf(d, eta);
}

double quantile(const DiscreteDistribution& d, double p) {
  if (p <= 0 || p > 1) throw std::invalid_argument("quantile needs 0 < p <= 1");
  double cum = 0;
  for (auto [v, q] : d.atoms()) {
    cum += q;
    if (cum >= p - 1e-15) return v;
  }
  return d.atoms().back().first;
}

double integrated_cdf(const DiscreteDistribution& d, double eta) {
  double s = 0;
  for (auto [v, p] : d.atoms()) s += p * std::max(0.0, eta - v);
  return s;
}

double integrated_cdf_k(const DiscreteDistribution& d, double eta, int k) {
  if (k < 2) throw std::invalid_argument("order must be >= 2");
  // F^(k)(eta) = sum_atoms p * (eta - v)_+^(k-1) / (k-1)!, exact repeated
  // integration of the step CDF.
  double fact = 1;
  for (int i = 2; i < k; ++i) fact *= i;
  double s = 0;
  for (auto [v, p] : d.atoms()) {
    double t = std::max(0.0, eta - v);
    s += p * std::pow(t, k - 1) / fact;
  }
  return s;
}

double lorenz(const DiscreteDistribution& d, double p) {
  if (p < 0 || p > 1) throw std::invalid_argument("lorenz needs 0 <= p <= 1");
  double acc = 0, cum = 0;
  for (auto [v, q] : d.atoms()) {
    double take = std::min(q, p - cum);
    if (take <= 0) break;
    acc += v * take;
    cum += take;
  }
  return acc;
}

SsdResult ssd_dominates(const DiscreteDistribution& x,
                        const DiscreteDistribution& y, double tol) {
  // Both Lorenz functions are piecewise linear, so it suffices to compare at
  // the union of their probability breakpoints.
  std::vector<double> ps{1.0};
  double cum = 0;
  for (auto [v, q] : x.atoms()) { cum += q; ps.push_back(std::min(cum, 1.0)); }
  cum = 0;
  for (auto [v, q] : y.atoms()) { cum += q; ps.push_back(std::min(cum, 1.0)); }
  SsdResult res;
  res.worst_violation = -std::numeric_limits<double>::infinity();
  for (double p : ps) {
    double gap = lorenz(y, p) - lorenz(x, p);
    if (gap > res.worst_violation) {
      res.worst_violation = gap;
      res.worst_p = p;
    }
  }
  res.dominates = res.worst_violation <= tol;
  return res;
}

double conjugacy_check(const DiscreteDistribution& d,
                       const std::vector<double>& p_grid) {
  double worst = 0;
  for (double p : p_grid) {
    double conj = -std::numeric_limits<double>::infinity();
    for (auto [eta, q] : d.atoms())
      conj = std::max(conj, p * eta - integrated_cdf(d, eta));
    if (p == 0) conj = std::max(conj, 0.0);  // sup attained at eta -> -inf
    worst = std::max(worst, std::abs(lorenz(d, p) - conj));
  }
  return worst;
}

double project_future_value(const SequentialProcess& proc, int node) {
  const TreeTopology& t = *proc.tree;
  double v = proc.value[node];
  for (int m : t.nodes[node].children)
    v += t.cond_prob(m) * project_future_value(proc, m);
  return v;
}

namespace {

// Conditional one-step distribution at node n of the collapsed tail values,
// optionally shifted by sigma = value at n itself.
DiscreteDistribution child_tail_distribution(const SequentialProcess& proc,
                                             int n, double shift) {
  const TreeTopology& t = *proc.tree;
  std::vector<std::pair<double, double>> atoms;
  for (int m : t.nodes[n].children)
    atoms.push_back({shift + project_future_value(proc, m), t.cond_prob(m)});
  return DiscreteDistribution(std::move(atoms));
}

}  // namespace

SequentialCheck check_sequential_ssd(const SequentialProcess& x,
                                     const SequentialProcess& y, double tol) {
  const TreeTopology& t = *x.tree;
  SequentialCheck out;
  for (const auto& n : t.nodes) {
    if (n.children.empty()) continue;
    // sigma_t is the accumulated difference of X and Y along the history up
    // to and including n.
    double sigma = 0;
    for (int a = n.id; a >= 0; a = t.nodes[a].ancestor)
      sigma += x.value[a] - y.value[a];
    auto dx = child_tail_distribution(x, n.id, sigma);
    auto dy = child_tail_distribution(y, n.id, 0.0);
    auto r = ssd_dominates(dx, dy, tol);
    out.violation[n.id] = r.worst_violation;
    if (!r.dominates) out.pass = false;
  }
  return out;
}

DominancePropagation dominance_propagation(const SequentialProcess& x,
                                 const SequentialProcess& y, double tol) {
  const TreeTopology& t = *x.tree;
  DominancePropagation out;
  out.premise = true;
  for (int n : t.stage_nodes[t.last_stage() - 1]) {
    double sigma = 0;
    for (int a = n; a >= 0; a = t.nodes[a].ancestor)
      sigma += x.value[a] - y.value[a];
    auto dx = child_tail_distribution(x, n, sigma);
    auto dy = child_tail_distribution(y, n, 0.0);
    if (!ssd_dominates(dx, dy, tol).dominates) out.premise = false;
  }
  out.conclusion = check_sequential_ssd(x, y, tol).pass;
  return out;
}

SeparationResult separation_oracle(const std::vector<double>& x_values,
                                   const std::vector<double>& probs,
                                   const DiscreteDistribution& benchmark) {
  size_t n = x_values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return x_values[a] < x_values[b]; });

  SeparationResult best;
  best.delta = -std::numeric_limits<double>::infinity();
  double ps = 0, sum = 0;
  std::vector<int> event;
  for (size_t k = 0; k < n; ++k) {
    size_t i = order[k];
    ps += probs[i];
    sum += probs[i] * x_values[i];
    event.push_back(static_cast<int>(i));
    // Lower sets are level sets {X <= eta}; extend through ties before
    // evaluating.
    if (k + 1 < n && x_values[order[k + 1]] == x_values[i]) continue;
    double target = lorenz(benchmark, std::min(ps, 1.0)) / ps;
    double delta = target - sum / ps;
    if (delta > best.delta) {  // strict: ties keep the smallest eta
      best.delta = delta;
      best.event = event;
      best.event_prob = ps;
      best.target = target;
    }
  }
  return best;
}

void dump_cdf_csv(const DiscreteDistribution& d, std::ostream& os,
                  bool second_order) {
  os << (second_order ? "eta,F2\n" : "eta,F\n");
  for (auto [v, p] : d.atoms()) {
    os << v << ',' << (second_order ? integrated_cdf(d, v) : cdf(d, v))
       << '\n';
  }
}

}  // namespace alm::dom
