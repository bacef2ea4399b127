#pragma once

#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace alm::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LE, EQ, GE };

enum class Status { Optimal, Infeasible, Unbounded, NumericFailure };

/// Dense description of a small LP: min c'x + c0 subject to row constraints
/// and finite lower bounds on every variable. Upper bounds, when finite, are
/// materialized as extra rows at solve time.
class LinearModel {
public:
  struct Row {
    std::string name;
    std::vector<std::pair<int, double>> coeffs;
    Sense sense = Sense::EQ;
    double rhs = 0.0;
    bool want_dual = false;
  };

  int add_var(std::string name, double lb = 0.0, double ub = kInf,
              double cost = 0.0);
  int add_row(std::string name, std::vector<std::pair<int, double>> coeffs,
              Sense sense, double rhs, bool want_dual = false);

  void set_cost(int var, double cost) { cost_[var] = cost; }
  void set_objective_constant(double c0) { obj_const_ = c0; }

  int num_vars() const { return static_cast<int>(cost_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  const Row& row(int i) const { return rows_[i]; }
  const std::string& var_name(int j) const { return var_names_[j]; }
  double lower_bound(int j) const { return lb_[j]; }
  double upper_bound(int j) const { return ub_[j]; }
  double cost(int j) const { return cost_[j]; }
  double objective_constant() const { return obj_const_; }

  /// CPLEX-style LP text format, for external cross-checking.
  void write_lp(std::ostream& os) const;

private:
  std::vector<std::string> var_names_;
  std::vector<double> lb_, ub_, cost_;
  std::vector<Row> rows_;
  double obj_const_ = 0.0;
};

struct SolveResult {
  Status status = Status::NumericFailure;
  double objective = 0.0;
  std::vector<double> x;
  /// One entry per row. Convention: d(objective)/d(rhs_i); for a >= row in a
  /// min problem the dual is >= 0, for a <= row it is <= 0, free for ==.
  std::vector<double> duals;
  /// Farkas multipliers when infeasible (same row orientation as duals).
  /// For any rhs vector making the model feasible,
  /// sum_i farkas[i]*rhs[i] <= farkas_bound must hold; the generating rhs
  /// violates it strictly.
  std::vector<double> farkas;
  double farkas_bound = 0.0;
};

struct SolveOptions {
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  int max_iters = 200000;
};

SolveResult solve(const LinearModel& model, const SolveOptions& opts = {});

}  // namespace alm::lp
