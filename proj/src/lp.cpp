#include "alm/lp.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <iomanip>

namespace alm::lp {

int LinearModel::add_var(std::string name, double lb, double ub, double cost) {
  assert(std::isfinite(lb));
  var_names_.push_back(std::move(name));
  lb_.push_back(lb);
  ub_.push_back(ub);
  cost_.push_back(cost);
  return static_cast<int>(cost_.size()) - 1;
}

int LinearModel::add_row(std::string name,
                         std::vector<std::pair<int, double>> coeffs,
                         Sense sense, double rhs, bool want_dual) {
  Row r;
  r.name = std::move(name);
  r.coeffs = std::move(coeffs);
  r.sense = sense;
  r.rhs = rhs;
  r.want_dual = want_dual;
  rows_.push_back(std::move(r));
  return static_cast<int>(rows_.size()) - 1;
}

void LinearModel::write_lp(std::ostream& os) const {
  os << std::setprecision(17);
  os << "Minimize\n obj:";
  for (int j = 0; j < num_vars(); ++j) {
    if (cost_[j] == 0.0) continue;
    os << (cost_[j] >= 0 ? " + " : " - ") << std::fabs(cost_[j]) << " "
       << var_names_[j];
  }
  os << "\nSubject To\n";
  for (const auto& r : rows_) {
    os << " " << r.name << ":";
    for (auto [j, a] : r.coeffs) {
      os << (a >= 0 ? " + " : " - ") << std::fabs(a) << " " << var_names_[j];
    }
    const char* op = r.sense == Sense::LE ? "<=" : r.sense == Sense::GE ? ">=" : "=";
    os << " " << op << " " << r.rhs << "\n";
  }
  os << "Bounds\n";
  for (int j = 0; j < num_vars(); ++j) {
    os << " " << lb_[j] << " <= " << var_names_[j];
    if (std::isfinite(ub_[j])) os << " <= " << ub_[j];
    os << "\n";
  }
  os << "End\n";
}

namespace {

// Dense two-phase tableau simplex. Sized for the node subproblems and small
// extensive forms this project builds (hundreds of variables).
class Tableau {
public:
  Status run(const LinearModel& model, const SolveOptions& opts,
             SolveResult& out);

private:
  struct WorkRow {
    std::vector<double> a;  // dense, over the internal nonnegative columns
    Sense sense;
    double rhs;
    double flip = 1.0;      // -1 when the row was negated for rhs >= 0
    int orig_index;         // index into model rows, or -1 for a bound row
    int ub_var = -1;        // variable whose upper bound this row encodes
    int lb_var = -1;        // variable whose negative lower bound it encodes
    int id_col = -1;        // column equal to e_i (slack or artificial)
    int art_col = -1;
  };

  int m_ = 0, ncols_ = 0, nvars_ = 0, nint_ = 0;
  std::vector<std::vector<double>> T_;  // m x (ncols+1), last col = rhs
  std::vector<int> basis_;
  std::vector<double> cost_;            // current phase costs per column
  std::vector<double> rc_;              // reduced costs
  std::vector<bool> is_artificial_;
  double objval_ = 0.0;

  void compute_reduced_costs();
  // Returns Optimal / Unbounded / NumericFailure.
  Status iterate(const SolveOptions& opts, bool ban_artificials);
  void pivot(int row, int col);
};

void Tableau::compute_reduced_costs() {
  rc_.assign(ncols_, 0.0);
  objval_ = 0.0;
  std::vector<double> cb(m_);
  for (int i = 0; i < m_; ++i) cb[i] = cost_[basis_[i]];
  for (int j = 0; j < ncols_; ++j) {
    double z = 0.0;
    for (int i = 0; i < m_; ++i)
      if (cb[i] != 0.0) z += cb[i] * T_[i][j];
    rc_[j] = cost_[j] - z;
  }
  for (int i = 0; i < m_; ++i) objval_ += cb[i] * T_[i][ncols_];
}

void Tableau::pivot(int prow, int pcol) {
  double piv = T_[prow][pcol];
  auto& pr = T_[prow];
  double inv = 1.0 / piv;
  for (int j = 0; j <= ncols_; ++j) pr[j] *= inv;
  pr[pcol] = 1.0;
  for (int i = 0; i < m_; ++i) {
    if (i == prow) continue;
    double f = T_[i][pcol];
    if (f == 0.0) continue;
    auto& ri = T_[i];
    for (int j = 0; j <= ncols_; ++j) ri[j] -= f * pr[j];
    ri[pcol] = 0.0;
  }
  double f = rc_[pcol];
  if (f != 0.0) {
    for (int j = 0; j < ncols_; ++j) rc_[j] -= f * pr[j];
    rc_[pcol] = 0.0;
    objval_ += f * pr[ncols_];
  }
  basis_[prow] = pcol;
}

Status Tableau::iterate(const SolveOptions& opts, bool ban_artificials) {
  int stall = 0;
  const int stall_limit = 2 * (m_ + ncols_) + 50;
  bool bland = false;
  int repriced_for = -1;
  for (int it = 0; it < opts.max_iters; ++it) {
    // The incremental reduced-cost updates drift on long runs; refresh them
    // from the tableau periodically.
    if (it > 0 && it % 32 == 0) compute_reduced_costs();
    // Entering variable.
    int pcol = -1;
    if (!bland) {
      double best = -opts.opt_tol;
      for (int j = 0; j < ncols_; ++j) {
        if (ban_artificials && is_artificial_[j]) continue;
        if (rc_[j] < best) {
          best = rc_[j];
          pcol = j;
        }
      }
    } else {
      for (int j = 0; j < ncols_; ++j) {
        if (ban_artificials && is_artificial_[j]) continue;
        if (rc_[j] < -opts.opt_tol) {
          pcol = j;
          break;
        }
      }
    }
    if (pcol < 0) return Status::Optimal;

    // Leaving variable: min-ratio test with a pivot-size tolerance. Basic
    // values can drift a hair negative, so the ratio floors them at zero;
    // near-tied ratios break toward the largest pivot element (or the
    // smallest basis index under Bland's rule).
    double amax = 0.0;
    for (int i = 0; i < m_; ++i) amax = std::max(amax, T_[i][pcol]);
    const double piv_tol = std::max(1e-9, 1e-7 * amax);
    int prow = -1;
    double best_ratio = 0.0;
    for (int i = 0; i < m_; ++i) {
      double a = T_[i][pcol];
      if (a <= piv_tol) continue;
      double ratio = std::max(T_[i][ncols_], 0.0) / a;
      if (prow < 0 || ratio < best_ratio - 1e-12) {
        prow = i;
        best_ratio = ratio;
      } else if (ratio < best_ratio + 1e-12) {
        bool better = bland ? basis_[i] < basis_[prow]
                            : a > T_[prow][pcol];
        if (better) {
          prow = i;
          best_ratio = std::min(best_ratio, ratio);
        }
      }
    }
    if (prow < 0) {
      // No blocking row. Re-price before trusting it: a stale negative
      // reduced cost on a numerically zero column looks exactly like a ray.
      if (repriced_for != pcol) {
        compute_reduced_costs();
        repriced_for = pcol;
        continue;
      }
      return Status::Unbounded;
    }
    repriced_for = -1;

    double before = objval_;
    pivot(prow, pcol);
    if (objval_ < before - 1e-12 * (1.0 + std::fabs(before))) {
      stall = 0;
      bland = false;
    } else if (++stall > stall_limit) {
      bland = true;  // anti-cycling fallback
    }
  }
  return Status::NumericFailure;
}

Status Tableau::run(const LinearModel& model, const SolveOptions& opts,
                    SolveResult& out) {
  nvars_ = model.num_vars();
  std::vector<double> lb(nvars_), shift(nvars_);
  // Variables with a negative lower bound become a nonnegative pair instead
  // of being shifted: shifting by a large floor (for example the -bigM value
  // floor on epigraph variables) would push that magnitude into every rhs and
  // wreck the tableau's conditioning. The bound itself moves into a dedicated
  // row that stays inert while the variable is in its natural range.
  std::vector<int> neg(nvars_, -1);
  nint_ = nvars_;
  for (int j = 0; j < nvars_; ++j) {
    lb[j] = model.lower_bound(j);
    if (!std::isfinite(lb[j])) return Status::NumericFailure;
    shift[j] = std::max(lb[j], 0.0);
    if (lb[j] < 0.0) neg[j] = nint_++;
  }

  std::vector<WorkRow> rows;
  rows.reserve(model.num_rows());
  std::vector<double> av(nvars_);
  for (int i = 0; i < model.num_rows(); ++i) {
    const auto& r = model.row(i);
    std::fill(av.begin(), av.end(), 0.0);
    for (auto [j, c] : r.coeffs) av[j] += c;
    WorkRow w;
    w.a.assign(nint_, 0.0);
    w.sense = r.sense;
    w.rhs = r.rhs;
    w.orig_index = i;
    for (int j = 0; j < nvars_; ++j) {
      w.a[j] = av[j];
      if (neg[j] >= 0) w.a[neg[j]] = -av[j];
      w.rhs -= av[j] * shift[j];
    }
    rows.push_back(std::move(w));
  }
  for (int j = 0; j < nvars_; ++j) {
    if (std::isfinite(model.upper_bound(j))) {
      WorkRow w;
      w.a.assign(nint_, 0.0);
      w.a[j] = 1.0;
      if (neg[j] >= 0) w.a[neg[j]] = -1.0;
      w.sense = Sense::LE;
      w.rhs = model.upper_bound(j) - shift[j];
      w.orig_index = -1;
      w.ub_var = j;
      rows.push_back(std::move(w));
    }
    if (lb[j] < 0.0) {
      WorkRow w;
      w.a.assign(nint_, 0.0);
      w.a[j] = -1.0;
      w.a[neg[j]] = 1.0;
      w.sense = Sense::LE;
      w.rhs = -lb[j];
      w.orig_index = -1;
      w.lb_var = j;
      rows.push_back(std::move(w));
    }
  }
  m_ = static_cast<int>(rows.size());

  for (auto& w : rows) {
    if (w.rhs < 0.0) {
      w.rhs = -w.rhs;
      for (auto& a : w.a) a = -a;
      w.sense = w.sense == Sense::LE   ? Sense::GE
                : w.sense == Sense::GE ? Sense::LE
                                       : Sense::EQ;
      w.flip = -1.0;
    }
  }

  // Column layout: internal structural columns, then slacks/surpluses/
  // artificials.
  ncols_ = nint_;
  for (auto& w : rows) {
    if (w.sense == Sense::LE) {
      w.id_col = ncols_++;
    } else if (w.sense == Sense::GE) {
      ncols_++;              // surplus
      w.art_col = ncols_++;  // artificial
      w.id_col = w.art_col;
    } else {
      w.art_col = ncols_++;
      w.id_col = w.art_col;
    }
  }

  is_artificial_.assign(ncols_, false);
  T_.assign(m_, std::vector<double>(ncols_ + 1, 0.0));
  basis_.assign(m_, -1);
  {
    int col = nint_;
    for (int i = 0; i < m_; ++i) {
      auto& w = rows[i];
      for (int j = 0; j < nint_; ++j) T_[i][j] = w.a[j];
      T_[i][ncols_] = w.rhs;
      if (w.sense == Sense::LE) {
        T_[i][col] = 1.0;
        basis_[i] = col;
        ++col;
      } else if (w.sense == Sense::GE) {
        T_[i][col] = -1.0;
        ++col;
        T_[i][col] = 1.0;
        is_artificial_[col] = true;
        basis_[i] = col;
        ++col;
      } else {
        T_[i][col] = 1.0;
        is_artificial_[col] = true;
        basis_[i] = col;
        ++col;
      }
    }
  }

  // Phase 1.
  bool need_phase1 = false;
  for (int i = 0; i < m_; ++i) need_phase1 |= is_artificial_[basis_[i]];
  if (need_phase1) {
    double scale = 1.0;
    for (const auto& w : rows)
      if (w.art_col >= 0) scale = std::max(scale, std::fabs(w.rhs));
    cost_.assign(ncols_, 0.0);
    for (int j = 0; j < ncols_; ++j)
      if (is_artificial_[j]) cost_[j] = 1.0;
    compute_reduced_costs();
    Status st = iterate(opts, false);
    if (st != Status::Optimal) return Status::NumericFailure;
    if (objval_ > opts.feas_tol * scale * 10.0 + opts.feas_tol) {
      // Infeasible: extract Farkas multipliers from the identity columns.
      out.status = Status::Infeasible;
      out.farkas.assign(model.num_rows(), 0.0);
      out.farkas_bound = 0.0;
      for (const auto& w : rows) {
        double cid = is_artificial_[w.id_col] ? 1.0 : 0.0;
        double y = cid - rc_[w.id_col];
        y *= w.flip;
        if (w.orig_index >= 0) {
          out.farkas[w.orig_index] = y;
          // y' A shift term with the original (unflipped) coefficients.
          for (int j = 0; j < nvars_; ++j)
            out.farkas_bound += y * w.flip * w.a[j] * shift[j];
        } else if (w.ub_var >= 0) {
          out.farkas_bound -=
              y * (model.upper_bound(w.ub_var) - shift[w.ub_var]);
        } else {
          out.farkas_bound += y * lb[w.lb_var];
        }
      }
      return Status::Infeasible;
    }
  }

  // Drive any degenerate basic artificials out of the basis so phase 2 never
  // mistakes a blocked direction for a ray.
  for (int i = 0; i < m_; ++i) {
    if (!is_artificial_[basis_[i]]) continue;
    int pcol = -1;
    double best = 1e-9;
    for (int j = 0; j < ncols_; ++j) {
      if (is_artificial_[j]) continue;
      if (std::fabs(T_[i][j]) > best) {
        best = std::fabs(T_[i][j]);
        pcol = j;
      }
    }
    // All-zero row: redundant constraint, the artificial stays at level zero.
    if (pcol >= 0) pivot(i, pcol);
  }

  // Phase 2.
  cost_.assign(ncols_, 0.0);
  for (int j = 0; j < nvars_; ++j) {
    cost_[j] = model.cost(j);
    if (neg[j] >= 0) cost_[neg[j]] = -model.cost(j);
  }
  compute_reduced_costs();
  Status st = iterate(opts, true);
  if (st != Status::Optimal) return st;

  out.status = Status::Optimal;
  std::vector<double> z(nint_, 0.0);
  for (int i = 0; i < m_; ++i)
    if (basis_[i] < nint_) z[basis_[i]] = T_[i][ncols_];
  out.x.assign(nvars_, 0.0);
  for (int j = 0; j < nvars_; ++j) {
    out.x[j] = z[j] + shift[j];
    if (neg[j] >= 0) out.x[j] -= z[neg[j]];
  }
  out.objective = model.objective_constant();
  for (int j = 0; j < nvars_; ++j) out.objective += model.cost(j) * out.x[j];
  out.duals.assign(model.num_rows(), 0.0);
  for (const auto& w : rows) {
    if (w.orig_index < 0) continue;
    double y = -rc_[w.id_col];  // identity columns carry zero phase-2 cost
    out.duals[w.orig_index] = y * w.flip;
  }
  return Status::Optimal;
}

}  // namespace

SolveResult solve(const LinearModel& model, const SolveOptions& opts) {
  SolveResult res;
  Tableau tab;
  res.status = tab.run(model, opts, res);
  return res;
}

}  // namespace alm::lp
