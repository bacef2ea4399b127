#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "alm/config.hpp"
#include "alm/report.hpp"
#include "alm/tree.hpp"

namespace alm::pipe {

enum ExitCode {
  kOk = 0,
  kError = 1,
  kConfigError = 2,
  kInfeasible = 3,
  kVerifyFailed = 4,
};

struct VerifyReport {
  bool pass = true;
  bool ssd_checked = false;
  bool ssd_ok = true;
  double worst_ssd_violation = 0.0;
  bool oracle_checked = false;
  bool oracle_ok = true;
  double oracle_gap = 0.0;
  std::vector<std::string> notes;
};

/// Dominance checks on the solved policy: the one-step portfolio dominates
/// the phi-scaled benchmark at every last-but-one node, and the sequential
/// consequence holds at every earlier history. With `oracle`, also solves the
/// problem in extensive form and compares objectives (small trees only).
VerifyReport verify_solution(const ScenarioTree& tree, const rpt::Solution& s,
                             bool oracle, const lp::SolveOptions& lp_opts);

// Subcommand drivers; each returns an ExitCode and logs progress to `log`.
int cmd_generate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed, std::ostream& log);
int cmd_solve(const std::string& tree_path, const std::string& config_path,
              std::ostream& log);
int cmd_verify(const std::string& tree_path, const std::string& solution_path,
               bool oracle, std::ostream& log);
int cmd_report(const std::string& solution_path, const std::string& tree_path,
               const std::string& format, std::ostream& log);
int cmd_sweep(const std::string& config_path, const std::string& param,
              const std::vector<double>& values, const std::string& out_dir,
              std::ostream& log);

/// Threads used for sweeps and OpenMP regions; reads ALM_THREADS when set.
int thread_count();

}  // namespace alm::pipe
