#include "alm/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "alm/dominance.hpp"

namespace alm::rpt {

namespace {

constexpr double kActiveTol = 1e-6;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += fmt(v[i]);
  }
  return s;
}

std::vector<double> split_csv(const std::string& s, int line) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw std::runtime_error("solution line " + std::to_string(line) +
                               ": bad number '" + item + "'");
    }
  }
  return out;
}

/// key=value;key=value tokens on one line.
std::vector<std::pair<std::string, std::string>> kv_pairs(
    const std::string& s) {
  std::vector<std::pair<std::string, std::string>> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ';')) {
    size_t eq = tok.find('=');
    if (eq == std::string::npos) continue;
    std::string k = tok.substr(0, eq);
    k.erase(0, k.find_first_not_of(" \t"));
    out.emplace_back(std::move(k), tok.substr(eq + 1));
  }
  return out;
}

double portfolio_value(const NodePolicy& pol) {
  double v = 0;
  for (double xi : pol.x) v += xi;
  return v;
}

/// One-step portfolio value at child m from the decision at its ancestor.
double one_step_value(const ScenarioTree& t, const NodePolicy& at_anc, int m) {
  double v = 0;
  for (size_t i = 0; i < at_anc.x.size(); ++i)
    v += at_anc.x[i] * (1.0 + t.coeff[m].r[i]);
  return v;
}

}  // namespace

Solution from_result(const dec::DecompResult& res, const ModelParams& params) {
  Solution s;
  s.infeasible = res.infeasible;
  s.objective = res.objective;
  s.K0 = res.K0;
  s.iterations = res.stats.outer_iterations;
  s.feasibility_cuts = res.stats.feasibility_cuts;
  s.params = params;
  s.policy = res.policy;
  s.event_pools = res.event_pools;
  return s;
}

void serialize_solution(const Solution& s, std::ostream& os) {
  os << "alm-solution 1\n";
  os << "summary objective=" << fmt(s.objective) << ";K0=" << fmt(s.K0)
     << ";infeasible=" << (s.infeasible ? 1 : 0)
     << ";iterations=" << s.iterations
     << ";feasibility_cuts=" << s.feasibility_cuts << "\n";
  const auto& p = s.params;
  os << "params alpha=" << fmt(p.alpha) << ";beta=" << fmt(p.beta)
     << ";phi=" << fmt(p.phi) << ";q=" << fmt(p.q)
     << ";phi_plus=" << fmt(p.phiPlus) << ";phi_minus=" << fmt(p.phiMinus)
     << ";delta_bar=" << fmt(p.deltaBar) << ";kappa=" << fmt(p.kappa)
     << ";w_floor=" << fmt(p.wFloor) << ";big_m=" << fmt(p.bigM) << "\n";
  os << "vec theta_min " << join(p.thetaMin) << "\n";
  os << "vec theta_max " << join(p.thetaMax) << "\n";
  os << "vec xhat " << join(p.xhat) << "\n";
  os << "vec duration " << join(p.durationX) << "\n";
  {
    std::vector<double> fi(p.fixedIncome.begin(), p.fixedIncome.end());
    std::vector<double> eq(p.equity.begin(), p.equity.end());
    os << "vec fixed_income " << join(fi) << "\n";
    os << "vec equity " << join(eq) << "\n";
  }
  for (size_t n = 0; n < s.policy.size(); ++n) {
    const auto& pol = s.policy[n];
    os << "node " << n << " b=" << fmt(pol.b) << ";bp=" << fmt(pol.bPlus)
       << ";bm=" << fmt(pol.bMinus) << " x " << join(pol.x);
    if (!pol.xPlus.empty()) os << " xp " << join(pol.xPlus);
    if (!pol.xMinus.empty()) os << " xm " << join(pol.xMinus);
    os << "\n";
  }
  for (size_t n = 0; n < s.event_pools.size(); ++n)
    for (const auto& ec : s.event_pools[n]) {
      os << "event " << n << " prob=" << fmt(ec.prob)
         << ";target=" << fmt(ec.target) << " members ";
      for (size_t k = 0; k < ec.members.size(); ++k)
        os << (k ? "," : "") << ec.members[k];
      os << "\n";
    }
}

Solution deserialize_solution(std::istream& is) {
  Solution s;
  std::string line;
  int ln = 0;
  auto bad = [&](const std::string& what) {
    throw std::runtime_error("solution line " + std::to_string(ln) + ": " +
                             what);
  };
  if (!std::getline(is, line) || line != "alm-solution 1")
    throw std::runtime_error("not a solution file");
  ln = 1;
  size_t max_node = 0;
  std::vector<std::tuple<int, dec::EventCut>> events;
  while (std::getline(is, line)) {
    ++ln;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "summary" || tag == "params") {
      std::string rest;
      std::getline(ss, rest);
      for (auto& [k, v] : kv_pairs(rest)) {
        double d = 0;
        try {
          d = std::stod(v);
        } catch (const std::exception&) {
          bad("bad value for " + k);
        }
        if (tag == "summary") {
          if (k == "objective") s.objective = d;
          else if (k == "K0") s.K0 = d;
          else if (k == "infeasible") s.infeasible = d != 0;
          else if (k == "iterations") s.iterations = static_cast<int>(d);
          else if (k == "feasibility_cuts")
            s.feasibility_cuts = static_cast<long>(d);
        } else {
          auto& p = s.params;
          if (k == "alpha") p.alpha = d;
          else if (k == "beta") p.beta = d;
          else if (k == "phi") p.phi = d;
          else if (k == "q") p.q = d;
          else if (k == "phi_plus") p.phiPlus = d;
          else if (k == "phi_minus") p.phiMinus = d;
          else if (k == "delta_bar") p.deltaBar = d;
          else if (k == "kappa") p.kappa = d;
          else if (k == "w_floor") p.wFloor = d;
          else if (k == "big_m") p.bigM = d;
        }
      }
    } else if (tag == "vec") {
      std::string name, csv;
      ss >> name >> csv;
      std::vector<double> v = split_csv(csv, ln);
      auto& p = s.params;
      if (name == "theta_min") p.thetaMin = v;
      else if (name == "theta_max") p.thetaMax = v;
      else if (name == "xhat") p.xhat = v;
      else if (name == "duration") p.durationX = v;
      else if (name == "fixed_income")
        p.fixedIncome.assign(v.begin(), v.end());
      else if (name == "equity") p.equity.assign(v.begin(), v.end());
      else bad("unknown vector '" + name + "'");
    } else if (tag == "node") {
      size_t id;
      ss >> id;
      max_node = std::max(max_node, id);
      if (s.policy.size() <= id) s.policy.resize(id + 1);
      NodePolicy& pol = s.policy[id];
      std::string tok;
      while (ss >> tok) {
        if (tok == "x" || tok == "xp" || tok == "xm") {
          std::string csv;
          ss >> csv;
          std::vector<double> v = split_csv(csv, ln);
          if (tok == "x") pol.x = v;
          else if (tok == "xp") pol.xPlus = v;
          else pol.xMinus = v;
        } else {
          for (auto& [k, v] : kv_pairs(tok)) {
            double d = 0;
            try {
              d = std::stod(v);
            } catch (const std::exception&) {
              bad("bad value for " + k);
            }
            if (k == "b") pol.b = d;
            else if (k == "bp") pol.bPlus = d;
            else if (k == "bm") pol.bMinus = d;
          }
        }
      }
    } else if (tag == "event") {
      size_t id;
      ss >> id;
      dec::EventCut ec;
      std::string tok;
      while (ss >> tok) {
        if (tok == "members") {
          std::string csv;
          ss >> csv;
          for (double d : split_csv(csv, ln))
            ec.members.push_back(static_cast<int>(d));
        } else {
          for (auto& [k, v] : kv_pairs(tok)) {
            double d = 0;
            try {
              d = std::stod(v);
            } catch (const std::exception&) {
              bad("bad value for " + k);
            }
            if (k == "prob") ec.prob = d;
            else if (k == "target") ec.target = d;
          }
        }
      }
      events.emplace_back(static_cast<int>(id), std::move(ec));
      max_node = std::max(max_node, id);
    } else {
      bad("unknown record '" + tag + "'");
    }
  }
  s.event_pools.resize(max_node + 1);
  if (s.policy.size() < max_node + 1) s.policy.resize(max_node + 1);
  for (auto& [id, ec] : events) s.event_pools[id].push_back(std::move(ec));
  return s;
}

void save_solution(const Solution& s, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  serialize_solution(s, f);
}

Solution load_solution(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  return deserialize_solution(f);
}

ReportTables report_tables(const ScenarioTree& tree, const Solution& s) {
  const auto& topo = tree.topo;
  const int T = topo.last_stage();
  ReportTables out;
  out.objective = s.objective;
  out.K0 = s.K0;

  out.debt.assign(T + 1, {});
  out.profit.assign(T + 1, {});
  std::vector<double> cum_profit(topo.num_nodes(), 0.0);
  for (int t = 1; t <= T; ++t) {
    double m1 = 0, m2 = 0, p1 = 0, p2 = 0;
    for (int n : topo.stage_nodes[t]) {
      const auto& pol = s.policy[n];
      double prof = cum_profit[topo.nodes[n].ancestor];
      for (size_t i = 1; i < pol.xMinus.size(); ++i)
        prof += tree.coeff[n].g[i - 1] * pol.xMinus[i];
      cum_profit[n] = prof;
      double w = topo.nodes[n].p;
      m1 += w * pol.b;
      m2 += w * pol.b * pol.b;
      p1 += w * prof;
      p2 += w * prof * prof;
    }
    out.debt[t] = {m1, std::sqrt(std::max(0.0, m2 - m1 * m1))};
    out.profit[t] = {p1, std::sqrt(std::max(0.0, p2 - p1 * p1))};
  }

  out.liabilities_present = tree.coeff[0].Lambda() > 0;
  if (out.liabilities_present) {
    out.FR0 = portfolio_value(s.policy[0]) / tree.coeff[0].Lambda();
    double fr = 0;
    for (int n : topo.stage_nodes[T])
      fr += topo.nodes[n].p * portfolio_value(s.policy[n]) /
            tree.coeff[n].Lambda();
    out.mean_FR_T = fr;

    for (int t = 0; t < T; ++t)
      for (int n : topo.stage_nodes[t]) {
        const auto& co = tree.coeff[n];
        double lamSum = 0, lamDur = 0;
        for (size_t j = 0; j < co.lambda.size(); ++j) {
          lamSum += co.lambda[j];
          lamDur += co.lambda[j] * co.deltaLambda[j];
        }
        if (lamSum <= 0) continue;
        double assetDur = 0;
        for (size_t i = 1; i < s.policy[n].x.size(); ++i)
          if (s.params.fixedIncome[i])
            assetDur += s.policy[n].x[i] * s.params.durationX[i];
        double mm = (assetDur - lamDur) / lamSum;  // years
        const double d = s.params.deltaBar;
        int bin = mm <= -d + kActiveTol ? 0
                  : mm <= 0.0           ? 1
                  : mm < d - kActiveTol ? 2
                                        : 3;
        out.mismatch[bin] += topo.nodes[n].p;
      }
    double tot = out.mismatch[0] + out.mismatch[1] + out.mismatch[2] +
                 out.mismatch[3];
    if (tot > 0)
      for (auto& v : out.mismatch) v /= tot;
  }

  int active = 0, carrying = 0;
  for (int n : topo.stage_nodes[T - 1]) {
    if (s.event_pools.size() <= static_cast<size_t>(n) ||
        s.event_pools[n].empty())
      continue;
    ++carrying;
    bool tight = false;
    for (const auto& ec : s.event_pools[n]) {
      double lhs = 0;
      for (int idx : ec.members) {
        int m = topo.nodes[n].children[idx];
        lhs += topo.cond_prob(m) * one_step_value(tree, s.policy[n], m);
      }
      tight |= lhs - ec.target < kActiveTol;
    }
    if (tight) ++active;
  }
  out.dominance_nodes = carrying;
  out.active_ssd_fraction =
      topo.stage_nodes[T - 1].empty()
          ? 0.0
          : static_cast<double>(active) / topo.stage_nodes[T - 1].size();
  return out;
}

void write_report_csv(const ReportTables& t, std::ostream& os) {
  os << "section,key,value\n";
  os << "summary,objective," << fmt(t.objective) << "\n";
  os << "summary,K0," << fmt(t.K0) << "\n";
  os << "summary,liabilities_present," << (t.liabilities_present ? 1 : 0)
     << "\n";
  if (t.liabilities_present) {
    os << "summary,FR0," << fmt(t.FR0) << "\n";
    os << "summary,mean_FR_T," << fmt(t.mean_FR_T) << "\n";
  }
  os << "summary,active_ssd_fraction," << fmt(t.active_ssd_fraction) << "\n";
  os << "summary,dominance_nodes," << t.dominance_nodes << "\n";
  for (size_t st = 1; st < t.debt.size(); ++st) {
    os << "debt_mean," << st << "," << fmt(t.debt[st].mean) << "\n";
    os << "debt_std," << st << "," << fmt(t.debt[st].stdev) << "\n";
  }
  for (size_t st = 1; st < t.profit.size(); ++st) {
    os << "profit_mean," << st << "," << fmt(t.profit[st].mean) << "\n";
    os << "profit_std," << st << "," << fmt(t.profit[st].stdev) << "\n";
  }
  if (t.liabilities_present) {
    static const char* bins[4] = {"lower_active", "negative", "positive",
                                  "upper_active"};
    for (int b = 0; b < 4; ++b)
      os << "duration_mismatch," << bins[b] << "," << fmt(t.mismatch[b])
         << "\n";
  }
}

void write_report_json(const ReportTables& t, std::ostream& os) {
  nlohmann::json j;
  j["summary"] = {{"objective", t.objective},
                  {"K0", t.K0},
                  {"liabilities_present", t.liabilities_present},
                  {"active_ssd_fraction", t.active_ssd_fraction},
                  {"dominance_nodes", t.dominance_nodes}};
  if (t.liabilities_present) {
    j["summary"]["FR0"] = t.FR0;
    j["summary"]["mean_FR_T"] = t.mean_FR_T;
    j["duration_mismatch"] = {{"lower_active", t.mismatch[0]},
                              {"negative", t.mismatch[1]},
                              {"positive", t.mismatch[2]},
                              {"upper_active", t.mismatch[3]}};
  }
  auto stages = [](const std::vector<StageStat>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (size_t st = 1; st < v.size(); ++st)
      a.push_back({{"stage", st}, {"mean", v[st].mean}, {"std", v[st].stdev}});
    return a;
  };
  j["debt"] = stages(t.debt);
  j["profit"] = stages(t.profit);
  os << j.dump(2) << "\n";
}

void export_cdf(const ScenarioTree& tree, const Solution& with,
                const Solution* without, int node, std::ostream& os) {
  const auto& topo = tree.topo;
  if (topo.is_leaf(node) || topo.nodes[node].stage != topo.last_stage() - 1)
    throw std::invalid_argument("export_cdf wants a last-but-one stage node");

  struct Curve {
    const char* name;
    dom::DiscreteDistribution dist;
  };
  std::vector<Curve> curves;
  auto one_step = [&](const Solution& s) {
    std::vector<std::pair<double, double>> atoms;
    for (int m : topo.nodes[node].children)
      atoms.emplace_back(one_step_value(tree, s.policy[node], m),
                         topo.cond_prob(m));
    return dom::DiscreteDistribution(std::move(atoms));
  };
  curves.push_back({"portfolio_ssd", one_step(with)});
  if (without) curves.push_back({"portfolio_nossd", one_step(*without)});
  {
    std::vector<std::pair<double, double>> atoms;
    for (int m : topo.nodes[node].children)
      atoms.emplace_back(with.params.phi * tree.coeff[m].Lambda(),
                         topo.cond_prob(m));
    curves.push_back({"benchmark", dom::DiscreteDistribution(std::move(atoms))});
  }

  std::vector<double> grid;
  for (const auto& c : curves)
    for (const auto& [v, p] : c.dist.atoms()) grid.push_back(v);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (!grid.empty()) {
    double span = std::max(1.0, grid.back() - grid.front());
    grid.insert(grid.begin(), grid.front() - 0.05 * span);
    grid.push_back(grid.back() + 0.05 * span);
  }

  os << "curve,order,eta,value\n";
  for (const auto& c : curves)
    for (int order = 1; order <= 2; ++order)
      for (double eta : grid)
        os << c.name << "," << order << "," << fmt(eta) << ","
           << fmt(order == 1 ? dom::cdf(c.dist, eta)
                             : dom::integrated_cdf(c.dist, eta))
           << "\n";
}

}  // namespace alm::rpt
