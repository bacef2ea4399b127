#include "alm/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace alm::cfg {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

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

std::string join(const std::vector<int>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

const char* family_name(coeff::AssetFamily f) {
  switch (f) {
    case coeff::AssetFamily::Cash: return "cash";
    case coeff::AssetFamily::Treasury: return "treasury";
    case coeff::AssetFamily::Corporate: return "corporate";
    case coeff::AssetFamily::Equity: return "equity";
    case coeff::AssetFamily::Currency: return "currency";
  }
  return "treasury";
}

/// Accumulates parse problems so a bad file reports everything at once.
struct Parser {
  std::vector<std::string>& errors;
  int line = 0;

  void fail(const std::string& what) {
    errors.push_back("line " + std::to_string(line) + ": " + what);
  }

  bool num(const std::string& v, double& out) {
    try {
      size_t pos = 0;
      out = std::stod(v, &pos);
      if (trim(v.substr(pos)).empty()) return true;
    } catch (const std::exception&) {
    }
    fail("not a number: '" + v + "'");
    return false;
  }

  bool integer(const std::string& v, long long& out) {
    try {
      size_t pos = 0;
      out = std::stoll(v, &pos);
      if (trim(v.substr(pos)).empty()) return true;
    } catch (const std::exception&) {
    }
    fail("not an integer: '" + v + "'");
    return false;
  }

  bool boolean(const std::string& v, bool& out) {
    if (v == "true" || v == "1") return out = true, true;
    if (v == "false" || v == "0") return out = false, true;
    fail("not a boolean: '" + v + "'");
    return false;
  }

  bool csv(const std::string& v, std::vector<double>& out) {
    out.clear();
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      double d;
      if (!num(trim(item), d)) return false;
      out.push_back(d);
    }
    if (out.empty()) fail("empty list");
    return !out.empty();
  }

  bool family(const std::string& v, coeff::AssetFamily& out) {
    if (v == "cash") return out = coeff::AssetFamily::Cash, true;
    if (v == "treasury") return out = coeff::AssetFamily::Treasury, true;
    if (v == "corporate") return out = coeff::AssetFamily::Corporate, true;
    if (v == "equity") return out = coeff::AssetFamily::Equity, true;
    if (v == "currency") return out = coeff::AssetFamily::Currency, true;
    fail("unknown asset family '" + v +
         "' (cash|treasury|corporate|equity|currency)");
    return false;
  }
};

bool cov_from_csv(Parser& p, const std::string& v,
                  std::array<std::array<double, 3>, 3>& out) {
  std::vector<double> vals;
  if (!p.csv(v, vals)) return false;
  if (vals.size() != 9) {
    p.fail("expected 9 row-major entries, got " + std::to_string(vals.size()));
    return false;
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[i][j] = vals[3 * i + j];
  return true;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error([&] {
        std::string s = "invalid config";
        for (const auto& e : errors) s += "\n  " + e;
        return s;
      }()),
      errors_(std::move(errors)) {}

RunConfig parse_config(std::istream& is) {
  RunConfig c;
  c.stages.clear();
  c.branching.clear();
  std::vector<std::string> errors;
  Parser p{errors};

  std::string section;
  AssetEntry* asset = nullptr;
  coeff::LiabilitySpec* liab = nullptr;

  std::string raw;
  while (std::getline(is, raw)) {
    ++p.line;
    std::string line = raw;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        p.fail("unterminated section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      asset = nullptr;
      liab = nullptr;
      if (section == "asset") {
        c.assets.emplace_back();
        asset = &c.assets.back();
      } else if (section == "liability") {
        c.liabilities.emplace_back();
        liab = &c.liabilities.back();
      } else if (section != "run" && section != "model" && section != "econ" &&
                 section != "decay" && section != "inflation" &&
                 section != "spread" && section != "revenue" &&
                 section != "solver") {
        p.fail("unknown section [" + section + "]");
        section.clear();
      }
      continue;
    }

    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      p.fail("expected key = value");
      continue;
    }
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (section.empty()) {
      p.fail("key '" + key + "' outside any section");
      continue;
    }

    long long ll;
    std::vector<double> vs;
    bool known = true;
    if (section == "run") {
      if (key == "name") c.name = val;
      else if (key == "stages") p.csv(val, c.stages);
      else if (key == "branching") {
        if (p.csv(val, vs)) {
          c.branching.clear();
          for (double d : vs) c.branching.push_back(static_cast<int>(d));
        }
      } else if (key == "seed") {
        if (p.integer(val, ll)) c.seed = static_cast<std::uint64_t>(ll);
      } else if (key == "tlambda") {
        if (p.integer(val, ll)) c.tlambda = static_cast<int>(ll);
      } else if (key == "lambda_first_offset") {
        if (p.integer(val, ll)) c.lambdaFirstOffset = static_cast<int>(ll);
      } else if (key == "smallcap") c.smallcap = val;
      else known = false;
    } else if (section == "model") {
      if (key == "alpha") p.num(val, c.alpha);
      else if (key == "beta") p.num(val, c.beta);
      else if (key == "phi") p.num(val, c.phi);
      else if (key == "delta_bar") p.num(val, c.deltaBar);
      else if (key == "q") p.num(val, c.q);
      else if (key == "phi_plus") p.num(val, c.phiPlus);
      else if (key == "phi_minus") p.num(val, c.phiMinus);
      else if (key == "kappa") p.num(val, c.kappa);
      else if (key == "big_m") p.num(val, c.bigM);
      else if (key == "w_floor") p.num(val, c.wFloor);
      else known = false;
    } else if (section == "econ") {
      if (key == "b1") p.num(val, c.init.curve.b1);
      else if (key == "b2") p.num(val, c.init.curve.b2);
      else if (key == "b3") p.num(val, c.init.curve.b3);
      else if (key == "gamma") p.num(val, c.init.curve.gamma);
      else if (key == "pi") p.num(val, c.init.pi);
      else if (key == "spread") p.num(val, c.init.sIG);
      else if (key == "cov") cov_from_csv(p, val, c.econ.curveFactorCov);
      else if (key == "resid_corr") {
        std::array<std::array<double, 3>, 3> m;
        if (cov_from_csv(p, val, m)) c.econ.residualCorrelation = m;
      } else known = false;
    } else if (section == "decay") {
      if (key == "a0") p.num(val, c.econ.decay.a0);
      else if (key == "a1") p.num(val, c.econ.decay.a1);
      else if (key == "a2") p.num(val, c.econ.decay.a2);
      else if (key == "a3") p.num(val, c.econ.decay.a3);
      else if (key == "resid_std") p.num(val, c.econ.decay.residStd);
      else if (key == "floor") p.num(val, c.econ.decay.floor);
      else known = false;
    } else if (section == "inflation") {
      if (key == "a_pi") p.num(val, c.econ.inflation.aPi);
      else if (key == "sigma_pi") p.num(val, c.econ.inflation.sigmaPi);
      else known = false;
    } else if (section == "spread") {
      if (key == "c0") p.num(val, c.econ.spread.c0);
      else if (key == "c1") p.num(val, c.econ.spread.c1);
      else if (key == "c2") p.num(val, c.econ.spread.c2);
      else if (key == "resid_std") p.num(val, c.econ.spread.residStd);
      else if (key == "unit_scale") p.num(val, c.econ.spread.unitScale);
      else known = false;
    } else if (section == "revenue") {
      if (key == "c0") p.num(val, c.revenue.c0);
      else if (key == "mu") p.num(val, c.revenue.muRho);
      else if (key == "sigma") p.num(val, c.revenue.sigmaRho);
      else known = false;
    } else if (section == "liability") {
      if (key == "l0") p.num(val, liab->L0);
      else if (key == "mu") p.num(val, liab->muXi);
      else if (key == "sigma") p.num(val, liab->sigmaXi);
      else known = false;
    } else if (section == "asset") {
      if (key == "id") asset->spec.id = val;
      else if (key == "family") p.family(val, asset->spec.family);
      else if (key == "duration") p.num(val, asset->spec.duration);
      else if (key == "b") {
        if (p.csv(val, vs)) {
          if (vs.size() > 5) {
            p.fail("at most 5 regression coefficients");
          } else {
            asset->spec.b = {};
            for (size_t i = 0; i < vs.size(); ++i) asset->spec.b[i] = vs[i];
          }
        }
      } else if (key == "resid_std") p.num(val, asset->spec.residStd);
      else if (key == "theta_min") p.num(val, asset->thetaMin);
      else if (key == "theta_max") p.num(val, asset->thetaMax);
      else if (key == "xhat") p.num(val, asset->xhat);
      else known = false;
    } else if (section == "solver") {
      if (key == "feas_tol") p.num(val, c.feasTol);
      else if (key == "opt_tol") p.num(val, c.optTol);
      else if (key == "max_iters") {
        if (p.integer(val, ll)) c.maxIters = static_cast<int>(ll);
      } else if (key == "event_tol") p.num(val, c.eventTol);
      else if (key == "improve_tol") p.num(val, c.improveTol);
      else if (key == "active_tol") p.num(val, c.activeTol);
      else if (key == "max_outer") {
        if (p.integer(val, ll)) c.maxOuter = static_cast<int>(ll);
      } else if (key == "parallel") p.boolean(val, c.parallel);
      else if (key == "worst_case_init") p.boolean(val, c.worstCaseInit);
      else known = false;
    }
    if (!known) p.fail("unknown key '" + key + "' in [" + section + "]");
  }

  for (const auto& e : validate(c)) errors.push_back(e);
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError({"cannot open '" + path + "'"});
  return parse_config(f);
}

void write_config(const RunConfig& c, std::ostream& os) {
  os << "# Currency in millions, rates as fractions per annum.\n";
  os << "[run]\n";
  os << "name = " << c.name << "\n";
  os << "stages = " << join(c.stages) << "\n";
  os << "branching = " << join(c.branching) << "\n";
  os << "seed = " << c.seed << "\n";
  os << "tlambda = " << c.tlambda << "\n";
  os << "lambda_first_offset = " << c.lambdaFirstOffset << "\n";
  if (!c.smallcap.empty()) os << "smallcap = " << c.smallcap << "\n";

  os << "\n[model]\n";
  os << "alpha = " << fmt(c.alpha) << "\n";
  os << "beta = " << fmt(c.beta) << "\n";
  os << "phi = " << fmt(c.phi) << "\n";
  os << "delta_bar = " << fmt(c.deltaBar) << "\n";
  os << "q = " << fmt(c.q) << "\n";
  os << "phi_plus = " << fmt(c.phiPlus) << "\n";
  os << "phi_minus = " << fmt(c.phiMinus) << "\n";
  os << "kappa = " << fmt(c.kappa) << "\n";
  os << "big_m = " << fmt(c.bigM) << "\n";
  os << "w_floor = " << fmt(c.wFloor) << "\n";

  os << "\n[econ]\n";
  os << "b1 = " << fmt(c.init.curve.b1) << "\n";
  os << "b2 = " << fmt(c.init.curve.b2) << "\n";
  os << "b3 = " << fmt(c.init.curve.b3) << "\n";
  os << "gamma = " << fmt(c.init.curve.gamma) << "\n";
  os << "pi = " << fmt(c.init.pi) << "\n";
  os << "spread = " << fmt(c.init.sIG) << "\n";
  {
    std::vector<double> flat;
    for (const auto& row : c.econ.curveFactorCov)
      for (double v : row) flat.push_back(v);
    os << "cov = " << join(flat) << "\n";
  }
  if (c.econ.residualCorrelation) {
    std::vector<double> flat;
    for (const auto& row : *c.econ.residualCorrelation)
      for (double v : row) flat.push_back(v);
    os << "resid_corr = " << join(flat) << "\n";
  }

  os << "\n[decay]\n";
  os << "a0 = " << fmt(c.econ.decay.a0) << "\n";
  os << "a1 = " << fmt(c.econ.decay.a1) << "\n";
  os << "a2 = " << fmt(c.econ.decay.a2) << "\n";
  os << "a3 = " << fmt(c.econ.decay.a3) << "\n";
  os << "resid_std = " << fmt(c.econ.decay.residStd) << "\n";
  os << "floor = " << fmt(c.econ.decay.floor) << "\n";

  os << "\n[inflation]\n";
  os << "a_pi = " << fmt(c.econ.inflation.aPi) << "\n";
  os << "sigma_pi = " << fmt(c.econ.inflation.sigmaPi) << "\n";

  os << "\n[spread]\n";
  os << "c0 = " << fmt(c.econ.spread.c0) << "\n";
  os << "c1 = " << fmt(c.econ.spread.c1) << "\n";
  os << "c2 = " << fmt(c.econ.spread.c2) << "\n";
  os << "resid_std = " << fmt(c.econ.spread.residStd) << "\n";
  os << "unit_scale = " << fmt(c.econ.spread.unitScale) << "\n";

  os << "\n[revenue]\n";
  os << "c0 = " << fmt(c.revenue.c0) << "\n";
  os << "mu = " << fmt(c.revenue.muRho) << "\n";
  os << "sigma = " << fmt(c.revenue.sigmaRho) << "\n";

  for (const auto& l : c.liabilities) {
    os << "\n[liability]\n";
    os << "l0 = " << fmt(l.L0) << "\n";
    os << "mu = " << fmt(l.muXi) << "\n";
    os << "sigma = " << fmt(l.sigmaXi) << "\n";
  }

  for (const auto& a : c.assets) {
    os << "\n[asset]\n";
    os << "id = " << a.spec.id << "\n";
    os << "family = " << family_name(a.spec.family) << "\n";
    os << "duration = " << fmt(a.spec.duration) << "\n";
    os << "b = "
       << join(std::vector<double>(a.spec.b.begin(), a.spec.b.end()))
       << "\n";
    os << "resid_std = " << fmt(a.spec.residStd) << "\n";
    os << "theta_min = " << fmt(a.thetaMin) << "\n";
    os << "theta_max = " << fmt(a.thetaMax) << "\n";
    os << "xhat = " << fmt(a.xhat) << "\n";
  }

  os << "\n[solver]\n";
  os << "feas_tol = " << fmt(c.feasTol) << "\n";
  os << "opt_tol = " << fmt(c.optTol) << "\n";
  os << "max_iters = " << c.maxIters << "\n";
  os << "event_tol = " << fmt(c.eventTol) << "\n";
  os << "improve_tol = " << fmt(c.improveTol) << "\n";
  os << "active_tol = " << fmt(c.activeTol) << "\n";
  os << "max_outer = " << c.maxOuter << "\n";
  os << "parallel = " << (c.parallel ? "true" : "false") << "\n";
  os << "worst_case_init = " << (c.worstCaseInit ? "true" : "false") << "\n";
}

void save_config(const RunConfig& c, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError({"cannot write '" + path + "'"});
  write_config(c, f);
}

std::vector<std::string> validate(const RunConfig& c) {
  std::vector<std::string> e;
  auto bad = [&](const std::string& msg) { e.push_back(msg); };

  if (c.stages.size() < 2) bad("need at least two stage dates");
  for (size_t t = 0; t + 1 < c.stages.size(); ++t)
    if (c.stages[t + 1] <= c.stages[t]) {
      bad("stage dates must be strictly increasing");
      break;
    }
  if (!c.stages.empty() && c.stages.front() != 0.0)
    bad("first stage date must be 0");
  if (c.branching.size() + 1 != c.stages.size())
    bad("branching needs one entry per stage transition (" +
        std::to_string(c.stages.size() ? c.stages.size() - 1 : 0) + ")");
  for (int b : c.branching)
    if (b < 1) bad("branching factors must be >= 1");

  if (c.alpha < 0 || c.alpha > 1) bad("alpha must be in [0,1]");
  if (c.beta < 0) bad("beta must be >= 0");
  if (c.phi < 0) bad("phi must be >= 0");
  if (c.deltaBar < 0) bad("delta_bar must be >= 0");
  if (c.q < 0 || c.q > 1) bad("q must be in [0,1]");
  if (c.phiPlus < 0 || c.phiMinus < 0) bad("transaction costs must be >= 0");
  if (c.kappa < 0 || c.kappa > 1) bad("kappa must be in [0,1]");
  if (c.bigM <= 0) bad("big_m must be > 0");
  if (c.tlambda < 1) bad("tlambda must be >= 1");
  if (c.lambdaFirstOffset < 0) bad("lambda_first_offset must be >= 0");

  if (c.assets.empty()) bad("need at least one asset");
  bool have_corporate = false;
  bool smallcap_found = c.smallcap.empty();
  for (size_t i = 0; i < c.assets.size(); ++i) {
    const auto& a = c.assets[i];
    std::string tag = "asset " + (a.spec.id.empty()
                                      ? "#" + std::to_string(i + 1)
                                      : a.spec.id);
    if (a.spec.id.empty()) bad(tag + ": missing id");
    if (a.spec.family == coeff::AssetFamily::Cash)
      bad(tag + ": cash is implicit, do not list it");
    if (a.thetaMin < 0 || a.thetaMax > 1 || a.thetaMin > a.thetaMax)
      bad(tag + ": need 0 <= theta_min <= theta_max <= 1");
    if (a.spec.duration < 0) bad(tag + ": duration must be >= 0");
    if (a.xhat < 0) bad(tag + ": xhat must be >= 0");
    have_corporate |= a.spec.family == coeff::AssetFamily::Corporate;
    smallcap_found |= a.spec.id == c.smallcap;
    for (size_t j = 0; j < i; ++j)
      if (!a.spec.id.empty() && c.assets[j].spec.id == a.spec.id)
        bad(tag + ": duplicate id");
  }
  if (!smallcap_found) bad("smallcap '" + c.smallcap + "' is not an asset id");
  if (have_corporate && c.smallcap.empty())
    bad("corporate assets need a smallcap regressor asset");

  for (size_t j = 0; j < c.liabilities.size(); ++j)
    if (c.liabilities[j].L0 < 0)
      bad("liability #" + std::to_string(j + 1) + ": l0 must be >= 0");

  if (c.feasTol <= 0 || c.optTol <= 0) bad("solver tolerances must be > 0");
  if (c.maxIters < 1 || c.maxOuter < 1) bad("iteration limits must be >= 1");
  return e;
}

TreeTopology topology(const RunConfig& c) {
  return build_topology(c.stages, c.branching);
}

ModelParams model_params(const RunConfig& c) {
  const int I = static_cast<int>(c.assets.size());
  ModelParams p;
  p.alpha = c.alpha;
  p.beta = c.beta;
  p.phi = c.phi;
  p.q = c.q;
  p.phiPlus = c.phiPlus;
  p.phiMinus = c.phiMinus;
  p.deltaBar = c.deltaBar;
  p.kappa = c.kappa;
  p.wFloor = c.wFloor;
  p.bigM = c.bigM;
  p.thetaMin.assign(I + 1, 0.0);
  p.thetaMax.assign(I + 1, 1.0);
  p.xhat.assign(I + 1, 0.0);
  p.durationX.assign(I + 1, 0.0);
  p.fixedIncome.assign(I + 1, 0);
  p.equity.assign(I + 1, 0);
  for (int i = 1; i <= I; ++i) {
    const auto& a = c.assets[i - 1];
    p.thetaMin[i] = a.thetaMin;
    p.thetaMax[i] = a.thetaMax;
    p.xhat[i] = a.xhat;
    p.durationX[i] = a.spec.duration;
    p.fixedIncome[i] = a.spec.family == coeff::AssetFamily::Treasury ||
                       a.spec.family == coeff::AssetFamily::Corporate;
    p.equity[i] = a.spec.family == coeff::AssetFamily::Equity;
  }
  return p;
}

std::vector<coeff::AssetSpec> asset_specs(const RunConfig& c) {
  // Coefficient generation wants the implicit cash account at index 0.
  std::vector<coeff::AssetSpec> out;
  out.reserve(c.assets.size() + 1);
  coeff::AssetSpec cash;
  cash.id = "CASH";
  cash.family = coeff::AssetFamily::Cash;
  out.push_back(cash);
  for (const auto& a : c.assets) out.push_back(a.spec);
  return out;
}

coeff::CoeffOptions coeff_options(const RunConfig& c) {
  coeff::CoeffOptions o;
  o.Tlambda = c.tlambda;
  o.lambdaFirstOffset = c.lambdaFirstOffset;
  o.parallel = c.parallel;
  o.smallcapIndex = -1;  // index into asset_specs, where 0 is cash
  for (size_t i = 0; i < c.assets.size(); ++i)
    if (c.assets[i].spec.id == c.smallcap)
      o.smallcapIndex = static_cast<int>(i) + 1;
  return o;
}

dec::DecompOptions decomp_options(const RunConfig& c) {
  dec::DecompOptions o;
  o.event_tol = c.eventTol;
  o.improve_tol = c.improveTol;
  o.active_tol = c.activeTol;
  o.max_outer = c.maxOuter;
  o.parallel = c.parallel;
  o.worst_case_init = c.worstCaseInit;
  o.lp = lp_options(c);
  return o;
}

lp::SolveOptions lp_options(const RunConfig& c) {
  lp::SolveOptions o;
  o.feas_tol = c.feasTol;
  o.opt_tol = c.optTol;
  o.max_iters = c.maxIters;
  return o;
}

ScenarioTree generate_tree(const RunConfig& c, std::uint64_t seed) {
  TreeTopology topo = topology(c);
  econ::EconSimResult sim =
      econ::simulate_econ_tree(topo, c.econ, c.init, seed, c.parallel);
  return coeff::generate_coefficients(topo, sim, asset_specs(c),
                                      c.liabilities, c.revenue, seed,
                                      coeff_options(c))
      .tree;
}

}  // namespace alm::cfg
