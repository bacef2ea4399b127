#include "alm/tree.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace alm {

TreeTopology build_topology(const std::vector<double>& stages,
                            const std::vector<int>& branching) {
  if (stages.size() < 2)
    throw std::invalid_argument("need at least two stage dates");
  if (branching.size() != stages.size() - 1)
    throw std::invalid_argument("branching must have one entry per transition");
  for (int b : branching)
    if (b < 1) throw std::invalid_argument("branching counts must be >= 1");

  TreeTopology topo;
  topo.stages = stages;
  topo.branching = branching;
  topo.stage_nodes.resize(stages.size());

  TreeNode root;
  root.id = 0;
  topo.nodes.push_back(root);
  topo.stage_nodes[0] = {0};

  for (int t = 0; t + 1 < static_cast<int>(stages.size()); ++t) {
    int b = branching[t];
    for (int a : topo.stage_nodes[t]) {
      for (int k = 0; k < b; ++k) {
        TreeNode m;
        m.id = static_cast<int>(topo.nodes.size());
        m.stage = t + 1;
        m.ancestor = a;
        m.p = topo.nodes[a].p / b;
        topo.nodes[a].children.push_back(m.id);
        topo.stage_nodes[t + 1].push_back(m.id);
        topo.nodes.push_back(m);
      }
    }
  }
  return topo;
}

std::vector<std::vector<int>> nodal_partition_matrix(const TreeTopology& topo) {
  std::vector<std::vector<int>> mat;
  const auto& leaves = topo.stage_nodes.back();
  mat.reserve(leaves.size());
  for (int leaf : leaves) {
    std::vector<int> path(topo.num_stages());
    int n = leaf;
    for (int t = topo.last_stage(); t >= 0; --t) {
      path[t] = n;
      n = topo.nodes[n].ancestor;
    }
    mat.push_back(std::move(path));
  }
  return mat;
}

namespace {

void put(std::ostream& os, double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v,
                               std::chars_format::general, 17);
  os.write(buf, p - buf);
}

struct RowReader {
  std::stringstream ss;
  int line;
  RowReader(const std::string& s, int line) : ss(s), line(line) {}
  double num(const char* field) {
    std::string tok;
    if (!std::getline(ss, tok, ','))
      throw TreeParseError(line, std::string("missing field ") + field);
    try {
      size_t pos = 0;
      double v = std::stod(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw TreeParseError(line, std::string("bad number in field ") + field +
                                     ": '" + tok + "'");
    }
  }
  bool done() { return ss.peek() == std::char_traits<char>::eof(); }
};

std::vector<double> parse_csv_nums(const std::string& s, int line,
                                   const char* what) {
  std::vector<double> out;
  RowReader r(s, line);
  while (!r.done()) out.push_back(r.num(what));
  return out;
}

}  // namespace

void serialize_tree(const ScenarioTree& tree, std::ostream& os) {
  const auto& topo = tree.topo;
  os << "stages=";
  for (size_t i = 0; i < topo.stages.size(); ++i) {
    if (i) os << ',';
    put(os, topo.stages[i]);
  }
  os << ";branching=";
  for (size_t i = 0; i < topo.branching.size(); ++i) {
    if (i) os << ',';
    os << topo.branching[i];
  }
  os << '\n';
  for (const auto& n : topo.nodes) {
    const auto& c = tree.coeff[n.id];
    os << n.id << ',' << n.stage << ',' << n.ancestor << ',';
    put(os, n.p);
    for (double v : c.r) { os << ','; put(os, v); }
    for (double v : c.g) { os << ','; put(os, v); }
    for (double v : c.L) { os << ','; put(os, v); }
    os << ',';
    put(os, c.c);
    for (double v : c.lambda) { os << ','; put(os, v); }
    for (double v : c.deltaLambda) { os << ','; put(os, v); }
    os << ',';
    put(os, c.rMinus);
    os << '\n';
  }
}

ScenarioTree deserialize_tree(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw TreeParseError(1, "empty input");
  auto semi = header.find(';');
  if (header.rfind("stages=", 0) != 0 || semi == std::string::npos ||
      header.find("branching=", semi + 1) != semi + 1)
    throw TreeParseError(1, "expected 'stages=<csv>;branching=<csv>'");
  auto stages = parse_csv_nums(header.substr(7, semi - 7), 1, "stages");
  auto braw = parse_csv_nums(header.substr(semi + 11), 1, "branching");
  std::vector<int> branching;
  for (double b : braw) branching.push_back(static_cast<int>(b));

  ScenarioTree tree;
  tree.topo = build_topology(stages, branching);
  int N = tree.topo.num_nodes();
  tree.coeff.resize(N);

  std::string row;
  int line = 1;
  int seen = 0;
  int I = -1, J = -1;  // inferred from the first node row
  while (std::getline(is, row)) {
    ++line;
    if (row.empty()) continue;
    RowReader r(row, line);
    int id = static_cast<int>(r.num("id"));
    if (id < 0 || id >= N)
      throw TreeParseError(line, "node id " + std::to_string(id) +
                                     " out of range");
    const TreeNode& n = tree.topo.nodes[id];
    int stage = static_cast<int>(r.num("stage"));
    int anc = static_cast<int>(r.num("ancestor"));
    if (stage != n.stage)
      throw TreeParseError(line, "node " + std::to_string(id) +
                                     ": stage mismatch");
    if (anc != n.ancestor)
      throw TreeParseError(line, "node " + std::to_string(id) +
                                     ": broken ancestor link (got " +
                                     std::to_string(anc) + ", expected " +
                                     std::to_string(n.ancestor) + ")");
    double p = r.num("p");
    if (std::abs(p - n.p) > 1e-12 * std::max(1.0, std::abs(n.p)))
      throw TreeParseError(line, "node " + std::to_string(id) +
                                     ": probability mismatch");
    // Remaining fields: r_0..r_I, g_1..g_I, L_1..L_J, c, lambda_1..J,
    // deltaLambda_1..J, rMinus; field count is 2I + 3J + 3. Smallest J
    // consistent with the first row wins, every later row must match.
    std::vector<double> rest;
    while (!r.done()) rest.push_back(r.num("data"));
    if (seen == 0) {
      for (int j = 1; I < 0 && j <= 64; ++j) {
        long rem = static_cast<long>(rest.size()) - 3L * j - 3L;
        if (rem >= 2 && rem % 2 == 0) {
          I = static_cast<int>(rem / 2);
          J = j;
        }
      }
      if (I < 0)
        throw TreeParseError(line, "cannot infer asset/liability counts from "
                                   "field count " +
                                       std::to_string(rest.size() + 4));
    } else {
      if (rest.size() != static_cast<size_t>(2 * I + 3 * J + 3))
        throw TreeParseError(line, "node " + std::to_string(id) +
                                       ": inconsistent field count");
    }
    NodeCoefficients& c = tree.coeff[id];
    size_t k = 0;
    c.r.assign(rest.begin() + k, rest.begin() + k + I + 1); k += I + 1;
    c.g.assign(rest.begin() + k, rest.begin() + k + I); k += I;
    c.L.assign(rest.begin() + k, rest.begin() + k + J); k += J;
    c.c = rest[k++];
    c.lambda.assign(rest.begin() + k, rest.begin() + k + J); k += J;
    c.deltaLambda.assign(rest.begin() + k, rest.begin() + k + J); k += J;
    c.rMinus = rest[k];
    ++seen;
  }
  if (seen != N)
    throw TreeParseError(line, "expected " + std::to_string(N) +
                                   " node rows, got " + std::to_string(seen));
  return tree;
}

void save_tree(const ScenarioTree& tree, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  serialize_tree(tree, os);
}

ScenarioTree load_tree(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return deserialize_tree(is);
}

}  // namespace alm
