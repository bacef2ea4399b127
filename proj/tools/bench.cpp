// Compares the OpenMP tree simulation and decomposition against their serial
// reference implementations and reports wall-clock times.

#include <chrono>
#include <cmath>
#include <cstdio>

#include "alm/config.hpp"
#include "alm/decomposer.hpp"
#include "alm/econ.hpp"

using Clock = std::chrono::steady_clock;

static double seconds(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

int main(int argc, char** argv) {
  const char* path = argc > 1 ? argv[1] : "configs/base_small.ini";
  alm::cfg::RunConfig c;
  try {
    c = alm::cfg::load_config(path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
  auto topo = alm::cfg::topology(c);
  std::printf("config %s: %d nodes\n", c.name.c_str(), topo.num_nodes());

  auto t0 = Clock::now();
  auto par = alm::econ::simulate_econ_tree(topo, c.econ, c.init, c.seed, true);
  auto t1 = Clock::now();
  auto ser = alm::econ::simulate_econ_tree_serial(topo, c.econ, c.init, c.seed);
  auto t2 = Clock::now();
  double dev = 0;
  for (int n = 0; n < topo.num_nodes(); ++n)
    dev = std::max(dev, std::fabs(par.node_state[n].pi - ser.node_state[n].pi));
  std::printf("econ sim: omp %.3fs, serial %.3fs, max pi dev %.1e\n",
              seconds(t0, t1), seconds(t1, t2), dev);

  auto tree = alm::cfg::generate_tree(c, c.seed);
  auto params = alm::cfg::model_params(c);
  auto opts = alm::cfg::decomp_options(c);

  opts.parallel = true;
  t0 = Clock::now();
  auto rp = alm::dec::solve_decomposed(tree, params, opts);
  t1 = Clock::now();
  opts.parallel = false;
  auto rs = alm::dec::solve_decomposed(tree, params, opts);
  t2 = Clock::now();
  std::printf(
      "decomposer: omp %.3fs (obj %.6f), serial %.3fs (obj %.6f), gap %.1e\n",
      seconds(t0, t1), rp.objective, seconds(t1, t2), rs.objective,
      std::fabs(rp.objective - rs.objective));
  return 0;
}
