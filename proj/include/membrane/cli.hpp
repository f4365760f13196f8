#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "membrane/lattice.hpp"

namespace membrane {

// Flat run configuration; config-file keys mirror the CLI flags one-to-one.
struct RunConfig {
  std::string subcommand;
  int d = 2;
  int N = 8;
  double eps = 1.0;
  double xi = 0.2;
  double lambda = 0.0;
  double delta = 0.0;
  uint64_t seed = 1;
  std::string backend = "auto";  // auto | direct | cg
  double tol = 1e-10;
  int max_iterations = 20000;
  int n = 100;
  int burn_in = 100;
  int thinning = 1;
  std::string kernel = "auto";  // auto | collapsed | joint
  std::string scan = "systematic";
  double rho = 0.7;
  int k = 20;
  int t = 8;
  int trials = 2000;
  std::vector<int> distances;
  int tube_width = 3;
  std::string out = "out";
  std::string cache;        // green-column cache dir (MEMBRANE_LAB_CACHE overrides)
  std::string ensemble_in;  // reuse a stored ensemble for `decay`
};

// Pinned set for the deterministic-decay configuration: every box site outside
// an axis-aligned tube of the given odd width around the e1 axis.
Region tube_complement(const Box& box, int width);

// Executes one subcommand; writes CSV/JSON artifacts plus manifest.json into
// cfg.out. Returns 0 on success, 2 on validation failure, 1 on usage error.
int run(const RunConfig& cfg);

// argv front end (CLI11); flags override config-file values.
int run_main(int argc, char** argv);

}  // namespace membrane
