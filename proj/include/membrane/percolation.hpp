#pragma once

#include "membrane/lattice.hpp"
#include "membrane/rng.hpp"

namespace membrane {

// Bernoulli site percolation with intensity rho on a window. Per-trial RNG
// substreams are derived from (seed, trial); the same trial at two densities
// shares its uniforms (coupled sampling), so increasing events are monotone
// in rho realization by realization.
struct PercolationSample {
  const Region* window = nullptr;
  double rho = 0.0;
  std::vector<uint8_t> open;  // indexed like the window

  Region open_region() const;
};

PercolationSample sample_bernoulli(const Region& window, double rho, uint64_t seed,
                                   uint64_t trial = 0);

// MC estimate of P(x ∈ A-hat) against the exact value rho^{2d+1}.
struct InteriorCheck {
  double empirical = 0.0;
  double exact = 0.0;
  double sigma = 0.0;  // binomial standard error
  int trials = 0;
};

InteriorCheck interior_site_probability_check(int d, double rho, int trials, uint64_t seed);

// Tail of the graph distance from the window center to the pinned-cluster
// interior: empirical P(d(x, A-hat ∩ W) >= t) against
//   per-point bound (1-rho^{2d+1})^{floor(t/4)}
// and the region-max (union) variants. Window = l1 ball of the given radius;
// requires radius >= t+1 so a straight ray of spaced sites fits.
struct DistanceTail {
  int t = 0;
  double empirical = 0.0;
  double mc_sigma = 0.0;
  double per_point_bound = 0.0;
  double region_max_bound = 0.0;      // |W| * per-point, clamped to 1
  double paper_prefactor_bound = 0.0; // (sqrt(2)(radius))^d * per-point
  bool vacuous = false;               // per-point bound >= 1 (floor(t/4) = 0)
  int trials = 0;
  std::vector<int> trial_values;      // per-trial distance; -1 = unreachable
};

DistanceTail distance_tail_experiment(int d, int window_radius, double rho, int t, int trials,
                                      uint64_t seed);

// Tail of the a_k statistic: empirical P(a_k <= floor(k/10)) against the
// union bound sum_l |D_l^(k)| (1-rho^{2d+1})^{floor(m_k/4)} and the paper's
// headline constant floor(k/10) (sqrt(2)(k+1))^d (1-rho^{2d+1})^{floor(m_k/4)}.
struct AkTail {
  int k = 0;
  double xi = 0.0;
  double m_k = 0.0;
  int threshold = 0;  // floor(k/10)
  double empirical = 0.0;
  double mc_sigma = 0.0;
  double union_bound = 0.0;
  double paper_bound = 0.0;
  bool vacuous = false;            // min(1, union_bound) == 1
  bool precondition_ok = true;     // m_k <= |D_l^(k)| for l <= floor(k/10)
  double mean_ak = 0.0;
  int trials = 0;
  std::vector<int> trial_values;   // per-trial a_k
};

AkTail ak_tail_experiment(int d, double rho, int k, double xi, int trials, uint64_t seed);

}  // namespace membrane
