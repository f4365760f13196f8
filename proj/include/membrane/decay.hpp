#pragma once

#include "membrane/pinning.hpp"
#include "membrane/solver.hpp"

namespace membrane {

struct CovarianceEstimate {
  double mean = 0.0;
  double se = 0.0;  // batch-means standard error
  int n = 0;
};

// Rao-Blackwellized pinned covariance: the field integral is exact given A
// (Green's function entry), so the MC error comes only from the ζ-sampling.
// One restricted solve per ensemble member (column at x), shared across ys.
CovarianceEstimate pinned_covariance(const Box& box, const PinnedEnsemble& ens, const Point& x,
                                     const Point& y, const SolverOptions& opts = {});
std::vector<CovarianceEstimate> pinned_covariance_profile(const Box& box,
                                                          const PinnedEnsemble& ens,
                                                          const Point& x,
                                                          const std::vector<Point>& ys,
                                                          const SolverOptions& opts = {});

// Exact mixture sum over an enumerated law (small boxes):
//   E[φ_x φ_y] = Σ_A ζ(A) G_{A∪V^c}(x,y).
double exact_mixture_covariance(const ZetaTable& zeta, const Point& x, const Point& y);

struct DecayProfileRow {
  int k = 0;
  double cov = 0.0;
  double se = 0.0;
  double baseline = 0.0;  // unpinned G_N(center, center + k e1)
  int n = 0;
};

struct DecayProfile {
  int d = 0, N = 0;
  double eps = 0.0;
  Point center;
  std::vector<DecayProfileRow> rows;
};

// Covariance profile along e1 with an unpinned baseline column. Distances
// must keep an N/8 margin from the boundary and contain >= 2 distinct values.
// lambda/delta expose the d=4 window filter |x-y| >= delta * N^lambda.
DecayProfile decay_profile(const Box& box, const PinnedEnsemble& ens, const Point& center,
                           const std::vector<int>& distances, const SolverOptions& opts = {},
                           double lambda = 0.0, double delta = 0.0);

struct StretchedFit {
  double alpha = 0.0;
  double amplitude = 0.0;       // coefficient B in c ∝ exp(-B k^alpha)
  double residual = 0.0;        // RMS in log(-log c) space
  double power_exponent = 0.0;  // competing pure power-law model
  double power_residual = 0.0;
  bool not_stretched = false;   // power law fits better
  double normalization = 1.0;   // multiplier applied to bring max(c) below 1
  double k_min = 0.0, k_max = 0.0;
  int excluded = 0;  // non-positive covariances dropped from the fit
  int used = 0;
};

// Least-squares fit of log(-log c) against log k after amplitude
// normalization (values are scaled below 1 when needed); non-positive
// covariances are excluded and counted.
StretchedFit fit_stretched_exponential(const std::vector<std::pair<double, double>>& k_cov);
StretchedFit fit_stretched_exponential(const DecayProfile& profile);

struct DeterministicVsRandom {
  std::vector<int> distances;
  std::vector<double> deterministic_abs;  // |G_A(x,y)| for the frozen pinned set
  DecayProfile mixture;
  StretchedFit deterministic_fit;
  StretchedFit mixture_fit;
};

DeterministicVsRandom deterministic_vs_random_comparison(const Box& box, const Region& A_det,
                                                         const PinnedEnsemble& ens,
                                                         const Point& center,
                                                         const std::vector<int>& distances,
                                                         const SolverOptions& opts = {});

// Validation plumbing: empirical covariances of sampled fields (direct
// backend back-substitution of white noise) against Green entries.
struct FieldSampleCheck {
  Point x, y;
  double empirical = 0.0;
  double exact = 0.0;
  double sigma = 0.0;
};

std::vector<FieldSampleCheck> field_sampling_check(const GreenSolver& solver,
                                                   const std::vector<std::pair<Point, Point>>& pairs,
                                                   int n_draws, uint64_t seed);

}  // namespace membrane
