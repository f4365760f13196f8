#pragma once

#include <vector>

#include "membrane/solver.hpp"

namespace membrane {

// Truncated random-walk representation of the infinite-volume Green's function
// in d >= 5:  G(0,z) = sum_{m>=0} (m+1) P_0[S_m = z], truncated at m = M.
// Monotone nondecreasing in M; exact (no Monte Carlo).
double rw_green_infinite(int d, const Point& z, int m_trunc);

// P_0[S_m = z] for m = 0..M, computed by an exact dynamic program that splits
// the step count across axes (binomial mixing) and uses closed-form 1D counts.
std::vector<double> rw_point_probabilities(int d, const Point& z, int m_trunc);

// Literal d-dimensional convolution of the one-step kernel; exponential in d,
// usable for small m only. Kept as the independent oracle for the DP above.
std::vector<double> rw_point_probabilities_naive(int d, const Point& z, int m_trunc);

// Working value of the paper's constant gamma (never given numerically there):
// the truncated RW sum at the origin plus a measured majorant of the tail.
struct GammaHat {
  double value = 0.0;
  double tail_margin = 0.0;
  int m_trunc = 0;
  double envelope() const { return value + tail_margin; }
};
GammaHat measure_gamma_hat(int d, int m_trunc = 2000);

// d=4 log-law coefficient gamma4 with G_N(0,0) <= gamma4 log N on the
// calibration boxes (1.5x safety factor). Measured, not asserted.
double measure_gamma4(const std::vector<int>& box_sizes, SolverOptions opts = {});

struct RatioProfileRow {
  int k = 0;
  double green = 0.0;     // G_N(0, k e_1)
  double ratio = 0.0;     // green * k^{d-4}   (d >= 5)
  double log_term = 0.0;  // log N - log k     (d = 4)
};

struct RatioProfile {
  int d = 0, N = 0;
  std::vector<RatioProfileRow> rows;
  double fitted_slope = 0.0;  // d=4: regression slope of green on log_term
};

// Decay profile of the unpinned box Green's function along e_1.
// Distances must keep an N/8 margin from the boundary.
RatioProfile asymptotic_ratio_profile(int d, int N, const std::vector<int>& distances,
                                      SolverOptions opts = {});

}  // namespace membrane
