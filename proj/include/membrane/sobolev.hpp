#pragma once

#include <optional>

#include "membrane/field.hpp"
#include "membrane/solver.hpp"

namespace membrane {

// Squared discrete Sobolev norms over a region. Derivatives run over the
// positive coordinate directions (all d^2 ordered second-derivative pairs)
// and use the zero extension of the field.
struct NormReport {
  double l2 = 0.0;     // ||f||^2_{L2}
  double grad = 0.0;   // ||grad f||^2_{L2}
  double grad2 = 0.0;  // ||grad_2 f||^2_{L2}
  double h1 = 0.0;     // l2 + grad
  double h2 = 0.0;     // l2 + grad + grad2
};

NormReport norms(const LatticeField& f, const Region& region);

// Constant in ||Delta f||_{L2} <= C(d) ||grad_2 f||_{L2} as implemented
// (Cauchy-Schwarz across the d axial second differences, norms over any
// region containing the 1-collar of the support).
inline double laplacian_norm_constant(int d) { return 1.0 / std::sqrt(4.0 * d); }

// Executable form of the total-norm identity for a solved Green column:
//   sum_{z,i,j} (D_iD_j G_A^y(z))^2 = 4d^2 * G_A^y(y)
// (the gradient-energy identity applied to the column; the boundary value
// problem turns the right side into the Green diagonal). Returns (lhs, rhs).
std::pair<double, double> h2_total_identity(const LatticeField& g_col, const Point& y);

// Shell-norm decay certificate: the sequence ||G||^2_{H2(B_k(y)^c ∩ window)}
// together with a log-linear rate fit and the per-5-shell contractions.
struct DecayCertificate {
  Point center;
  std::vector<int> shells;             // k = 0..k_max
  std::vector<double> shell_norms;     // squared H2 norms, nonincreasing
  std::vector<double> contraction5;    // shell_norms[k]/shell_norms[k-5]
  double worst_contraction = 0.0;      // max of contraction5 (the measured C/(C+1))
  double s_fit = 0.0;                  // fitted decay rate of log(norm^2) in k
  double log_intercept = 0.0;
  bool degenerate = false;             // all shells below 1e-14
  std::optional<int> M;                // 2 * max distance to the pinned interior
  double c_equiv = 0.0;
  double theoretical_ratio = 0.0;      // C/(C+1), C = c_equiv * M^{2d+2}
  // Pointwise bound |G(x)| <= sqrt(shell norm at k = |x-y|-1)  (Eq.-level).
  double pointwise_bound(int distance) const;
};

DecayCertificate shell_norm_sequence(const LatticeField& g_col, const Point& y, int k_max,
                                     const Region& window, const Region* pinned = nullptr,
                                     double c_equiv = 3.0);

// Norm-equivalence check on a region E for a function vanishing on A:
//   ||u||^2_{H2(E)} <= 3 * max(M,1)^{2(d+1)} * ||grad_2 u||^2_{L2(E)},
// with M = 2 * max_{x in E} d_E(x, A-hat ∩ E) computed here.
struct EquivalenceReport {
  double lhs = 0.0;  // ||u||^2_{H2(E)}
  double rhs = 0.0;  // 3 * max(M,1)^{2(d+1)} * ||grad_2 u||^2_{L2(E)}
  int M = 0;
  double constant = 3.0;
};

class HypothesisViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

EquivalenceReport equivalence_check(const LatticeField& u, const Region& E, const Region& A);

// Distances M_l^(k) on the annuli D_l^(k) = B_{k+1}(center) \ B_{k-5l}(center),
// l = 0..floor(k/5); nullopt encodes the M = +infinity convention.
std::vector<std::optional<int>> annulus_interior_distances(const Region& A, const Point& center,
                                                           int k);
int count_ak(const std::vector<std::optional<int>>& M_l, double m_k);

// Adaptive pointwise bound driven by the a_k statistic:
//   |G_A^y(x)| <= gamma_value * exp(-c * m_k^{-2(d+1)} * a_k),  m_k = k^xi.
// gamma_value carries the d=4 log N factor when applicable.
struct AdaptiveBoundReport {
  int k = 0;
  double xi = 0.0;
  double m_k = 0.0;
  std::vector<std::optional<int>> M_l;
  int a_k = 0;
  double gamma_value = 0.0;
  double c_used = 0.0;
  double bound = 0.0;
  std::optional<double> measured;  // |G_A^y(x)| when a column is supplied
};

AdaptiveBoundReport adaptive_bound(const Region& A, const Point& x, const Point& y, double xi,
                                   double gamma_value, double c_cfg,
                                   const LatticeField* g_col = nullptr);

// One-time calibration of the bound constant per dimension: the largest c
// honoring measured <= bound on a sweep of random pinned configurations,
// deflated by 10%.
double calibrate_adaptive_c(int d, int box_N, int n_configs, double xi, double gamma_value,
                            uint64_t seed);

}  // namespace membrane
