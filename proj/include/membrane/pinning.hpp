#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "membrane/rng.hpp"
#include "membrane/solver.hpp"

namespace membrane {

// Ratio of partition functions Z_{E\{x}} / Z_E for the membrane model: equals
// the Gaussian determinant ratio 1/sqrt(2π σ_x²) with σ_x² = variance(E, x).
double partition_ratio_from_variance(double sigma_sq);
double partition_ratio(const GreenSolver& solver, const Point& x);

// Heat-bath conditional of the pinning measure:
//   ζ(x ∈ A | A\{x} = C) = q/(1+q),  q = ε · Z_{E\{x}}/Z_E,  E = V_N \ C.
double gibbs_conditional(const Box& box, const Region& A, const Point& x, double eps,
                         const SolverOptions& opts = {});

// Exact law ζ_N^ε on subsets of enumerable boxes (|V_N| <= 16):
//   ζ(A) ∝ ε^{|A|} Z_{V_N\A},  Z_E = (2π)^{|E|/2} / sqrt(det Δ²|_E).
struct ZetaTable {
  Box box;
  double eps = 0.0;
  Region sites;
  std::vector<double> prob;  // indexed by bitmask; bit i set = site i pinned

  int n_sites() const { return sites.size(); }
  double prob_of_mask(uint32_t mask) const { return prob[mask]; }
  double prob_of(const Region& A) const;
  double mean_pinned_count() const;
};

ZetaTable enumerate_zeta(const Box& box, double eps);

// One systematic-scan heat-bath sweep applied exactly to a distribution over
// subsets (kernel-as-matrix route; test oracle for stationarity).
std::vector<double> apply_heat_bath_sweep(const Box& box, double eps, std::vector<double> dist);

double total_variation(const std::vector<double>& a, const std::vector<double>& b);

// Gibbs samplers for ζ_N^ε.
//  - kCollapsed: the subset chain; every site visit resamples membership from
//    gibbs_conditional (one Green variance on the current free set).
//  - kJointField: heat bath on the joint (φ, A) measure whose A-marginal is
//    ζ_N^ε; one stencil row per visit, usable on large boxes.
enum class GibbsKernel { kAuto, kCollapsed, kJointField };
enum class ScanOrder { kSystematic, kRandom };

struct GibbsOptions {
  GibbsKernel kernel = GibbsKernel::kAuto;
  ScanOrder scan = ScanOrder::kSystematic;
};

class GibbsChain {
 public:
  GibbsChain(const Box& box, double eps, uint64_t seed, GibbsOptions opts = {});

  void sweep();
  uint64_t sweeps_done() const { return sweeps_; }
  const Region& sites() const { return sites_; }
  const std::vector<uint8_t>& pinned_mask() const { return pinned_; }
  Region pinned_region() const;
  double pinned_density() const;
  bool joint_kernel() const { return use_joint_; }

  // Exact conditional pin probability at a site given the rest of the current
  // configuration (collapsed formula; diagnostics and small-box validation).
  double conditional_probability(int site_index);

 private:
  double collapsed_conditional(int site_index);
  void visit(int site_index, RngStream& rng);

  Box box_;
  double eps_;
  uint64_t seed_;
  GibbsOptions opts_;
  Region sites_;
  Eigen::SparseMatrix<double> stencil_;
  double diag_;
  std::vector<uint8_t> pinned_;
  std::vector<double> phi_;
  uint64_t sweeps_ = 0;
  bool use_joint_ = false;
  bool memo_enabled_ = false;
  std::unordered_map<uint64_t, double> memo_;
};

// A seeded collection of pinned-set samples.
struct PinnedEnsemble {
  int d = 0, N = 0;
  double eps = 0.0;
  uint64_t seed = 0;
  int burn_in = 0, thinning = 1;
  uint32_t sampler_version = 1;
  std::string kernel;
  std::vector<std::vector<uint8_t>> samples;  // one byte per site, box order

  int n_samples() const { return static_cast<int>(samples.size()); }
  int pinned_count(int i) const;
  Region pinned_region(int i, const Region& sites) const;

  void save(const std::string& path) const;
  static PinnedEnsemble load(const std::string& path);
};

// Runs burn_in sweeps, records a sample, then (n-1) x (thinning sweeps +
// record). n=1, burn_in=0 returns the initial state (all free).
PinnedEnsemble sample_ensemble(const Box& box, double eps, int n, int burn_in, int thinning,
                               uint64_t seed, GibbsOptions opts = {});

// Bernoulli sandwich for the heat-bath conditionals: every conditional must
// lie in [q-/(1+q-), q+/(1+q+)] with q± = ε / sqrt(2π σ²∓) driven by the
// variance bounds 2d/(2d+1) <= σ² <= var_upper (γ̂, or γ̂ log N in d=4).
struct DominationEnvelope {
  double eps = 0.0;
  double var_lower = 0.0, var_upper = 0.0;
  double q_minus = 0.0, q_plus = 0.0;
  double p_minus = 0.0, p_plus = 0.0;  // implied Bernoulli parameters ρ∓
};

DominationEnvelope domination_envelope(int d, double eps, double var_upper);

struct DominationReport {
  DominationEnvelope envelope;
  int checks = 0;
  int violations = 0;
  double min_seen = 0.0, max_seen = 0.0;  // empirical conditional envelope

  void record(double p);
};

}  // namespace membrane
