#pragma once

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <memory>
#include <stdexcept>
#include <string>

#include "membrane/field.hpp"
#include "membrane/rng.hpp"
#include "membrane/stencil.hpp"

namespace membrane {

enum class Backend { kAuto, kDirect, kConjugateGradient };

struct SolverOptions {
  Backend backend = Backend::kAuto;
  double tolerance = 1e-10;   // relative residual, inf-norm on unit sources
  int max_iterations = 20000;
  std::string cache_dir;      // green-column disk cache; empty = disabled
  int box_N = 0;              // cache path component when the free set lives in V_N
};

struct SolveInfo {
  std::string backend;
  int iterations = 0;
  double residual = 0.0;  // achieved relative inf-norm residual
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), achieved_residual(residual) {}
  double achieved_residual;
};

// Solver for Delta^2 restricted to a free set E with zero exterior data.
// Immutable after construction; concurrent solves are safe.
class GreenSolver {
 public:
  explicit GreenSolver(Region free_set, SolverOptions opts = {});

  const Region& free_set() const { return op_.free_set; }
  const Eigen::SparseMatrix<double>& matrix() const { return op_.matrix; }
  const SolverOptions& options() const { return opts_; }
  uint64_t free_set_hash() const { return hash_; }
  bool is_direct() const { return direct_ != nullptr; }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, SolveInfo* info = nullptr) const;
  // Column of the Green's function: G(:,y) over the free set.
  Eigen::VectorXd column_vector(int y_index, SolveInfo* info = nullptr) const;

  // Gaussian field sample with covariance G = matrix()^{-1} (direct backend only).
  Eigen::VectorXd sample_field(RngStream& rng) const;

 private:
  RestrictedBilaplacian op_;
  SolverOptions opts_;
  uint64_t hash_ = 0;
  std::unique_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> direct_;
  std::unique_ptr<Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                                           Eigen::Lower | Eigen::Upper>>
      cg_;
};

// Green's function column as a LatticeField (exact zeros off the free set).
// Uses the disk cache when the solver was configured with one.
LatticeField green_column(const GreenSolver& solver, const Point& y, SolveInfo* info = nullptr);

// G_{E^c}(x,x).
double variance(const GreenSolver& solver, const Point& x);

// Gaussian conditioning on additionally pinning S ⊆ E (Schur complement):
//   G_S(x,y) = G(x,y) - G(x,S) [G(S,S)]^{-1} G(S,y).
class SchurConditioner {
 public:
  SchurConditioner(const GreenSolver& base, Region S);

  const Region& pinned() const { return S_; }
  const Region& conditioned_free_set() const { return free_; }

  double value(const Point& x, const Point& y) const;
  LatticeField column(const Point& y) const;  // over E \ S
  double conditioned_variance(const Point& x) const { return value(x, x); }

 private:
  Eigen::VectorXd base_column(const Point& y) const;
  const GreenSolver& base_;
  Region S_, free_;
  std::vector<int> s_indices_;
  Eigen::MatrixXd cols_S_;  // |E| x |S|, base columns at pinned sites
  Eigen::LLT<Eigen::MatrixXd> gram_llt_;
};

// Disk cache of Green columns, laid out as
//   <root>/<d>/<N>/<freeset-hash>/<y-index>.col
// with a length-prefixed (site-index, double) binary payload. Writes go
// through a temp file + rename so concurrent writers never corrupt entries.
class ColumnCache {
 public:
  ColumnCache(std::string root, int d, int box_N, uint64_t freeset_hash);
  static std::string root_from_env_or(const std::string& fallback);

  bool load(int y_index, int n, Eigen::VectorXd* out) const;
  void store(int y_index, const Eigen::VectorXd& col) const;
  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
};

}  // namespace membrane
