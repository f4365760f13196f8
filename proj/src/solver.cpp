#include "membrane/solver.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace membrane {

namespace {

double rel_residual_inf(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& rhs) {
  const double scale = rhs.lpNorm<Eigen::Infinity>();
  if (scale == 0.0) return (A * x).lpNorm<Eigen::Infinity>();
  return (A * x - rhs).lpNorm<Eigen::Infinity>() / scale;
}

bool use_direct(Backend b, int d, int n) {
  if (b == Backend::kDirect) return true;
  if (b == Backend::kConjugateGradient) return false;
  // Simplicial factorizations of 4D/5D stencil graphs fill in badly; keep the
  // direct path to sizes where it still beats CG.
  return d <= 3 ? n <= 50000 : n <= 20000;
}

}  // namespace

GreenSolver::GreenSolver(Region free_set, SolverOptions opts)
    : op_(assemble_restricted(free_set)), opts_(opts), hash_(op_.free_set.content_hash()) {
  const int n = op_.free_set.size();
  if (use_direct(opts_.backend, op_.free_set.dim(), n)) {
    direct_ = std::make_unique<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>();
    direct_->compute(op_.matrix);
    if (direct_->info() != Eigen::Success)
      throw SolverError("GreenSolver: Cholesky factorization failed (matrix not SPD?)", 0.0);
  } else {
    cg_ = std::make_unique<
        Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper>>();
    cg_->setTolerance(opts_.tolerance);
    cg_->setMaxIterations(opts_.max_iterations);
    cg_->compute(op_.matrix);
  }
}

Eigen::VectorXd GreenSolver::solve(const Eigen::VectorXd& rhs, SolveInfo* info) const {
  SolveInfo local;
  Eigen::VectorXd x;
  if (direct_) {
    local.backend = "direct";
    x = direct_->solve(rhs);
    local.residual = rel_residual_inf(op_.matrix, x, rhs);
    // One or two refinement rounds guard against drift on ill-conditioned boxes.
    for (int round = 0; round < 2 && local.residual > opts_.tolerance; ++round) {
      x += direct_->solve(rhs - op_.matrix * x);
      local.residual = rel_residual_inf(op_.matrix, x, rhs);
      local.iterations = round + 1;
    }
  } else {
    local.backend = "cg";
    x = cg_->solve(rhs);
    local.iterations = static_cast<int>(cg_->iterations());
    local.residual = rel_residual_inf(op_.matrix, x, rhs);
  }
  if (local.residual > 100 * opts_.tolerance || !std::isfinite(local.residual))
    throw SolverError("GreenSolver: solve did not converge, achieved relative residual " +
                          std::to_string(local.residual),
                      local.residual);
  if (info) *info = local;
  return x;
}

Eigen::VectorXd GreenSolver::column_vector(int y_index, SolveInfo* info) const {
  if (y_index < 0 || y_index >= op_.free_set.size())
    throw std::invalid_argument("column_vector: index out of range");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(op_.free_set.size());
  rhs[y_index] = 1.0;
  return solve(rhs, info);
}

Eigen::VectorXd GreenSolver::sample_field(RngStream& rng) const {
  if (!direct_)
    throw std::logic_error("sample_field requires the direct backend");
  const int n = op_.free_set.size();
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z[i] = rng.normal();
  // P A P^T = L L^T, so phi = P^{-1} L^{-T} z has covariance A^{-1}.
  Eigen::VectorXd w = direct_->matrixU().solve(z);
  return direct_->permutationPinv() * w;
}

LatticeField green_column(const GreenSolver& solver, const Point& y, SolveInfo* info) {
  auto yi = solver.free_set().index_of(y);
  if (!yi) throw std::invalid_argument("green_column: y not in the free set");
  const int n = solver.free_set().size();
  if (!solver.options().cache_dir.empty()) {
    ColumnCache cache(solver.options().cache_dir, solver.free_set().dim(),
                      solver.options().box_N, solver.free_set_hash());
    Eigen::VectorXd col;
    if (cache.load(*yi, n, &col)) {
      if (info) *info = SolveInfo{"cache", 0, 0.0};
    } else {
      col = solver.column_vector(*yi, info);
      cache.store(*yi, col);
    }
    return LatticeField(solver.free_set(), std::vector<double>(col.data(), col.data() + n));
  }
  Eigen::VectorXd col = solver.column_vector(*yi, info);
  return LatticeField(solver.free_set(), std::vector<double>(col.data(), col.data() + n));
}

double variance(const GreenSolver& solver, const Point& x) {
  auto xi = solver.free_set().index_of(x);
  if (!xi) throw std::invalid_argument("variance: x not in the free set");
  return solver.column_vector(*xi)[*xi];
}

SchurConditioner::SchurConditioner(const GreenSolver& base, Region S)
    : base_(base), S_(std::move(S)), free_(base.free_set().set_difference(S_)) {
  const int ns = S_.size();
  s_indices_.reserve(ns);
  for (const auto& s : S_) {
    auto i = base_.free_set().index_of(s);
    if (!i) throw std::invalid_argument("SchurConditioner: S must be a subset of the free set");
    s_indices_.push_back(*i);
  }
  cols_S_.resize(base_.free_set().size(), ns);
  for (int j = 0; j < ns; ++j) cols_S_.col(j) = base_.column_vector(s_indices_[j]);
  Eigen::MatrixXd gram(ns, ns);
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < ns; ++j) gram(i, j) = cols_S_(s_indices_[i], j);
  gram = 0.5 * (gram + gram.transpose().eval());
  gram_llt_.compute(gram);
  if (ns > 0 && gram_llt_.info() != Eigen::Success)
    throw std::invalid_argument(
        "SchurConditioner: singular S-block (numerically dependent constraints)");
}

Eigen::VectorXd SchurConditioner::base_column(const Point& y) const {
  auto yi = base_.free_set().index_of(y);
  if (!yi) throw std::invalid_argument("SchurConditioner: y not in the free set");
  return base_.column_vector(*yi);
}

double SchurConditioner::value(const Point& x, const Point& y) const {
  if (S_.contains(x) || S_.contains(y)) return 0.0;
  auto xi = base_.free_set().index_of(x);
  if (!xi) throw std::invalid_argument("SchurConditioner: x not in the free set");
  if (S_.empty()) return base_column(y)[*xi];
  const Eigen::VectorXd gy = base_column(y);
  Eigen::VectorXd gy_S(S_.size());
  for (int i = 0; i < S_.size(); ++i) gy_S[i] = gy[s_indices_[i]];
  const Eigen::VectorXd w = gram_llt_.solve(gy_S);
  return gy[*xi] - cols_S_.row(*xi).dot(w);
}

LatticeField SchurConditioner::column(const Point& y) const {
  const Eigen::VectorXd gy = base_column(y);
  Eigen::VectorXd full;
  if (S_.empty()) {
    full = gy;
  } else {
    Eigen::VectorXd gy_S(S_.size());
    for (int i = 0; i < S_.size(); ++i) gy_S[i] = gy[s_indices_[i]];
    full = gy - cols_S_ * gram_llt_.solve(gy_S);
  }
  std::vector<double> vals(free_.size());
  for (int i = 0; i < free_.size(); ++i)
    vals[i] = full[*base_.free_set().index_of(free_.site(i))];
  return LatticeField(free_, std::move(vals));
}

ColumnCache::ColumnCache(std::string root, int d, int box_N, uint64_t freeset_hash) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%d/%d/%016llx", d, box_N,
                static_cast<unsigned long long>(freeset_hash));
  dir_ = root + "/" + buf;
}

std::string ColumnCache::root_from_env_or(const std::string& fallback) {
  const char* env = std::getenv("MEMBRANE_LAB_CACHE");
  return env && *env ? std::string(env) : fallback;
}

bool ColumnCache::load(int y_index, int n, Eigen::VectorXd* out) const {
  std::ifstream in(dir_ + "/" + std::to_string(y_index) + ".col", std::ios::binary);
  if (!in) return false;
  uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!in || count > static_cast<uint64_t>(n)) return false;
  Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
  for (uint64_t i = 0; i < count; ++i) {
    uint32_t idx;
    double val;
    in.read(reinterpret_cast<char*>(&idx), sizeof(idx));
    in.read(reinterpret_cast<char*>(&val), sizeof(val));
    if (!in || idx >= static_cast<uint32_t>(n)) return false;
    col[idx] = val;
  }
  *out = std::move(col);
  return true;
}

void ColumnCache::store(int y_index, const Eigen::VectorXd& col) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir_);
  const std::string final_path = dir_ + "/" + std::to_string(y_index) + ".col";
  const std::string tmp_path = final_path + ".tmp" + std::to_string(::getpid());
  {
    std::ofstream outf(tmp_path, std::ios::binary | std::ios::trunc);
    const uint64_t count = static_cast<uint64_t>(col.size());
    outf.write(reinterpret_cast<const char*>(&count), sizeof(count));
    for (uint32_t i = 0; i < count; ++i) {
      const double v = col[i];
      outf.write(reinterpret_cast<const char*>(&i), sizeof(i));
      outf.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
  fs::rename(tmp_path, final_path);
}

}  // namespace membrane
