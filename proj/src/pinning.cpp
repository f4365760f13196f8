#include "membrane/pinning.hpp"

#include <cmath>
#include <fstream>

namespace membrane {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

// Dense variance of site `local` within the sub-block of the stencil matrix
// indexed by `idx` (global indices). Used by the collapsed kernel on small
// free sets.
double dense_variance(const Eigen::SparseMatrix<double>& Q, const std::vector<int>& idx,
                      int local) {
  const int n = static_cast<int>(idx.size());
  std::vector<int> global_to_local(Q.rows(), -1);
  for (int i = 0; i < n; ++i) global_to_local[idx[i]] = i;
  Eigen::MatrixXd sub = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(Q, idx[j]); it; ++it) {
      const int li = global_to_local[it.row()];
      if (li >= 0) sub(li, j) = it.value();
    }
  Eigen::LLT<Eigen::MatrixXd> llt(sub);
  if (llt.info() != Eigen::Success)
    throw SolverError("collapsed conditional: dense factorization failed", 0.0);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e[local] = 1.0;
  return llt.solve(e)[local];
}

}  // namespace

double partition_ratio_from_variance(double sigma_sq) {
  return 1.0 / std::sqrt(kTwoPi * sigma_sq);
}

double partition_ratio(const GreenSolver& solver, const Point& x) {
  return partition_ratio_from_variance(variance(solver, x));
}

double gibbs_conditional(const Box& box, const Region& A, const Point& x, double eps,
                         const SolverOptions& opts) {
  if (!box.contains(x)) throw std::invalid_argument("gibbs_conditional: x outside the box");
  const Region C = A.set_difference(Region(box.d, {x}));
  const Region E = box_sites(box).set_difference(C);
  GreenSolver solver(E, opts);
  const double q = eps * partition_ratio(solver, x);
  return q / (1.0 + q);
}

double ZetaTable::prob_of(const Region& A) const {
  uint32_t mask = 0;
  for (const auto& p : A) {
    auto i = sites.index_of(p);
    if (!i) throw std::invalid_argument("ZetaTable::prob_of: site outside the box");
    mask |= 1u << *i;
  }
  return prob[mask];
}

double ZetaTable::mean_pinned_count() const {
  double m = 0.0;
  for (size_t mask = 0; mask < prob.size(); ++mask)
    m += prob[mask] * __builtin_popcountll(mask);
  return m;
}

ZetaTable enumerate_zeta(const Box& box, double eps) {
  if (eps < 0.0) throw std::invalid_argument("enumerate_zeta: eps must be >= 0");
  ZetaTable table{box, eps, box_sites(box), {}};
  const int n = table.sites.size();
  if (n > 16) throw std::invalid_argument("enumerate_zeta: box too large (" + std::to_string(n) +
                                          " sites, limit 16)");
  const auto op = assemble_restricted(table.sites);
  const Eigen::MatrixXd Q = Eigen::MatrixXd(op.matrix);

  const uint32_t n_masks = 1u << n;
  std::vector<double> logw(n_masks, -std::numeric_limits<double>::infinity());
  for (uint32_t mask = 0; mask < n_masks; ++mask) {
    const int pinned = __builtin_popcount(mask);
    if (eps == 0.0 && pinned > 0) continue;  // weight 0
    // log Z_E with E the free sites.
    std::vector<int> free_idx;
    for (int i = 0; i < n; ++i)
      if (!(mask & (1u << i))) free_idx.push_back(i);
    double log_z = 0.0;
    if (!free_idx.empty()) {
      const int ne = static_cast<int>(free_idx.size());
      Eigen::MatrixXd sub(ne, ne);
      for (int a = 0; a < ne; ++a)
        for (int b = 0; b < ne; ++b) sub(a, b) = Q(free_idx[a], free_idx[b]);
      Eigen::LLT<Eigen::MatrixXd> llt(sub);
      double logdet = 0.0;
      for (int i = 0; i < ne; ++i) logdet += std::log(llt.matrixL()(i, i));
      logdet *= 2.0;
      log_z = 0.5 * ne * std::log(kTwoPi) - 0.5 * logdet;
    }
    logw[mask] = (pinned > 0 ? pinned * std::log(eps) : 0.0) + log_z;
  }
  const double shift = *std::max_element(logw.begin(), logw.end());
  table.prob.resize(n_masks);
  double total = 0.0;
  for (uint32_t mask = 0; mask < n_masks; ++mask) {
    table.prob[mask] = std::isfinite(logw[mask]) ? std::exp(logw[mask] - shift) : 0.0;
    total += table.prob[mask];
  }
  for (auto& p : table.prob) p /= total;
  return table;
}

std::vector<double> apply_heat_bath_sweep(const Box& box, double eps, std::vector<double> dist) {
  const Region sites = box_sites(box);
  const int n = sites.size();
  if (dist.size() != (1u << n)) throw std::invalid_argument("apply_heat_bath_sweep: size mismatch");
  const auto op = assemble_restricted(sites);
  std::vector<int> all_idx(n);
  for (int i = 0; i < n; ++i) all_idx[i] = i;

  std::unordered_map<uint64_t, double> memo;
  auto conditional = [&](uint32_t mask_without, int i) {
    const uint64_t key = (static_cast<uint64_t>(mask_without) << 6) | static_cast<uint64_t>(i);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    std::vector<int> free_idx;
    int local = -1;
    for (int j = 0; j < n; ++j)
      if (j == i || !(mask_without & (1u << j))) {
        if (j == i) local = static_cast<int>(free_idx.size());
        free_idx.push_back(j);
      }
    const double sigma_sq = dense_variance(op.matrix, free_idx, local);
    const double q = eps * partition_ratio_from_variance(sigma_sq);
    const double p = q / (1.0 + q);
    memo.emplace(key, p);
    return p;
  };

  for (int i = 0; i < n; ++i) {
    std::vector<double> next(dist.size(), 0.0);
    for (uint32_t mask = 0; mask < dist.size(); ++mask) {
      if (dist[mask] == 0.0) continue;
      const uint32_t without = mask & ~(1u << i);
      const double p = conditional(without, i);
      next[without | (1u << i)] += dist[mask] * p;
      next[without] += dist[mask] * (1.0 - p);
    }
    dist.swap(next);
  }
  return dist;
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("total_variation: size mismatch");
  double tv = 0.0;
  for (size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] - b[i]);
  return 0.5 * tv;
}

GibbsChain::GibbsChain(const Box& box, double eps, uint64_t seed, GibbsOptions opts)
    : box_(box), eps_(eps), seed_(seed), opts_(opts), sites_(box_sites(box)) {
  if (eps <= 0.0) throw std::invalid_argument("GibbsChain: eps must be positive");
  const auto op = assemble_restricted(sites_);
  stencil_ = op.matrix;
  diag_ = bilaplacian_diagonal(box.d);
  pinned_.assign(sites_.size(), 0);  // initial state A = ∅
  phi_.assign(sites_.size(), 0.0);
  use_joint_ = opts.kernel == GibbsKernel::kJointField ||
               (opts.kernel == GibbsKernel::kAuto && sites_.size() > 64);
  memo_enabled_ = sites_.size() <= 58;
}

Region GibbsChain::pinned_region() const {
  std::vector<Point> pts;
  for (int i = 0; i < sites_.size(); ++i)
    if (pinned_[i]) pts.push_back(sites_.site(i));
  return Region(box_.d, std::move(pts));
}

double GibbsChain::pinned_density() const {
  double s = 0.0;
  for (uint8_t b : pinned_) s += b;
  return s / static_cast<double>(pinned_.size());
}

double GibbsChain::collapsed_conditional(int site_index) {
  uint64_t key = 0;
  if (memo_enabled_) {
    uint64_t mask = 0;
    for (int i = 0; i < sites_.size(); ++i)
      if (pinned_[i] && i != site_index) mask |= (1ULL << i);
    key = (mask << 6) | static_cast<uint64_t>(site_index);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  std::vector<int> free_idx;
  int local = -1;
  for (int i = 0; i < sites_.size(); ++i)
    if (i == site_index || !pinned_[i]) {
      if (i == site_index) local = static_cast<int>(free_idx.size());
      free_idx.push_back(i);
    }
  const double sigma_sq = dense_variance(stencil_, free_idx, local);
  const double q = eps_ * partition_ratio_from_variance(sigma_sq);
  const double p = q / (1.0 + q);
  if (memo_enabled_) memo_.emplace(key, p);
  return p;
}

double GibbsChain::conditional_probability(int site_index) {
  return collapsed_conditional(site_index);
}

void GibbsChain::visit(int site_index, RngStream& rng) {
  if (use_joint_) {
    // Heat bath on (phi_x, a_x) given the rest of the field: the free branch
    // has mass sqrt(2π/Q_xx)·exp(c²/(2Q_xx)), the pinned branch mass ε.
    double c = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(stencil_, site_index); it; ++it)
      if (it.row() != site_index) c += it.value() * phi_[it.row()];
    const double log_free = 0.5 * std::log(kTwoPi / diag_) + c * c / (2.0 * diag_);
    const double t = log_free - std::log(eps_);
    double p_pin;
    if (t > 700.0) p_pin = 0.0;
    else if (t < -700.0) p_pin = 1.0;
    else p_pin = 1.0 / (1.0 + std::exp(t));
    if (rng.uniform() < p_pin) {
      pinned_[site_index] = 1;
      phi_[site_index] = 0.0;
    } else {
      pinned_[site_index] = 0;
      phi_[site_index] = -c / diag_ + rng.normal() / std::sqrt(diag_);
    }
  } else {
    const double p = collapsed_conditional(site_index);
    pinned_[site_index] = rng.uniform() < p ? 1 : 0;
  }
}

void GibbsChain::sweep() {
  auto rng = RngStream::substream(seed_, "sweep", sweeps_);
  const int n = sites_.size();
  if (opts_.scan == ScanOrder::kSystematic) {
    for (int i = 0; i < n; ++i) visit(i, rng);
  } else {
    for (int v = 0; v < n; ++v) visit(static_cast<int>(rng.below(n)), rng);
  }
  ++sweeps_;
}

int PinnedEnsemble::pinned_count(int i) const {
  int c = 0;
  for (uint8_t b : samples[i]) c += b;
  return c;
}

Region PinnedEnsemble::pinned_region(int i, const Region& sites) const {
  std::vector<Point> pts;
  for (int j = 0; j < sites.size(); ++j)
    if (samples[i][j]) pts.push_back(sites.site(j));
  return Region(sites.dim(), std::move(pts));
}

void PinnedEnsemble::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("PinnedEnsemble::save: cannot open " + path);
  const char magic[4] = {'M', 'L', 'P', 'E'};
  out.write(magic, 4);
  auto w32 = [&](uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  auto w64 = [&](uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
  w32(sampler_version);
  w32(static_cast<uint32_t>(d));
  w32(static_cast<uint32_t>(N));
  out.write(reinterpret_cast<const char*>(&eps), sizeof(eps));
  w64(seed);
  w32(static_cast<uint32_t>(burn_in));
  w32(static_cast<uint32_t>(thinning));
  w32(static_cast<uint32_t>(kernel.size()));
  out.write(kernel.data(), static_cast<std::streamsize>(kernel.size()));
  w32(static_cast<uint32_t>(samples.size()));
  const uint64_t n_sites = samples.empty() ? 0 : samples[0].size();
  w64(n_sites);
  const size_t bytes = (n_sites + 7) / 8;
  std::vector<uint8_t> bitmap(bytes);
  for (const auto& s : samples) {
    std::fill(bitmap.begin(), bitmap.end(), 0);
    for (uint64_t i = 0; i < n_sites; ++i)
      if (s[i]) bitmap[i / 8] |= static_cast<uint8_t>(1u << (i % 8));
    out.write(reinterpret_cast<const char*>(bitmap.data()), static_cast<std::streamsize>(bytes));
  }
}

PinnedEnsemble PinnedEnsemble::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("PinnedEnsemble::load: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (std::string(magic, 4) != "MLPE")
    throw std::runtime_error("PinnedEnsemble::load: bad magic in " + path);
  PinnedEnsemble e;
  auto r32 = [&]() { uint32_t v; in.read(reinterpret_cast<char*>(&v), 4); return v; };
  auto r64 = [&]() { uint64_t v; in.read(reinterpret_cast<char*>(&v), 8); return v; };
  e.sampler_version = r32();
  e.d = static_cast<int>(r32());
  e.N = static_cast<int>(r32());
  in.read(reinterpret_cast<char*>(&e.eps), sizeof(e.eps));
  e.seed = r64();
  e.burn_in = static_cast<int>(r32());
  e.thinning = static_cast<int>(r32());
  const uint32_t klen = r32();
  e.kernel.resize(klen);
  in.read(e.kernel.data(), klen);
  const uint32_t n = r32();
  const uint64_t n_sites = r64();
  const size_t bytes = (n_sites + 7) / 8;
  std::vector<uint8_t> bitmap(bytes);
  e.samples.assign(n, std::vector<uint8_t>(n_sites, 0));
  for (uint32_t s = 0; s < n; ++s) {
    in.read(reinterpret_cast<char*>(bitmap.data()), static_cast<std::streamsize>(bytes));
    for (uint64_t i = 0; i < n_sites; ++i)
      e.samples[s][i] = (bitmap[i / 8] >> (i % 8)) & 1u;
  }
  if (!in) throw std::runtime_error("PinnedEnsemble::load: truncated file " + path);
  return e;
}

PinnedEnsemble sample_ensemble(const Box& box, double eps, int n, int burn_in, int thinning,
                               uint64_t seed, GibbsOptions opts) {
  if (n < 1) throw std::invalid_argument("sample_ensemble: n >= 1 required");
  if (burn_in < 0 || thinning < 1)
    throw std::invalid_argument("sample_ensemble: burn_in >= 0 and thinning >= 1 required");
  GibbsChain chain(box, eps, seed, opts);
  PinnedEnsemble e;
  e.d = box.d;
  e.N = box.N;
  e.eps = eps;
  e.seed = seed;
  e.burn_in = burn_in;
  e.thinning = thinning;
  e.kernel = chain.joint_kernel() ? "joint-field" : "collapsed";
  for (int i = 0; i < burn_in; ++i) chain.sweep();
  e.samples.push_back(chain.pinned_mask());
  for (int s = 1; s < n; ++s) {
    for (int i = 0; i < thinning; ++i) chain.sweep();
    e.samples.push_back(chain.pinned_mask());
  }
  return e;
}

DominationEnvelope domination_envelope(int d, double eps, double var_upper) {
  DominationEnvelope env;
  env.eps = eps;
  env.var_lower = 2.0 * d / (2.0 * d + 1.0);
  env.var_upper = var_upper;
  env.q_minus = eps * partition_ratio_from_variance(var_upper);
  env.q_plus = eps * partition_ratio_from_variance(env.var_lower);
  env.p_minus = env.q_minus / (1.0 + env.q_minus);
  env.p_plus = env.q_plus / (1.0 + env.q_plus);
  return env;
}

void DominationReport::record(double p) {
  if (checks == 0) {
    min_seen = max_seen = p;
  } else {
    min_seen = std::min(min_seen, p);
    max_seen = std::max(max_seen, p);
  }
  ++checks;
  if (p < envelope.p_minus - 1e-12 || p > envelope.p_plus + 1e-12) ++violations;
}

}  // namespace membrane
