#include "membrane/decay.hpp"

#include <cmath>

namespace membrane {

namespace {

CovarianceEstimate batch_means(const std::vector<double>& v) {
  CovarianceEstimate est;
  est.n = static_cast<int>(v.size());
  if (v.empty()) return est;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= est.n;
  est.mean = mean;
  if (est.n < 4) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    est.se = est.n > 1 ? std::sqrt(ss / (est.n - 1) / est.n) : 0.0;
    return est;
  }
  const int nb = static_cast<int>(std::floor(std::sqrt(static_cast<double>(est.n))));
  const int m = est.n / nb;
  double ss = 0.0;
  std::vector<double> bm(nb);
  for (int b = 0; b < nb; ++b) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += v[b * m + i];
    bm[b] = s / m;
  }
  double bmean = 0.0;
  for (double x : bm) bmean += x;
  bmean /= nb;
  for (double x : bm) ss += (x - bmean) * (x - bmean);
  est.se = std::sqrt(ss / (nb - 1) / nb);
  return est;
}

struct LineFit {
  double slope = 0.0, intercept = 0.0, rms = 0.0;
};

LineFit line_fit(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  const int n = static_cast<int>(x.size());
  if (n < 2) return f;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

}  // namespace

std::vector<CovarianceEstimate> pinned_covariance_profile(const Box& box,
                                                          const PinnedEnsemble& ens,
                                                          const Point& x,
                                                          const std::vector<Point>& ys,
                                                          const SolverOptions& opts) {
  const Region sites = box_sites(box);
  if (!sites.contains(x)) throw std::invalid_argument("pinned_covariance: x outside the box");
  for (const auto& y : ys)
    if (!sites.contains(y)) throw std::invalid_argument("pinned_covariance: y outside the box");
  std::vector<std::vector<double>> values(ys.size());
  for (int s = 0; s < ens.n_samples(); ++s) {
    const Region A = ens.pinned_region(s, sites);
    const Region E = sites.set_difference(A);
    auto xi = E.index_of(x);
    if (!xi) {
      // x pinned in this sample: G(x, .) = 0 identically.
      for (auto& v : values) v.push_back(0.0);
      continue;
    }
    SolverOptions o = opts;
    o.box_N = box.N;
    GreenSolver solver(E, o);
    const Eigen::VectorXd col = solver.column_vector(*xi);
    for (size_t j = 0; j < ys.size(); ++j) {
      auto yj = E.index_of(ys[j]);
      values[j].push_back(yj ? col[*yj] : 0.0);
    }
  }
  std::vector<CovarianceEstimate> out(ys.size());
  for (size_t j = 0; j < ys.size(); ++j) out[j] = batch_means(values[j]);
  return out;
}

CovarianceEstimate pinned_covariance(const Box& box, const PinnedEnsemble& ens, const Point& x,
                                     const Point& y, const SolverOptions& opts) {
  return pinned_covariance_profile(box, ens, x, {y}, opts)[0];
}

double exact_mixture_covariance(const ZetaTable& zeta, const Point& x, const Point& y) {
  const Region& sites = zeta.sites;
  auto xi = sites.index_of(x), yi = sites.index_of(y);
  if (!xi || !yi) throw std::invalid_argument("exact_mixture_covariance: site outside the box");
  const auto op = assemble_restricted(sites);
  const Eigen::MatrixXd Q = Eigen::MatrixXd(op.matrix);
  const int n = sites.size();
  double acc = 0.0;
  for (uint32_t mask = 0; mask < zeta.prob.size(); ++mask) {
    const double w = zeta.prob[mask];
    if (w == 0.0) continue;
    if ((mask >> *xi) & 1u || (mask >> *yi) & 1u) continue;  // pinned site: G = 0
    std::vector<int> free_idx;
    int lx = -1, ly = -1;
    for (int i = 0; i < n; ++i)
      if (!((mask >> i) & 1u)) {
        if (i == *xi) lx = static_cast<int>(free_idx.size());
        if (i == *yi) ly = static_cast<int>(free_idx.size());
        free_idx.push_back(i);
      }
    const int ne = static_cast<int>(free_idx.size());
    Eigen::MatrixXd sub(ne, ne);
    for (int a = 0; a < ne; ++a)
      for (int b = 0; b < ne; ++b) sub(a, b) = Q(free_idx[a], free_idx[b]);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(ne);
    e[lx] = 1.0;
    acc += w * Eigen::LLT<Eigen::MatrixXd>(sub).solve(e)[ly];
  }
  return acc;
}

DecayProfile decay_profile(const Box& box, const PinnedEnsemble& ens, const Point& center,
                           const std::vector<int>& distances, const SolverOptions& opts,
                           double lambda, double delta) {
  std::vector<int> ks = distances;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.size() < 2)
    throw std::invalid_argument("decay_profile: need >= 2 distinct distances");
  const int margin = std::max(1, box.N / 8);
  for (int k : ks) {
    if (k < 1) throw std::invalid_argument("decay_profile: distances must be >= 1");
    Point y = center;
    y.c[0] += k;
    for (int i = 0; i < box.d; ++i)
      if (std::abs(y.c[i]) > box.half() - margin || std::abs(center.c[i]) > box.half() - margin)
        throw std::invalid_argument("decay_profile: margin violation at distance " +
                                    std::to_string(k));
  }
  if (lambda > 0.0) {
    const double cutoff = delta * std::pow(static_cast<double>(box.N), lambda);
    std::vector<int> kept;
    for (int k : ks)
      if (k >= cutoff) kept.push_back(k);
    ks = kept;
    if (ks.size() < 2)
      throw std::invalid_argument("decay_profile: window filter left fewer than 2 distances");
  }

  std::vector<Point> ys;
  for (int k : ks) {
    Point y = center;
    y.c[0] += k;
    ys.push_back(y);
  }
  const auto estimates = pinned_covariance_profile(box, ens, center, ys, opts);

  SolverOptions o = opts;
  o.box_N = box.N;
  GreenSolver base(box_sites(box), o);
  const LatticeField base_col = green_column(base, center);

  DecayProfile prof;
  prof.d = box.d;
  prof.N = box.N;
  prof.eps = ens.eps;
  prof.center = center;
  for (size_t i = 0; i < ks.size(); ++i) {
    DecayProfileRow row;
    row.k = ks[i];
    row.cov = estimates[i].mean;
    row.se = estimates[i].se;
    row.baseline = base_col(ys[i]);
    row.n = estimates[i].n;
    prof.rows.push_back(row);
  }
  return prof;
}

StretchedFit fit_stretched_exponential(const std::vector<std::pair<double, double>>& k_cov) {
  StretchedFit fit;
  double c_max = 0.0;
  for (const auto& [k, c] : k_cov)
    if (c > 0.0) c_max = std::max(c_max, c);
  if (c_max >= 1.0) fit.normalization = 0.5 / c_max;
  std::vector<double> lx, ly, px, py;
  for (const auto& [k, c] : k_cov) {
    if (!(c > 0.0)) {
      ++fit.excluded;
      continue;
    }
    const double cn = c * fit.normalization;
    lx.push_back(std::log(k));
    ly.push_back(std::log(-std::log(cn)));
    px.push_back(std::log(k));
    py.push_back(std::log(cn));
    fit.k_min = fit.used == 0 ? k : std::min(fit.k_min, k);
    fit.k_max = std::max(fit.k_max, k);
    ++fit.used;
  }
  if (fit.used < 3)
    throw std::invalid_argument("fit_stretched_exponential: fewer than 3 usable points");
  const LineFit stretched = line_fit(lx, ly);
  const LineFit power = line_fit(px, py);
  fit.alpha = stretched.slope;
  fit.amplitude = std::exp(stretched.intercept);
  fit.residual = stretched.rms;
  fit.power_exponent = -power.slope;
  fit.power_residual = power.rms;
  fit.not_stretched = power.rms < 0.5 * stretched.rms;
  return fit;
}

StretchedFit fit_stretched_exponential(const DecayProfile& profile) {
  std::vector<std::pair<double, double>> kc;
  for (const auto& row : profile.rows) kc.emplace_back(row.k, row.cov);
  return fit_stretched_exponential(kc);
}

DeterministicVsRandom deterministic_vs_random_comparison(const Box& box, const Region& A_det,
                                                         const PinnedEnsemble& ens,
                                                         const Point& center,
                                                         const std::vector<int>& distances,
                                                         const SolverOptions& opts) {
  DeterministicVsRandom rep;
  rep.distances = distances;
  SolverOptions o = opts;
  o.box_N = box.N;
  GreenSolver det(box_sites(box).set_difference(A_det), o);
  const LatticeField col = green_column(det, center);
  std::vector<std::pair<double, double>> kc;
  for (int k : distances) {
    Point y = center;
    y.c[0] += k;
    const double g = std::abs(col(y));
    rep.deterministic_abs.push_back(g);
    kc.emplace_back(k, g);
  }
  rep.mixture = decay_profile(box, ens, center, distances, opts);
  rep.deterministic_fit = fit_stretched_exponential(kc);
  rep.mixture_fit = fit_stretched_exponential(rep.mixture);
  return rep;
}

std::vector<FieldSampleCheck> field_sampling_check(const GreenSolver& solver,
                                                   const std::vector<std::pair<Point, Point>>& pairs,
                                                   int n_draws, uint64_t seed) {
  if (!solver.is_direct())
    throw std::logic_error("field_sampling_check requires the direct backend");
  std::vector<FieldSampleCheck> out;
  const Region& e = solver.free_set();
  std::vector<std::pair<int, int>> idx;
  for (const auto& [x, y] : pairs) {
    auto xi = e.index_of(x), yi = e.index_of(y);
    if (!xi || !yi) throw std::invalid_argument("field_sampling_check: site not in free set");
    idx.emplace_back(*xi, *yi);
  }
  std::vector<std::vector<double>> prods(pairs.size());
  auto rng = RngStream::substream(seed, "field-draws");
  for (int t = 0; t < n_draws; ++t) {
    const Eigen::VectorXd phi = solver.sample_field(rng);
    for (size_t j = 0; j < idx.size(); ++j)
      prods[j].push_back(phi[idx[j].first] * phi[idx[j].second]);
  }
  for (size_t j = 0; j < idx.size(); ++j) {
    FieldSampleCheck c;
    c.x = pairs[j].first;
    c.y = pairs[j].second;
    const auto est = batch_means(prods[j]);
    c.empirical = est.mean;
    c.sigma = est.se;
    c.exact = solver.column_vector(idx[j].first)[idx[j].second];
    out.push_back(c);
  }
  return out;
}

}  // namespace membrane
