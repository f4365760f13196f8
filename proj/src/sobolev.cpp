#include "membrane/sobolev.hpp"

#include <cmath>

#include "membrane/green.hpp"

namespace membrane {

namespace {

double window_value(const std::vector<double>& u, const Window& win, Point p) {
  return win.contains(p) ? u[static_cast<size_t>(win.index(p))] : 0.0;
}

// u^2 + sum_i (D_i u)^2 + sum_{ij} (D_ij u)^2 at one site, dense window reads.
double site_contribution(const std::vector<double>& u, const Window& win, const Point& p) {
  const int d = win.dim();
  const double up = window_value(u, win, p);
  double c = up * up;
  for (int i = 0; i < d; ++i) {
    const double di = window_value(u, win, p.shifted(i, 1)) - up;
    c += di * di;
    for (int j = 0; j < d; ++j) {
      const double dij = window_value(u, win, p.shifted(i, 1).shifted(j, 1)) -
                         window_value(u, win, p.shifted(i, 1)) -
                         window_value(u, win, p.shifted(j, 1)) + up;
      c += dij * dij;
    }
  }
  return c;
}

struct LinearFit {
  double slope = 0.0, intercept = 0.0, rms_residual = 0.0;
  int n = 0;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit f;
  f.n = static_cast<int>(x.size());
  if (f.n < 2) return f;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < f.n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = f.n * sxx - sx * sx;
  if (denom == 0.0) return f;
  f.slope = (f.n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / f.n;
  double ss = 0.0;
  for (int i = 0; i < f.n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms_residual = std::sqrt(ss / f.n);
  return f;
}

}  // namespace

NormReport norms(const LatticeField& f, const Region& region) {
  const int d = region.dim();
  NormReport r;
  for (const auto& x : region) {
    const double u = f(x);
    r.l2 += u * u;
    for (int i = 0; i < d; ++i) {
      const double di = f(x.shifted(i, 1)) - u;
      r.grad += di * di;
      for (int j = 0; j < d; ++j) {
        const double dij =
            f(x.shifted(i, 1).shifted(j, 1)) - f(x.shifted(i, 1)) - f(x.shifted(j, 1)) + u;
        r.grad2 += dij * dij;
      }
    }
  }
  r.h1 = r.l2 + r.grad;
  r.h2 = r.l2 + r.grad + r.grad2;
  return r;
}

std::pair<double, double> h2_total_identity(const LatticeField& g_col, const Point& y) {
  const int dim = y.dim;
  const double rhs = 4.0 * dim * dim * g_col(y);
  if (g_col.support().empty()) return {0.0, 0.0};
  const Window win = Window::hull(g_col.support(), 2);
  const std::vector<double> u = win.densify(g_col);
  const int d = win.dim();
  double lhs = 0.0;
  for (int64_t idx = 0; idx < win.size(); ++idx) {
    const Point p = win.point(idx);
    const double up = u[static_cast<size_t>(idx)];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const double dij = window_value(u, win, p.shifted(i, 1).shifted(j, 1)) -
                           window_value(u, win, p.shifted(i, 1)) -
                           window_value(u, win, p.shifted(j, 1)) + up;
        lhs += dij * dij;
      }
  }
  return {lhs, rhs};
}

double DecayCertificate::pointwise_bound(int distance) const {
  if (distance < 1 || shell_norms.empty()) return std::sqrt(shell_norms.empty() ? 0.0 : shell_norms[0]);
  const size_t k = std::min<size_t>(distance - 1, shell_norms.size() - 1);
  return std::sqrt(shell_norms[k]);
}

DecayCertificate shell_norm_sequence(const LatticeField& g_col, const Point& y, int k_max,
                                     const Region& window, const Region* pinned, double c_equiv) {
  DecayCertificate cert;
  cert.center = y;
  cert.c_equiv = c_equiv;
  if (window.empty()) throw std::invalid_argument("shell_norm_sequence: empty window");

  // Dense pass over the window's bounding box; sites outside the window region
  // are masked out, reads beyond it see the zero extension.
  const Window win = Window::hull(window, 0);
  std::vector<double> u(static_cast<size_t>(win.size()), 0.0);
  for (int i = 0; i < g_col.support().size(); ++i) {
    const Point& p = g_col.support().site(i);
    if (win.contains(p)) u[static_cast<size_t>(win.index(p))] = g_col.values()[i];
  }
  std::vector<uint8_t> inwin(static_cast<size_t>(win.size()), 0);
  int64_t max_r = 0;
  for (const auto& p : window) {
    inwin[static_cast<size_t>(win.index(p))] = 1;
    max_r = std::max(max_r, p.l1_dist(y));
  }
  std::vector<double> bucket(static_cast<size_t>(max_r + 1), 0.0);
  for (int64_t idx = 0; idx < win.size(); ++idx) {
    if (!inwin[static_cast<size_t>(idx)]) continue;
    const Point p = win.point(idx);
    bucket[static_cast<size_t>(p.l1_dist(y))] += site_contribution(u, win, p);
  }

  // Suffix sums: shell k collects radii >= k+1.
  std::vector<double> suffix(bucket.size() + 1, 0.0);
  for (int64_t r = max_r; r >= 0; --r)
    suffix[static_cast<size_t>(r)] = suffix[static_cast<size_t>(r + 1)] + bucket[static_cast<size_t>(r)];
  cert.shells.resize(k_max + 1);
  cert.shell_norms.resize(k_max + 1);
  for (int k = 0; k <= k_max; ++k) {
    cert.shells[k] = k;
    cert.shell_norms[k] = (k + 1 <= max_r) ? suffix[static_cast<size_t>(k + 1)] : 0.0;
  }

  constexpr double kFloor = 1e-14;
  cert.degenerate = true;
  for (double v : cert.shell_norms)
    if (v >= kFloor) cert.degenerate = false;

  std::vector<double> xs, ys;
  for (int k = 0; k <= k_max; ++k)
    if (cert.shell_norms[k] >= kFloor) {
      xs.push_back(k);
      ys.push_back(std::log(cert.shell_norms[k]));
    }
  const LinearFit lf = fit_line(xs, ys);
  cert.s_fit = -lf.slope;
  cert.log_intercept = lf.intercept;

  for (int k = 5; k <= k_max; ++k) {
    if (cert.shell_norms[k - 5] >= kFloor) {
      const double ratio = cert.shell_norms[k] / cert.shell_norms[k - 5];
      cert.contraction5.push_back(ratio);
      cert.worst_contraction = std::max(cert.worst_contraction, ratio);
    }
  }

  if (pinned) {
    auto dist = max_distance_to_interior(window, *pinned);
    if (dist) {
      cert.M = 2 * *dist;
      const double C = c_equiv * std::pow(static_cast<double>(std::max(*cert.M, 1)),
                                          2.0 * window.dim() + 2.0);
      cert.theoretical_ratio = C / (C + 1.0);
    }
  }
  return cert;
}

EquivalenceReport equivalence_check(const LatticeField& u, const Region& E, const Region& A) {
  for (const auto& a : A)
    if (u(a) != 0.0)
      throw HypothesisViolation("equivalence_check: u does not vanish on A at " + a.str());
  auto dist = max_distance_to_interior(E, A);
  if (!dist)
    throw HypothesisViolation(
        "equivalence_check: some site of E cannot reach the pinned-cluster interior");
  EquivalenceReport rep;
  rep.M = 2 * *dist;
  const NormReport n = norms(u, E);
  rep.lhs = n.h2;
  const int d = E.dim();
  rep.rhs = rep.constant * std::pow(static_cast<double>(std::max(rep.M, 1)), 2.0 * (d + 1)) * n.grad2;
  return rep;
}

std::vector<std::optional<int>> annulus_interior_distances(const Region& A, const Point& center,
                                                           int k) {
  const Region interior = cluster_interior(A);
  std::vector<std::optional<int>> out;
  for (int l = 0; l <= k / 5; ++l) {
    const Region D = annulus_D(center, k, l);
    const Region targets = interior.set_intersection(D);
    if (targets.empty()) {
      out.push_back(std::nullopt);
      continue;
    }
    auto dist = distances_to_set(D, targets);
    std::optional<int> m = 0;
    for (const auto& dv : dist) {
      if (!dv) {
        m = std::nullopt;
        break;
      }
      m = std::max(*m, *dv);
    }
    out.push_back(m);
  }
  return out;
}

int count_ak(const std::vector<std::optional<int>>& M_l, double m_k) {
  int a = 0;
  for (const auto& m : M_l)
    if (m && *m <= m_k) ++a;
  return a;
}

AdaptiveBoundReport adaptive_bound(const Region& A, const Point& x, const Point& y, double xi,
                                   double gamma_value, double c_cfg, const LatticeField* g_col) {
  AdaptiveBoundReport rep;
  rep.k = static_cast<int>(x.l1_dist(y));
  if (rep.k < 6) throw std::invalid_argument("adaptive_bound: need |x-y|_1 >= 6");
  if (xi <= 0.0) throw std::invalid_argument("adaptive_bound: xi must be positive");
  rep.xi = xi;
  rep.m_k = std::pow(static_cast<double>(rep.k), xi);
  rep.M_l = annulus_interior_distances(A, y, rep.k);
  rep.a_k = count_ak(rep.M_l, rep.m_k);
  rep.gamma_value = gamma_value;
  rep.c_used = c_cfg;
  const int d = y.dim;
  rep.bound =
      gamma_value * std::exp(-c_cfg * std::pow(rep.m_k, -2.0 * (d + 1)) * rep.a_k);
  if (g_col) rep.measured = std::abs((*g_col)(x));
  return rep;
}

double calibrate_adaptive_c(int d, int box_N, int n_configs, double xi, double gamma_value,
                            uint64_t seed) {
  const Region box = box_sites(d, box_N);
  const Point y = Point::zero(d);
  double c_min = std::numeric_limits<double>::infinity();
  for (int cfg = 0; cfg < n_configs; ++cfg) {
    auto rng = RngStream::substream(seed, "calibrate-c", static_cast<uint64_t>(cfg));
    const double rho = 0.2 + 0.5 * rng.uniform();
    const int k = 6 + static_cast<int>(rng.below(std::max(1, box_N / 2 - 7)));
    Point x = y;
    x.c[0] = k;
    std::vector<Point> pinned;
    for (const auto& p : box)
      if (!(p == x) && !(p == y) && rng.uniform() < rho) pinned.push_back(p);
    const Region A(d, std::move(pinned));
    const Region E = box.set_difference(A);
    GreenSolver solver(E);
    const LatticeField col = green_column(solver, y);
    const double measured = std::abs(col(x));
    if (measured <= 0.0) continue;
    const auto M_l = annulus_interior_distances(A, y, k);
    const double m_k = std::pow(static_cast<double>(k), xi);
    const int a_k = count_ak(M_l, m_k);
    if (a_k < 1) continue;
    const double admissible =
        std::pow(m_k, 2.0 * (d + 1)) * std::log(gamma_value / measured) / a_k;
    c_min = std::min(c_min, admissible);
  }
  if (!std::isfinite(c_min)) return 1.0;
  return 0.9 * c_min;
}

}  // namespace membrane
