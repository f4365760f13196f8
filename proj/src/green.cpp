#include "membrane/green.hpp"

#include <cmath>
#include <stdexcept>

namespace membrane {

namespace {

// log n! table.
std::vector<double> log_factorials(int n) {
  std::vector<double> lf(n + 1, 0.0);
  for (int i = 2; i <= n; ++i) lf[i] = lf[i - 1] + std::log(static_cast<double>(i));
  return lf;
}

// P[1D ±1 walk of length n has displacement z], n = 0..M.
std::vector<double> one_axis_probabilities(int z, int M, const std::vector<double>& lf) {
  std::vector<double> a(M + 1, 0.0);
  const int az = std::abs(z);
  const double log2 = std::log(2.0);
  for (int n = az; n <= M; ++n) {
    if ((n + az) % 2 != 0) continue;
    const int up = (n + az) / 2;
    a[n] = std::exp(lf[n] - lf[up] - lf[n - up] - n * log2);
  }
  if (az == 0) a[0] = 1.0;
  return a;
}

}  // namespace

std::vector<double> rw_point_probabilities(int d, const Point& z, int m_trunc) {
  if (d < 1) throw std::invalid_argument("rw_point_probabilities: d >= 1 required");
  if (z.dim != d) throw std::invalid_argument("rw_point_probabilities: dimension mismatch");
  if (m_trunc < 0) throw std::invalid_argument("rw_point_probabilities: m_trunc >= 0 required");
  const int M = m_trunc;
  const auto lf = log_factorials(M);

  // g_j(m) = P[j-axis walk of length m lands on (z_1..z_j)]. Conditioning on
  // how many of m steps fall on the new axis gives a binomial mixture of the
  // previous axes' walk with the 1D closed form.
  std::vector<double> g = one_axis_probabilities(z.c[0], M, lf);
  for (int j = 2; j <= d; ++j) {
    const auto a = one_axis_probabilities(z.c[j - 1], M, lf);
    const double logp = std::log(static_cast<double>(j - 1) / j);
    const double logq = std::log(1.0 / j);
    std::vector<double> next(M + 1, 0.0);
    for (int m = 0; m <= M; ++m) {
      double acc = 0.0;
      for (int k = 0; k <= m; ++k) {
        if (g[k] == 0.0 || a[m - k] == 0.0) continue;
        const double logw = lf[m] - lf[k] - lf[m - k] + k * logp + (m - k) * logq;
        acc += std::exp(logw) * g[k] * a[m - k];
      }
      next[m] = acc;
    }
    g = std::move(next);
  }
  return g;
}

std::vector<double> rw_point_probabilities_naive(int d, const Point& z, int m_trunc) {
  // Repeated convolution of the one-step kernel on a box of radius m_trunc.
  const int M = m_trunc;
  const int side = 2 * M + 1;
  int64_t total = 1;
  for (int i = 0; i < d; ++i) total *= side;
  std::vector<double> cur(total, 0.0), next(total, 0.0);
  std::vector<int64_t> stride(d);
  int64_t s = 1;
  for (int i = d - 1; i >= 0; --i) {
    stride[i] = s;
    s *= side;
  }
  int64_t origin = 0;
  for (int i = 0; i < d; ++i) origin += stride[i] * M;
  cur[origin] = 1.0;
  int64_t target = 0;
  for (int i = 0; i < d; ++i) {
    if (std::abs(z.c[i]) > M) target = -1;
    if (target >= 0) target += stride[i] * (M + z.c[i]);
  }
  std::vector<double> out(M + 1, 0.0);
  out[0] = (target == origin) ? 1.0 : 0.0;
  const double w = 1.0 / (2.0 * d);
  for (int m = 1; m <= M; ++m) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int64_t idx = 0; idx < total; ++idx) {
      const double p = cur[idx];
      if (p == 0.0) continue;
      int64_t rem = idx;
      for (int i = 0; i < d; ++i) {
        const int64_t coord = rem / stride[i];
        rem %= stride[i];
        if (coord > 0) next[idx - stride[i]] += p * w;
        if (coord < side - 1) next[idx + stride[i]] += p * w;
      }
    }
    cur.swap(next);
    if (target >= 0) out[m] = cur[target];
  }
  return out;
}

double rw_green_infinite(int d, const Point& z, int m_trunc) {
  if (d <= 4)
    throw std::invalid_argument(
        "rw_green_infinite: the random-walk sum diverges for d <= 4 (d >= 5 required)");
  const auto p = rw_point_probabilities(d, z, m_trunc);
  double g = 0.0;
  for (int m = m_trunc; m >= 0; --m) g += (m + 1.0) * p[m];
  return g;
}

GammaHat measure_gamma_hat(int d, int m_trunc) {
  GammaHat gh;
  gh.m_trunc = m_trunc;
  const auto p = rw_point_probabilities(d, Point::zero(d), m_trunc);
  double g = 0.0;
  for (int m = m_trunc; m >= 0; --m) g += (m + 1.0) * p[m];
  gh.value = g;
  // Tail majorant: P[S_m=0] <= kappa m^{-d/2} with kappa measured on the back
  // half of the window; only even m contribute, and the even-m sum of
  // (m+1) m^{-d/2} is bounded by 2/(d-4) * M^{-(d-4)/2}. Inflated by 20%.
  double kappa = 0.0;
  for (int m = m_trunc / 2; m <= m_trunc; ++m)
    kappa = std::max(kappa, p[m] * std::pow(static_cast<double>(m), 0.5 * d));
  gh.tail_margin = 1.2 * kappa * 2.0 / ((d - 4) * std::pow(static_cast<double>(m_trunc),
                                                           0.5 * (d - 4)));
  return gh;
}

double measure_gamma4(const std::vector<int>& box_sizes, SolverOptions opts) {
  double worst = 0.0;
  for (int N : box_sizes) {
    opts.box_N = N;
    GreenSolver solver(box_sites(4, N), opts);
    const double g0 = variance(solver, Point::zero(4));
    worst = std::max(worst, g0 / std::log(static_cast<double>(N)));
  }
  return 1.5 * worst;
}

RatioProfile asymptotic_ratio_profile(int d, int N, const std::vector<int>& distances,
                                      SolverOptions opts) {
  if (d < 4) throw std::invalid_argument("asymptotic_ratio_profile: d >= 4 required");
  const int margin = std::max(1, N / 8);
  for (int k : distances)
    if (k < 1 || k > N / 2 - margin)
      throw std::invalid_argument("asymptotic_ratio_profile: distance " + std::to_string(k) +
                                  " too close to the boundary (margin " + std::to_string(margin) +
                                  ")");
  opts.box_N = N;
  GreenSolver solver(box_sites(d, N), opts);
  const LatticeField col = green_column(solver, Point::zero(d));

  RatioProfile prof;
  prof.d = d;
  prof.N = N;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k : distances) {
    RatioProfileRow row;
    row.k = k;
    Point x = Point::zero(d);
    x.c[0] = k;
    row.green = col(x);
    row.ratio = row.green * std::pow(static_cast<double>(k), d - 4);
    row.log_term = std::log(static_cast<double>(N)) - std::log(static_cast<double>(k));
    sx += row.log_term;
    sy += row.green;
    sxx += row.log_term * row.log_term;
    sxy += row.log_term * row.green;
    prof.rows.push_back(row);
  }
  const double n = static_cast<double>(distances.size());
  const double denom = n * sxx - sx * sx;
  prof.fitted_slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
  return prof;
}

}  // namespace membrane
