#include "membrane/percolation.hpp"

#include <cmath>
#include <stdexcept>

#include "membrane/sobolev.hpp"

namespace membrane {

Region PercolationSample::open_region() const {
  std::vector<Point> pts;
  for (int i = 0; i < window->size(); ++i)
    if (open[i]) pts.push_back(window->site(i));
  return Region(window->dim(), std::move(pts));
}

PercolationSample sample_bernoulli(const Region& window, double rho, uint64_t seed,
                                   uint64_t trial) {
  if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("sample_bernoulli: rho in [0,1]");
  PercolationSample s;
  s.window = &window;
  s.rho = rho;
  s.open.resize(window.size());
  auto rng = RngStream::substream(seed, "percolation", trial);
  for (int i = 0; i < window.size(); ++i) s.open[i] = rng.uniform() < rho ? 1 : 0;
  return s;
}

InteriorCheck interior_site_probability_check(int d, double rho, int trials, uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("interior_site_probability_check: trials >= 1");
  InteriorCheck c;
  c.trials = trials;
  c.exact = std::pow(rho, 2 * d + 1);
  int hits = 0;
  for (int t = 0; t < trials; ++t) {
    auto rng = RngStream::substream(seed, "interior", static_cast<uint64_t>(t));
    bool all_open = true;
    for (int i = 0; i < 2 * d + 1; ++i)
      if (!(rng.uniform() < rho)) all_open = false;  // keep draw count fixed
    hits += all_open ? 1 : 0;
  }
  c.empirical = static_cast<double>(hits) / trials;
  c.sigma = std::sqrt(std::max(c.exact * (1.0 - c.exact), 1e-12) / trials);
  return c;
}

namespace {

// Neighbor indices within a fixed region (BFS graph built once per window).
std::vector<std::vector<int>> region_adjacency(const Region& r) {
  std::vector<std::vector<int>> adj(r.size());
  for (int i = 0; i < r.size(); ++i)
    for (int axis = 0; axis < r.dim(); ++axis)
      for (int s : {-1, 1})
        if (auto j = r.index_of(r.site(i).shifted(axis, s))) adj[i].push_back(*j);
  return adj;
}

// Multi-source BFS distance from target mask; -1 = unreachable.
std::vector<int> bfs_from_targets(const std::vector<std::vector<int>>& adj,
                                  const std::vector<uint8_t>& target) {
  std::vector<int> dist(adj.size(), -1);
  std::vector<int> queue;
  queue.reserve(adj.size());
  for (size_t i = 0; i < adj.size(); ++i)
    if (target[i]) {
      dist[i] = 0;
      queue.push_back(static_cast<int>(i));
    }
  for (size_t head = 0; head < queue.size(); ++head) {
    const int i = queue[head];
    for (int j : adj[i])
      if (dist[j] < 0) {
        dist[j] = dist[i] + 1;
        queue.push_back(j);
      }
  }
  return dist;
}

// A-hat mask within the window: open sites whose 2d neighbors are all inside
// the window and open.
std::vector<uint8_t> interior_mask(const Region& window,
                                   const std::vector<std::vector<int>>& adj,
                                   const std::vector<uint8_t>& open) {
  std::vector<uint8_t> hat(window.size(), 0);
  for (int i = 0; i < window.size(); ++i) {
    if (!open[i] || static_cast<int>(adj[i].size()) != 2 * window.dim()) continue;
    bool all = true;
    for (int j : adj[i])
      if (!open[j]) {
        all = false;
        break;
      }
    hat[i] = all ? 1 : 0;
  }
  return hat;
}

}  // namespace

DistanceTail distance_tail_experiment(int d, int window_radius, double rho, int t, int trials,
                                      uint64_t seed) {
  if (t < 1) throw std::invalid_argument("distance_tail_experiment: t >= 1");
  if (window_radius < t + 1)
    throw std::invalid_argument(
        "distance_tail_experiment: window radius must be >= t+1 (ray margin)");
  const Region window = ball(Point::zero(d), window_radius);
  const auto adj = region_adjacency(window);
  const int center = *window.index_of(Point::zero(d));

  DistanceTail out;
  out.t = t;
  out.trials = trials;
  const double p_int = std::pow(rho, 2 * d + 1);
  out.per_point_bound = std::pow(1.0 - p_int, t / 4);
  out.vacuous = out.per_point_bound >= 1.0;
  out.region_max_bound = std::min(1.0, window.size() * out.per_point_bound);
  out.paper_prefactor_bound =
      std::pow(std::sqrt(2.0) * window_radius, d) * out.per_point_bound;

  int hits = 0;
  out.trial_values.reserve(trials);
  for (int trial = 0; trial < trials; ++trial) {
    const PercolationSample s = sample_bernoulli(window, rho, seed, trial);
    const auto hat = interior_mask(window, adj, s.open);
    const auto dist = bfs_from_targets(adj, hat);
    out.trial_values.push_back(dist[center]);
    if (dist[center] < 0 || dist[center] >= t) ++hits;
  }
  out.empirical = static_cast<double>(hits) / trials;
  out.mc_sigma = std::sqrt(std::max(out.empirical * (1.0 - out.empirical), 1.0 / trials) / trials);
  return out;
}

AkTail ak_tail_experiment(int d, double rho, int k, double xi, int trials, uint64_t seed) {
  if (k < 10) throw std::invalid_argument("ak_tail_experiment: k >= 10 required");
  const Region window = ball(Point::zero(d), k + 2);  // full neighborhoods on B_{k+1}
  AkTail out;
  out.k = k;
  out.xi = xi;
  out.m_k = std::pow(static_cast<double>(k), xi);
  out.threshold = k / 10;
  out.trials = trials;

  const double p_int = std::pow(rho, 2 * d + 1);
  const double factor = std::pow(1.0 - p_int, static_cast<int>(out.m_k / 4.0));
  double union_sum = 0.0;
  for (int l = 0; l <= out.threshold; ++l) {
    const int dl = annulus_D(Point::zero(d), k, l).size();
    union_sum += dl * factor;
    if (out.m_k > dl) out.precondition_ok = false;
  }
  out.union_bound = union_sum;
  out.paper_bound = out.threshold * std::pow(std::sqrt(2.0) * (k + 1), d) * factor;
  out.vacuous = std::min(1.0, out.union_bound) >= 1.0;

  int hits = 0;
  double ak_sum = 0.0;
  out.trial_values.reserve(trials);
  for (int trial = 0; trial < trials; ++trial) {
    const PercolationSample s = sample_bernoulli(window, rho, seed, trial);
    const Region A = s.open_region();
    const auto M_l = annulus_interior_distances(A, Point::zero(d), k);
    const int a_k = count_ak(M_l, out.m_k);
    out.trial_values.push_back(a_k);
    ak_sum += a_k;
    if (a_k <= out.threshold) ++hits;
  }
  out.empirical = static_cast<double>(hits) / trials;
  out.mean_ak = ak_sum / trials;
  out.mc_sigma = std::sqrt(std::max(out.empirical * (1.0 - out.empirical), 1.0 / trials) / trials);
  return out;
}

}  // namespace membrane
