#include "membrane/lattice.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace membrane {

std::string Point::str() const {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < dim; ++i) os << (i ? "," : "") << c[i];
  os << ")";
  return os.str();
}

Region::Region(int d, std::vector<Point> sites) : d_(d), sites_(std::move(sites)) {
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("Region: dimension out of range");
  for (auto& p : sites_)
    if (p.dim != d) throw std::invalid_argument("Region: mixed dimensions");
  std::sort(sites_.begin(), sites_.end());
  sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
}

std::optional<int> Region::index_of(const Point& p) const {
  auto it = std::lower_bound(sites_.begin(), sites_.end(), p);
  if (it != sites_.end() && *it == p) return static_cast<int>(it - sites_.begin());
  return std::nullopt;
}

Region Region::set_union(const Region& o) const {
  std::vector<Point> out;
  out.reserve(sites_.size() + o.sites_.size());
  std::set_union(sites_.begin(), sites_.end(), o.sites_.begin(), o.sites_.end(),
                 std::back_inserter(out));
  return Region(d_ ? d_ : o.d_, std::move(out));
}

Region Region::set_difference(const Region& o) const {
  std::vector<Point> out;
  std::set_difference(sites_.begin(), sites_.end(), o.sites_.begin(), o.sites_.end(),
                      std::back_inserter(out));
  return Region(d_, std::move(out));
}

Region Region::set_intersection(const Region& o) const {
  std::vector<Point> out;
  std::set_intersection(sites_.begin(), sites_.end(), o.sites_.begin(), o.sites_.end(),
                        std::back_inserter(out));
  return Region(d_, std::move(out));
}

uint64_t Region::content_hash() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](int64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= static_cast<unsigned char>(v >> (8 * b));
      h *= 0x100000001b3ULL;
    }
  };
  mix(d_);
  for (const auto& p : sites_)
    for (int i = 0; i < d_; ++i) mix(p.c[i]);
  return h;
}

Box::Box(int d_, int N_) : d(d_), N(N_) {
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("Box: dimension out of range");
  if (N < 0 || N % 2 != 0)
    throw std::invalid_argument("Box: side parameter N must be even and non-negative, got N=" +
                                std::to_string(N));
}

int64_t Box::site_count() const {
  int64_t n = 1;
  for (int i = 0; i < d; ++i) n *= (N + 1);
  return n;
}

namespace {

// Odometer enumeration of a product of integer intervals, lexicographic.
template <typename F>
void enumerate_box(int d, const int32_t* lo, const int32_t* hi, F&& f) {
  Point p;
  p.dim = d;
  for (int i = 0; i < d; ++i) p.c[i] = lo[i];
  for (;;) {
    f(p);
    int axis = d - 1;
    while (axis >= 0) {
      if (p.c[axis] < hi[axis]) {
        ++p.c[axis];
        break;
      }
      p.c[axis] = lo[axis];
      --axis;
    }
    if (axis < 0) return;
  }
}

}  // namespace

Region box_sites(int d, int N) { return box_sites(Box(d, N)); }

Region box_sites(const Box& box) {
  std::vector<Point> out;
  out.reserve(static_cast<size_t>(box.site_count()));
  std::array<int32_t, kMaxDim> lo{}, hi{};
  for (int i = 0; i < box.d; ++i) {
    lo[i] = -box.half();
    hi[i] = box.half();
  }
  enumerate_box(box.d, lo.data(), hi.data(), [&](const Point& p) { out.push_back(p); });
  return Region(box.d, std::move(out));
}

Region outer_boundary2(const Box& box) {
  // Scan the enlarged box and keep exterior sites with l1-distance <= 2 to V_N.
  std::vector<Point> out;
  std::array<int32_t, kMaxDim> lo{}, hi{};
  for (int i = 0; i < box.d; ++i) {
    lo[i] = -box.half() - 2;
    hi[i] = box.half() + 2;
  }
  enumerate_box(box.d, lo.data(), hi.data(), [&](const Point& p) {
    if (box.contains(p)) return;
    int64_t dist = 0;  // l1 distance to the box = sum of per-axis overshoots
    for (int i = 0; i < box.d; ++i) {
      if (p.c[i] > box.half()) dist += p.c[i] - box.half();
      else if (p.c[i] < -box.half()) dist += -box.half() - p.c[i];
    }
    if (dist <= 2) out.push_back(p);
  });
  return Region(box.d, std::move(out));
}

Region ball(const Point& center, int k) {
  if (k < 0) throw std::invalid_argument("ball: radius must be >= 0");
  std::vector<Point> out;
  std::array<int32_t, kMaxDim> lo{}, hi{};
  for (int i = 0; i < center.dim; ++i) {
    lo[i] = center.c[i] - k;
    hi[i] = center.c[i] + k;
  }
  enumerate_box(center.dim, lo.data(), hi.data(), [&](const Point& p) {
    if (p.l1_dist(center) <= k) out.push_back(p);
  });
  return Region(center.dim, std::move(out));
}

Region annulus_D(const Point& center, int k, int l) {
  if (l < 0 || l > k / 5)
    throw std::invalid_argument("annulus_D: need 0 <= l <= floor(k/5), got l=" + std::to_string(l));
  return ball(center, k + 1).set_difference(ball(center, k - 5 * l));
}

Region cluster_interior(const Region& A) {
  std::vector<Point> out;
  for (const auto& p : A) {
    bool interior = true;
    for (int axis = 0; axis < A.dim() && interior; ++axis)
      for (int s : {-1, 1})
        if (!A.contains(p.shifted(axis, s))) {
          interior = false;
          break;
        }
    if (interior) out.push_back(p);
  }
  return Region(A.dim(), std::move(out));
}

std::vector<std::optional<int>> distances_to_set(const Region& E, const Region& targets) {
  std::vector<std::optional<int>> dist(E.size());
  std::deque<int> queue;
  for (int i = 0; i < E.size(); ++i) {
    if (targets.contains(E.site(i))) {
      dist[i] = 0;
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    const int i = queue.front();
    queue.pop_front();
    const Point& p = E.site(i);
    for (int axis = 0; axis < E.dim(); ++axis)
      for (int s : {-1, 1}) {
        auto j = E.index_of(p.shifted(axis, s));
        if (j && !dist[*j]) {
          dist[*j] = *dist[i] + 1;
          queue.push_back(*j);
        }
      }
  }
  return dist;
}

std::optional<int> graph_distance(const Region& E, const Point& x, const Region& T) {
  auto xi = E.index_of(x);
  if (!xi) throw std::invalid_argument("graph_distance: x not in E");
  auto dist = distances_to_set(E, T.set_intersection(E));
  return dist[*xi];
}

std::optional<int> max_distance_to_interior(const Region& E, const Region& A) {
  const Region targets = cluster_interior(A).set_intersection(E);
  if (targets.empty()) return std::nullopt;
  auto dist = distances_to_set(E, targets);
  int m = 0;
  for (const auto& dv : dist) {
    if (!dv) return std::nullopt;  // a component of E misses A-hat
    m = std::max(m, *dv);
  }
  return m;
}

}  // namespace membrane
