#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace membrane {

inline constexpr int kMaxDim = 8;

// Lattice site. Coordinates beyond the active dimension are kept at zero so
// lexicographic comparison and hashing can run over the full array.
struct Point {
  std::array<int32_t, kMaxDim> c{};
  int32_t dim = 0;

  Point() = default;
  Point(std::initializer_list<int32_t> coords) {
    dim = static_cast<int32_t>(coords.size());
    int i = 0;
    for (int32_t v : coords) c[i++] = v;
  }
  static Point zero(int d) {
    Point p;
    p.dim = d;
    return p;
  }

  int32_t operator[](int i) const { return c[i]; }
  int32_t& operator[](int i) { return c[i]; }

  Point shifted(int axis, int32_t delta) const {
    Point p = *this;
    p.c[axis] += delta;
    return p;
  }

  int64_t l1_dist(const Point& o) const {
    int64_t s = 0;
    for (int i = 0; i < dim; ++i) s += std::abs(static_cast<int64_t>(c[i]) - o.c[i]);
    return s;
  }
  int64_t l1_norm() const {
    int64_t s = 0;
    for (int i = 0; i < dim; ++i) s += std::abs(static_cast<int64_t>(c[i]));
    return s;
  }

  friend bool operator==(const Point& a, const Point& b) { return a.dim == b.dim && a.c == b.c; }
  friend bool operator<(const Point& a, const Point& b) {  // lexicographic
    for (int i = 0; i < a.dim; ++i)
      if (a.c[i] != b.c[i]) return a.c[i] < b.c[i];
    return false;
  }
  std::string str() const;
};

// Finite set of sites with a stable (lexicographic) total order; the index of
// a site is its rank in that order. Immutable after construction.
class Region {
 public:
  Region() = default;
  Region(int d, std::vector<Point> sites);  // sorts and deduplicates

  int dim() const { return d_; }
  int size() const { return static_cast<int>(sites_.size()); }
  bool empty() const { return sites_.empty(); }
  const Point& site(int i) const { return sites_[i]; }
  const std::vector<Point>& sites() const { return sites_; }

  bool contains(const Point& p) const { return index_of(p).has_value(); }
  std::optional<int> index_of(const Point& p) const;

  Region set_union(const Region& o) const;
  Region set_difference(const Region& o) const;
  Region set_intersection(const Region& o) const;

  // FNV-1a over the sorted coordinate list; used as cache key.
  uint64_t content_hash() const;

  auto begin() const { return sites_.begin(); }
  auto end() const { return sites_.end(); }

 private:
  int d_ = 0;
  std::vector<Point> sites_;
};

// The symmetric box V_N = [-N/2, N/2]^d. N must be even (odd N would shift
// the box to half-integer bounds); N = 0 is the degenerate single-site box.
struct Box {
  int d = 0;
  int N = 0;

  Box(int d_, int N_);
  int64_t site_count() const;
  int half() const { return N / 2; }
  bool contains(const Point& p) const {
    if (p.dim != d) return false;
    for (int i = 0; i < d; ++i)
      if (p.c[i] < -half() || p.c[i] > half()) return false;
    return true;
  }
};

// V_N in lexicographic order.
Region box_sites(int d, int N);
Region box_sites(const Box& box);

// Outer 2-boundary: sites outside V_N within l1-distance 2 of it.
Region outer_boundary2(const Box& box);

// l1 ball {x : |x - center|_1 <= k}.
Region ball(const Point& center, int k);

// Annulus D_l^(k) = B_{k+1} \ B_{k-5l}, 0 <= l <= floor(k/5).
Region annulus_D(const Point& center, int k, int l);

// Interior of pinned clusters: x in A with all 2d neighbors in A.
Region cluster_interior(const Region& A);

// Pinned set inside a box together with its cluster interior.
struct PinnedSet {
  Box box;
  Region A;
  Region interior;  // A-hat
  PinnedSet(const Box& b, Region a) : box(b), A(std::move(a)), interior(cluster_interior(A)) {}
};

// Graph distance on E (nearest-neighbor paths inside E) from x to the target
// set T. nullopt = unreachable (the paper's M = +infinity branch).
std::optional<int> graph_distance(const Region& E, const Point& x, const Region& T);

// Multi-source BFS: distance from each site of E to targets inside E.
// Entries are nullopt when unreachable.
std::vector<std::optional<int>> distances_to_set(const Region& E, const Region& targets);

// max over x in E of d_E(x, interior(A)∩E); nullopt if some site cannot reach.
std::optional<int> max_distance_to_interior(const Region& E, const Region& A);

}  // namespace membrane
