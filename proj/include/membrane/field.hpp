#pragma once

#include <vector>

#include "membrane/lattice.hpp"

namespace membrane {

// Real-valued function of finite support on the lattice; evaluates to exactly
// 0 off its support (the paper's zero-extension convention).
class LatticeField {
 public:
  LatticeField() = default;
  LatticeField(Region support, std::vector<double> values);
  static LatticeField zero(int d) { return LatticeField(Region(d, {}), {}); }
  static LatticeField delta(const Point& x) { return LatticeField(Region(x.dim, {x}), {1.0}); }

  int dim() const { return support_.dim(); }
  const Region& support() const { return support_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  double operator()(const Point& p) const {
    auto i = support_.index_of(p);
    return i ? values_[*i] : 0.0;
  }

  double dot(const LatticeField& g) const;
  double l2_norm_sq() const;

 private:
  Region support_;
  std::vector<double> values_;
};

// Dense view of a field on an axis-aligned bounding box with O(1) indexing;
// evaluation outside the window returns 0. The window must contain every site
// where the quantity being computed can be nonzero (callers add a collar).
class Window {
 public:
  Window(const Point& lo, const Point& hi);  // inclusive corners
  static Window hull(const Region& support, int collar);
  static Window hull(const Region& support, const Point& extra_center, int radius, int collar);

  int dim() const { return d_; }
  int64_t size() const { return total_; }
  const Point& lo() const { return lo_; }
  const Point& hi() const { return hi_; }
  bool contains(const Point& p) const {
    for (int i = 0; i < d_; ++i)
      if (p.c[i] < lo_.c[i] || p.c[i] > hi_.c[i]) return false;
    return true;
  }
  int64_t index(const Point& p) const {
    int64_t idx = 0;
    for (int i = 0; i < d_; ++i) idx += static_cast<int64_t>(p.c[i] - lo_.c[i]) * stride_[i];
    return idx;
  }
  Point point(int64_t idx) const {
    Point p;
    p.dim = d_;
    for (int i = 0; i < d_; ++i) {
      p.c[i] = lo_.c[i] + static_cast<int32_t>(idx / stride_[i]);
      idx %= stride_[i];
    }
    return p;
  }
  // Offset of a unit step along an axis in the flat index.
  int64_t stride(int axis) const { return stride_[axis]; }

  std::vector<double> densify(const LatticeField& f) const;

 private:
  int d_ = 0;
  Point lo_, hi_;
  std::array<int64_t, kMaxDim> stride_{};
  int64_t total_ = 0;
};

}  // namespace membrane
