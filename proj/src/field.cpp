#include "membrane/field.hpp"

#include <stdexcept>

namespace membrane {

LatticeField::LatticeField(Region support, std::vector<double> values)
    : support_(std::move(support)), values_(std::move(values)) {
  if (static_cast<size_t>(support_.size()) != values_.size())
    throw std::invalid_argument("LatticeField: support/value size mismatch");
}

double LatticeField::dot(const LatticeField& g) const {
  // Iterate over the smaller support.
  const LatticeField& a = (support_.size() <= g.support_.size()) ? *this : g;
  const LatticeField& b = (support_.size() <= g.support_.size()) ? g : *this;
  double s = 0.0;
  for (int i = 0; i < a.support_.size(); ++i) s += a.values_[i] * b(a.support_.site(i));
  return s;
}

double LatticeField::l2_norm_sq() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s;
}

Window::Window(const Point& lo, const Point& hi) : d_(lo.dim), lo_(lo), hi_(hi) {
  if (lo.dim != hi.dim || d_ < 1) throw std::invalid_argument("Window: bad corners");
  for (int i = 0; i < d_; ++i)
    if (hi.c[i] < lo.c[i]) throw std::invalid_argument("Window: empty extent");
  total_ = 1;
  for (int i = d_ - 1; i >= 0; --i) {
    stride_[i] = total_;
    total_ *= (hi.c[i] - lo.c[i] + 1);
  }
}

Window Window::hull(const Region& support, int collar) {
  if (support.empty()) throw std::invalid_argument("Window::hull: empty support");
  Point lo = support.site(0), hi = support.site(0);
  for (const auto& p : support)
    for (int i = 0; i < support.dim(); ++i) {
      lo.c[i] = std::min(lo.c[i], p.c[i]);
      hi.c[i] = std::max(hi.c[i], p.c[i]);
    }
  for (int i = 0; i < support.dim(); ++i) {
    lo.c[i] -= collar;
    hi.c[i] += collar;
  }
  return Window(lo, hi);
}

Window Window::hull(const Region& support, const Point& extra_center, int radius, int collar) {
  Window base = hull(support, collar);
  Point lo = base.lo(), hi = base.hi();
  for (int i = 0; i < lo.dim; ++i) {
    lo.c[i] = std::min(lo.c[i], extra_center.c[i] - radius - collar);
    hi.c[i] = std::max(hi.c[i], extra_center.c[i] + radius + collar);
  }
  return Window(lo, hi);
}

std::vector<double> Window::densify(const LatticeField& f) const {
  std::vector<double> v(static_cast<size_t>(total_), 0.0);
  for (int i = 0; i < f.support().size(); ++i) {
    const Point& p = f.support().site(i);
    if (!contains(p))
      throw std::invalid_argument("Window::densify: support exceeds window at " + p.str());
    v[static_cast<size_t>(index(p))] = f.values()[i];
  }
  return v;
}

}  // namespace membrane
