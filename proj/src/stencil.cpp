#include "membrane/stencil.hpp"

#include <stdexcept>

namespace membrane {

namespace {

int axis_of(int dir, int d) {
  const int a = std::abs(dir);
  if (a < 1 || a > d) throw std::invalid_argument("derivative direction out of range");
  return a - 1;
}

// Support of f extended so that every site where (f shifted by any stencil
// offset) can be nonzero is present.
Region extended_support(const Region& s, const std::vector<StencilTerm>& terms) {
  std::vector<Point> pts;
  pts.reserve(s.size() * terms.size());
  for (const auto& p : s)
    for (const auto& t : terms) {
      Point q = p;
      for (int i = 0; i < p.dim; ++i) q.c[i] -= t.offset.c[i];
      pts.push_back(q);
    }
  return Region(s.dim(), std::move(pts));
}

LatticeField apply_stencil(const LatticeField& f, const std::vector<StencilTerm>& terms,
                           double denom) {
  const Region out = extended_support(f.support(), terms);
  std::vector<double> v(out.size(), 0.0);
  for (int i = 0; i < out.size(); ++i) {
    const Point& x = out.site(i);
    double acc = 0.0;
    for (const auto& t : terms) {
      Point q = x;
      for (int k = 0; k < x.dim; ++k) q.c[k] += t.offset.c[k];
      acc += static_cast<double>(t.num) * f(q);
    }
    v[i] = acc / denom;
  }
  return LatticeField(out, std::move(v));
}

}  // namespace

std::vector<StencilTerm> laplacian_stencil(int d) {
  std::vector<StencilTerm> t;
  Point z = Point::zero(d);
  t.push_back({z, -2 * static_cast<int64_t>(d)});
  for (int i = 0; i < d; ++i)
    for (int s : {-1, 1}) t.push_back({z.shifted(i, s), 1});
  return t;
}

std::vector<StencilTerm> bilaplacian_stencil(int d) {
  // (sum_i s_i)^2 with s_i the negated 1D second difference; numerators over 4d^2.
  std::vector<StencilTerm> t;
  Point z = Point::zero(d);
  t.push_back({z, 4 * static_cast<int64_t>(d) * d + 2 * d});
  for (int i = 0; i < d; ++i)
    for (int s : {-1, 1}) {
      t.push_back({z.shifted(i, s), -4 * static_cast<int64_t>(d)});
      t.push_back({z.shifted(i, 2 * s), 1});
    }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      for (int si : {-1, 1})
        for (int sj : {-1, 1}) t.push_back({z.shifted(i, si).shifted(j, sj), 2});
  return t;
}

double bilaplacian_diagonal(int d) {
  return static_cast<double>(4 * d * d + 2 * d) / (4.0 * d * d);
}

LatticeField forward_diff(const LatticeField& f, int dir) {
  const int axis = axis_of(dir, f.dim());
  const int step = dir > 0 ? 1 : -1;
  Point z = Point::zero(f.dim());
  std::vector<StencilTerm> terms = {{z.shifted(axis, step), 1}, {z, -1}};
  return apply_stencil(f, terms, 1.0);
}

LatticeField second_diff(const LatticeField& f, int dir_i, int dir_j) {
  return forward_diff(forward_diff(f, dir_j), dir_i);
}

LatticeField laplacian(const LatticeField& f) {
  return apply_stencil(f, laplacian_stencil(f.dim()), 2.0 * f.dim());
}

LatticeField bilaplacian(const LatticeField& f) {
  const int d = f.dim();
  return apply_stencil(f, bilaplacian_stencil(d), 4.0 * d * d);
}

double sum_by_parts_defect(const LatticeField& f, const LatticeField& g, int dir) {
  return forward_diff(f, dir).dot(g) - f.dot(forward_diff(g, -dir));
}

double gradient_energy_identity_defect(const LatticeField& u) {
  const int d = u.dim();
  double lhs = 0.0;
  for (int i = 1; i <= d; ++i)
    for (int j = 1; j <= d; ++j) lhs += second_diff(u, i, j).l2_norm_sq();
  const double rhs = 4.0 * d * d * u.dot(bilaplacian(u));
  return lhs - rhs;
}

RestrictedBilaplacian assemble_restricted(const Region& E) {
  if (E.empty()) throw std::invalid_argument("assemble_restricted: empty free set");
  const int d = E.dim();
  const auto terms = bilaplacian_stencil(d);
  const double denom = 4.0 * d * d;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(E.size()) * terms.size());
  for (int row = 0; row < E.size(); ++row) {
    const Point& x = E.site(row);
    for (const auto& t : terms) {
      Point q = x;
      for (int k = 0; k < d; ++k) q.c[k] += t.offset.c[k];
      if (auto col = E.index_of(q)) trip.emplace_back(row, *col, static_cast<double>(t.num) / denom);
    }
  }
  Eigen::SparseMatrix<double> M(E.size(), E.size());
  M.setFromTriplets(trip.begin(), trip.end());
  M.makeCompressed();
  return {E, std::move(M)};
}

LatticeField apply_bilaplacian_zero_extended(const Region& E, const std::vector<double>& v) {
  if (static_cast<size_t>(E.size()) != v.size())
    throw std::invalid_argument("apply_bilaplacian_zero_extended: size mismatch");
  LatticeField f(E, v);
  LatticeField full = bilaplacian(f);
  std::vector<double> out(E.size());
  for (int i = 0; i < E.size(); ++i) out[i] = full(E.site(i));
  return LatticeField(E, std::move(out));
}

}  // namespace membrane
