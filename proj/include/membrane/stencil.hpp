#pragma once

#include <Eigen/Sparse>

#include "membrane/field.hpp"

namespace membrane {

// Discrete derivatives and the (Bi)Laplacian of the membrane model:
//   D_i f(x)  = f(x+e_i) - f(x),  D_{-i} f(x) = f(x-e_i) - f(x)
//   Delta f   = (1/2d) sum_{|y-x|=1} (f(y)-f(x))
//   Delta^2 f = (1/4d^2) sum_{i,j} D_{i,-i} D_{j,-j} f
// Directions are encoded as signed integers in {±1..±d}.

// One entry of a convolution stencil; the coefficient is num/denom with the
// numerator kept integral so assembled matrices are exactly symmetric.
struct StencilTerm {
  Point offset;
  int64_t num;
};

// Delta stencil, coefficient = num / (2d).
std::vector<StencilTerm> laplacian_stencil(int d);
// Delta^2 stencil, coefficient = num / (4d^2). Offsets lie in
// {0, ±e_i, ±2e_i, ±e_i±e_j}; row sum of numerators is 0.
std::vector<StencilTerm> bilaplacian_stencil(int d);
// Center coefficient of Delta^2: 1 + 1/(2d).
double bilaplacian_diagonal(int d);

LatticeField forward_diff(const LatticeField& f, int dir);
LatticeField second_diff(const LatticeField& f, int dir_i, int dir_j);
LatticeField laplacian(const LatticeField& f);
LatticeField bilaplacian(const LatticeField& f);

// sum_x D_i f · g - sum_x f · D_{-i} g  (Lemma-level contract: 0 up to rounding).
double sum_by_parts_defect(const LatticeField& f, const LatticeField& g, int dir);

// sum_{i,j} sum_x (D_iD_j u)^2 - 4d^2 sum_x u · Delta^2 u.
double gradient_energy_identity_defect(const LatticeField& u);

// The Bilaplacian of the infinite lattice restricted to a free set E with
// zero exterior data: M[x,y] = stencil coefficient of y-x for x,y in E.
struct RestrictedBilaplacian {
  Region free_set;
  Eigen::SparseMatrix<double> matrix;  // |E| x |E|, symmetric positive definite
};

RestrictedBilaplacian assemble_restricted(const Region& E);

// Apply the assembled operator to a zero-extended vector and restrict to E;
// identical to the matrix product, provided for matrix-free cross-checks.
LatticeField apply_bilaplacian_zero_extended(const Region& E, const std::vector<double>& v);

}  // namespace membrane
