#pragma once

#include "nlhconv/complex_core.hpp"
#include "nlhconv/decomposition.hpp"
#include "nlhconv/operator.hpp"

#include <functional>
#include <string>
#include <vector>

namespace nlhconv {

// Unit-cell-periodic coefficient: maps a cell coordinate in [0,1)^3 to a
// dim x dim complex matrix.  The declared bound on the entry magnitudes is
// spot-checked wherever the cell is sampled.
struct CellFunction {
  std::function<Matrix(const Eigen::Vector3d&)> sampler;
  Index dim = 1;
  double declared_bound = 1.0;
  std::string description;
};

// Scalar cell depending on the first coordinate only (layered medium).
CellFunction make_scalar_cell(std::function<Complex(double)> profile, double bound,
                              std::string description);
// Piecewise-constant two-phase scalar cell: v1 on [0,1/2), v2 on [1/2,1).
CellFunction make_two_phase_cell(Complex v1, Complex v2);
// Constant matrix-valued cell.
CellFunction make_constant_cell(Matrix value, std::string description = "constant cell");
// Diagonal matrix cell from per-component scalar profiles of the first
// coordinate (layered anisotropic medium).
CellFunction make_diagonal_cell(std::array<std::function<Complex(double)>, 3> profiles,
                                double bound, std::string description);

// Pointwise multiplication by cell(n * x) sampled at the H1 coordinate
// points; always a diagonal operator.  Matrix-valued cells must be diagonal:
// staggered components live at distinct points, so off-diagonal couplings are
// not pointwise-representable.  Emits a warning to stderr when the 1D grid
// resolution is not an integer multiple of n (sampling then no longer renders
// a piecewise-constant cell exactly).
Operator multiplication_operator(const H1Geometry& geometry, const CellFunction& cell, int n);

// Difference kernel z -> k(z) inducing (k * q)(x) = sum_y k(x - y) q(y) h with
// declared operator-norm bound theta in [0,1).
struct ConvolutionSpec {
  std::function<Complex(double)> kernel;
  double bound_theta = 0.0;
};

// Discrete convolution on a uniform 1D geometry: a Toeplitz operator applied
// via FFT.  Construction fails when the numeric norm exceeds bound_theta.
Operator convolution_operator(const H1Geometry& geometry, const ConvolutionSpec& spec);

// General two-point kernel k(x, y) without the fast path (dense matrix).
Operator convolution_operator(const H1Geometry& geometry,
                              const std::function<Complex(double, double)>& kernel,
                              double bound_theta);

// pi_{V-perp} + V b V^* : acts as b on span(V) and as the identity on its
// orthogonal complement.  v_basis must have orthonormal columns.
Operator patched_operator(const Matrix& v_basis, const Operator& b, Index h1_dim);

// Block-diagonal material law diag(eps, mu) on the composed space K2 + K1.
Operator block_material_law(const Operator& eps, const Operator& mu);

// A family n -> a_n of coefficient operators on a fixed H1, carrying the
// membership bounds all members are declared to satisfy and a uniform norm
// bound.
struct OperatorSequence {
  std::vector<int> indices;
  std::function<Operator(int)> generator;
  CoefficientBounds bounds{1.0, 1.0};
  double uniform_norm_bound = 0.0;
  std::string description;
};

// {1, 2, 4, ..., <= n_max}.
std::vector<int> dyadic_indices(int n_max);

OperatorSequence make_constant_sequence(const Operator& a, CoefficientBounds bounds,
                                        std::vector<int> indices);
OperatorSequence make_oscillating_sequence(const H1Geometry& geometry, const CellFunction& cell,
                                           CoefficientBounds bounds, std::vector<int> indices);
// n -> a_n + k_n* with a_n the oscillating multiplication by `cell` (pass a
// constant cell for a fixed local part).
OperatorSequence make_convolution_sum_sequence(const H1Geometry& geometry,
                                               const CellFunction& cell,
                                               const std::function<ConvolutionSpec(int)>& kernels,
                                               CoefficientBounds bounds, std::vector<int> indices);
OperatorSequence make_patched_sequence(const Matrix& v_basis,
                                       const std::function<Operator(int)>& b_of_n, Index h1_dim,
                                       CoefficientBounds bounds, std::vector<int> indices);

// Verify the declared invariants at the first and last index: membership with
// the declared bounds and the uniform norm bound.
bool sequence_spot_check(const OperatorSequence& seq, const BlockDecomposition& d);

}  // namespace nlhconv
