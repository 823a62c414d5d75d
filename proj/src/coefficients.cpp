#include "nlhconv/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <utility>

#include "nlhconv/linalg.hpp"

namespace nlhconv {

namespace {

double fract(double x) { return x - std::floor(x); }

void validate_indices(const std::vector<int>& indices) {
  if (indices.empty()) throw ConfigError("sequence indices must be nonempty");
  int prev = 0;
  for (int n : indices) {
    if (n <= prev) throw ConfigError("sequence indices must be positive and increasing");
    prev = n;
  }
}

double endpoint_norm_bound(const OperatorSequence& seq) {
  const double first = seq.generator(seq.indices.front()).norm_estimate();
  const double last = seq.generator(seq.indices.back()).norm_estimate();
  return 1.05 * std::max(first, last);
}

}  // namespace

CellFunction make_scalar_cell(std::function<Complex(double)> profile, double bound,
                              std::string description) {
  CellFunction cell;
  cell.dim = 1;
  cell.declared_bound = bound;
  cell.description = std::move(description);
  cell.sampler = [f = std::move(profile)](const Eigen::Vector3d& y) {
    Matrix m(1, 1);
    m(0, 0) = f(y(0));
    return m;
  };
  return cell;
}

CellFunction make_two_phase_cell(Complex v1, Complex v2) {
  const double bound = std::max(std::abs(v1), std::abs(v2));
  return make_scalar_cell([v1, v2](double y) { return y < 0.5 ? v1 : v2; }, bound,
                          "two-phase cell");
}

CellFunction make_constant_cell(Matrix value, std::string description) {
  if (value.rows() != value.cols()) throw DimensionError("cell matrix must be square");
  CellFunction cell;
  cell.dim = value.rows();
  cell.declared_bound = max_abs(value);
  cell.description = std::move(description);
  cell.sampler = [m = std::move(value)](const Eigen::Vector3d&) { return m; };
  return cell;
}

CellFunction make_diagonal_cell(std::array<std::function<Complex(double)>, 3> profiles,
                                double bound, std::string description) {
  CellFunction cell;
  cell.dim = 3;
  cell.declared_bound = bound;
  cell.description = std::move(description);
  cell.sampler = [fs = std::move(profiles)](const Eigen::Vector3d& y) {
    Matrix m = Matrix::Zero(3, 3);
    for (int c = 0; c < 3; ++c) m(c, c) = fs[c](y(0));
    return m;
  };
  return cell;
}

Operator multiplication_operator(const H1Geometry& geometry, const CellFunction& cell, int n) {
  if (n <= 0) throw ConfigError("oscillation index must be positive");
  if (!cell.sampler) throw ConfigError("cell function has no sampler");
  if (cell.dim != 1 && cell.dim != geometry.field_dim)
    throw DimensionError("cell dimension does not match the field dimension");

  if (geometry.field_dim == 1 && geometry.dim() % n != 0) {
    std::cerr << "[nlhconv] warning: grid resolution " << geometry.dim()
              << " is not a multiple of the oscillation index " << n
              << "; the sampled coefficient is not exactly piecewise constant\n";
  }

  const Index m = geometry.dim();
  Vector diag(m);
  const double bound_gate = cell.declared_bound * (1.0 + 1e-9) + 1e-12;
  for (Index i = 0; i < m; ++i) {
    Eigen::Vector3d y;
    for (int k = 0; k < 3; ++k) y(k) = fract(n * geometry.points(i, k));
    const Matrix value = cell.sampler(y);
    if (value.rows() != cell.dim || value.cols() != cell.dim)
      throw DimensionError("cell sampler returned a matrix of the wrong size");
    if (max_abs(value) > bound_gate)
      throw DegenerateInputError("cell sample exceeds its declared bound");
    if (cell.dim == 1) {
      diag(i) = value(0, 0);
    } else {
      // Components live at staggered points: only diagonal matrices act
      // pointwise on this representation.
      for (Index r = 0; r < cell.dim; ++r)
        for (Index c = 0; c < cell.dim; ++c)
          if (r != c && std::abs(value(r, c)) > 1e-14 * std::max(1.0, cell.declared_bound))
            throw PreconditionError(
                "matrix-valued cells must be diagonal on staggered vector geometry");
      diag(i) = value(geometry.component[i], geometry.component[i]);
    }
  }
  return Operator::diagonal(std::move(diag));
}

Operator convolution_operator(const H1Geometry& geometry, const ConvolutionSpec& spec) {
  if (!spec.kernel) throw ConfigError("convolution kernel is empty");
  if (spec.bound_theta < 0.0 || spec.bound_theta >= 1.0)
    throw ConfigError("convolution norm bound must lie in [0, 1)");
  if (geometry.field_dim != 1)
    throw DimensionError("difference-kernel convolution requires a scalar 1D geometry");

  const Index m = geometry.dim();
  const double h = 1.0 / static_cast<double>(m);
  Vector first_col(m), first_row(m);
  const double x0 = geometry.points(0, 0);
  for (Index i = 0; i < m; ++i) {
    first_col(i) = h * spec.kernel(geometry.points(i, 0) - x0);
    first_row(i) = h * spec.kernel(x0 - geometry.points(i, 0));
  }
  Operator op = Operator::toeplitz(std::move(first_col), std::move(first_row));
  const double norm = operator_norm(op.to_dense());
  if (norm > spec.bound_theta + 1e-8)
    throw PreconditionError("convolution operator norm exceeds its declared bound");
  return op;
}

Operator convolution_operator(const H1Geometry& geometry,
                              const std::function<Complex(double, double)>& kernel,
                              double bound_theta) {
  if (!kernel) throw ConfigError("convolution kernel is empty");
  if (bound_theta < 0.0 || bound_theta >= 1.0)
    throw ConfigError("convolution norm bound must lie in [0, 1)");
  if (geometry.field_dim != 1)
    throw DimensionError("two-point-kernel convolution requires a scalar 1D geometry");

  const Index m = geometry.dim();
  const double h = 1.0 / static_cast<double>(m);
  Matrix k(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) k(i, j) = h * kernel(geometry.points(i, 0), geometry.points(j, 0));
  const double norm = operator_norm(k);
  if (norm > bound_theta + 1e-8)
    throw PreconditionError("convolution operator norm exceeds its declared bound");
  return Operator::dense(std::move(k));
}

Operator patched_operator(const Matrix& v_basis, const Operator& b, Index h1_dim) {
  if (v_basis.rows() != h1_dim)
    throw DimensionError("patch basis does not live on the ambient space");
  if (b.size() != v_basis.cols())
    throw DimensionError("patch block does not match the basis column count");
  const Index r = v_basis.cols();
  if (r > 0) {
    const Matrix gram = v_basis.adjoint() * v_basis;
    if (max_abs(Matrix(gram - Matrix::Identity(r, r))) > 1e-10)
      throw PreconditionError("patch basis is not orthonormal");
  }
  Matrix a = Matrix::Identity(h1_dim, h1_dim);
  if (r > 0) {
    a -= v_basis * v_basis.adjoint();
    a += v_basis * b.apply(Matrix(v_basis.adjoint()));
  }
  return Operator::dense(std::move(a));
}

Operator block_material_law(const Operator& eps, const Operator& mu) {
  return Operator::block_diag(eps, mu);
}

std::vector<int> dyadic_indices(int n_max) {
  if (n_max <= 0) throw ConfigError("index ceiling must be positive");
  std::vector<int> out;
  for (int n = 1; n <= n_max; n *= 2) out.push_back(n);
  return out;
}

OperatorSequence make_constant_sequence(const Operator& a, CoefficientBounds bounds,
                                        std::vector<int> indices) {
  validate_indices(indices);
  OperatorSequence seq;
  seq.indices = std::move(indices);
  seq.generator = [a](int) { return a; };
  seq.bounds = bounds;
  seq.uniform_norm_bound = 1.05 * a.norm_estimate();
  seq.description = "constant sequence";
  return seq;
}

OperatorSequence make_oscillating_sequence(const H1Geometry& geometry, const CellFunction& cell,
                                           CoefficientBounds bounds, std::vector<int> indices) {
  validate_indices(indices);
  OperatorSequence seq;
  seq.indices = std::move(indices);
  seq.generator = [geometry, cell](int n) { return multiplication_operator(geometry, cell, n); };
  seq.bounds = bounds;
  seq.uniform_norm_bound = 1.05 * cell.declared_bound;
  seq.description = "oscillating multiplication: " + cell.description;
  return seq;
}

OperatorSequence make_convolution_sum_sequence(const H1Geometry& geometry,
                                               const CellFunction& cell,
                                               const std::function<ConvolutionSpec(int)>& kernels,
                                               CoefficientBounds bounds, std::vector<int> indices) {
  validate_indices(indices);
  if (!kernels) throw ConfigError("kernel family is empty");
  OperatorSequence seq;
  seq.indices = std::move(indices);
  seq.generator = [geometry, cell, kernels](int n) {
    const Operator local = multiplication_operator(geometry, cell, n);
    const Operator conv = convolution_operator(geometry, kernels(n));
    return Operator::add(local, conv);
  };
  seq.bounds = bounds;
  seq.uniform_norm_bound = endpoint_norm_bound(seq);
  seq.description = "oscillating multiplication plus convolution";
  return seq;
}

OperatorSequence make_patched_sequence(const Matrix& v_basis,
                                       const std::function<Operator(int)>& b_of_n, Index h1_dim,
                                       CoefficientBounds bounds, std::vector<int> indices) {
  validate_indices(indices);
  if (!b_of_n) throw ConfigError("patch block family is empty");
  OperatorSequence seq;
  seq.indices = std::move(indices);
  seq.generator = [v_basis, b_of_n, h1_dim](int n) {
    return patched_operator(v_basis, b_of_n(n), h1_dim);
  };
  seq.bounds = bounds;
  seq.uniform_norm_bound = endpoint_norm_bound(seq);
  seq.description = "subspace-patched sequence";
  return seq;
}

bool sequence_spot_check(const OperatorSequence& seq, const BlockDecomposition& d) {
  validate_indices(seq.indices);
  std::vector<int> probes{seq.indices.front()};
  if (seq.indices.back() != seq.indices.front()) probes.push_back(seq.indices.back());
  for (int n : probes) {
    const Operator a = seq.generator(n);
    if (a.size() != d.dim()) throw DimensionError("sequence element size mismatch");
    if (a.norm_estimate() > seq.uniform_norm_bound + 1e-8) return false;
    if (!check_membership(d, a, seq.bounds).is_member) return false;
  }
  return true;
}

}  // namespace nlhconv
