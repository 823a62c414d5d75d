#include "doctest.h"

#include "nlhconv/maxwell.hpp"

#include "nlhconv/coefficients.hpp"
#include "nlhconv/complex_core.hpp"
#include "nlhconv/decomposition.hpp"
#include "nlhconv/linalg.hpp"

#include <cmath>
#include <complex>
#include <random>

namespace nlhconv {
namespace {

Vector random_vector(Index n, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
  return v;
}

// Interval complex with N cells plus a one-dimensional appendage, composed so
// that the cell space sits in the K2 slot: legs are the empty map into C^1,
// the constant embedding C^1 -> C^N, and the adjoint of the cell-difference
// map.  Carries the cell midpoints as K2 geometry.
struct LayeredSpace {
  HilbertComplex composed;
  H1Geometry cell_geometry;
};

LayeredSpace make_layered_space(Index n_cells) {
  const HilbertComplex interval = build_interval_complex(n_cells, BcTag::Dirichlet);
  const H1Geometry cells = *interval.geometry();
  H1Geometry point;
  point.field_dim = 1;
  point.points.resize(1, 3);
  point.points << 0.5, 0.0, 0.0;
  point.component = {0};
  point.leg = {0};
  const Matrix b0 = Matrix::Zero(1, 0);
  const Matrix b1 = Matrix::Ones(n_cells, 1);
  const Matrix b2 = interval.a0().adjoint();
  return LayeredSpace{compose_maxwell_complex(b0, b1, b2, cells, point), cells};
}

// The mirrored composition: the cell space sits in the K1 slot (where the mu
// coefficient acts), with the cell-difference map and the cell-mean row as
// legs.
struct MuSlotSpace {
  HilbertComplex composed;
  H1Geometry cell_geometry;
};

MuSlotSpace make_mu_slot_space(Index n_cells) {
  const HilbertComplex interval = build_interval_complex(n_cells, BcTag::Dirichlet);
  const H1Geometry cells = *interval.geometry();
  H1Geometry point;
  point.field_dim = 1;
  point.points.resize(1, 3);
  point.points << 0.5, 0.0, 0.0;
  point.component = {0};
  point.leg = {0};
  const Matrix b0 = interval.a0();
  const Matrix b1 = interval.a1();
  const Matrix b2 = Matrix::Zero(0, 1);
  return MuSlotSpace{compose_maxwell_complex(b0, b1, b2, point, cells), cells};
}

// Probe on a composed space whose cell slot occupies rows [offset,
// offset+n_cells): the five lowest sine modes over the cell midpoints plus
// the unit vector of the one-dimensional partner slot.
WOTProbe sine_probe(const H1Geometry& cells, Index dim, Index offset, Index partner_index) {
  const Index n = cells.dim();
  Matrix columns = Matrix::Zero(dim, 6);
  for (int j = 1; j <= 5; ++j) {
    for (Index i = 0; i < n; ++i)
      columns(offset + i, j - 1) = std::sin(M_PI * j * cells.points(i, 0));
  }
  columns(partner_index, 5) = 1.0;
  return make_probe(columns, 5);
}

Operator zero_diag(Index n) { return Operator::diagonal(Vector::Zero(n)); }

}  // namespace

TEST_CASE("composed grid skew part is exactly skew-adjoint and solves the identity law") {
  const HilbertComplex c = compose_grid_maxwell_complex({2, 2, 2});
  const GridOperators ops = make_grid_operators({2, 2, 2});
  const Index k2 = ops.curl.rows(), k1 = ops.curl.cols();
  REQUIRE(c.dim_h1() == k2 + k1);

  const MaxwellOperator op = make_maxwell_operator(c);
  CHECK(op.skew_defect == 0.0);
  CHECK(max_abs(Matrix(op.a + op.a.adjoint())) == 0.0);

  const MaterialLaw law =
      make_material_law(Operator::identity(k2), zero_diag(k2), Operator::identity(k1));
  const Vector f = random_vector(k2 + k1, 101005);
  const MaxwellSolution sol = solve_laplace_domain(op, law, 1.0, f);
  CHECK(sol.coercivity == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.residual <= 1e-10 * f.norm());
  CHECK(sol.u.norm() <= f.norm() * (1.0 + 1e-12));

  const BlockDecomposition d = build_decomposition(c);
  const MaxwellSolution red = solve_via_block_reduction(op, law, d, 1.0, f);
  CHECK((red.u - sol.u).norm() <= 1e-12 * std::max(1.0, sol.u.norm()));
  CHECK(red.residual <= 1e-10 * f.norm());
}

TEST_CASE("eddy current mixed medium: accretivity constants, resolvent bound, errors") {
  const HilbertComplex c = compose_grid_maxwell_complex({4, 4, 4});
  const GridOperators ops = make_grid_operators({4, 4, 4});
  const Index k2 = ops.curl.rows(), k1 = ops.curl.cols();
  const MaxwellOperator op = make_maxwell_operator(c);

  // eps vanishes on the cells where sigma is one and vice versa: the mixed
  // medium stays uniformly accretive because lambda*eps + sigma >= min(lambda, 1).
  const Operator eps = multiplication_operator(ops.face_geometry, make_two_phase_cell(1.0, 0.0), 1);
  const Operator sigma =
      multiplication_operator(ops.face_geometry, make_two_phase_cell(0.0, 1.0), 1);
  const MaterialLaw law = make_material_law(eps, sigma, Operator::identity(k1));

  for (double lambda : {0.5, 1.0, 2.0, 4.0}) {
    CHECK(positivity_constant(law, lambda) ==
          doctest::Approx(std::min(lambda, 1.0)).epsilon(1e-12));
  }
  // The floor at lambda_min bounds every larger lambda's constant.
  const double floor = accretivity_floor(law, 0.5);
  CHECK(floor == doctest::Approx(0.5).epsilon(1e-12));
  for (double lambda : {1.0, 2.0, 4.0})
    CHECK(positivity_constant(law, lambda) >= floor - 1e-12);

  for (int s = 0; s < 20; ++s) {
    const Vector f = random_vector(k2 + k1, 101006 + static_cast<unsigned long long>(s));
    const MaxwellSolution sol = solve_laplace_domain(op, law, 2.0, f);
    CHECK(sol.residual <= 1e-10 * std::max(1.0, f.norm()));
    CHECK(sol.u.norm() <= (1.0 / sol.coercivity) * f.norm() * (1.0 + 1e-10));
  }

  SUBCASE("lambda at or below the threshold is rejected") {
    CHECK_THROWS_AS(solve_laplace_domain(op, law, 0.0, Vector::Zero(k2 + k1)),
                    PreconditionError);
    const MaterialLaw gated =
        make_material_law(Operator::identity(k2), zero_diag(k2), Operator::identity(k1), 0.3);
    CHECK_THROWS_AS(solve_laplace_domain(op, gated, 0.25, Vector::Zero(k2 + k1)),
                    PreconditionError);
    CHECK_THROWS_AS(solve_laplace_domain(op, gated, 0.3, Vector::Zero(k2 + k1)),
                    PreconditionError);
  }
  SUBCASE("media with an indefinite real part are rejected") {
    const Operator bad =
        multiplication_operator(ops.face_geometry, make_two_phase_cell(1.0, -0.2), 1);
    const MaterialLaw unstable = make_material_law(bad, zero_diag(k2), Operator::identity(k1));
    CHECK_THROWS_AS(solve_laplace_domain(op, unstable, 1.0, Vector::Zero(k2 + k1)),
                    PreconditionError);
    // And the affine floor refuses indefinite instantaneous parts outright.
    CHECK_THROWS_AS(accretivity_floor(unstable, 1.0), PreconditionError);
  }
  SUBCASE("construction validates shapes and thresholds") {
    CHECK_THROWS_AS(make_material_law(Operator::identity(3), zero_diag(4), Operator::identity(2)),
                    DimensionError);
    CHECK_THROWS_AS(
        make_material_law(Operator::identity(3), zero_diag(3), Operator::identity(2), -1.0),
        ConfigError);
    MaterialLaw wrong = make_material_law(Operator::identity(k2), zero_diag(k2),
                                          Operator::identity(k1));
    wrong.k2_law = [](double) { return Operator::identity(7); };
    CHECK_THROWS_AS(solve_laplace_domain(op, wrong, 1.0, Vector::Zero(k2 + k1)),
                    DimensionError);
    CHECK_THROWS_AS(solve_laplace_domain(op, law, 1.0, Vector::Zero(5)), DimensionError);
  }
  SUBCASE("the skew factory rejects non-composed shapes") {
    CHECK_THROWS_AS(make_maxwell_operator(build_interval_complex(8, BcTag::Dirichlet)),
                    PreconditionError);
    Matrix shift = Matrix::Zero(4, 4);
    shift(0, 1) = 1.0;
    const HilbertComplex not_skew("shift", BcTag::Custom, Matrix::Zero(4, 0), shift);
    CHECK_THROWS_AS(make_maxwell_operator(not_skew), PreconditionError);
  }
}

TEST_CASE("block reduction route agrees with the direct solve") {
  const HilbertComplex c = compose_grid_maxwell_complex({4, 4, 4});
  const GridOperators ops = make_grid_operators({4, 4, 4});
  const Index k2 = ops.curl.rows(), k1 = ops.curl.cols();
  const MaxwellOperator op = make_maxwell_operator(c);
  const BlockDecomposition d = build_decomposition(c);

  const MaterialLaw identity_law =
      make_material_law(Operator::identity(k2), zero_diag(k2), Operator::identity(k1));
  const Operator eps = multiplication_operator(ops.face_geometry, make_two_phase_cell(1.0, 0.0), 1);
  const Operator sigma =
      multiplication_operator(ops.face_geometry, make_two_phase_cell(0.0, 1.0), 1);
  const MaterialLaw eddy = make_material_law(eps, sigma, Operator::identity(k1));
  const Operator eps_osc =
      multiplication_operator(ops.face_geometry, make_two_phase_cell(1.0, 0.25), 4);
  const MaterialLaw oscillating = make_material_law(eps_osc, zero_diag(k2), Operator::identity(k1));

  for (int s = 0; s < 10; ++s) {
    const Vector f = random_vector(k2 + k1, 101030 + static_cast<unsigned long long>(s));
    const MaxwellSolution a = solve_laplace_domain(op, identity_law, 1.0, f);
    const MaxwellSolution b = solve_via_block_reduction(op, identity_law, d, 1.0, f);
    CHECK((a.u - b.u).norm() <= 1e-12 * std::max(1.0, a.u.norm()));

    const MaxwellSolution a2 = solve_laplace_domain(op, eddy, 2.0, f);
    const MaxwellSolution b2 = solve_via_block_reduction(op, eddy, d, 2.0, f);
    CHECK((a2.u - b2.u).norm() <= 1e-10 * std::max(1.0, a2.u.norm()));

    const MaxwellSolution a3 = solve_laplace_domain(op, oscillating, 2.0, f);
    const MaxwellSolution b3 = solve_via_block_reduction(op, oscillating, d, 2.0, f);
    CHECK((a3.u - b3.u).norm() <= 1e-10 * std::max(1.0, a3.u.norm()));
  }

  CHECK_THROWS_AS(solve_via_block_reduction(op, eddy, d, 0.0, Vector::Zero(k2 + k1)),
                  PreconditionError);
}

TEST_CASE("memory kernel quadrature: exact values, errors, and the extracted 1D limit") {
  const CellFunction eps_one = make_two_phase_cell(1.0, 1.0);
  const CellFunction sigma_zero = make_two_phase_cell(0.0, 0.0);
  const CellFunction eps_mix = make_two_phase_cell(1.0, 0.0);
  const CellFunction sigma_mix = make_two_phase_cell(0.0, 1.0);

  for (double lambda : {1.0, 2.0, 4.0}) {
    CHECK(std::abs(memory_kernel(eps_one, sigma_zero, lambda) - Complex(1.0)) <= 1e-12);
    const Complex expected(2.0 / (1.0 + lambda));
    CHECK(std::abs(memory_kernel(eps_mix, sigma_mix, lambda) - expected) <= 1e-8);
  }

  CHECK_THROWS_AS(memory_kernel(eps_mix, sigma_mix, 0.0), PreconditionError);
  CHECK_THROWS_AS(memory_kernel(eps_mix, sigma_mix, -1.0), PreconditionError);
  CHECK_THROWS_AS(memory_kernel(sigma_zero, sigma_zero, 1.0), DegenerateInputError);
  CHECK_THROWS_AS(memory_kernel(make_constant_cell(Matrix::Identity(2, 2)), sigma_zero, 1.0),
                  DimensionError);
  CHECK_THROWS_AS(memory_kernel(eps_one, sigma_zero, 1.0, 0), ConfigError);

  // The quadrature value is the same limit the block-quantity extraction
  // finds for the oscillating medium eps + sigma/lambda on the interval.
  const HilbertComplex interval = build_interval_complex(512, BcTag::Dirichlet);
  const BlockDecomposition d = build_decomposition(interval);
  const WOTProbe probe = default_probe(interval, 5);
  for (double lambda : {2.0, 4.0}) {
    const Complex h = memory_kernel(eps_mix, sigma_mix, lambda);
    const CellFunction mixed = make_two_phase_cell(1.0, 1.0 / lambda);
    OperatorSequence seq = make_oscillating_sequence(
        *interval.geometry(), mixed,
        CoefficientBounds{0.9 / lambda, 1.1 * lambda}, dyadic_indices(32));
    const HLimitReport rep = extract_h_limit(d, seq, probe, 5e-2);
    CHECK(rep.converged);
    const Matrix x = range_space(Matrix(d.q0().adjoint() * probe.vectors));
    const Matrix a00 = d.q0().adjoint() * rep.reconstructed.apply(Matrix(d.q0()));
    const Matrix compressed = x.adjoint() * a00 * x;
    CHECK(max_abs(Matrix(compressed - h * Matrix::Identity(x.cols(), x.cols()))) <=
          0.05 * std::abs(h));
  }
}

TEST_CASE("layered eddy medium: resolvent solutions follow the memory-kernel law") {
  const Index n_cells = 256;
  const LayeredSpace space = make_layered_space(n_cells);
  const MaxwellOperator op = make_maxwell_operator(space.composed);
  CHECK(op.skew_defect == 0.0);
  const BlockDecomposition d = build_decomposition(space.composed);
  REQUIRE(d.r0() == n_cells - 1);
  REQUIRE(d.r1() == 2);
  const WOTProbe probe = sine_probe(space.cell_geometry, n_cells + 1, 0, n_cells);

  const CellFunction eps_cell = make_two_phase_cell(1.0, 0.0);
  const CellFunction sigma_cell = make_two_phase_cell(0.0, 1.0);
  MaterialLawSequence seq;
  seq.indices = {2, 4, 8, 16, 32};
  seq.generator = [&](int n) {
    return make_material_law(multiplication_operator(space.cell_geometry, eps_cell, n),
                             multiplication_operator(space.cell_geometry, sigma_cell, n),
                             Operator::identity(1));
  };

  MaterialLaw limit =
      make_material_law(Operator::identity(n_cells), zero_diag(n_cells), Operator::identity(1));
  limit.k2_law = [eps_cell, sigma_cell, n_cells](double lambda) {
    return Operator::identity(n_cells).scaled(memory_kernel(eps_cell, sigma_cell, lambda));
  };

  std::vector<Vector> samples = {probe.vectors.col(0), probe.vectors.col(2),
                                 Vector((probe.vectors.col(0) + probe.vectors.col(5)) /
                                        std::sqrt(2.0))};
  const MaxwellConvergenceReport report = resolvent_convergence_experiment(
      op, d, seq, limit, {1.0, 2.0, 4.0}, samples, probe, 0.2);

  CHECK(report.accepted);
  REQUIRE(report.per_lambda.size() == 3);
  CHECK(report.tol == 0.2);
  CHECK(report.indices == seq.indices);
  for (const MaxwellLambdaReport& lr : report.per_lambda) {
    CHECK(lr.extraction_converged);
    CHECK(lr.accepted);
    REQUIRE(lr.wot_errors.size() == samples.size());
    for (const auto& series : lr.wot_errors) {
      REQUIRE(series.size() == seq.indices.size());
      CHECK(series.back() <= series.front() + 1e-14);
      CHECK(series.back() <= 1e-3);
    }
    // The coexact component of the solution is reproduced exactly by the
    // memory-kernel law: half-and-half layers have index-independent
    // harmonic means.
    for (const auto& series : lr.strong_errors_u0)
      for (double v : series) CHECK(v <= 1e-10);
  }

  SUBCASE("a constant family reproduces its own limit with zero error") {
    MaterialLawSequence constant;
    constant.indices = {2, 4, 8, 16};
    const MaterialLaw fixed =
        make_material_law(Operator::identity(n_cells), zero_diag(n_cells), Operator::identity(1));
    constant.generator = [&](int) { return fixed; };
    const MaxwellConvergenceReport r2 =
        resolvent_convergence_experiment(op, d, constant, fixed, {1.0, 2.0}, samples, probe, 0.2);
    CHECK(r2.accepted);
    for (const MaxwellLambdaReport& lr : r2.per_lambda)
      for (const auto& series : lr.wot_errors)
        for (double v : series) CHECK(v == 0.0);
  }

  SUBCASE("input validation") {
    MaterialLawSequence bad = seq;
    bad.indices = {2};
    CHECK_THROWS_AS(resolvent_convergence_experiment(op, d, bad, limit, {1.0}, samples, probe, 0.2),
                    PreconditionError);
    CHECK_THROWS_AS(resolvent_convergence_experiment(op, d, seq, limit, {}, samples, probe, 0.2),
                    PreconditionError);
    CHECK_THROWS_AS(resolvent_convergence_experiment(op, d, seq, limit, {1.0}, {}, probe, 0.2),
                    PreconditionError);
    CHECK_THROWS_AS(
        resolvent_convergence_experiment(op, d, seq, limit, {1.0}, samples, probe, 0.0),
        ConfigError);
  }
}

TEST_CASE("convolution memory in the mu slot: sums of oscillating kernels converge") {
  const Index n_cells = 256;
  const MuSlotSpace space = make_mu_slot_space(n_cells);
  const MaxwellOperator op = make_maxwell_operator(space.composed);
  const BlockDecomposition d = build_decomposition(space.composed);
  const WOTProbe probe = sine_probe(space.cell_geometry, n_cells + 1, 1, 0);

  auto kernel_for = [](int n) {
    return ConvolutionSpec{[n](double z) {
                             const double base = 0.3 * std::exp(-z * z);
                             return Complex(n > 0 ? base * (1.0 + 0.5 * std::cos(2.0 * M_PI * n * z))
                                                  : base);
                           },
                           0.75};
  };

  MaterialLawSequence seq;
  seq.indices = {2, 4, 8, 16};
  seq.generator = [&](int n) {
    const Operator mu = Operator::add(Operator::identity(n_cells),
                                      convolution_operator(space.cell_geometry, kernel_for(n)));
    return make_material_law(Operator::identity(1), zero_diag(1), mu);
  };
  const Operator mu_limit = Operator::add(
      Operator::identity(n_cells), convolution_operator(space.cell_geometry, kernel_for(0)));
  const MaterialLaw limit = make_material_law(Operator::identity(1), zero_diag(1), mu_limit);

  std::vector<Vector> samples = {probe.vectors.col(1), probe.vectors.col(3),
                                 Vector((probe.vectors.col(0) + probe.vectors.col(1)) /
                                        std::sqrt(2.0))};
  const MaxwellConvergenceReport report =
      resolvent_convergence_experiment(op, d, seq, limit, {1.0, 2.0}, samples, probe, 0.2);

  CHECK(report.accepted);
  for (const MaxwellLambdaReport& lr : report.per_lambda) {
    CHECK(lr.extraction_converged);
    for (const auto& series : lr.wot_errors) {
      CHECK(series.back() <= series.front() + 1e-14);
      CHECK(series.back() <= 1e-5);
    }
    for (const auto& series : lr.strong_errors_u0)
      CHECK(series.back() <= series.front() + 1e-14);
  }
}

TEST_CASE("block-diagonal family: extracted limit equals the per-leg limits") {
  const Index n_cells = 256;
  const LayeredSpace space = make_layered_space(n_cells);
  const BlockDecomposition d = build_decomposition(space.composed);
  const WOTProbe probe = sine_probe(space.cell_geometry, n_cells + 1, 0, n_cells);

  OperatorSequence seq;
  seq.indices = {2, 4, 8, 16};
  seq.bounds = CoefficientBounds{0.45, 2.2};
  seq.uniform_norm_bound = 1.1;
  const H1Geometry cells = space.cell_geometry;
  seq.generator = [cells](int n) {
    return Operator::block_diag(
        multiplication_operator(cells, make_two_phase_cell(1.0, 0.5), n), Operator::identity(1));
  };
  const HLimitReport rep = extract_h_limit(d, seq, probe, 0.2);
  CHECK(rep.converged);
  CHECK(rep.membership.is_member);

  // Per-leg limits: the interval family homogenises to its harmonic mean
  // (2/3) on the cell slot; the partner slot is constant.
  const Operator reference = block_material_law(
      Operator::identity(n_cells).scaled(2.0 / 3.0), Operator::identity(1));
  CHECK(h_pseudometric(d, rep.reconstructed, reference, probe, seq.bounds) <= 5e-2);
}

}  // namespace nlhconv
