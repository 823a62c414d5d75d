#pragma once

#include "nlhconv/coefficients.hpp"
#include "nlhconv/complex_core.hpp"
#include "nlhconv/decomposition.hpp"
#include "nlhconv/hconv.hpp"
#include "nlhconv/operator.hpp"

#include <functional>
#include <vector>

namespace nlhconv {

// Laplace-domain material law on the composed space K2 + K1:
//   M(lambda) = diag(eps, mu) + (1/lambda) diag(sigma, 0).
// eps may vanish on subregions (eddy-current regime); well-posedness then
// rests on lambda*eps + Re sigma staying uniformly positive.  The optional
// k2_law replaces eps + sigma/lambda by an explicit function of lambda on the
// K2 slot; homogenised limit laws use it to carry coefficients with memory.
struct MaterialLaw {
  Operator eps;    // K2 slot, instantaneous part
  Operator sigma;  // K2 slot, 1/lambda part
  Operator mu;     // K1 slot
  double mu_threshold = 0.0;  // solves require lambda > mu_threshold
  std::function<Operator(double)> k2_law;

  Index dim_k2() const { return eps.size(); }
  Index dim_k1() const { return mu.size(); }
  Index dim() const { return dim_k2() + dim_k1(); }

  // eps + sigma/lambda, or k2_law(lambda) when a memory law is attached.
  Operator k2_coefficient(double lambda) const;
  // Block-diagonal coefficient diag(k2_coefficient(lambda), mu) on K2 + K1.
  Operator law(double lambda) const;
};

// Validates dimensions (eps, sigma square and equal-sized; mu square;
// mu_threshold >= 0) and packages the law.
MaterialLaw make_material_law(Operator eps, Operator sigma, Operator mu,
                              double mu_threshold = 0.0);

// Smallest eigenvalue of the Hermitian part of lambda * M(lambda): the
// accretivity constant c entering the resolvent bound |U| <= |F| / c.
double positivity_constant(const MaterialLaw& law, double lambda);

// A lower bound for positivity_constant(law, lambda) valid for EVERY
// lambda >= lambda_min at once.  Uses that the Hermitian part of
// lambda * M(lambda) = lambda * diag(eps, mu) + diag(sigma, 0) is
// nondecreasing in lambda once both block diagonals have positive
// semidefinite Hermitian parts; change-of-type media (eps vanishing on
// subregions, compensated by sigma) are certified this way.  Throws
// PreconditionError when the monotonicity premise fails.
double accretivity_floor(const MaterialLaw& law, double lambda_min);

// Skew-adjoint first-order part assembled from a composed complex:
// A = [[0, -B1], [B1*, 0]] on K2 + K1, i.e. the negative of the composed
// complex's second map.  Skewness holds exactly by construction; the defect
// is recorded and gated at 1e-12.
struct MaxwellOperator {
  Matrix a;
  double skew_defect = 0.0;
};

MaxwellOperator make_maxwell_operator(const HilbertComplex& composed);

// One Laplace-domain solve (lambda * M(lambda) + A) U = F.
struct MaxwellSolution {
  Vector u;
  double residual = 0.0;    // |(lambda M + A) u - f|
  double coercivity = 0.0;  // positivity constant at this lambda
};

MaxwellSolution solve_laplace_domain(const MaxwellOperator& op, const MaterialLaw& law,
                                     double lambda, const Vector& f);

// The same solve routed through the orthogonal splitting d of the composed
// space.  A annihilates the exact summand (range of the composed first map),
// so eliminating those coordinates leaves a reduced system on the coexact
// side whose coefficient is lambda * (Schur complement of the material
// blocks) plus the compressed skew part; the eliminated coordinates are then
// recovered by back-substitution.  Agrees with solve_laplace_domain up to
// solver tolerance.
MaxwellSolution solve_via_block_reduction(const MaxwellOperator& op, const MaterialLaw& law,
                                          const BlockDecomposition& d, double lambda,
                                          const Vector& f);

// A family n -> M_n of material laws on a fixed composed space, with the
// membership bounds used when the induced coefficient sequence is fed to the
// limit-extraction gate.
struct MaterialLawSequence {
  std::vector<int> indices;
  std::function<MaterialLaw(int)> generator;
};

// Per-lambda record of the resolvent convergence experiment.
struct MaxwellLambdaReport {
  double lambda = 0.0;
  bool extraction_converged = false;  // limit extraction gate on M_n(lambda)
  // Outer index: F sample; inner: sequence index n.
  std::vector<std::vector<double>> wot_errors;
  std::vector<std::vector<double>> strong_errors_u0;
  bool accepted = false;
};

struct MaxwellConvergenceReport {
  std::vector<int> indices;
  std::vector<MaxwellLambdaReport> per_lambda;
  bool accepted = false;
  double tol = 0.0;
};

// For each lambda: solves (lambda M_n + A) U_n = F along the family and
// (lambda M_limit + A) U_inf = F, and measures
//   wot_error(n)       = max_j |<U_n - U_inf, probe_j>|   (weak residual)
//   strong_error_u0(n) = |Q1* (U_n - U_inf)|              (coexact part, norm)
// The verdict per lambda requires the extraction gate to converge, every
// weak-residual series to decrease below tol, and every coexact-part series
// to decrease below tol: the coexact component converges in norm, not merely
// weakly.
MaxwellConvergenceReport resolvent_convergence_experiment(
    const MaxwellOperator& op, const BlockDecomposition& d, const MaterialLawSequence& seq,
    const MaterialLaw& limit, const std::vector<double>& lambdas,
    const std::vector<Vector>& f_samples, const WOTProbe& probe, double tol);

// Effective Laplace-domain coefficient of a layered two-component medium:
//   h(lambda) = ( integral_0^1 (eps(y) + sigma(y)/lambda)^{-1} dy )^{-1},
// computed by the midpoint rule with quad_points panels (exact for
// piecewise-constant cells with breakpoints on the panel grid).  Scalar cells
// only.  Throws PreconditionError for lambda <= 0 and DegenerateInputError
// when the integrand's denominator comes within 1e-12 of zero.
Complex memory_kernel(const CellFunction& cell_eps, const CellFunction& cell_sigma,
                      double lambda, Index quad_points = 4096);

}  // namespace nlhconv
