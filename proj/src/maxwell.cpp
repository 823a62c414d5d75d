#include "nlhconv/maxwell.hpp"

#include "nlhconv/linalg.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <utility>

namespace nlhconv {

namespace {

Eigen::PartialPivLU<Matrix> checked_lu(const Matrix& m, const char* what) {
  Eigen::PartialPivLU<Matrix> lu(m);
  const RealVector piv = lu.matrixLU().diagonal().cwiseAbs();
  const double largest = std::max(piv.size() ? piv.maxCoeff() : 0.0, 1e-300);
  if (piv.size() == 0 || piv.minCoeff() <= 1e-14 * largest || lu.rcond() <= 1e-14)
    throw SingularError(what);
  return lu;
}

bool overall_decreasing(const std::vector<double>& series) {
  if (series.empty()) return true;
  return series.back() <= series.front() + 1e-14;
}

void require_admissible_lambda(const MaterialLaw& law, double lambda) {
  if (!(lambda > law.mu_threshold))
    throw PreconditionError("lambda must exceed the law's threshold");
  if (!(lambda > 0.0)) throw PreconditionError("lambda must be positive");
}

// Assembles lambda * M(lambda) + A densely and records the accretivity
// constant, shared by both solve routes.
struct AssembledSystem {
  Matrix coefficient;  // lambda * M(lambda), dense
  double coercivity = 0.0;
};

AssembledSystem assemble(const MaxwellOperator& op, const MaterialLaw& law, double lambda) {
  require_admissible_lambda(law, lambda);
  if (law.dim() != op.a.rows())
    throw DimensionError("material law dimension does not match the skew part");
  AssembledSystem sys;
  sys.coefficient = law.law(lambda).to_dense() * lambda;
  sys.coercivity = min_real_eigenvalue(sys.coefficient);
  if (!(sys.coercivity > 0.0))
    throw PreconditionError("law is not accretive at this lambda: Re(lambda M) has "
                            "a non-positive eigenvalue");
  return sys;
}

}  // namespace

Operator MaterialLaw::k2_coefficient(double lambda) const {
  if (k2_law) {
    Operator c = k2_law(lambda);
    if (c.size() != dim_k2())
      throw DimensionError("memory law returned a coefficient of the wrong size");
    return c;
  }
  return Operator::add(eps, sigma.scaled(Complex(1.0 / lambda)));
}

Operator MaterialLaw::law(double lambda) const {
  return Operator::block_diag(k2_coefficient(lambda), mu);
}

MaterialLaw make_material_law(Operator eps, Operator sigma, Operator mu, double mu_threshold) {
  if (eps.size() != sigma.size())
    throw DimensionError("eps and sigma must act on the same space");
  if (eps.size() + mu.size() == 0) throw DimensionError("material law on a zero space");
  if (mu_threshold < 0.0) throw ConfigError("lambda threshold must be nonnegative");
  MaterialLaw law;
  law.eps = std::move(eps);
  law.sigma = std::move(sigma);
  law.mu = std::move(mu);
  law.mu_threshold = mu_threshold;
  return law;
}

double positivity_constant(const MaterialLaw& law, double lambda) {
  if (!(lambda > 0.0)) throw PreconditionError("lambda must be positive");
  return min_real_eigenvalue(Matrix(law.law(lambda).to_dense() * lambda));
}

double accretivity_floor(const MaterialLaw& law, double lambda_min) {
  if (!(lambda_min > 0.0)) throw PreconditionError("lambda_min must be positive");
  if (law.k2_law)
    throw PreconditionError("the affine-in-lambda bound needs the explicit eps/sigma split");
  const double instant_floor =
      min_real_eigenvalue(Operator::block_diag(law.eps, law.mu).to_dense());
  const double relax_floor = min_real_eigenvalue(law.sigma.to_dense());
  if (instant_floor < -1e-12 || relax_floor < -1e-12)
    throw PreconditionError("affine bound needs positive semidefinite real parts of "
                            "diag(eps, mu) and sigma");
  return positivity_constant(law, lambda_min);
}

MaxwellOperator make_maxwell_operator(const HilbertComplex& composed) {
  if (composed.dim_h2() != composed.dim_h1())
    throw PreconditionError("the second map must be an endomorphism of the middle space");
  MaxwellOperator op;
  op.a = -composed.a1();
  op.skew_defect = max_abs(Matrix(op.a + op.a.adjoint()));
  if (op.skew_defect > 1e-12 * std::max(1.0, max_abs(op.a)))
    throw PreconditionError("second map is not skew-adjoint; not a first-order "
                            "block of the expected form");
  return op;
}

MaxwellSolution solve_laplace_domain(const MaxwellOperator& op, const MaterialLaw& law,
                                     double lambda, const Vector& f) {
  if (f.size() != op.a.rows()) throw DimensionError("right-hand side has the wrong size");
  const AssembledSystem sys = assemble(op, law, lambda);
  const Matrix full = sys.coefficient + op.a;
  Eigen::PartialPivLU<Matrix> lu = checked_lu(full, "Laplace-domain system is singular");
  MaxwellSolution sol;
  sol.u = lu.solve(f);
  sol.residual = (full * sol.u - f).norm();
  sol.coercivity = sys.coercivity;
  return sol;
}

MaxwellSolution solve_via_block_reduction(const MaxwellOperator& op, const MaterialLaw& law,
                                          const BlockDecomposition& d, double lambda,
                                          const Vector& f) {
  if (f.size() != op.a.rows()) throw DimensionError("right-hand side has the wrong size");
  if (d.dim() != op.a.rows())
    throw DimensionError("decomposition does not match the composed space");
  const AssembledSystem sys = assemble(op, law, lambda);

  // The skew part annihilates the exact summand: A Q0 = 0 because the second
  // map composes to zero with the first, and Q0^H A = -(A Q0)^H by skewness.
  // In (Q0, Q1) coordinates the system is therefore
  //   lambda m00 u0 + lambda m01 u1              = f0
  //   lambda m10 u0 + (lambda m11 + t) u1        = f1,   t = Q1^H A Q1,
  // and eliminating u0 leaves the Schur-complement coefficient
  //   lambda (m11 - m10 m00^{-1} m01) + t.
  const BlockOperator m = block_representation(d, law.law(lambda));
  const Vector f0 = d.q0().adjoint() * f;
  const Vector f1 = d.q1().adjoint() * f;

  Vector u0(d.r0()), u1(d.r1());
  if (d.r0() == 0) {
    const Matrix t = d.q1().adjoint() * (op.a * d.q1());
    Eigen::PartialPivLU<Matrix> lu =
        checked_lu(Matrix(lambda * m.a11 + t), "reduced system is singular");
    u1 = lu.solve(f1);
  } else if (d.r1() == 0) {
    Eigen::PartialPivLU<Matrix> lu =
        checked_lu(Matrix(lambda * m.a00), "leading material block is singular");
    u0 = lu.solve(f0);
  } else {
    Eigen::PartialPivLU<Matrix> m00_lu =
        checked_lu(m.a00, "leading material block is singular");
    const Matrix t = d.q1().adjoint() * (op.a * d.q1());
    const Matrix schur = m.a11 - m.a10 * m00_lu.solve(m.a01);
    Eigen::PartialPivLU<Matrix> red_lu =
        checked_lu(Matrix(lambda * schur + t), "reduced system is singular");
    u1 = red_lu.solve(Vector(f1 - m.a10 * m00_lu.solve(f0)));
    u0 = m00_lu.solve(Vector(f0 / lambda - m.a01 * u1));
  }

  MaxwellSolution sol;
  sol.u = d.q0() * u0 + d.q1() * u1;
  sol.residual = ((sys.coefficient + op.a) * sol.u - f).norm();
  sol.coercivity = sys.coercivity;
  return sol;
}

MaxwellConvergenceReport resolvent_convergence_experiment(
    const MaxwellOperator& op, const BlockDecomposition& d, const MaterialLawSequence& seq,
    const MaterialLaw& limit, const std::vector<double>& lambdas,
    const std::vector<Vector>& f_samples, const WOTProbe& probe, double tol) {
  if (seq.indices.size() < 2)
    throw PreconditionError("resolvent experiment needs at least two indices");
  if (lambdas.empty()) throw PreconditionError("resolvent experiment needs sample lambdas");
  if (f_samples.empty()) throw PreconditionError("resolvent experiment needs source samples");
  if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
  if (probe.vectors.rows() != op.a.rows())
    throw DimensionError("probe does not match the composed space");

  MaxwellConvergenceReport report;
  report.indices = seq.indices;
  report.tol = tol;
  report.accepted = true;

  for (double lambda : lambdas) {
    MaxwellLambdaReport lr;
    lr.lambda = lambda;

    // Gate: the material coefficients themselves must have a converging
    // block-quantity limit at this lambda before resolvent convergence is
    // meaningfully attributable to it.
    OperatorSequence coeff_seq;
    coeff_seq.indices = seq.indices;
    coeff_seq.generator = [&seq, lambda](int n) { return seq.generator(n).law(lambda); };
    coeff_seq.description = "material coefficients at fixed lambda";
    const Operator first = coeff_seq.generator(seq.indices.front());
    const Operator last = coeff_seq.generator(seq.indices.back());
    const MembershipReport m_first = check_membership(d, first, CoefficientBounds{1e-8, 1e8});
    const MembershipReport m_last = check_membership(d, last, CoefficientBounds{1e-8, 1e8});
    if (!m_first.is_member || !m_last.is_member)
      throw PreconditionError("material samples are outside every admissible class");
    coeff_seq.bounds = CoefficientBounds{0.9 * std::min(m_first.best_alpha, m_last.best_alpha),
                                         1.1 * std::max(m_first.best_beta, m_last.best_beta)};
    coeff_seq.uniform_norm_bound =
        1.05 * std::max(first.norm_estimate(), last.norm_estimate());
    const HLimitReport gate = extract_h_limit(d, coeff_seq, probe, tol);
    lr.extraction_converged = gate.converged;

    bool lambda_ok = gate.converged;
    for (const Vector& f : f_samples) {
      const MaxwellSolution ref = solve_laplace_domain(op, limit, lambda, f);
      const Vector ref_probe = probe.vectors.adjoint() * ref.u;
      const Vector ref_coexact = d.q1().adjoint() * ref.u;
      std::vector<double> wot, strong;
      wot.reserve(seq.indices.size());
      strong.reserve(seq.indices.size());
      for (int n : seq.indices) {
        const MaxwellSolution sol = solve_laplace_domain(op, seq.generator(n), lambda, f);
        const Vector diff = sol.u - ref.u;
        wot.push_back(max_abs(Matrix(probe.vectors.adjoint() * diff)));
        strong.push_back((d.q1().adjoint() * diff).norm());
      }
      const double wot_scale = std::max(1.0, max_abs(Matrix(ref_probe)));
      const double strong_scale = std::max(1.0, ref_coexact.norm());
      lambda_ok = lambda_ok && overall_decreasing(wot) && wot.back() <= tol * wot_scale &&
                  overall_decreasing(strong) && strong.back() <= tol * strong_scale;
      lr.wot_errors.push_back(std::move(wot));
      lr.strong_errors_u0.push_back(std::move(strong));
    }
    lr.accepted = lambda_ok;
    report.accepted = report.accepted && lambda_ok;
    report.per_lambda.push_back(std::move(lr));
  }
  return report;
}

Complex memory_kernel(const CellFunction& cell_eps, const CellFunction& cell_sigma,
                      double lambda, Index quad_points) {
  if (!(lambda > 0.0)) throw PreconditionError("lambda must be positive");
  if (quad_points < 1) throw ConfigError("quadrature needs at least one panel");
  if (cell_eps.dim != 1 || cell_sigma.dim != 1)
    throw DimensionError("memory kernel is defined for scalar cells");
  Complex reciprocal_sum = 0.0;
  for (Index i = 0; i < quad_points; ++i) {
    const double y = (static_cast<double>(i) + 0.5) / static_cast<double>(quad_points);
    const Eigen::Vector3d point(y, 0.0, 0.0);
    const Complex denom =
        cell_eps.sampler(point)(0, 0) + cell_sigma.sampler(point)(0, 0) / lambda;
    if (std::abs(denom) <= 1e-12)
      throw DegenerateInputError("medium is degenerate: eps + sigma/lambda vanishes");
    reciprocal_sum += 1.0 / denom;
  }
  return static_cast<double>(quad_points) / reciprocal_sum;
}

}  // namespace nlhconv
