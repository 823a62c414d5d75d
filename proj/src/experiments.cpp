#include "nlhconv/experiments.hpp"

#include "nlhconv/coefficients.hpp"
#include "nlhconv/complex_core.hpp"
#include "nlhconv/decomposition.hpp"
#include "nlhconv/hconv.hpp"
#include "nlhconv/linalg.hpp"
#include "nlhconv/maxwell.hpp"
#include "nlhconv/solvers.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace nlhconv {

namespace {

// ---------------------------------------------------------------------------
// Scaffolding
// ---------------------------------------------------------------------------

struct Settings {
  int grid = 0;
  int n_max = 0;
  int probe_k = 0;
  double tol = 0.0;
  unsigned long long seed = 0;
};

void require_range(const char* name, int value, int lo, int hi) {
  if (value < lo || value > hi)
    throw ConfigError(std::string(name) + " = " + std::to_string(value) + " is outside [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

void require_unused(const char* name, int value) {
  if (value != 0)
    throw ConfigError(std::string(name) + " is not a setting of this experiment");
}

void require_tol(double tol, double hi) {
  if (!(tol > 0.0) || tol > hi)
    throw ConfigError("tol = " + std::to_string(tol) + " is outside (0, " + std::to_string(hi) +
                      "]");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ReportTable start_table(ExperimentKind kind, const Settings& s) {
  ReportTable t;
  t.experiment = experiment_name(kind);
  t.seed = s.seed;
  t.config.emplace_back("grid", std::to_string(s.grid));
  t.config.emplace_back("n_max", std::to_string(s.n_max));
  t.config.emplace_back("probe_k", std::to_string(s.probe_k));
  t.config.emplace_back("tol", fmt(s.tol));
  t.config.emplace_back("seed", std::to_string(s.seed));
  return t;
}

// A measured quantity compared against a reference.
void add_row(ReportTable& t, int n, std::string quantity, double value, double reference) {
  t.rows.push_back({n, std::move(quantity), value, reference, std::abs(value - reference)});
}

// An informational quantity with no reference (error fixed at zero).
void add_info(ReportTable& t, int n, std::string quantity, double value) {
  t.rows.push_back({n, std::move(quantity), value, 0.0, 0.0});
}

// A boolean check encoded as 1/0 against reference 1.
void add_flag(ReportTable& t, int n, std::string quantity, bool ok) {
  add_row(t, n, std::move(quantity), ok ? 1.0 : 0.0, 1.0);
}

Vector random_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = Complex(dist(rng), dist(rng));
  return v;
}

Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = Complex(dist(rng), dist(rng));
  return m;
}

// Dyadic indices {first, 2*first, ...} up to n_max inclusive.
std::vector<int> dyadic_from(int first, int n_max) {
  std::vector<int> idx;
  for (int n = first; n <= n_max; n *= 2) idx.push_back(n);
  return idx;
}

// back-vs-front comparison used by the convergence verdicts of this module.
bool overall_decreasing(const std::vector<double>& series) {
  return series.size() < 2 || series.back() <= series.front() + 1e-14;
}

OperatorSequence two_phase_sequence(const HilbertComplex& c, std::vector<int> indices) {
  return make_oscillating_sequence(*c.geometry(), make_two_phase_cell(1.0, 0.5), {0.5, 2.0},
                                   std::move(indices));
}

// ---------------------------------------------------------------------------
// verify: block algebra property suites + complex constructor suite
// ---------------------------------------------------------------------------

ReportTable run_verify(const ExperimentConfig& cfg) {
  Settings s{cfg.grid ? cfg.grid : 8, cfg.n_max ? cfg.n_max : 100, 0,
             cfg.tol != 0.0 ? cfg.tol : 1e-10, cfg.seed ? cfg.seed : 20260819ULL};
  require_range("grid", s.grid, 2, 8);
  require_range("n_max", s.n_max, 10, 10000);
  require_unused("probe_k", cfg.probe_k);
  require_tol(s.tol, 1.0);

  ReportTable t = start_table(ExperimentKind::verify, s);
  bool ok = true;

  // --- random block operators: factorization, inverse, solve, duality ---
  std::mt19937_64 rng(s.seed);
  double e_factor = 0.0, e_inverse = 0.0, e_solve = 0.0, e_duality = 0.0;
  for (int trial = 0; trial < s.n_max; ++trial) {
    const Index r0 = 2 + static_cast<Index>(rng() % 7);
    const Index r1 = 2 + static_cast<Index>(rng() % 7);
    BlockOperator b;
    const Matrix g0 = random_matrix(r0, r0, rng);
    const Matrix g1 = random_matrix(r1, r1, rng);
    b.a00 = g0 * g0.adjoint() + Matrix::Identity(r0, r0);
    b.a01 = 0.5 * random_matrix(r0, r1, rng);
    b.a10 = 0.5 * random_matrix(r1, r0, rng);
    const Eigen::PartialPivLU<Matrix> lu00(b.a00);
    // a11 chosen so the Schur complement is g1 g1^H + I: invertible by design.
    b.a11 = g1 * g1.adjoint() + Matrix::Identity(r1, r1) + b.a10 * lu00.solve(b.a01);

    const SchurFactors f = schur_factorize(b);
    const Matrix product =
        block_multiply(block_multiply(f.lower, f.diagonal), f.upper).full();
    e_factor = std::max(e_factor, max_abs(Matrix(product - b.full())));

    const BlockOperator inv = block_inverse(b);
    e_inverse = std::max(e_inverse, max_abs(Matrix(inv.full() - b.full().inverse())));

    // Block elimination against the dense solve of the same system.
    const Vector f0 = random_vector(r0, rng);
    const Vector f1 = random_vector(r1, rng);
    Vector rhs(r0 + r1);
    rhs << f0, f1;
    const Vector dense = b.full().partialPivLu().solve(rhs);
    const Matrix schur = b.a11 - b.a10 * lu00.solve(b.a01);
    const Vector u1 = schur.partialPivLu().solve(Vector(f1 - b.a10 * lu00.solve(f0)));
    const Vector u0 = lu00.solve(Vector(f0 - b.a01 * u1));
    Vector via_blocks(r0 + r1);
    via_blocks << u0, u1;
    e_solve = std::max(e_solve, max_abs(Matrix(via_blocks - dense)));

    // The inverse of the (1,1)-block of the inverse is the Schur complement.
    e_duality = std::max(e_duality, max_abs(Matrix(inv.a11.inverse() - schur)));
  }
  add_row(t, s.n_max, "block.factorization_product_max", e_factor, 0.0);
  add_row(t, s.n_max, "block.inverse_vs_dense_max", e_inverse, 0.0);
  add_row(t, s.n_max, "block.solve_identity_max", e_solve, 0.0);
  add_row(t, s.n_max, "block.schur_duality_max", e_duality, 0.0);
  ok = ok && e_factor <= s.tol && e_inverse <= s.tol && e_solve <= s.tol && e_duality <= s.tol;

  // --- complex constructors ---
  const Index interval_n = static_cast<Index>(128 * s.grid);
  const Index edge = static_cast<Index>(s.grid);
  const Index composed_edge = std::min<Index>(edge, 4);
  std::vector<std::pair<std::string, HilbertComplex>> suite;
  suite.emplace_back("trivial16", build_trivial_complex(16));
  suite.emplace_back("interval" + std::to_string(interval_n) + "_clamped",
                     build_interval_complex(interval_n, BcTag::Dirichlet));
  suite.emplace_back("interval" + std::to_string(interval_n) + "_free",
                     build_interval_complex(interval_n, BcTag::Neumann));
  suite.emplace_back("grid" + std::to_string(edge) + "_clamped",
                     build_grid_complex_3d({edge, edge, edge}, BcTag::Dirichlet));
  suite.emplace_back("grid" + std::to_string(edge) + "_free",
                     build_grid_complex_3d({edge, edge, edge}, BcTag::Neumann));
  suite.emplace_back("composed_grid" + std::to_string(composed_edge),
                     compose_grid_maxwell_complex({composed_edge, composed_edge, composed_edge}));
  for (const auto& [name, c] : suite) {
    const ComplexReport report = verify_complex(c);
    const int n = static_cast<int>(c.dim_h1());
    add_flag(t, n, "complex." + name + ".is_complex", report.is_complex);
    add_flag(t, n, "complex." + name + ".is_exact", report.is_exact);
    add_row(t, n, "complex." + name + ".cohomology_dim",
            static_cast<double>(report.cohomology_dim), 0.0);
    add_row(t, n, "complex." + name + ".composition_max_entry", report.composition_norm, 0.0);
    ok = ok && report.is_complex && report.is_exact && report.cohomology_dim == 0 &&
         report.composition_norm == 0.0;
  }

  t.verdict = ok;
  t.converged = true;  // nothing iterative to converge
  return t;
}

// ---------------------------------------------------------------------------
// means1d: probe limits of the two-phase family and its inverse
// ---------------------------------------------------------------------------

ReportTable run_means1d(const ExperimentConfig& cfg) {
  Settings s{cfg.grid ? cfg.grid : 1024, cfg.n_max ? cfg.n_max : 64,
             cfg.probe_k ? cfg.probe_k : 5, cfg.tol != 0.0 ? cfg.tol : kProbeTol,
             cfg.seed ? cfg.seed : 20260819ULL};
  require_range("grid", s.grid, 32, 4096);
  require_range("n_max", s.n_max, 8, 512);
  require_range("probe_k", s.probe_k, 1, 8);
  require_tol(s.tol, 1.0);

  ReportTable t = start_table(ExperimentKind::means1d, s);
  const HilbertComplex c = build_interval_complex(s.grid, BcTag::Dirichlet);
  const WOTProbe probe = default_probe(c, s.probe_k);
  const Index m = probe.vectors.cols();

  const OperatorSequence seq = two_phase_sequence(c, dyadic_indices(s.n_max));
  // The pointwise inverse of the (1, 1/2) pattern is the (1, 2) pattern on the
  // same phase layout, so the inverse family is again a two-phase family.
  const CellFunction inverse_cell = make_two_phase_cell(1.0, 2.0);
  const auto inverse_family = [&](int n) {
    return multiplication_operator(*c.geometry(), inverse_cell, n).to_dense();
  };

  const Matrix mean_ref = 0.75 * Matrix::Identity(m, m);
  const Matrix inv_mean_ref = 1.5 * Matrix::Identity(m, m);
  for (int n : seq.indices) {
    const Matrix pa = probe.vectors.adjoint() * seq.generator(n).apply(probe.vectors);
    add_row(t, n, "a_probe_dist_to_mean", max_abs(Matrix(pa - mean_ref)), 0.0);
    const Matrix pi = probe.vectors.adjoint() * (inverse_family(n) * probe.vectors);
    add_row(t, n, "ainv_probe_dist_to_mean_of_inverses", max_abs(Matrix(pi - inv_mean_ref)), 0.0);
  }

  const WotReport wa = wot_limit(seq, probe, s.tol);
  const WotReport wi = wot_limit(seq.indices, inverse_family, probe, s.tol);
  const double dist_a = max_abs(Matrix(wa.probe_limit - mean_ref));
  const double dist_inv = max_abs(Matrix(wi.probe_limit - inv_mean_ref));
  add_row(t, 0, "a_limit_dist_to_mean", dist_a, 0.0);
  add_row(t, 0, "ainv_limit_dist_to_mean_of_inverses", dist_inv, 0.0);
  add_flag(t, 0, "a_limit_converged", wa.converged);
  add_flag(t, 0, "ainv_limit_converged", wi.converged);

  t.converged = wa.converged && wi.converged;
  // Acceptance thresholds are pinned: 0.05 for the family, 0.10 for the
  // inverse family, regardless of the gate tolerance.
  t.verdict = t.converged && dist_a <= 0.05 && dist_inv <= 0.10;
  return t;
}

// ---------------------------------------------------------------------------
// homog1d: primal solutions against the closed-form effective solution
// ---------------------------------------------------------------------------

ReportTable run_homog1d(const ExperimentConfig& cfg) {
  Settings s{cfg.grid ? cfg.grid : 1024, cfg.n_max ? cfg.n_max : 64, 0,
             cfg.tol != 0.0 ? cfg.tol : 0.02, cfg.seed ? cfg.seed : 20260819ULL};
  require_range("grid", s.grid, 64, 4096);
  require_range("n_max", s.n_max, 8, 512);
  require_unused("probe_k", cfg.probe_k);
  require_tol(s.tol, 1.0);

  ReportTable t = start_table(ExperimentKind::homog1d, s);
  const HilbertComplex c = build_interval_complex(s.grid, BcTag::Dirichlet);
  const BlockDecomposition d = build_decomposition(c);
  const ReducedOperator r0 = reduce(c.a0());
  const RangeFunctional f = functional_from_raw(r0, Vector(Vector::Ones(c.dim_h0())));

  // Closed form for the unit load with the effective coefficient 2/3 of the
  // (1, 1/2) layers: u(x) = (3/4) x (1 - x), sampled at the interior nodes.
  Vector ref(c.dim_h0());
  for (Index i = 0; i < c.dim_h0(); ++i) {
    const double x = static_cast<double>(i + 1) / static_cast<double>(s.grid);
    ref(i) = 0.75 * x * (1.0 - x);
  }
  const double ref_norm = ref.norm();

  const CellFunction cell = make_two_phase_cell(1.0, 0.5);
  std::vector<double> errors;
  std::vector<int> tail_indices;
  for (int n : dyadic_indices(s.n_max)) {
    const Operator a = multiplication_operator(*c.geometry(), cell, n);
    const VariationalSolution sol = solve_primal(d, r0, a, f);
    const double rel = (sol.u - ref).norm() / ref_norm;
    add_row(t, n, "rel_l2_error", rel, 0.0);
    if (n >= 8) {
      errors.push_back(rel);
      tail_indices.push_back(n);
    }
  }

  bool monotone = true;
  for (size_t i = 1; i < errors.size(); ++i) monotone = monotone && errors[i] <= errors[i - 1] + 1e-14;
  add_flag(t, 0, "monotone_from_8", monotone);
  t.converged = monotone;
  t.verdict = monotone && !errors.empty() && errors.back() <= s.tol;
  return t;
}

// ---------------------------------------------------------------------------
// hlimit3d: extraction + definition verification + imposter rejection
// ---------------------------------------------------------------------------

ReportTable run_hlimit3d(const ExperimentConfig& cfg) {
  Settings s{cfg.grid ? cfg.grid : 1024, cfg.n_max ? cfg.n_max : 64,
             cfg.probe_k ? cfg.probe_k : 5, cfg.tol != 0.0 ? cfg.tol : kProbeTol,
             cfg.seed ? cfg.seed : 20260819ULL};
  require_range("grid", s.grid, 64, 4096);
  require_range("n_max", s.n_max, 16, 512);
  require_range("probe_k", s.probe_k, 1, 8);
  require_tol(s.tol, 1.0);

  ReportTable t = start_table(ExperimentKind::hlimit3d, s);
  t.config.emplace_back("grid3d", "6");

  // --- 1D instance: genuine two-scale oscillation ---
  const HilbertComplex c1 = build_interval_complex(s.grid, BcTag::Dirichlet);
  const BlockDecomposition d1 = build_decomposition(c1);
  const ReducedOperator r0_1 = reduce(c1.a0());
  const ReducedOperator r1_1 = reduce(Matrix(c1.a1().adjoint()));
  const OperatorSequence seq1 = two_phase_sequence(c1, dyadic_indices(s.n_max));
  const WOTProbe probe1 = default_probe(c1, s.probe_k);

  const HLimitReport rep1 = extract_h_limit(d1, seq1, probe1, s.tol);
  const RangeFunctional f1 = functional_from_raw(r0_1, Vector(Vector::Ones(c1.dim_h0())));
  const RangeFunctional g1 =
      functional_from_range_vector(r1_1, Vector(c1.a1().adjoint() * Vector::Ones(c1.dim_h2())));
  const std::vector<std::pair<RangeFunctional, RangeFunctional>> samples1 = {{f1, g1}};
  const ConvergenceReport good1 =
      verify_h_convergence_definition(d1, r0_1, r1_1, seq1, rep1.reconstructed, samples1, probe1,
                                      s.tol);
  const Operator mean1 = Operator::diagonal(Vector(Vector::Constant(c1.dim_h1(), 0.75)));
  const ConvergenceReport bad1 =
      verify_h_convergence_definition(d1, r0_1, r1_1, seq1, mean1, samples1, probe1, s.tol);

  add_flag(t, s.grid, "oneD.extraction_converged", rep1.converged);
  add_flag(t, s.grid, "oneD.reconstruction_member", rep1.membership.is_member);
  add_flag(t, s.grid, "oneD.verify_accepted", good1.accepted);
  add_flag(t, s.grid, "oneD.imposter_rejected", !bad1.accepted);
  add_info(t, s.grid, "oneD.final_solution_residual", good1.samples[0].u.back());
  add_info(t, s.grid, "oneD.imposter_solution_residual", bad1.samples[0].u.back());

  // --- 3D instance: 6^3 clamped grid, layered two-phase cell ---
  // A 6-cell axis admits no genuine scale separation (indices above 3 alias,
  // and n = 6 degenerates to a constant), so the family is constant in the
  // index and the probe dictionary is complete; extraction then recovers the
  // operator itself and the definition check discriminates against the
  // arithmetic-mean imposter on honest solves.
  const HilbertComplex c3 = build_grid_complex_3d({6, 6, 6}, BcTag::Dirichlet);
  const BlockDecomposition d3 = build_decomposition(c3);
  const ReducedOperator r0_3 = reduce(c3.a0());
  const ReducedOperator r1_3 = reduce(Matrix(c3.a1().adjoint()));
  const Operator fixed =
      multiplication_operator(*c3.geometry(), make_two_phase_cell(1.0, 0.5), 1);
  const OperatorSequence seq3 = make_constant_sequence(fixed, {0.45, 2.2}, {1, 2, 4});
  const WOTProbe probe3 = make_probe(Matrix::Identity(c3.dim_h1(), c3.dim_h1()), 1);

  const HLimitReport rep3 = extract_h_limit(d3, seq3, probe3, s.tol);
  const RangeFunctional f3 = functional_from_raw(r0_3, Vector(Vector::Ones(c3.dim_h0())));
  const RangeFunctional g3 =
      functional_from_range_vector(r1_3, Vector(c3.a1().adjoint() * Vector::Ones(c3.dim_h2())));
  const std::vector<std::pair<RangeFunctional, RangeFunctional>> samples3 = {{f3, g3}};
  const ConvergenceReport good3 =
      verify_h_convergence_definition(d3, r0_3, r1_3, seq3, rep3.reconstructed, samples3, probe3,
                                      s.tol);
  const Operator mean3 = Operator::identity(c3.dim_h1()).scaled(0.75);
  const ConvergenceReport bad3 =
      verify_h_convergence_definition(d3, r0_3, r1_3, seq3, mean3, samples3, probe3, s.tol);

  add_flag(t, 6, "threeD.extraction_converged", rep3.converged);
  add_flag(t, 6, "threeD.reconstruction_member", rep3.membership.is_member);
  add_row(t, 6, "threeD.reconstruction_error",
          max_abs(Matrix(rep3.reconstructed.to_dense() - fixed.to_dense())), 0.0);
  add_flag(t, 6, "threeD.verify_accepted", good3.accepted);
  add_flag(t, 6, "threeD.imposter_rejected", !bad3.accepted);
  add_info(t, 6, "threeD.final_solution_residual", good3.samples[0].u.back());
  add_info(t, 6, "threeD.imposter_solution_residual", bad3.samples[0].u.back());

  t.converged = rep1.converged && rep3.converged;
  t.verdict = rep1.converged && rep1.membership.is_member && good1.accepted && !bad1.accepted &&
              rep3.converged && rep3.membership.is_member && good3.accepted && !bad3.accepted;
  return t;
}

// ---------------------------------------------------------------------------
// bcgap: the limit depends on the attached boundary conditions
// ---------------------------------------------------------------------------

ReportTable run_bcgap(const ExperimentConfig& cfg) {
  Settings s{cfg.grid ? cfg.grid : 6, cfg.n_max ? cfg.n_max : 16,
             cfg.probe_k ? cfg.probe_k : 2, cfg.tol != 0.0 ? cfg.tol : 0.2,
             cfg.seed ? cfg.seed : 20260819ULL};
  require_range("grid", s.grid, 4, 8);
  require_range("n_max", s.n_max, 8, 64);
  require_range("probe_k", s.probe_k, 1, 4);
  require_tol(s.tol, 1.0);

  ReportTable t = start_table(ExperimentKind::bcgap, s);
  const Index edge = static_cast<Index>(s.grid);
  const HilbertComplex cd = build_grid_complex_3d({edge, edge, edge}, BcTag::Dirichlet);
  const HilbertComplex cn = build_grid_complex_3d({edge, edge, edge}, BcTag::Neumann);
  const BlockDecomposition dd = build_decomposition(cd);
  const BlockDecomposition dn = build_decomposition(cn);
  const Matrix v = harmonic_subspace_V(dd, dn);
  const Index m = v.cols();
  add_info(t, 0, "v_dimension", static_cast<double>(m));

  // Low sine modes in the V coordinate: appended to the probes (the finite
  // probe surrogate needs mass inside span(V) to see the patched block) and
  // reused as the readout frame.
  const int n_modes = 3;
  Matrix modes(m, n_modes);
  for (Index i = 0; i < n_modes; ++i) {
    for (Index j = 0; j < m; ++j)
      modes(j, i) =
          std::sin(M_PI * static_cast<double>(i + 1) * (static_cast<double>(j) + 0.5) /
                   static_cast<double>(m));
    modes.col(i) /= modes.col(i).norm();
  }
  const Matrix v_cols = v * modes;
  const auto with_v = [&](const WOTProbe& base) {
    Matrix cols(cd.dim_h1(), base.vectors.cols() + n_modes);
    cols << base.vectors, v_cols;
    return make_probe(cols, base.count_per_subspace);
  };
  const WOTProbe probe_d = with_v(default_probe(cd, s.probe_k));
  const WOTProbe probe_n = with_v(default_probe(cn, s.probe_k));

  // Two-phase pattern in the V coordinate at scale 1/n.
  const auto b_of_n = [m](int n) {
    Vector diag(m);
    for (Index j = 0; j < m; ++j) {
      const double arg = (static_cast<double>(j) + 0.5) / static_cast<double>(m) * n;
      diag(j) = (arg - std::floor(arg)) < 0.5 ? 1.0 : 0.5;
    }
    return Operator::diagonal(diag);
  };
  const OperatorSequence seq =
      make_patched_sequence(v, b_of_n, cd.dim_h1(), {0.45, 2.2}, dyadic_indices(s.n_max));

  const HLimitReport rep_d = extract_h_limit(dd, seq, probe_d, s.tol);
  const HLimitReport rep_n = extract_h_limit(dn, seq, probe_n, s.tol);
  for (size_t i = 0; i < rep_d.cauchy_ls.size(); ++i)
    add_info(t, seq.indices[i + 1], "dirichlet.schur_block_cauchy", rep_d.cauchy_ls[i]);
  for (size_t i = 0; i < rep_n.cauchy_l00.size(); ++i)
    add_info(t, seq.indices[i + 1], "neumann.inverse_block_cauchy", rep_n.cauchy_l00[i]);

  const Matrix block_d = v_cols.adjoint() * rep_d.reconstructed.apply(v_cols);
  const Matrix block_n = v_cols.adjoint() * rep_n.reconstructed.apply(v_cols);
  const double val_d = block_d.real().trace() / static_cast<double>(n_modes);
  const double val_n = block_n.real().trace() / static_cast<double>(n_modes);
  const double gap = val_d - val_n;

  add_flag(t, 0, "dirichlet.extraction_converged", rep_d.converged);
  add_flag(t, 0, "dirichlet.reconstruction_member", rep_d.membership.is_member);
  add_flag(t, 0, "neumann.extraction_converged", rep_n.converged);
  add_flag(t, 0, "neumann.reconstruction_member", rep_n.membership.is_member);
  add_row(t, 0, "dirichlet.v_block", val_d, 0.75);
  add_row(t, 0, "neumann.v_block", val_n, 2.0 / 3.0);
  add_row(t, 0, "v_block_gap", gap, 1.0 / 12.0);

  t.converged = rep_d.converged && rep_n.converged;
  t.verdict = t.converged && rep_d.membership.is_member && rep_n.membership.is_member &&
              std::abs(val_d - 0.75) <= 0.05 && std::abs(val_n - 2.0 / 3.0) <= 0.05 &&
              gap >= 0.05;
  return t;
}

// ---------------------------------------------------------------------------
// conv: convolution sums converge to the convolved flux
// ---------------------------------------------------------------------------

ReportTable run_conv(const ExperimentConfig& cfg) {
  Settings s{cfg.grid ? cfg.grid : 256, cfg.n_max ? cfg.n_max : 16,
             cfg.probe_k ? cfg.probe_k : 5, cfg.tol != 0.0 ? cfg.tol : kProbeTol,
             cfg.seed ? cfg.seed : 20260819ULL};
  require_range("grid", s.grid, 64, 1024);
  require_range("n_max", s.n_max, 8, 128);
  require_range("probe_k", s.probe_k, 2, 8);
  require_tol(s.tol, 1.0);

  ReportTable t = start_table(ExperimentKind::conv, s);
  const HilbertComplex c = build_interval_complex(s.grid, BcTag::Dirichlet);
  const BlockDecomposition d = build_decomposition(c);
  const WOTProbe probe = default_probe(c, s.probe_k);

  const auto kernels = [](int n) {
    ConvolutionSpec spec;
    spec.kernel = [n](double z) {
      return Complex(0.3 * std::exp(-z * z) * (1.0 + 0.5 * std::cos(2 * M_PI * n * z)), 0.0);
    };
    spec.bound_theta = 0.75;
    return spec;
  };
  const OperatorSequence seq = make_convolution_sum_sequence(
      *c.geometry(), make_constant_cell(Matrix::Identity(1, 1)), kernels, {0.3, 5.0},
      dyadic_indices(s.n_max));

  // Fixed probe-span test vector with geometrically decaying coefficients.
  Vector coeffs(probe.vectors.cols());
  for (Index i = 0; i < coeffs.size(); ++i) coeffs(i) = std::pow(2.0, -static_cast<double>(i));
  Vector q = probe.vectors * coeffs;
  q /= q.norm();

  // The oscillating modulation averages out: the limit flux law is the local
  // part plus the plain Gaussian convolution.
  ConvolutionSpec flat;
  flat.kernel = [](double z) { return Complex(0.3 * std::exp(-z * z), 0.0); };
  flat.bound_theta = 0.75;
  const Operator k_inf = convolution_operator(*c.geometry(), flat);
  const Operator with_kernel = Operator::dense(
      Matrix(Matrix::Identity(s.grid, s.grid) + k_inf.to_dense()));
  const Operator local_only = Operator::identity(s.grid);

  const FluxCheckReport ok =
      divcurl_flux_check(d, seq, with_kernel, [&](int) { return q; }, probe, s.tol);
  const FluxCheckReport no =
      divcurl_flux_check(d, seq, local_only, [&](int) { return q; }, probe, s.tol);

  for (size_t i = 0; i < ok.residuals.size(); ++i)
    add_info(t, seq.indices[i], "flux_residual_with_kernel", ok.residuals[i]);
  add_info(t, 0, "flux_residual_extrapolated", ok.extrapolated_residual);
  for (size_t i = 0; i < no.residuals.size(); ++i)
    add_info(t, seq.indices[i], "flux_residual_local_only", no.residuals[i]);
  add_info(t, 0, "local_only_extrapolated_residual", no.extrapolated_residual);
  add_flag(t, 0, "with_kernel_accepted", ok.accepted);
  add_flag(t, 0, "local_only_rejected", !no.accepted);

  t.converged = ok.q_converged && ok.flux_converged;
  t.verdict = ok.accepted && !no.accepted;
  return t;
}

// ---------------------------------------------------------------------------
// maxwell: first-order solves, resolvent convergence, memory kernel
// ---------------------------------------------------------------------------

ReportTable run_maxwell(const ExperimentConfig& cfg) {
  Settings s{cfg.grid ? cfg.grid : 4, cfg.n_max ? cfg.n_max : 32,
             cfg.probe_k ? cfg.probe_k : 5, cfg.tol != 0.0 ? cfg.tol : 0.2,
             cfg.seed ? cfg.seed : 20260819ULL};
  require_range("grid", s.grid, 2, 6);
  require_range("n_max", s.n_max, 16, 64);
  require_range("probe_k", s.probe_k, 2, 8);
  require_tol(s.tol, 1.0);

  ReportTable t = start_table(ExperimentKind::maxwell, s);
  const std::vector<double> lambdas = {1.0, 2.0, 4.0};
  bool ok = true;

  // --- resolvent bound and residual on the composed grid cube ---
  const Index edge = static_cast<Index>(s.grid);
  const HilbertComplex composed = compose_grid_maxwell_complex({edge, edge, edge});
  const GridOperators ops = make_grid_operators({edge, edge, edge});
  const MaxwellOperator op = make_maxwell_operator(composed);
  add_info(t, s.grid, "solve.skew_defect", op.skew_defect);
  ok = ok && op.skew_defect == 0.0;

  const MaterialLaw eddy = make_material_law(
      multiplication_operator(ops.face_geometry, make_two_phase_cell(1.0, 0.0), 1),
      multiplication_operator(ops.face_geometry, make_two_phase_cell(0.0, 1.0), 1),
      Operator::identity(composed.dim_h1() - ops.face_geometry.dim()));
  std::mt19937_64 rng(s.seed);
  const BlockDecomposition dc = build_decomposition(composed);
  for (double lambda : lambdas) {
    double max_rel_residual = 0.0;
    double worst_bound_margin = std::numeric_limits<double>::infinity();
    int bound_violations = 0;
    double coercivity = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const Vector f = random_vector(composed.dim_h1(), rng);
      const MaxwellSolution sol = solve_laplace_domain(op, eddy, lambda, f);
      coercivity = sol.coercivity;
      max_rel_residual = std::max(max_rel_residual, sol.residual / f.norm());
      const double allowed = f.norm() / sol.coercivity;
      worst_bound_margin = std::min(worst_bound_margin, allowed - sol.u.norm());
      if (sol.u.norm() > allowed * (1.0 + 1e-12)) ++bound_violations;
    }
    const int nl = static_cast<int>(lambda);
    add_info(t, nl, "solve.coercivity", coercivity);
    add_row(t, nl, "solve.max_rel_residual", max_rel_residual, 0.0);
    add_row(t, nl, "solve.bound_violations", static_cast<double>(bound_violations), 0.0);
    add_info(t, nl, "solve.worst_bound_margin", worst_bound_margin);
    ok = ok && max_rel_residual <= 1e-10 && bound_violations == 0;

    // Block-reduction route against the direct solve.
    double max_route_diff = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      const Vector f = random_vector(composed.dim_h1(), rng);
      const MaxwellSolution direct = solve_laplace_domain(op, eddy, lambda, f);
      const MaxwellSolution reduced = solve_via_block_reduction(op, eddy, dc, lambda, f);
      max_route_diff = std::max(max_route_diff, (direct.u - reduced.u).norm());
    }
    add_row(t, nl, "solve.reduction_vs_direct", max_route_diff, 0.0);
    ok = ok && max_route_diff <= 1e-10;
  }

  // --- layered eddy-current medium: resolvent convergence to the memory law ---
  const Index n_cells = 256;
  const HilbertComplex interval = build_interval_complex(n_cells, BcTag::Dirichlet);
  const H1Geometry cells = *interval.geometry();
  H1Geometry point;
  point.field_dim = 1;
  point.points.resize(1, 3);
  point.points << 0.5, 0.0, 0.0;
  point.component = {0};
  point.leg = {0};
  const HilbertComplex layered = compose_maxwell_complex(
      Matrix::Zero(1, 0), Matrix::Ones(n_cells, 1), Matrix(interval.a0().adjoint()), cells, point);
  const MaxwellOperator layered_op = make_maxwell_operator(layered);
  const BlockDecomposition layered_d = build_decomposition(layered);

  Matrix probe_cols = Matrix::Zero(layered.dim_h1(), s.probe_k + 1);
  for (int j = 1; j <= s.probe_k; ++j)
    for (Index i = 0; i < n_cells; ++i)
      probe_cols(i, j - 1) = std::sin(M_PI * j * cells.points(i, 0));
  probe_cols(n_cells, s.probe_k) = 1.0;
  const WOTProbe layered_probe = make_probe(probe_cols, s.probe_k);

  const CellFunction eps_cell = make_two_phase_cell(1.0, 0.0);
  const CellFunction sigma_cell = make_two_phase_cell(0.0, 1.0);
  MaterialLawSequence law_seq;
  law_seq.indices = dyadic_from(2, s.n_max);
  law_seq.generator = [&](int n) {
    return make_material_law(multiplication_operator(cells, eps_cell, n),
                             multiplication_operator(cells, sigma_cell, n),
                             Operator::identity(1));
  };
  MaterialLaw limit = make_material_law(Operator::identity(n_cells),
                                        Operator::diagonal(Vector(Vector::Zero(n_cells))),
                                        Operator::identity(1));
  limit.k2_law = [eps_cell, sigma_cell, n_cells](double lambda) {
    return Operator::identity(n_cells).scaled(memory_kernel(eps_cell, sigma_cell, lambda));
  };
  const std::vector<Vector> f_samples = {
      layered_probe.vectors.col(0), layered_probe.vectors.col(2),
      Vector((layered_probe.vectors.col(0) + layered_probe.vectors.col(s.probe_k)) /
             std::sqrt(2.0))};

  const MaxwellConvergenceReport resolvent = resolvent_convergence_experiment(
      layered_op, layered_d, law_seq, limit, lambdas, f_samples, layered_probe, s.tol);
  add_flag(t, 0, "resolvent.accepted", resolvent.accepted);
  ok = ok && resolvent.accepted;
  bool resolvent_converged = true;
  for (const MaxwellLambdaReport& lr : resolvent.per_lambda) {
    const int nl = static_cast<int>(lr.lambda);
    resolvent_converged = resolvent_converged && lr.extraction_converged;
    for (size_t i = 0; i < law_seq.indices.size(); ++i) {
      double max_wot = 0.0, max_strong = 0.0;
      for (const auto& series : lr.wot_errors) max_wot = std::max(max_wot, series[i]);
      for (const auto& series : lr.strong_errors_u0)
        max_strong = std::max(max_strong, series[i]);
      add_info(t, law_seq.indices[i], "resolvent.wot_error.lambda" + std::to_string(nl), max_wot);
      add_info(t, law_seq.indices[i], "resolvent.coexact_error.lambda" + std::to_string(nl),
               max_strong);
    }
    // The acceptance statement pins the decrease on the subrange n <= 16.
    std::vector<double> early;
    for (size_t i = 0; i < law_seq.indices.size(); ++i) {
      if (law_seq.indices[i] > 16) break;
      double max_wot = 0.0;
      for (const auto& series : lr.wot_errors) max_wot = std::max(max_wot, series[i]);
      early.push_back(max_wot);
    }
    const bool decreasing_early = overall_decreasing(early) && early.size() >= 2;
    add_flag(t, nl, "resolvent.wot_decreasing_to_16", decreasing_early);
    ok = ok && decreasing_early && lr.accepted;
  }

  // --- memory kernel: quadrature vs closed form, and vs the extracted limit ---
  for (double lambda : lambdas) {
    const Complex k = memory_kernel(eps_cell, sigma_cell, lambda);
    const double err = std::abs(k - Complex(2.0 / (1.0 + lambda)));
    add_row(t, static_cast<int>(lambda), "memory_kernel.quadrature_error", err, 0.0);
    ok = ok && err <= 1e-8;
  }
  const HilbertComplex extraction_interval = build_interval_complex(512, BcTag::Dirichlet);
  const BlockDecomposition extraction_d = build_decomposition(extraction_interval);
  const WOTProbe extraction_probe = default_probe(extraction_interval, 5);
  bool extraction_converged = true;
  for (double lambda : {2.0, 4.0}) {
    const Complex h = memory_kernel(eps_cell, sigma_cell, lambda);
    const CellFunction mixed = make_two_phase_cell(1.0, 1.0 / lambda);
    OperatorSequence seq = make_oscillating_sequence(
        *extraction_interval.geometry(), mixed, CoefficientBounds{0.9 / lambda, 1.1 * lambda},
        dyadic_indices(32));
    const HLimitReport rep = extract_h_limit(extraction_d, seq, extraction_probe, kProbeTol);
    extraction_converged = extraction_converged && rep.converged;
    const Matrix x = range_space(Matrix(extraction_d.q0().adjoint() * extraction_probe.vectors));
    const Matrix a00 =
        extraction_d.q0().adjoint() * rep.reconstructed.apply(Matrix(extraction_d.q0()));
    const Matrix compressed = x.adjoint() * a00 * x;
    const double rel =
        max_abs(Matrix(compressed - h * Matrix::Identity(x.cols(), x.cols()))) / std::abs(h);
    add_row(t, static_cast<int>(lambda), "memory_kernel.extracted_limit_rel_dist", rel, 0.0);
    ok = ok && rel <= 0.05;
  }

  t.converged = resolvent_converged && extraction_converged;
  t.verdict = ok && t.converged;
  return t;
}

// ---------------------------------------------------------------------------
// divcurl: pairing suites
// ---------------------------------------------------------------------------

ReportTable run_divcurl(const ExperimentConfig& cfg) {
  Settings s{cfg.grid ? cfg.grid : 1024, cfg.n_max ? cfg.n_max : 64,
             cfg.probe_k ? cfg.probe_k : 5, cfg.tol != 0.0 ? cfg.tol : 0.2,
             cfg.seed ? cfg.seed : 20260819ULL};
  require_range("grid", s.grid, 128, 4096);
  require_range("n_max", s.n_max, 16, 256);
  require_range("probe_k", s.probe_k, 2, 8);
  require_tol(s.tol, 1.0);

  ReportTable t = start_table(ExperimentKind::divcurl, s);
  bool ok = true;

  // --- fixed orthogonal pair: every pairing vanishes identically ---
  {
    const HilbertComplex c = build_interval_complex(64, BcTag::Dirichlet);
    const BlockDecomposition d = build_decomposition(c);
    const WOTProbe probe = default_probe(c, 4);
    const Vector q = probe.vectors.col(1);
    const Vector r = c.a1().adjoint() * Vector::Ones(1);
    const DivCurlReport rep = divcurl_pairing(
        c, d, {2, 4, 8}, [&](int) { return q; }, [&](int) { return r; }, probe, 1e-8, true);
    double max_pairing = 0.0;
    for (const Complex& p : rep.pairings) max_pairing = std::max(max_pairing, std::abs(p));
    add_row(t, 0, "orthogonal.max_pairing", max_pairing, 0.0);
    add_row(t, 0, "orthogonal.limit_pairing", std::abs(rep.limit_pairing), 0.0);
    add_flag(t, 0, "orthogonal.accepted", rep.accepted);
    ok = ok && rep.accepted && max_pairing <= 1e-12;
  }

  // --- oscillating solutions: gradient/flux pairing tends to the energy ---
  bool osc_converged = false;
  {
    const HilbertComplex c = build_interval_complex(s.grid, BcTag::Dirichlet);
    const BlockDecomposition d = build_decomposition(c);
    const ReducedOperator r0 = reduce(c.a0());
    const OperatorSequence seq = two_phase_sequence(c, dyadic_indices(s.n_max));
    const WOTProbe probe = default_probe(c, s.probe_k);
    const RangeFunctional f = functional_from_raw(r0, Vector(Vector::Ones(c.dim_h0())));

    std::map<int, std::pair<Vector, Vector>> fields;
    for (int n : seq.indices) {
      const VariationalSolution sol = solve_primal(d, r0, seq.generator(n), f);
      fields[n] = {Vector(c.a0() * sol.u), sol.flux};
    }
    const DivCurlReport rep = divcurl_pairing(
        c, d, seq.indices, [&](int n) { return fields.at(n).first; },
        [&](int n) { return fields.at(n).second; }, probe, s.tol, true);

    const double exact = static_cast<double>(s.grid) / 8.0;
    for (size_t i = 0; i < rep.pairings.size(); ++i)
      add_row(t, seq.indices[i], "oscillating.pairing", rep.pairings[i].real(), exact);
    const double rel_final = std::abs(rep.pairings.back() - exact) / exact;
    const double rel_extrapolated = std::abs(rep.extrapolated_pairing - exact) / exact;
    add_row(t, 0, "oscillating.final_rel_error", rel_final, 0.0);
    add_info(t, 0, "oscillating.extrapolated_rel_error", rel_extrapolated);
    osc_converged = rep.q_converged && rep.r_converged && rep.side_q_ok && rep.side_r_ok;
    add_flag(t, 0, "oscillating.converged", osc_converged);
    ok = ok && osc_converged && rel_final <= 0.05;
  }

  // --- oscillation without compact data: pairing 1/2 against limit 0 ---
  {
    const Index n_cells = static_cast<Index>(s.grid);
    const HilbertComplex c = build_interval_complex(n_cells, BcTag::Dirichlet);
    const BlockDecomposition d = build_decomposition(c);
    const WOTProbe probe = default_probe(c, s.probe_k);
    const auto wave = [&](int n) {
      Vector v(n_cells);
      for (Index i = 0; i < n_cells; ++i) {
        const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(n_cells);
        v(i) = Complex(std::sin(2 * M_PI * n * x) / std::sqrt(static_cast<double>(n_cells)), 0.0);
      }
      return v;
    };
    const DivCurlReport rep =
        divcurl_pairing(c, d, {8, 16, 32, 64}, wave, wave, probe, kProbeTol, true);
    add_row(t, 0, "counterexample.pairing", rep.pairings.back().real(), 0.5);
    add_row(t, 0, "counterexample.limit_pairing", std::abs(rep.limit_pairing), 0.0);
    add_flag(t, 0, "counterexample.rejected", !rep.accepted);
    ok = ok && !rep.accepted && std::abs(rep.pairings.back() - Complex(0.5, 0.0)) <= 1e-9 &&
         std::abs(rep.limit_pairing) <= 1e-6;
  }

  t.converged = osc_converged;
  t.verdict = ok;
  return t;
}

}  // namespace

ReportTable run_experiment(const ExperimentConfig& cfg) {
  if (cfg.grid < 0) throw ConfigError("grid must be nonnegative");
  if (cfg.n_max < 0) throw ConfigError("n_max must be nonnegative");
  if (cfg.probe_k < 0) throw ConfigError("probe_k must be nonnegative");
  if (cfg.tol < 0.0) throw ConfigError("tol must be nonnegative");
  if (cfg.format != "csv" && cfg.format != "json")
    throw ConfigError("format must be 'csv' or 'json', got '" + cfg.format + "'");
  switch (cfg.experiment) {
    case ExperimentKind::verify:
      return run_verify(cfg);
    case ExperimentKind::means1d:
      return run_means1d(cfg);
    case ExperimentKind::homog1d:
      return run_homog1d(cfg);
    case ExperimentKind::hlimit3d:
      return run_hlimit3d(cfg);
    case ExperimentKind::bcgap:
      return run_bcgap(cfg);
    case ExperimentKind::conv:
      return run_conv(cfg);
    case ExperimentKind::maxwell:
      return run_maxwell(cfg);
    case ExperimentKind::divcurl:
      return run_divcurl(cfg);
  }
  throw ConfigError("unknown experiment enumerator");
}

}  // namespace nlhconv
