#pragma once

#include "nlhconv/reporting.hpp"

namespace nlhconv {

// Execute one named experiment with the given configuration and return its
// table.  Deterministic: equal configs produce equal tables (all randomness
// is seeded from cfg.seed, and the seed is recorded in the table).  Invalid
// settings throw ConfigError before any work starts.
//
// Experiments and their defaults (0 = default applies):
//   verify    block algebra suites on n_max=100 random operators at tol=1e-10
//             plus the complex-constructor suite up to a grid=8 cube
//   means1d   two-phase weak limits on grid=1024 cells, probe_k=5, n_max=64;
//             verdict: limit within 0.05 of 0.75 and inverse within 0.10 of 1.5
//   homog1d   primal solutions vs the closed-form effective solution on
//             grid=1024 cells; verdict: rel. L2 <= tol=0.02 at n_max=64,
//             nonincreasing from n=8
//   hlimit3d  limit extraction + definition verification + imposter rejection
//             on grid=1024 cells (1D) and on the 6^3 clamped grid (3D)
//   bcgap     patched sequences on the 6^3 grid: clamped-complex V-block vs
//             0.75, free-complex V-block vs 2/3, gap >= 0.05
//   conv      convolution-sum flux checks on grid=256 cells, n_max=16
//   maxwell   first-order solves on the composed grid=4 cube, the layered
//             resolvent convergence run, and the memory-kernel quadrature
//   divcurl   pairing suites: orthogonal (exact), oscillating solutions on
//             grid=1024 cells at n_max=64 (5%), and the non-compact
//             counterexample (pairing 1/2 vs limit 0, negative verdict)
ReportTable run_experiment(const ExperimentConfig& cfg);

}  // namespace nlhconv
