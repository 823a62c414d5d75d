#pragma once

#include "nlhconv/coefficients.hpp"
#include "nlhconv/complex_core.hpp"
#include "nlhconv/decomposition.hpp"
#include "nlhconv/solvers.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace nlhconv {

// Fixed dictionary of unit test vectors against which weak-operator limits
// are measured.  In finite dimensions weak and norm convergence coincide; the
// two-scale meaning (oscillation index well below the grid resolution) is
// restored by probing only against fixed low-frequency vectors.
struct WOTProbe {
  Matrix vectors;  // dim x m, unit independent columns
  int count_per_subspace = 8;
};

inline constexpr unsigned long long kProbeSeed = 0x5eedULL;

// Validates and normalizes a probe dictionary.
WOTProbe make_probe(Matrix vectors, int count_per_subspace);

// For complexes carrying sample geometry: the k lowest tensor-sine modes per
// (leg, component) family.  For custom complexes: k seeded random unit
// vectors, orthonormalized.
WOTProbe default_probe(const HilbertComplex& c, int k,
                       unsigned long long seed = kProbeSeed);

// One weak-operator limit estimate: probe matrices P(n) = [<A_n phi_j, phi_i>]
// per index, Cauchy increments, convergence verdict over the last three
// indices, and a first-order Richardson extrapolation of the final pair
// lifted back onto the probe span by least squares.
struct WotReport {
  Matrix probe_limit;  // extrapolated probe matrix
  Matrix last_probe;   // raw final iterate
  Matrix lifted;       // least-squares lift of probe_limit to the full space
  std::vector<double> cauchy_residuals;
  bool converged = false;
  double tol = 0.0;
};

WotReport wot_limit(const std::vector<int>& indices, const std::function<Matrix(int)>& family,
                    const WOTProbe& probe, double tol);
WotReport wot_limit(const OperatorSequence& seq, const WOTProbe& probe, double tol);

// The four characterising block quantities observed through the probe, their
// extrapolated limits completed by the identity off the probed subspace, and
// the operator reassembled from them.  The reconstruction satisfies
//   a00 = l00^{-1},  a10 = l10 a00,  a01 = a00 l01,  a11 = ls + l10 a00 l01
// by construction; this is re-verified numerically before returning.
struct HLimitReport {
  Matrix l00;  // limit of a00(n)^{-1} in block coordinates
  Matrix l10;  // limit of a10(n) a00(n)^{-1}
  Matrix l01;  // limit of a00(n)^{-1} a01(n)
  Matrix ls;   // limit of the Schur complement a11 - a10 a00^{-1} a01
  Operator reconstructed;
  std::vector<double> cauchy_l00, cauchy_l10, cauchy_l01, cauchy_ls;
  bool converged = false;
  MembershipReport membership;  // membership of the reconstruction
  double tol = 0.0;
};

HLimitReport extract_h_limit(const BlockDecomposition& d, const OperatorSequence& seq,
                             const WOTProbe& probe, double tol);

// Definition-based verification: solve the primal and dual problems along the
// sequence and test weak convergence of the solutions and both fluxes toward
// the candidate's solutions, sample by sample.
struct SampleResiduals {
  std::vector<double> u;            // probe residuals of A0 u_n
  std::vector<double> v;            // probe residuals of A1* v_n
  std::vector<double> flux_primal;  // probe residuals of a_n A0 u_n
  std::vector<double> flux_dual;    // probe residuals of a_n^{-1} A1* v_n
};

struct ConvergenceReport {
  std::vector<SampleResiduals> samples;
  bool accepted = false;
  double tol = 0.0;
};

ConvergenceReport verify_h_convergence_definition(
    const BlockDecomposition& d, const ReducedOperator& r0, const ReducedOperator& r1,
    const OperatorSequence& seq, const Operator& candidate,
    const std::vector<std::pair<RangeFunctional, RangeFunctional>>& samples,
    const WOTProbe& probe, double tol);

// Pseudometric: sum over the four characterising quantities of the max-entry
// probe distances.  Zero exactly when the quantities agree on the probe.
double h_pseudometric(const BlockDecomposition& d, const Operator& a, const Operator& b,
                      const WOTProbe& probe, const CoefficientBounds& bounds);

// Product of weakly convergent families: reports the pairings <q_n, r_n>
// against the pairing of the estimated weak limits.  The compactness side
// conditions are surrogated by strong Cauchy checks of A1 q_n and A0^H r_n
// plus the caller's declaration.
struct DivCurlReport {
  std::vector<Complex> pairings;
  Complex limit_pairing = 0.0;         // pairing of the lifted weak limits
  Complex extrapolated_pairing = 0.0;  // Richardson limit of the pairing series
  std::vector<double> gaps;            // |pairing(n) - limit_pairing|
  bool q_converged = false;
  bool r_converged = false;
  bool side_q_ok = false;  // A1 q_n strongly Cauchy
  bool side_r_ok = false;  // A0^H r_n strongly Cauchy
  bool declared_compact = false;
  bool accepted = false;
  double tol = 0.0;
};

DivCurlReport divcurl_pairing(const HilbertComplex& c, const BlockDecomposition& d,
                              const std::vector<int>& indices,
                              const std::function<Vector(int)>& q_seq,
                              const std::function<Vector(int)>& r_seq, const WOTProbe& probe,
                              double tol, bool declared_compact);

// Flux test: verifies a_n q_n -> candidate * (weak limit of q_n) against the
// probe.  A finite battery can refute a candidate but never certify one.
struct FluxCheckReport {
  Vector q_limit;  // lifted weak limit estimate of q_n
  std::vector<double> residuals;
  double extrapolated_residual = 0.0;
  bool q_converged = false;
  bool flux_converged = false;
  bool accepted = false;
  double tol = 0.0;
};

FluxCheckReport divcurl_flux_check(const BlockDecomposition& d, const OperatorSequence& seq,
                                   const Operator& candidate,
                                   const std::function<Vector(int)>& q_seq, const WOTProbe& probe,
                                   double tol);

}  // namespace nlhconv
