#include "nlhconv/hconv.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <tuple>

#include "nlhconv/linalg.hpp"

namespace nlhconv {

namespace {

void require_indices(const std::vector<int>& indices) {
  if (indices.size() < 3)
    throw PreconditionError("limit estimation needs at least three indices");
  int prev = 0;
  for (int n : indices) {
    if (n <= prev) throw ConfigError("indices must be positive and increasing");
    prev = n;
  }
}

// Richardson extrapolation of a matrix series sampled at the given indices,
// assuming first-order decay of the error in 1/n.
struct SeriesLimit {
  Matrix limit;
  Matrix last;
  std::vector<double> cauchy;
  bool converged = false;
};

SeriesLimit extrapolate_series(const std::vector<int>& indices,
                               const std::vector<Matrix>& series, double tol) {
  SeriesLimit out;
  const std::size_t count = series.size();
  out.cauchy.reserve(count - 1);
  for (std::size_t i = 1; i < count; ++i)
    out.cauchy.push_back(max_abs(Matrix(series[i] - series[i - 1])));
  out.last = series.back();
  const double n1 = static_cast<double>(indices[count - 2]);
  const double n2 = static_cast<double>(indices[count - 1]);
  out.limit = series[count - 1] +
              (series[count - 1] - series[count - 2]) * (n1 / (n2 - n1));
  // Converged when the entry changes across the last three indices stay
  // within tolerance, measured relative to the magnitude of the series.
  const double scale = std::max(1.0, max_abs(out.last));
  const std::size_t m = out.cauchy.size();
  out.converged =
      out.cauchy[m - 1] <= tol * scale && out.cauchy[m - 2] <= tol * scale;
  return out;
}

Eigen::PartialPivLU<Matrix> checked_lu(const Matrix& m, const char* what) {
  Eigen::PartialPivLU<Matrix> lu(m);
  const RealVector piv = lu.matrixLU().diagonal().cwiseAbs();
  const double largest = std::max(piv.size() ? piv.maxCoeff() : 0.0, 1e-300);
  if (piv.size() == 0 || piv.minCoeff() <= 1e-14 * largest || lu.rcond() <= 1e-14)
    throw SingularError(what);
  return lu;
}

// Least-squares lift: the smallest L with phi^H L phi = p.
Matrix lift_probe_matrix(const Matrix& phi, const Matrix& p) {
  const Matrix gram = phi.adjoint() * phi;
  Eigen::PartialPivLU<Matrix> lu = checked_lu(gram, "probe Gram matrix is singular");
  const Matrix left = lu.solve(p);                        // g^{-1} p
  const Matrix both = lu.solve(left.adjoint()).adjoint();  // g^{-1} p g^{-1}
  return phi * both * phi.adjoint();
}

Vector lift_probe_vector(const Matrix& phi, const Vector& coords) {
  const Matrix gram = phi.adjoint() * phi;
  Eigen::PartialPivLU<Matrix> lu = checked_lu(gram, "probe Gram matrix is singular");
  return phi * lu.solve(coords);
}

// Orthonormal frames for the probe compressed onto the two block summands.
struct ProbeFrames {
  Matrix x;  // r0 x m0
  Matrix z;  // r1 x m1
};

ProbeFrames make_frames(const BlockDecomposition& d, const Matrix& phi) {
  ProbeFrames f;
  f.x = d.r0() > 0 ? range_space(Matrix(d.q0().adjoint() * phi)) : Matrix(d.r0(), 0);
  f.z = d.r1() > 0 ? range_space(Matrix(d.q1().adjoint() * phi)) : Matrix(d.r1(), 0);
  return f;
}

// The four characterising quantities of one coefficient, observed through the
// probe frames: x^H a00^{-1} x, z^H a10 a00^{-1} x, x^H a00^{-1} a01 z and
// z^H (a11 - a10 a00^{-1} a01) z.
struct QuantityProbes {
  Matrix p00, p10, p01, p11;
};

QuantityProbes quantity_probes(const BlockOperator& b, const ProbeFrames& f) {
  QuantityProbes q;
  const Index m0 = f.x.cols();
  const Index m1 = f.z.cols();
  q.p00 = Matrix::Zero(m0, m0);
  q.p10 = Matrix::Zero(m1, m0);
  q.p01 = Matrix::Zero(m0, m1);
  q.p11 = Matrix::Zero(m1, m1);
  if (b.r0() > 0) {
    Eigen::PartialPivLU<Matrix> lu = checked_lu(b.a00, "leading block is singular");
    if (m0 > 0) {
      const Matrix w = lu.solve(f.x);
      q.p00 = f.x.adjoint() * w;
      if (m1 > 0) q.p10 = f.z.adjoint() * (b.a10 * w);
    }
    if (m1 > 0) {
      const Matrix y = lu.solve(Matrix(b.a01 * f.z));
      if (m0 > 0) q.p01 = f.x.adjoint() * y;
      q.p11 = f.z.adjoint() * Matrix(b.a11 * f.z - b.a10 * y);
    }
  } else if (b.r1() > 0 && m1 > 0) {
    q.p11 = f.z.adjoint() * (b.a11 * f.z);
  }
  return q;
}

bool overall_decreasing(const std::vector<double>& series) {
  if (series.empty()) return true;
  return series.back() <= series.front() + 1e-14;
}

}  // namespace

WOTProbe make_probe(Matrix vectors, int count_per_subspace) {
  if (vectors.cols() == 0) throw ConfigError("probe needs at least one vector");
  for (Index j = 0; j < vectors.cols(); ++j) {
    const double norm = vectors.col(j).norm();
    if (norm <= 1e-14) throw DegenerateInputError("probe vector is numerically zero");
    vectors.col(j) /= norm;
  }
  if (svd_rank(vectors) != vectors.cols())
    throw DegenerateInputError("probe vectors are linearly dependent");
  WOTProbe probe;
  probe.vectors = std::move(vectors);
  probe.count_per_subspace = count_per_subspace;
  return probe;
}

WOTProbe default_probe(const HilbertComplex& c, int k, unsigned long long seed) {
  if (k < 1) throw ConfigError("probe size must be at least 1");
  const Index dim = c.dim_h1();
  if (k > dim) throw ConfigError("probe size exceeds the space dimension");

  if (!c.geometry().has_value()) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix raw(dim, k);
    for (Index j = 0; j < k; ++j)
      for (Index i = 0; i < dim; ++i) raw(i, j) = Complex(dist(rng), dist(rng));
    return make_probe(range_space(raw), k);
  }

  const H1Geometry& geom = *c.geometry();
  // Group coordinates into (leg, component) families.
  std::map<std::pair<int, int>, std::vector<Index>> families;
  for (Index i = 0; i < dim; ++i)
    families[{geom.leg[i], geom.component[i]}].push_back(i);

  std::vector<Vector> columns;
  for (const auto& [key, idxs] : families) {
    // Axes along which this family actually varies.
    std::array<bool, 3> varies{false, false, false};
    for (int ax = 0; ax < 3; ++ax) {
      double lo = geom.points(idxs.front(), ax), hi = lo;
      for (Index i : idxs) {
        lo = std::min(lo, geom.points(i, ax));
        hi = std::max(hi, geom.points(i, ax));
      }
      varies[ax] = hi - lo > 1e-12;
    }
    // Tensor-sine modes ordered by frequency shell.
    constexpr int kModeCap = 64;
    std::vector<std::tuple<int, int, int, int>> order;  // (shell, p, q, r)
    std::array<int, 3> caps;
    for (int ax = 0; ax < 3; ++ax) caps[ax] = varies[ax] ? kModeCap : 1;
    for (int p = 1; p <= caps[0]; ++p)
      for (int q = 1; q <= caps[1]; ++q)
        for (int r = 1; r <= caps[2]; ++r) order.emplace_back(p * p + q * q + r * r, p, q, r);
    std::sort(order.begin(), order.end());

    int kept = 0;
    for (const auto& [shell, p, q, r] : order) {
      if (kept == k) break;
      Vector col = Vector::Zero(dim);
      for (Index i : idxs) {
        double value = 1.0;
        if (varies[0]) value *= std::sin(M_PI * p * geom.points(i, 0));
        if (varies[1]) value *= std::sin(M_PI * q * geom.points(i, 1));
        if (varies[2]) value *= std::sin(M_PI * r * geom.points(i, 2));
        col(i) = Complex(value, 0.0);
      }
      const double norm = col.norm();
      if (norm <= 1e-12 * std::sqrt(static_cast<double>(idxs.size()))) continue;
      columns.push_back(col / norm);
      ++kept;
    }
    if (kept < k)
      throw ConfigError("probe size exceeds the resolvable modes of this grid family");
  }

  if (static_cast<Index>(columns.size()) > dim)
    throw ConfigError("probe size exceeds the space dimension");
  Matrix phi(dim, static_cast<Index>(columns.size()));
  for (Index j = 0; j < phi.cols(); ++j) phi.col(j) = columns[j];
  return make_probe(std::move(phi), k);
}

WotReport wot_limit(const std::vector<int>& indices, const std::function<Matrix(int)>& family,
                    const WOTProbe& probe, double tol) {
  require_indices(indices);
  if (!family) throw ConfigError("empty operator family");
  const Matrix& phi = probe.vectors;
  std::vector<Matrix> series;
  series.reserve(indices.size());
  for (int n : indices) {
    const Matrix a = family(n);
    if (a.rows() != phi.rows() || a.cols() != phi.rows())
      throw DimensionError("family member does not act on the probe space");
    series.push_back(phi.adjoint() * (a * phi));
  }
  const SeriesLimit est = extrapolate_series(indices, series, tol);
  WotReport report;
  report.probe_limit = est.limit;
  report.last_probe = est.last;
  report.lifted = lift_probe_matrix(phi, est.limit);
  report.cauchy_residuals = est.cauchy;
  report.converged = est.converged;
  report.tol = tol;
  return report;
}

WotReport wot_limit(const OperatorSequence& seq, const WOTProbe& probe, double tol) {
  return wot_limit(
      seq.indices, [&seq](int n) { return seq.generator(n).to_dense(); }, probe, tol);
}

HLimitReport extract_h_limit(const BlockDecomposition& d, const OperatorSequence& seq,
                             const WOTProbe& probe, double tol) {
  require_indices(seq.indices);
  if (probe.vectors.rows() != d.dim())
    throw DimensionError("probe does not live on the decomposed space");
  if (!sequence_spot_check(seq, d))
    throw PreconditionError("sequence fails its membership spot-check");

  const ProbeFrames frames = make_frames(d, probe.vectors);
  std::vector<Matrix> s00, s10, s01, s11;
  for (int n : seq.indices) {
    const BlockOperator b = block_representation(d, seq.generator(n));
    const QuantityProbes q = quantity_probes(b, frames);
    s00.push_back(q.p00);
    s10.push_back(q.p10);
    s01.push_back(q.p01);
    s11.push_back(q.p11);
  }

  const SeriesLimit e00 = extrapolate_series(seq.indices, s00, tol);
  const SeriesLimit e10 = extrapolate_series(seq.indices, s10, tol);
  const SeriesLimit e01 = extrapolate_series(seq.indices, s01, tol);
  const SeriesLimit e11 = extrapolate_series(seq.indices, s11, tol);

  const Index r0 = d.r0();
  const Index r1 = d.r1();
  HLimitReport report;
  report.cauchy_l00 = e00.cauchy;
  report.cauchy_l10 = e10.cauchy;
  report.cauchy_l01 = e01.cauchy;
  report.cauchy_ls = e11.cauchy;
  report.converged = e00.converged && e10.converged && e01.converged && e11.converged;
  report.tol = tol;

  // Complete the probe limits by the identity (for the diagonal quantities)
  // or zero (for the mixed ones) on the unprobed directions.
  const Matrix& x = frames.x;
  const Matrix& z = frames.z;
  report.l00 = Matrix::Identity(r0, r0);
  if (x.cols() > 0)
    report.l00 += x * (e00.limit - Matrix::Identity(x.cols(), x.cols())) * x.adjoint();
  report.ls = Matrix::Identity(r1, r1);
  if (z.cols() > 0)
    report.ls += z * (e11.limit - Matrix::Identity(z.cols(), z.cols())) * z.adjoint();
  report.l10 = Matrix::Zero(r1, r0);
  report.l01 = Matrix::Zero(r0, r1);
  if (x.cols() > 0 && z.cols() > 0) {
    report.l10 = z * e10.limit * x.adjoint();
    report.l01 = x * e01.limit * z.adjoint();
  }

  // Invert the block algebra: the reconstruction satisfies the four limit
  // identities by construction.
  BlockOperator blocks;
  blocks.a00 = Matrix::Zero(r0, r0);
  blocks.a01 = Matrix::Zero(r0, r1);
  blocks.a10 = Matrix::Zero(r1, r0);
  blocks.a11 = Matrix::Zero(r1, r1);
  if (r0 > 0) {
    Eigen::PartialPivLU<Matrix> lu = checked_lu(report.l00, "limit of a00^{-1} is singular");
    blocks.a00 = lu.solve(Matrix::Identity(r0, r0));
    blocks.a10 = report.l10 * blocks.a00;
    blocks.a01 = blocks.a00 * report.l01;
    blocks.a11 = report.ls + report.l10 * blocks.a00 * report.l01;
  } else {
    blocks.a11 = report.ls;
  }
  report.reconstructed = assemble_from_blocks(d, blocks);

  // Internal re-verification of the reconstruction algebra.
  if (r0 > 0) {
    Eigen::PartialPivLU<Matrix> lu = checked_lu(blocks.a00, "reconstructed a00 is singular");
    const Matrix inv00 = lu.solve(Matrix::Identity(r0, r0));
    const double scale = std::max(1.0, max_abs(report.l00));
    if (max_abs(Matrix(inv00 - report.l00)) > 1e-12 * scale * std::max<double>(10, r0))
      throw Error("internal: reconstruction violates the a00 limit identity");
    if (max_abs(Matrix(blocks.a10 - report.l10 * blocks.a00)) > 1e-12 ||
        max_abs(Matrix(blocks.a01 - blocks.a00 * report.l01)) > 1e-12 ||
        max_abs(Matrix(blocks.a11 - report.ls - report.l10 * blocks.a00 * report.l01)) > 1e-12)
      throw Error("internal: reconstruction violates the block limit identities");
  }

  report.membership = check_membership(d, report.reconstructed, seq.bounds);
  return report;
}

ConvergenceReport verify_h_convergence_definition(
    const BlockDecomposition& d, const ReducedOperator& r0, const ReducedOperator& r1,
    const OperatorSequence& seq, const Operator& candidate,
    const std::vector<std::pair<RangeFunctional, RangeFunctional>>& samples,
    const WOTProbe& probe, double tol) {
  require_indices(seq.indices);
  if (samples.empty()) throw PreconditionError("need at least one sample pair");
  if (probe.vectors.rows() != d.dim())
    throw DimensionError("probe does not live on the decomposed space");

  const Matrix& phi = probe.vectors;
  auto range_vector = [](const ReducedOperator& r, const Vector& u) {
    return Vector(r.basis_ran() * (r.matrix() * (r.basis_dom().adjoint() * u)));
  };

  ConvergenceReport report;
  report.tol = tol;
  bool accepted = true;
  for (const auto& [f, g] : samples) {
    const VariationalSolution u_star = solve_primal(d, r0, candidate, f);
    const VariationalSolution v_star = solve_dual(d, r1, candidate, g);
    const Vector grad_star = range_vector(r0, u_star.u);
    const Vector curl_star = range_vector(r1, v_star.u);

    SampleResiduals res;
    for (int n : seq.indices) {
      const Operator a_n = seq.generator(n);
      const VariationalSolution u_n = solve_primal(d, r0, a_n, f);
      const VariationalSolution v_n = solve_dual(d, r1, a_n, g);
      res.u.push_back(max_abs(Matrix(phi.adjoint() * (range_vector(r0, u_n.u) - grad_star))));
      res.v.push_back(max_abs(Matrix(phi.adjoint() * (range_vector(r1, v_n.u) - curl_star))));
      res.flux_primal.push_back(max_abs(Matrix(phi.adjoint() * (u_n.flux - u_star.flux))));
      res.flux_dual.push_back(max_abs(Matrix(phi.adjoint() * (v_n.flux - v_star.flux))));
    }
    const double scale_u = std::max(1.0, max_abs(Matrix(phi.adjoint() * grad_star)));
    const double scale_v = std::max(1.0, max_abs(Matrix(phi.adjoint() * curl_star)));
    const double scale_fp = std::max(1.0, max_abs(Matrix(phi.adjoint() * u_star.flux)));
    const double scale_fd = std::max(1.0, max_abs(Matrix(phi.adjoint() * v_star.flux)));
    accepted = accepted && overall_decreasing(res.u) && res.u.back() <= tol * scale_u;
    accepted = accepted && overall_decreasing(res.v) && res.v.back() <= tol * scale_v;
    accepted =
        accepted && overall_decreasing(res.flux_primal) && res.flux_primal.back() <= tol * scale_fp;
    accepted =
        accepted && overall_decreasing(res.flux_dual) && res.flux_dual.back() <= tol * scale_fd;
    report.samples.push_back(std::move(res));
  }
  report.accepted = accepted;
  return report;
}

double h_pseudometric(const BlockDecomposition& d, const Operator& a, const Operator& b,
                      const WOTProbe& probe, const CoefficientBounds& bounds) {
  if (probe.vectors.rows() != d.dim())
    throw DimensionError("probe does not live on the decomposed space");
  if (!check_membership(d, a, bounds).is_member || !check_membership(d, b, bounds).is_member)
    throw PreconditionError("pseudometric arguments must satisfy the membership bounds");
  const ProbeFrames frames = make_frames(d, probe.vectors);
  const QuantityProbes qa = quantity_probes(block_representation(d, a), frames);
  const QuantityProbes qb = quantity_probes(block_representation(d, b), frames);
  return max_abs(Matrix(qa.p00 - qb.p00)) + max_abs(Matrix(qa.p10 - qb.p10)) +
         max_abs(Matrix(qa.p01 - qb.p01)) + max_abs(Matrix(qa.p11 - qb.p11));
}

DivCurlReport divcurl_pairing(const HilbertComplex& c, const BlockDecomposition& d,
                              const std::vector<int>& indices,
                              const std::function<Vector(int)>& q_seq,
                              const std::function<Vector(int)>& r_seq, const WOTProbe& probe,
                              double tol, bool declared_compact) {
  require_indices(indices);
  if (!q_seq || !r_seq) throw ConfigError("empty vector family");
  if (probe.vectors.rows() != d.dim())
    throw DimensionError("probe does not live on the decomposed space");

  const Matrix& phi = probe.vectors;
  DivCurlReport report;
  report.tol = tol;
  report.declared_compact = declared_compact;

  std::vector<Matrix> q_coords, r_coords, side_q, side_r, pairing_series;
  for (int n : indices) {
    const Vector q = q_seq(n);
    const Vector r = r_seq(n);
    if (q.size() != d.dim() || r.size() != d.dim())
      throw DimensionError("family vectors do not live on the decomposed space");
    report.pairings.push_back(inner(q, r));
    q_coords.push_back(phi.adjoint() * q);
    r_coords.push_back(phi.adjoint() * r);
    side_q.push_back(c.a1() * q);
    side_r.push_back(c.a0().adjoint() * r);
    pairing_series.push_back((Matrix(1, 1) << report.pairings.back()).finished());
  }

  const SeriesLimit eq = extrapolate_series(indices, q_coords, tol);
  const SeriesLimit er = extrapolate_series(indices, r_coords, tol);
  report.q_converged = eq.converged;
  report.r_converged = er.converged;

  const Vector q_limit = lift_probe_vector(phi, Vector(eq.limit));
  const Vector r_limit = lift_probe_vector(phi, Vector(er.limit));
  report.limit_pairing = inner(q_limit, r_limit);
  report.extrapolated_pairing = extrapolate_series(indices, pairing_series, tol).limit(0, 0);

  for (const Complex& p : report.pairings) report.gaps.push_back(std::abs(p - report.limit_pairing));

  // Strong Cauchy surrogate for the compactness side conditions: the final
  // increment must be small relative to the magnitude of the data series.
  auto strong_ok = [&](const std::vector<Matrix>& side) {
    std::vector<double> diffs;
    double scale = 1.0;
    for (const Matrix& s : side) scale = std::max(scale, max_abs(s));
    for (std::size_t i = 0; i + 1 < side.size(); ++i)
      diffs.push_back(max_abs(Matrix(side[i + 1] - side[i])));
    return diffs.back() <= tol * scale;
  };
  report.side_q_ok = strong_ok(side_q);
  report.side_r_ok = strong_ok(side_r);

  const double gap_scale = std::max(1.0, std::abs(report.limit_pairing));
  report.accepted = declared_compact && report.q_converged && report.r_converged &&
                    report.side_q_ok && report.side_r_ok && overall_decreasing(report.gaps) &&
                    report.gaps.back() <= tol * gap_scale;
  return report;
}

FluxCheckReport divcurl_flux_check(const BlockDecomposition& d, const OperatorSequence& seq,
                                   const Operator& candidate,
                                   const std::function<Vector(int)>& q_seq, const WOTProbe& probe,
                                   double tol) {
  require_indices(seq.indices);
  if (!q_seq) throw ConfigError("empty vector family");
  if (probe.vectors.rows() != d.dim())
    throw DimensionError("probe does not live on the decomposed space");
  if (!sequence_spot_check(seq, d))
    throw PreconditionError("sequence fails its membership spot-check");

  const Matrix& phi = probe.vectors;
  std::vector<Matrix> q_coords, w_coords;
  for (int n : seq.indices) {
    const Vector q = q_seq(n);
    if (q.size() != d.dim())
      throw DimensionError("family vectors do not live on the decomposed space");
    q_coords.push_back(phi.adjoint() * q);
    w_coords.push_back(phi.adjoint() * seq.generator(n).apply(q));
  }
  const SeriesLimit eq = extrapolate_series(seq.indices, q_coords, tol);
  const SeriesLimit ew = extrapolate_series(seq.indices, w_coords, tol);

  FluxCheckReport report;
  report.tol = tol;
  report.q_converged = eq.converged;
  report.flux_converged = ew.converged;
  report.q_limit = lift_probe_vector(phi, Vector(eq.limit));
  const Vector target = phi.adjoint() * candidate.apply(report.q_limit);
  for (const Matrix& cw : w_coords) report.residuals.push_back(max_abs(Matrix(cw - target)));
  report.extrapolated_residual = max_abs(Matrix(Matrix(ew.limit) - Matrix(target)));
  const double scale = std::max(1.0, max_abs(Matrix(target)));
  report.accepted = report.q_converged && report.flux_converged &&
                    overall_decreasing(report.residuals) &&
                    report.extrapolated_residual <= tol * scale;
  return report;
}

}  // namespace nlhconv
