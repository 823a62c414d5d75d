#include "nlhconv/complex_core.hpp"

#include "nlhconv/linalg.hpp"

#include <algorithm>

namespace nlhconv {

std::string to_string(BcTag tag) {
  switch (tag) {
    case BcTag::Trivial: return "trivial";
    case BcTag::Dirichlet: return "dirichlet";
    case BcTag::Neumann: return "neumann";
    case BcTag::Composed: return "composed";
    case BcTag::Custom: return "custom";
  }
  return "custom";
}

BcTag bc_tag_from_string(const std::string& s) {
  if (s == "trivial") return BcTag::Trivial;
  if (s == "dirichlet") return BcTag::Dirichlet;
  if (s == "neumann") return BcTag::Neumann;
  if (s == "composed") return BcTag::Composed;
  if (s == "custom") return BcTag::Custom;
  throw ConfigError("unknown boundary tag: " + s);
}

HilbertComplex::HilbertComplex(std::string name, BcTag bc, Matrix a0, Matrix a1,
                               std::optional<H1Geometry> geometry)
    : name_(std::move(name)), bc_(bc), a0_(std::move(a0)), a1_(std::move(a1)),
      geometry_(std::move(geometry)) {
  if (a1_.cols() != a0_.rows())
    throw DimensionError("complex chain mismatch: A1 columns != A0 rows");
  if (geometry_ && geometry_->dim() != a0_.rows())
    throw DimensionError("H1 geometry size does not match dim H1");
}

HilbertComplex build_trivial_complex(Index dim) {
  if (dim < 0) throw DimensionError("negative dimension");
  H1Geometry geom;
  geom.field_dim = 1;
  geom.points.resize(dim, 3);
  geom.component.assign(static_cast<size_t>(dim), 0);
  geom.leg.assign(static_cast<size_t>(dim), 0);
  for (Index i = 0; i < dim; ++i)
    geom.points.row(i) << (i + 0.5) / static_cast<double>(std::max<Index>(dim, 1)), 0.0, 0.0;
  return HilbertComplex("trivial", BcTag::Trivial, Matrix(dim, 0),
                        Matrix::Identity(dim, dim), std::move(geom));
}

HilbertComplex build_interval_complex(Index cells, BcTag bc) {
  if (cells < 1) throw DimensionError("interval complex needs at least one cell");
  if (bc != BcTag::Dirichlet && bc != BcTag::Neumann)
    throw ConfigError("interval complex supports dirichlet or neumann tags");
  const double h = 1.0 / static_cast<double>(cells);
  const double invh = static_cast<double>(cells);

  H1Geometry geom;
  geom.field_dim = 1;
  geom.points.resize(cells, 3);
  geom.component.assign(static_cast<size_t>(cells), 0);
  geom.leg.assign(static_cast<size_t>(cells), 0);
  for (Index i = 0; i < cells; ++i) geom.points.row(i) << (i + 0.5) * h, 0.0, 0.0;

  if (bc == BcTag::Dirichlet) {
    // Cell value i is the scaled difference of the neighbouring interior nodes;
    // boundary nodes carry the value 0.
    Matrix a0 = Matrix::Zero(cells, cells - 1);
    for (Index k = 1; k < cells; ++k) {
      a0(k - 1, k - 1) += invh;
      a0(k, k - 1) -= invh;
    }
    Matrix a1(1, cells);
    a1.setConstant(Complex(h, 0.0));
    return HilbertComplex("interval_dirichlet", BcTag::Dirichlet, std::move(a0), std::move(a1),
                          std::move(geom));
  }
  Matrix a0 = Matrix::Zero(cells, cells + 1);
  for (Index i = 0; i < cells; ++i) {
    a0(i, i + 1) += invh;
    a0(i, i) -= invh;
  }
  Matrix a1(0, cells);
  return HilbertComplex("interval_neumann", BcTag::Neumann, std::move(a0), std::move(a1),
                        std::move(geom));
}

namespace {

struct GridIndexer {
  Index nx, ny, nz;

  Index n_nodes() const { return (nx + 1) * (ny + 1) * (nz + 1); }
  Index node(Index i, Index j, Index k) const { return i + (nx + 1) * (j + (ny + 1) * k); }
  bool node_on_boundary(Index i, Index j, Index k) const {
    return i == 0 || i == nx || j == 0 || j == ny || k == 0 || k == nz;
  }

  Index n_edges_x() const { return nx * (ny + 1) * (nz + 1); }
  Index n_edges_y() const { return (nx + 1) * ny * (nz + 1); }
  Index n_edges_z() const { return (nx + 1) * (ny + 1) * nz; }
  Index n_edges() const { return n_edges_x() + n_edges_y() + n_edges_z(); }
  Index edge_x(Index i, Index j, Index k) const { return i + nx * (j + (ny + 1) * k); }
  Index edge_y(Index i, Index j, Index k) const {
    return n_edges_x() + i + (nx + 1) * (j + ny * k);
  }
  Index edge_z(Index i, Index j, Index k) const {
    return n_edges_x() + n_edges_y() + i + (nx + 1) * (j + (ny + 1) * k);
  }
  bool edge_x_on_boundary(Index, Index j, Index k) const {
    return j == 0 || j == ny || k == 0 || k == nz;
  }
  bool edge_y_on_boundary(Index i, Index, Index k) const {
    return i == 0 || i == nx || k == 0 || k == nz;
  }
  bool edge_z_on_boundary(Index i, Index j, Index) const {
    return i == 0 || i == nx || j == 0 || j == ny;
  }

  Index n_faces_x() const { return (nx + 1) * ny * nz; }
  Index n_faces_y() const { return nx * (ny + 1) * nz; }
  Index n_faces_z() const { return nx * ny * (nz + 1); }
  Index n_faces() const { return n_faces_x() + n_faces_y() + n_faces_z(); }
  Index face_x(Index i, Index j, Index k) const { return i + (nx + 1) * (j + ny * k); }
  Index face_y(Index i, Index j, Index k) const {
    return n_faces_x() + i + nx * (j + (ny + 1) * k);
  }
  Index face_z(Index i, Index j, Index k) const {
    return n_faces_x() + n_faces_y() + i + nx * (j + ny * k);
  }

  Index n_cells() const { return nx * ny * nz; }
  Index cell(Index i, Index j, Index k) const { return i + nx * (j + ny * k); }
};

H1Geometry edge_geometry(const GridIndexer& g) {
  H1Geometry geom;
  geom.field_dim = 3;
  geom.points.resize(g.n_edges(), 3);
  geom.component.resize(static_cast<size_t>(g.n_edges()));
  geom.leg.assign(static_cast<size_t>(g.n_edges()), 0);
  const double hx = 1.0 / static_cast<double>(g.nx);
  const double hy = 1.0 / static_cast<double>(g.ny);
  const double hz = 1.0 / static_cast<double>(g.nz);
  for (Index k = 0; k <= g.nz; ++k)
    for (Index j = 0; j <= g.ny; ++j)
      for (Index i = 0; i < g.nx; ++i) {
        const Index e = g.edge_x(i, j, k);
        geom.points.row(e) << (i + 0.5) * hx, j * hy, k * hz;
        geom.component[static_cast<size_t>(e)] = 0;
      }
  for (Index k = 0; k <= g.nz; ++k)
    for (Index j = 0; j < g.ny; ++j)
      for (Index i = 0; i <= g.nx; ++i) {
        const Index e = g.edge_y(i, j, k);
        geom.points.row(e) << i * hx, (j + 0.5) * hy, k * hz;
        geom.component[static_cast<size_t>(e)] = 1;
      }
  for (Index k = 0; k < g.nz; ++k)
    for (Index j = 0; j <= g.ny; ++j)
      for (Index i = 0; i <= g.nx; ++i) {
        const Index e = g.edge_z(i, j, k);
        geom.points.row(e) << i * hx, j * hy, (k + 0.5) * hz;
        geom.component[static_cast<size_t>(e)] = 2;
      }
  return geom;
}

H1Geometry face_geometry(const GridIndexer& g) {
  H1Geometry geom;
  geom.field_dim = 3;
  geom.points.resize(g.n_faces(), 3);
  geom.component.resize(static_cast<size_t>(g.n_faces()));
  geom.leg.assign(static_cast<size_t>(g.n_faces()), 0);
  const double hx = 1.0 / static_cast<double>(g.nx);
  const double hy = 1.0 / static_cast<double>(g.ny);
  const double hz = 1.0 / static_cast<double>(g.nz);
  for (Index k = 0; k < g.nz; ++k)
    for (Index j = 0; j < g.ny; ++j)
      for (Index i = 0; i <= g.nx; ++i) {
        const Index f = g.face_x(i, j, k);
        geom.points.row(f) << i * hx, (j + 0.5) * hy, (k + 0.5) * hz;
        geom.component[static_cast<size_t>(f)] = 0;
      }
  for (Index k = 0; k < g.nz; ++k)
    for (Index j = 0; j <= g.ny; ++j)
      for (Index i = 0; i < g.nx; ++i) {
        const Index f = g.face_y(i, j, k);
        geom.points.row(f) << (i + 0.5) * hx, j * hy, (k + 0.5) * hz;
        geom.component[static_cast<size_t>(f)] = 1;
      }
  for (Index k = 0; k <= g.nz; ++k)
    for (Index j = 0; j < g.ny; ++j)
      for (Index i = 0; i < g.nx; ++i) {
        const Index f = g.face_z(i, j, k);
        geom.points.row(f) << (i + 0.5) * hx, (j + 0.5) * hy, k * hz;
        geom.component[static_cast<size_t>(f)] = 2;
      }
  return geom;
}

Matrix grid_gradient(const GridIndexer& g) {
  Matrix a = Matrix::Zero(g.n_edges(), g.n_nodes());
  const double cx = static_cast<double>(g.nx);
  const double cy = static_cast<double>(g.ny);
  const double cz = static_cast<double>(g.nz);
  for (Index k = 0; k <= g.nz; ++k)
    for (Index j = 0; j <= g.ny; ++j)
      for (Index i = 0; i < g.nx; ++i) {
        const Index e = g.edge_x(i, j, k);
        a(e, g.node(i + 1, j, k)) += cx;
        a(e, g.node(i, j, k)) -= cx;
      }
  for (Index k = 0; k <= g.nz; ++k)
    for (Index j = 0; j < g.ny; ++j)
      for (Index i = 0; i <= g.nx; ++i) {
        const Index e = g.edge_y(i, j, k);
        a(e, g.node(i, j + 1, k)) += cy;
        a(e, g.node(i, j, k)) -= cy;
      }
  for (Index k = 0; k < g.nz; ++k)
    for (Index j = 0; j <= g.ny; ++j)
      for (Index i = 0; i <= g.nx; ++i) {
        const Index e = g.edge_z(i, j, k);
        a(e, g.node(i, j, k + 1)) += cz;
        a(e, g.node(i, j, k)) -= cz;
      }
  return a;
}

Matrix grid_curl(const GridIndexer& g) {
  Matrix a = Matrix::Zero(g.n_faces(), g.n_edges());
  const double cx = static_cast<double>(g.nx);
  const double cy = static_cast<double>(g.ny);
  const double cz = static_cast<double>(g.nz);
  for (Index k = 0; k < g.nz; ++k)
    for (Index j = 0; j < g.ny; ++j)
      for (Index i = 0; i <= g.nx; ++i) {
        const Index f = g.face_x(i, j, k);
        a(f, g.edge_z(i, j + 1, k)) += cy;
        a(f, g.edge_z(i, j, k)) -= cy;
        a(f, g.edge_y(i, j, k + 1)) -= cz;
        a(f, g.edge_y(i, j, k)) += cz;
      }
  for (Index k = 0; k < g.nz; ++k)
    for (Index j = 0; j <= g.ny; ++j)
      for (Index i = 0; i < g.nx; ++i) {
        const Index f = g.face_y(i, j, k);
        a(f, g.edge_x(i, j, k + 1)) += cz;
        a(f, g.edge_x(i, j, k)) -= cz;
        a(f, g.edge_z(i + 1, j, k)) -= cx;
        a(f, g.edge_z(i, j, k)) += cx;
      }
  for (Index k = 0; k <= g.nz; ++k)
    for (Index j = 0; j < g.ny; ++j)
      for (Index i = 0; i < g.nx; ++i) {
        const Index f = g.face_z(i, j, k);
        a(f, g.edge_y(i + 1, j, k)) += cx;
        a(f, g.edge_y(i, j, k)) -= cx;
        a(f, g.edge_x(i, j + 1, k)) -= cy;
        a(f, g.edge_x(i, j, k)) += cy;
      }
  return a;
}

Matrix grid_divergence(const GridIndexer& g) {
  Matrix a = Matrix::Zero(g.n_cells(), g.n_faces());
  const double cx = static_cast<double>(g.nx);
  const double cy = static_cast<double>(g.ny);
  const double cz = static_cast<double>(g.nz);
  for (Index k = 0; k < g.nz; ++k)
    for (Index j = 0; j < g.ny; ++j)
      for (Index i = 0; i < g.nx; ++i) {
        const Index c = g.cell(i, j, k);
        a(c, g.face_x(i + 1, j, k)) += cx;
        a(c, g.face_x(i, j, k)) -= cx;
        a(c, g.face_y(i, j + 1, k)) += cy;
        a(c, g.face_y(i, j, k)) -= cy;
        a(c, g.face_z(i, j, k + 1)) += cz;
        a(c, g.face_z(i, j, k)) -= cz;
      }
  return a;
}

void check_grid_dims(std::array<Index, 3> cells) {
  for (Index n : cells)
    if (n < 2) throw DimensionError("grid complex needs at least 2 cells per direction");
}

}  // namespace

GridOperators make_grid_operators(std::array<Index, 3> cells) {
  check_grid_dims(cells);
  GridIndexer g{cells[0], cells[1], cells[2]};
  GridOperators ops;
  ops.cells = cells;
  ops.grad = grid_gradient(g);
  ops.curl = grid_curl(g);
  ops.div = grid_divergence(g);
  ops.edge_geometry = edge_geometry(g);
  ops.face_geometry = face_geometry(g);
  return ops;
}

HilbertComplex build_grid_complex_3d(std::array<Index, 3> cells, BcTag bc) {
  check_grid_dims(cells);
  if (bc != BcTag::Dirichlet && bc != BcTag::Neumann)
    throw ConfigError("grid complex supports dirichlet or neumann tags");
  GridIndexer g{cells[0], cells[1], cells[2]};
  Matrix grad = grid_gradient(g);
  Matrix curl = grid_curl(g);
  H1Geometry geom = edge_geometry(g);

  if (bc == BcTag::Neumann) {
    return HilbertComplex("grid_neumann", BcTag::Neumann, std::move(grad), std::move(curl),
                          std::move(geom));
  }

  // Interior-node columns of the gradient.
  std::vector<Index> interior_nodes;
  for (Index k = 0; k <= g.nz; ++k)
    for (Index j = 0; j <= g.ny; ++j)
      for (Index i = 0; i <= g.nx; ++i)
        if (!g.node_on_boundary(i, j, k)) interior_nodes.push_back(g.node(i, j, k));
  Matrix a0(g.n_edges(), static_cast<Index>(interior_nodes.size()));
  for (Index c = 0; c < a0.cols(); ++c) a0.col(c) = grad.col(interior_nodes[static_cast<size_t>(c)]);

  // Interior-face rows of the curl.
  std::vector<Index> interior_faces;
  for (Index k = 0; k < g.nz; ++k)
    for (Index j = 0; j < g.ny; ++j)
      for (Index i = 1; i < g.nx; ++i) interior_faces.push_back(g.face_x(i, j, k));
  for (Index k = 0; k < g.nz; ++k)
    for (Index j = 1; j < g.ny; ++j)
      for (Index i = 0; i < g.nx; ++i) interior_faces.push_back(g.face_y(i, j, k));
  for (Index k = 1; k < g.nz; ++k)
    for (Index j = 0; j < g.ny; ++j)
      for (Index i = 0; i < g.nx; ++i) interior_faces.push_back(g.face_z(i, j, k));

  // Trace rows: one per edge lying inside the boundary.
  std::vector<Index> boundary_edges;
  for (Index k = 0; k <= g.nz; ++k)
    for (Index j = 0; j <= g.ny; ++j)
      for (Index i = 0; i < g.nx; ++i)
        if (g.edge_x_on_boundary(i, j, k)) boundary_edges.push_back(g.edge_x(i, j, k));
  for (Index k = 0; k <= g.nz; ++k)
    for (Index j = 0; j < g.ny; ++j)
      for (Index i = 0; i <= g.nx; ++i)
        if (g.edge_y_on_boundary(i, j, k)) boundary_edges.push_back(g.edge_y(i, j, k));
  for (Index k = 0; k < g.nz; ++k)
    for (Index j = 0; j <= g.ny; ++j)
      for (Index i = 0; i <= g.nx; ++i)
        if (g.edge_z_on_boundary(i, j, k)) boundary_edges.push_back(g.edge_z(i, j, k));

  const Index nf = static_cast<Index>(interior_faces.size());
  const Index nb = static_cast<Index>(boundary_edges.size());
  Matrix a1 = Matrix::Zero(nf + nb, g.n_edges());
  for (Index r = 0; r < nf; ++r) a1.row(r) = curl.row(interior_faces[static_cast<size_t>(r)]);
  for (Index r = 0; r < nb; ++r) a1(nf + r, boundary_edges[static_cast<size_t>(r)]) = 1.0;

  return HilbertComplex("grid_dirichlet", BcTag::Dirichlet, std::move(a0), std::move(a1),
                        std::move(geom));
}

HilbertComplex compose_maxwell_complex(const Matrix& b0, const Matrix& b1, const Matrix& b2,
                                       std::optional<H1Geometry> k2_geometry,
                                       std::optional<H1Geometry> k1_geometry) {
  const Index k0 = b0.cols(), k1 = b0.rows(), k2 = b1.rows(), k3 = b2.rows();
  if (b1.cols() != k1) throw DimensionError("leg mismatch: B1 columns != B0 rows");
  if (b2.cols() != k2) throw DimensionError("leg mismatch: B2 columns != B1 rows");

  const ComplexReport leg01 =
      verify_complex(HilbertComplex("leg01", BcTag::Custom, b0, b1));
  if (!leg01.is_exact)
    throw PreconditionError("first leg (B0, B1) is not an exact complex");
  const ComplexReport leg12 =
      verify_complex(HilbertComplex("leg12", BcTag::Custom, b1, b2));
  if (!leg12.is_exact)
    throw PreconditionError("second leg (B1, B2) is not an exact complex");

  Matrix a0 = Matrix::Zero(k2 + k1, k0 + k3);
  a0.topRightCorner(k2, k3) = b2.adjoint();
  a0.bottomLeftCorner(k1, k0) = b0;

  Matrix a1 = Matrix::Zero(k2 + k1, k2 + k1);
  a1.topRightCorner(k2, k1) = b1;
  a1.bottomLeftCorner(k1, k2) = -b1.adjoint();

  std::optional<H1Geometry> geom;
  if (k2_geometry && k1_geometry) {
    if (k2_geometry->dim() != k2 || k1_geometry->dim() != k1)
      throw DimensionError("composed geometry sizes do not match leg spaces");
    H1Geometry merged;
    merged.field_dim = std::max(k2_geometry->field_dim, k1_geometry->field_dim);
    merged.points.resize(k2 + k1, 3);
    merged.points.topRows(k2) = k2_geometry->points;
    merged.points.bottomRows(k1) = k1_geometry->points;
    merged.component = k2_geometry->component;
    merged.component.insert(merged.component.end(), k1_geometry->component.begin(),
                            k1_geometry->component.end());
    merged.leg.assign(static_cast<size_t>(k2), 0);
    merged.leg.insert(merged.leg.end(), static_cast<size_t>(k1), 1);
    geom = std::move(merged);
  }
  return HilbertComplex("composed", BcTag::Composed, std::move(a0), std::move(a1),
                        std::move(geom));
}

HilbertComplex compose_grid_maxwell_complex(std::array<Index, 3> cells) {
  GridOperators ops = make_grid_operators(cells);
  return compose_maxwell_complex(ops.grad, ops.curl, ops.div, ops.face_geometry,
                                 ops.edge_geometry);
}

ComplexReport verify_complex(const HilbertComplex& c) {
  ComplexReport rep;
  if (c.dim_h2() > 0 && c.dim_h0() > 0) {
    rep.composition_norm = max_abs(c.a1() * c.a0());
  } else {
    rep.composition_norm = 0.0;
  }
  rep.is_complex = rep.composition_norm <= kZeroTol;
  rep.rank_a0 = svd_rank(c.a0());
  rep.rank_a1 = svd_rank(c.a1());
  rep.dim_ker_a1 = c.dim_h1() - rep.rank_a1;
  rep.cohomology_dim = rep.dim_ker_a1 - rep.rank_a0;
  rep.is_exact = rep.is_complex && rep.cohomology_dim == 0;
  rep.is_closed = true;
  return rep;
}

HilbertComplex adjoint_complex(const HilbertComplex& c) {
  return HilbertComplex(c.name() + "_adjoint", BcTag::Custom, c.a1().adjoint(),
                        c.a0().adjoint(), c.geometry());
}

}  // namespace nlhconv
