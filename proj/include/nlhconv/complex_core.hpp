#pragma once

#include "nlhconv/types.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace nlhconv {

enum class BcTag { Trivial, Dirichlet, Neumann, Composed, Custom };

std::string to_string(BcTag tag);
BcTag bc_tag_from_string(const std::string& s);

// Sampling metadata for the middle space H1: one sample point and field
// component per coordinate, so coefficient operators and probe families can be
// built from functions on the unit box.
struct H1Geometry {
  int field_dim = 1;
  Eigen::Matrix<double, Eigen::Dynamic, 3> points;
  std::vector<int> component;  // 0 .. field_dim-1 per H1 coordinate
  std::vector<int> leg;        // composed complexes: 0 or 1; otherwise all 0
  Index dim() const { return points.rows(); }
};

// Two-operator complex H0 --A0--> H1 --A1--> H2 with A1*A0 = 0.
class HilbertComplex {
 public:
  HilbertComplex(std::string name, BcTag bc, Matrix a0, Matrix a1,
                 std::optional<H1Geometry> geometry = std::nullopt);

  const std::string& name() const { return name_; }
  BcTag bc_tag() const { return bc_; }
  Index dim_h0() const { return a0_.cols(); }
  Index dim_h1() const { return a0_.rows(); }
  Index dim_h2() const { return a1_.rows(); }
  const Matrix& a0() const { return a0_; }
  const Matrix& a1() const { return a1_; }
  const std::optional<H1Geometry>& geometry() const { return geometry_; }

 private:
  std::string name_;
  BcTag bc_;
  Matrix a0_, a1_;
  std::optional<H1Geometry> geometry_;
};

struct ComplexReport {
  bool is_complex = false;
  double composition_norm = 0.0;  // max-entry magnitude of A1*A0
  Index rank_a0 = 0;
  Index rank_a1 = 0;
  Index dim_ker_a1 = 0;
  Index cohomology_dim = 0;  // dim ker(A1) - rank(A0)
  bool is_exact = false;
  bool is_closed = true;  // finite dimensional ranges are always closed
};

// H0 = {0}, A0 the zero map, A1 the identity; H1 carries 1D cell geometry.
HilbertComplex build_trivial_complex(Index dim);

// First-difference complex on [0,1] with `cells` uniform cells.
// Dirichlet: H0 = interior node values, A1 = the cell-mean functional.
// Neumann:   H0 = all node values, H2 = {0}.
HilbertComplex build_interval_complex(Index cells, BcTag bc);

// Staggered difference complex (nodes -> edges -> faces) on the unit box.
// Both variants share the full edge space as H1.
// Dirichlet: boundary nodes dropped from H0; A1 stacks the interior-face curl
// on top of one trace row per boundary-tangential edge.
// Neumann: full gradient and full curl.
HilbertComplex build_grid_complex_3d(std::array<Index, 3> cells, BcTag bc);

// All staggered difference operators of a grid, for composing longer chains.
struct GridOperators {
  std::array<Index, 3> cells;
  Matrix grad;  // nodes -> edges
  Matrix curl;  // edges -> faces
  Matrix div;   // faces -> cells
  H1Geometry edge_geometry;
  H1Geometry face_geometry;
};
GridOperators make_grid_operators(std::array<Index, 3> cells);

// Block composition A0 = [[0, B2*], [B0, 0]] : K0+K3 -> K2+K1,
// A1 = [[0, B1], [-B1*, 0]] : K2+K1 -> K2+K1, from three exact legs
// B0 : K0 -> K1, B1 : K1 -> K2, B2 : K2 -> K3.
HilbertComplex compose_maxwell_complex(const Matrix& b0, const Matrix& b1, const Matrix& b2,
                                       std::optional<H1Geometry> k2_geometry = std::nullopt,
                                       std::optional<H1Geometry> k1_geometry = std::nullopt);

// Convenience: compose grad/curl/div of a grid into the block complex above.
HilbertComplex compose_grid_maxwell_complex(std::array<Index, 3> cells);

ComplexReport verify_complex(const HilbertComplex& c);

// The adjoint pair (A1*, A0*): new A0 = A1^H, new A1 = A0^H, same H1.
HilbertComplex adjoint_complex(const HilbertComplex& c);

}  // namespace nlhconv
