#pragma once

#include <cstdint>
#include <vector>

#include "bangbang/mesh.hpp"
#include "bangbang/types.hpp"

namespace bangbang {

/// One straight piece of the discrete zero level set {w_h = 0}, confined to
/// a single cut triangle.
struct CutSegment {
  Index element = -1;
  int lone_vertex = 0;       // local index of the vertex whose sign differs
  double lone_sign = 1.0;    // sign of w at that vertex
  double t1 = 0.0;           // edge parameter on (lone, lone+1)
  double t2 = 0.0;           // edge parameter on (lone, lone+2)
  Eigen::Vector2d p1;        // physical endpoint on edge (lone, lone+1)
  Eigen::Vector2d p2;        // physical endpoint on edge (lone, lone+2)
  double length = 0.0;
  double gradient_norm = 0.0;  // |grad w| on the element
};

/// Per-element classification of sign(w_h) after tie-breaking.
enum class ElementSign : std::int8_t {
  kNegative = -1,
  kCut = 0,
  kPositive = 1,
  kDegenerate = 2,  // mixed signs but |grad w| below the degeneracy threshold
};

/// Discrete zero level set of a P1 function, with one segment per cut
/// element. Degenerate elements are recorded, never raised as errors.
struct ZeroLevelSet {
  std::vector<CutSegment> segments;
  std::vector<ElementSign> element_sign;
  std::vector<Index> degenerate_elements;
  int boundary_cut_elements = 0;  // cut or degenerate elements touching the boundary

  double total_length() const;
};

/// Surface-measure matrix D(w) with D_ij = 2 * int_{w=0} phi_i phi_j / |grad w| dH^1.
/// Symmetric positive semidefinite; rows of nodes that belong to no cut
/// element are identically zero, and D(w) w = 0.
struct SignDerivativeMatrix {
  SparseMatrix matrix;
  std::vector<Index> degenerate_elements;

  LoadVector apply(const NodalField& v) const { return matrix * v; }
};

/// Nodal values with |w_i| <= 1e-14 * ||w||_inf nudged to +1e-14 * ||w||_inf,
/// making the discrete sign map single-valued and reproducible.
NodalField tie_break(const NodalField& w);

ZeroLevelSet extract_zero_levelset(const TriangularMesh& mesh, const NodalField& w);

/// Load vector b_i = int sign(w_h) phi_i, exact: cut triangles are split
/// along their zero segment into parts of constant sign.
LoadVector integrate_sign(const TriangularMesh& mesh, const NodalField& w);
LoadVector integrate_sign(const TriangularMesh& mesh, const NodalField& w,
                          const ZeroLevelSet& levelset);

/// Exact integral of |w_h| over the domain, by the same splitting.
double l1_norm(const TriangularMesh& mesh, const NodalField& w);
double l1_norm(const TriangularMesh& mesh, const NodalField& w, const ZeroLevelSet& levelset);

/// Assembles D(w); segment integrals use 2-point Gauss quadrature, exact for
/// the quadratic integrand phi_i phi_j.
SignDerivativeMatrix assemble_sign_derivative(const TriangularMesh& mesh, const NodalField& w);
SignDerivativeMatrix assemble_sign_derivative(const TriangularMesh& mesh,
                                              const ZeroLevelSet& levelset);

}  // namespace bangbang
